"""Consensus matrix triplets parameterizing the gradient-tracking family.

Each triplet (W1, W2^2, W3) is built from a doubly stochastic mixing
matrix W. Only the square W2^2 is ever stored or applied; the dynamics
run in coordinates where the square root W2 never has to be materialized.
All three matrices are Kronecker lifts M (x) I_n of N x N bases, so the
bases are what we keep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import check_doubly_stochastic

TRIPLET_NAMES = ("aug_dgm", "exact_diffusion", "diging", "extra")


@dataclass(frozen=True)
class ConsensusTriplet:
    """N x N base matrices of a triplet; lift with kron(base, I_n)."""

    name: str
    W1: np.ndarray
    W2sq: np.ndarray
    W3: np.ndarray
    n: int

    @property
    def N(self) -> int:
        return self.W1.shape[0]

    def lifted(self, which: str) -> np.ndarray:
        """Full nN x nN matrix, for validation and debugging dumps."""
        base = {"W1": self.W1, "W2sq": self.W2sq, "W3": self.W3}[which]
        return np.kron(base, np.eye(self.n))


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class TripletReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(CheckResult(name, bool(ok), detail))


def build_triplet(name: str, W: np.ndarray, n: int) -> ConsensusTriplet:
    """Instantiate one of the four named triplets from mixing matrix W."""
    if not check_doubly_stochastic(W, tol=1e-10):
        raise ValueError("W must be symmetric doubly stochastic")
    if n < 1:
        raise ValueError(f"per-agent dimension must be positive, got {n}")
    N = W.shape[0]
    I = np.eye(N)
    Z = np.zeros((N, N))
    if name == "aug_dgm":
        t = (W @ W, (I - W) @ (I - W), Z)
    elif name == "exact_diffusion":
        t = (0.5 * (I + W), 0.5 * (I - W), Z)
    elif name == "diging":
        t = (I, (I - W) @ (I - W), I - W @ W)
    elif name == "extra":
        t = (I, 0.5 * (I - W), 0.5 * (I - W))
    else:
        raise ValueError(f"unknown triplet {name!r}, expected one of {TRIPLET_NAMES}")
    return ConsensusTriplet(name, *t, n=n)


def validate_triplet(t: ConsensusTriplet, tol: float = 1e-9) -> TripletReport:
    """Check the null-space / stochasticity conditions; never raises."""
    report = TripletReport()
    N = t.N

    sym = np.abs(t.W2sq - t.W2sq.T).max()
    eigs2 = np.linalg.eigvalsh(0.5 * (t.W2sq + t.W2sq.T))
    report.add("W2sq symmetric", sym < tol, f"max asymmetry {sym:.2e}")
    report.add("W2sq PSD", eigs2.min() > -tol, f"min eig {eigs2.min():.2e}")
    # null space must be exactly the consensus line: eig 0 simple, rest > 0
    consensus_res = np.abs(t.W2sq @ np.ones(N)).max()
    rank = int((eigs2 > 1e-10).sum())
    report.add(
        "W2sq kills consensus", consensus_res < tol, f"residual {consensus_res:.2e}"
    )
    report.add("W2sq rank N-1", rank == N - 1, f"rank {rank}, expected {N - 1}")

    if np.abs(t.W3).max() < tol:
        report.add("W3 zero or consensus-annihilating", True, "W3 = 0")
    else:
        sym3 = np.abs(t.W3 - t.W3.T).max()
        eigs3 = np.linalg.eigvalsh(0.5 * (t.W3 + t.W3.T))
        res3 = np.abs(t.W3 @ np.ones(N)).max()
        report.add(
            "W3 zero or consensus-annihilating",
            sym3 < tol and eigs3.min() > -tol and res3 < tol,
            f"asym {sym3:.2e}, min eig {eigs3.min():.2e}, residual {res3:.2e}",
        )

    ones = np.ones(N)
    ds = max(
        np.abs(t.W1 @ ones - ones).max(),
        np.abs(ones @ t.W1 - ones).max(),
    )
    report.add("W1 doubly stochastic", ds < tol, f"max row/col defect {ds:.2e}")
    return report


def gain_relevant_spectrum(
    t: ConsensusTriplet,
    A_blocks: list[np.ndarray],
    mu: float,
    tau: float,
) -> tuple[float, float]:
    """Conservative gain interval [l_lo, l_hi] seen by the controller loop.

    Weyl sum bound: l_lo = mu * min eig of blkdiag(A_i), l_hi adds the
    largest eigenvalues of W3 and tau * W2sq on top of mu * max eig.
    """
    if mu <= 0 or tau <= 0:
        raise ValueError("mu and tau must be positive")
    lam_min = min(float(np.linalg.eigvalsh(A).min()) for A in A_blocks)
    lam_max = max(float(np.linalg.eigvalsh(A).max()) for A in A_blocks)
    if lam_min <= 0:
        raise ValueError(f"Hessian blocks must be PD, min eig {lam_min:.3e}")
    # kron(M, I_n) has the same spectrum as M
    w3_max = float(np.linalg.eigvalsh(0.5 * (t.W3 + t.W3.T)).max())
    w2_max = float(np.linalg.eigvalsh(0.5 * (t.W2sq + t.W2sq.T)).max())
    if w3_max < 0 or w2_max < 0:
        raise ValueError("consensus matrices must be PSD")
    l_lo = mu * lam_min
    l_hi = mu * lam_max + w3_max + tau * w2_max
    return l_lo, l_hi


def instance_gain_spectrum(
    t: ConsensusTriplet,
    A_blocks: list[np.ndarray],
    mu: float,
    tau: float,
    dedupe_tol: float = 1e-7,
) -> np.ndarray:
    """Exact complex gain set of the coupled primal-dual loop.

    The lifted closed loop factors as kron(F, I) + kron(G H, C) with
    C = [[mu blkdiag(A_i) + W3, -tau Q], [Q' W2sq, 0]], Q an orthonormal
    basis of the dual subspace (consensus direction removed, where the
    dual is never driven). Its spectrum is therefore the union over
    eigenvalues c of C of eig(F + c G H), so eig(C) is the exact gain set
    the controller must stabilize. Conjugates are dropped (real F, G, H
    give mirrored spectra) and near-duplicates merged.
    """
    if mu <= 0 or tau <= 0:
        raise ValueError("mu and tau must be positive")
    n, N = t.n, t.N
    M = np.zeros((n * N, n * N))
    for i, A in enumerate(A_blocks):
        M[i * n : (i + 1) * n, i * n : (i + 1) * n] = mu * A
    M += np.kron(t.W3, np.eye(n))
    W2L = np.kron(t.W2sq, np.eye(n))
    # orthonormal basis of the all-ones complement, lifted blockwise
    U, _, _ = np.linalg.svd(np.eye(N) - np.ones((N, N)) / N)
    Q = np.kron(U[:, : N - 1], np.eye(n))
    d = n * (N - 1)
    C = np.block([[M, -tau * Q], [Q.T @ W2L, np.zeros((d, d))]])
    ev = np.linalg.eigvals(C)
    ev = ev[ev.imag >= -1e-12]
    kept: list[complex] = []
    for c in ev:
        if not any(abs(c - o) <= dedupe_tol * max(1.0, abs(o)) for o in kept):
            kept.append(complex(c))
    return np.array(kept)
