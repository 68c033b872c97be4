"""Internal models of the cost variation: annihilating polynomials, their
roots, the distributed common-denominator routine, and the companion-form
realization (F, G) driven by the controller."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

ROOT_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class MonicPolynomial:
    """z^m + p_{m-1} z^{m-1} + ... + p_0, stored as (p_0, ..., p_{m-1})."""

    coeffs: tuple[float, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def full_coeffs(self) -> np.ndarray:
        """Descending-power coefficients including the leading 1."""
        return np.concatenate(([1.0], np.asarray(self.coeffs)[::-1]))

    def __mul__(self, other: "MonicPolynomial") -> "MonicPolynomial":
        prod = np.polymul(self.full_coeffs(), other.full_coeffs())
        return MonicPolynomial(tuple(prod[1:][::-1]))


@dataclass(frozen=True)
class RootMultiset:
    """Roots with multiplicities; conjugate-closed for real polynomials."""

    roots: tuple[tuple[complex, int], ...]

    def total_degree(self) -> int:
        return sum(m for _, m in self.roots)

    def as_list(self) -> list[complex]:
        out: list[complex] = []
        for r, m in self.roots:
            out.extend([r] * m)
        return out


@dataclass(frozen=True)
class Realization:
    """Companion pair: F with unit superdiagonal and -coeffs last row,
    G = e_m."""

    F: np.ndarray
    G: np.ndarray

    @property
    def order(self) -> int:
        return self.F.shape[0]


def model_for_signal(kind: str, nu: float = 0.0, L: int = 1) -> MonicPolynomial:
    """Annihilating denominator for the named signal family.

    approx(L, nu) is the truncated harmonic model
    (z-1) * prod_{l=1..L} (z^2 - 2 cos(l nu) z + 1).
    """
    step = MonicPolynomial((-1.0,))  # z - 1
    if kind == "constant":
        return step
    if kind == "ramp":
        return step * step
    if kind == "sine":
        return MonicPolynomial((1.0, -2.0 * np.cos(nu)))
    if kind == "sine_squared":
        return step * MonicPolynomial((1.0, -2.0 * np.cos(2.0 * nu)))
    if kind == "approx":
        if L < 1:
            raise ValueError(f"harmonic order L must be >= 1, got {L}")
        p = step
        for ell in range(1, L + 1):
            p = p * MonicPolynomial((1.0, -2.0 * np.cos(ell * nu)))
        return p
    raise ValueError(f"unknown signal kind {kind!r}")


def _cluster(values: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    groups: list[tuple[complex, int]] = []
    for v in values:
        for idx, (c, m) in enumerate(groups):
            if abs(v - c) <= tol * max(1.0, abs(c)):
                # running mean keeps the representative centered
                groups[idx] = ((c * m + v) / (m + 1), m + 1)
                break
        else:
            groups.append((complex(v), 1))
    return groups


def _conjugate_pair(groups: list[tuple[complex, int]], tol: float):
    """Symmetrize near-real roots and conjugate pairs in place."""
    out: list[tuple[complex, int]] = []
    used = [False] * len(groups)
    for i, (r, m) in enumerate(groups):
        if used[i]:
            continue
        if abs(r.imag) <= tol * max(1.0, abs(r)):
            out.append((complex(r.real), m))
            used[i] = True
            continue
        for j in range(i + 1, len(groups)):
            rj, mj = groups[j]
            if not used[j] and abs(rj - r.conjugate()) <= tol * max(1.0, abs(r)):
                avg = 0.5 * (r + rj.conjugate())
                out.append((avg, m))
                out.append((avg.conjugate(), mj))
                used[i] = used[j] = True
                break
        else:
            raise ValueError(f"root {r} has no conjugate partner")
    return out


def roots_of(p: MonicPolynomial, tol: float = ROOT_MATCH_TOL) -> RootMultiset:
    """Companion-matrix eigenvalues clustered into multiplicities."""
    if p.degree == 0:
        return RootMultiset(())
    raw = np.roots(p.full_coeffs())
    groups = _cluster(raw, tol)
    return RootMultiset(tuple(_conjugate_pair(groups, tol)))


def poly_from_roots(r: RootMultiset, imag_tol: float = 1e-9) -> MonicPolynomial:
    """Expand a conjugate-closed root multiset into a real monic polynomial."""
    coeffs = np.array([1.0 + 0.0j])
    for root in r.as_list():
        coeffs = np.polymul(coeffs, [1.0, -root])
    if np.abs(coeffs.imag).max() > imag_tol * max(1.0, np.abs(coeffs).max()):
        raise ValueError("root multiset is not conjugate-closed")
    real = coeffs.real
    return MonicPolynomial(tuple(real[1:][::-1]))


def union_roots(
    a: RootMultiset, b: RootMultiset, tol: float = ROOT_MATCH_TOL
) -> RootMultiset:
    """Per-root max multiplicity: the LCM of the two denominators."""
    merged: list[tuple[complex, int]] = list(a.roots)
    for rb, mb in b.roots:
        for idx, (ra, ma) in enumerate(merged):
            if abs(rb - ra) <= tol * max(1.0, abs(ra)):
                merged[idx] = (ra, max(ma, mb))
                break
        else:
            merged.append((rb, mb))
    return RootMultiset(tuple(merged))


def distributed_common_denominator(
    g: Graph, local_polys: list[MonicPolynomial], K: int
) -> list[RootMultiset]:
    """K synchronous rounds of neighbor exchange and root union.

    With K >= diameter(g) every agent ends up holding the global union.
    Smaller K leaves valid partial unions.
    """
    if len(local_polys) != g.node_count:
        raise ValueError("one local polynomial per agent required")
    state = [roots_of(p) for p in local_polys]
    for _ in range(K):
        new_state = []
        for i in range(g.node_count):
            acc = state[i]
            for j in g.neighbor_lists[i]:
                acc = union_roots(acc, state[j])
            new_state.append(acc)
        state = new_state
    return state


def companion_realization(p: MonicPolynomial) -> Realization:
    """Controllable canonical form of the monic polynomial."""
    m = p.degree
    if m < 1:
        raise ValueError("realization needs degree >= 1")
    F = np.zeros((m, m))
    F[: m - 1, 1:] = np.eye(m - 1)
    F[m - 1, :] = -np.asarray(p.coeffs)
    G = np.zeros((m, 1))
    G[m - 1, 0] = 1.0
    return Realization(F, G)
