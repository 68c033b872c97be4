"""Time-varying local costs: quadratics with signal-driven linear terms,
the logistic-perturbed non-quadratic cost, and the centralized
optimal-trajectory oracle used by the tracking metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIGNAL_KINDS = ("constant", "ramp", "sine", "sine_squared")


@dataclass(frozen=True)
class SignalGenerator:
    """Deterministic b_k sequence. direction scales the scalar waveform."""

    kind: str
    direction: np.ndarray
    nu: float = 0.0

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")

    def __call__(self, k: int) -> np.ndarray:
        if self.kind == "constant":
            s = 1.0
        elif self.kind == "ramp":
            s = float(k)
        elif self.kind == "sine":
            s = np.sin(self.nu * k)
        else:
            s = np.sin(self.nu * k) ** 2
        return s * self.direction


def _sigmoid(t: float) -> float:
    # branch on sign so exp never overflows
    if t >= 0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


def _log1pexp(t: float) -> float:
    if t >= 0:
        return t + np.log1p(np.exp(-t))
    return np.log1p(np.exp(t))


@dataclass(frozen=True)
class QuadraticAgentCost:
    """f_k(x) = x'Ax/2 + <b_k, x> with A symmetric PD."""

    A: np.ndarray
    signal: SignalGenerator
    eig_bounds: tuple[float, float] = field(init=False)

    def __post_init__(self):
        eigs = np.linalg.eigvalsh(self.A)
        if eigs.min() <= 0:
            raise ValueError(f"A must be PD, min eig {eigs.min():.3e}")
        object.__setattr__(self, "eig_bounds", (float(eigs.min()), float(eigs.max())))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def value(self, k: int, x: np.ndarray) -> float:
        return 0.5 * x @ self.A @ x + self.signal(k) @ x

    def gradient(self, k: int, x: np.ndarray) -> np.ndarray:
        return self.A @ x + self.signal(k)

    def hessian_bounds(self) -> tuple[float, float]:
        return self.eig_bounds


@dataclass(frozen=True)
class NonQuadraticAgentCost:
    """Quadratic plus sin(nu k) * log(1 + exp(c'x)) with ||c|| = 1."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    nu: float

    def __post_init__(self):
        if abs(np.linalg.norm(self.c) - 1.0) > 1e-9:
            raise ValueError("c must be a unit vector")
        eigs = np.linalg.eigvalsh(self.A)
        if eigs.min() <= 0:
            raise ValueError(f"A must be PD, min eig {eigs.min():.3e}")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def value(self, k: int, x: np.ndarray) -> float:
        t = float(self.c @ x)
        return 0.5 * x @ self.A @ x + self.b @ x + np.sin(self.nu * k) * _log1pexp(t)

    def gradient(self, k: int, x: np.ndarray) -> np.ndarray:
        t = float(self.c @ x)
        return self.A @ x + self.b + np.sin(self.nu * k) * _sigmoid(t) * self.c

    def hessian_bounds(self) -> tuple[float, float]:
        # logistic term contributes sin(nu k) sigma'(c'x) cc', |.| <= 1/4
        eigs = np.linalg.eigvalsh(self.A)
        return float(eigs.min()) - 0.25, float(eigs.max()) + 0.25


def aggregate_gradient(costs, k: int, x: np.ndarray) -> np.ndarray:
    """Sum of the agents' gradients at a common point x."""
    return sum(c.gradient(k, x) for c in costs)


def optimal_point(costs: list[QuadraticAgentCost], k: int) -> np.ndarray:
    """Minimizer of the aggregate quadratic cost at time k."""
    A_sum = sum(c.A for c in costs)
    b_sum = sum(c.signal(k) for c in costs)
    return np.linalg.solve(A_sum, -b_sum)


def random_spd(n: int, lam_lo: float, lam_hi: float, seed) -> np.ndarray:
    """V diag(L) V' with V a random orthogonal matrix, L uniform in range."""
    if not 0 < lam_lo <= lam_hi:
        raise ValueError(f"need 0 < lam_lo <= lam_hi, got [{lam_lo}, {lam_hi}]")
    rng = np.random.default_rng(seed)
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(lam_lo, lam_hi, size=n)
    return (V * lam) @ V.T


def finite_difference_check(cost, k: int, x: np.ndarray, h: float = 1e-5) -> float:
    """Max componentwise relative error of the analytic gradient against
    central differences of the scalar cost."""
    if h <= 0:
        raise ValueError("h must be positive")
    g = cost.gradient(k, x)
    num = np.zeros_like(x, dtype=float)
    for i in range(len(x)):
        e = np.zeros_like(x, dtype=float)
        e[i] = h
        num[i] = (cost.value(k, x + e) - cost.value(k, x - e)) / (2 * h)
    scale = np.maximum(np.abs(g), 1.0)
    return float(np.max(np.abs(num - g) / scale))
