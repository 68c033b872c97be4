"""Stabilizing output-injection row H for the internal-model loop.

The closed loop to stabilize is F + l G H for every gain l in a known
interval. Synthesis solves a two-vertex semidefinite feasibility problem
(quadratic stability over the gain polytope); an eigenvalue grid pass
independently certifies the result, and a derivative-free pattern search
is available when the conic solver fails or is unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import Realization

STABILITY_HEADROOM = 1e-4
DEFAULT_GRID = 200
_LMI_SHIFT = 1e-6


class SynthesisError(RuntimeError):
    """Controller synthesis failed (infeasible LMI or no stable point)."""


@dataclass(frozen=True)
class Controller:
    H: np.ndarray  # row vector, length m
    interval: tuple[float, float]
    margin: float  # 1 - max spectral radius on the verification grid


def closed_loop(r: Realization, H: np.ndarray, l: float) -> np.ndarray:
    return r.F + l * r.G @ H.reshape(1, -1)


def verify_robust_stability(
    r: Realization,
    H: np.ndarray,
    interval: tuple[float, float],
    grid_points: int = DEFAULT_GRID,
) -> float:
    """Max spectral radius of F + l G H over a gain grid incl. endpoints."""
    if grid_points < 2:
        raise ValueError("grid needs at least the two endpoints")
    gains = np.linspace(interval[0], interval[1], grid_points)
    return max(
        float(np.abs(np.linalg.eigvals(closed_loop(r, H, l))).max()) for l in gains
    )


def _check_interval(interval: tuple[float, float]):
    l_lo, l_hi = interval
    if not 0 < l_lo <= l_hi:
        raise ValueError(
            f"gain interval must satisfy 0 < l_lo <= l_hi, got [{l_lo}, {l_hi}]"
        )


def synthesize_lmi(
    r: Realization,
    interval: tuple[float, float],
    decay: float = 1.0,
    grid_points: int = DEFAULT_GRID,
) -> Controller:
    """Solve the two-vertex LMI feasibility problem and return H = R S^-1.

    decay < 1 certifies the tighter contraction rho(F + l G H) <= decay by
    scaling the closed-loop block. The grid verification runs regardless of
    solver success and the result is rejected if the margin is not positive.
    """
    import cvxpy as cp

    _check_interval(interval)
    if not 0 < decay <= 1.0:
        raise ValueError(f"decay must be in (0, 1], got {decay}")
    m = r.order
    S = cp.Variable((m, m))
    R = cp.Variable((1, m))
    constraints = []
    for l in interval if interval[0] < interval[1] else (interval[0],):
        P = cp.Variable((m, m), symmetric=True)
        top = (r.F @ S + l * r.G @ R) / decay
        block = cp.bmat([[P, top], [top.T, S + S.T - P]])
        constraints += [P >> _LMI_SHIFT * np.eye(m), block >> _LMI_SHIFT * np.eye(2 * m)]
    problem = cp.Problem(cp.Minimize(0), constraints)
    try:
        problem.solve(solver=cp.CLARABEL)
    except cp.SolverError:
        problem.solve(solver=cp.SCS, verbose=False)
    if problem.status not in ("optimal", "optimal_inaccurate") or S.value is None:
        raise SynthesisError(f"vertex LMIs infeasible (solver status {problem.status})")
    H = (R.value @ np.linalg.inv(S.value)).ravel()
    rho = verify_robust_stability(r, H, interval, grid_points)
    margin = 1.0 - rho
    if margin <= STABILITY_HEADROOM:
        raise SynthesisError(
            f"LMI solution failed grid verification: max radius {rho:.6f}"
        )
    return Controller(H, tuple(interval), margin)


def fallback_search(
    r: Realization,
    interval: tuple[float, float],
    budget: int = 2000,
    grid_points: int = DEFAULT_GRID,
) -> Controller:
    """Pattern search on max grid radius, seeded at deadbeat placement for
    the midpoint gain (last companion row cancelled exactly)."""
    _check_interval(interval)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    m = r.order
    l_mid = 0.5 * (interval[0] + interval[1])
    # F + l G H has last row (-p + l H); H0 = p / l_mid zeroes it
    H = -r.F[m - 1, :].copy() / l_mid
    best = verify_robust_stability(r, H, interval, grid_points)
    evals = 1
    step = 0.5 * max(1.0, np.abs(H).max())
    while evals < budget and step > 1e-12:
        improved = False
        for i in range(m):
            for sign in (+1.0, -1.0):
                if evals >= budget:
                    break
                trial = H.copy()
                trial[i] += sign * step
                rho = verify_robust_stability(r, trial, interval, grid_points)
                evals += 1
                if rho < best:
                    H, best = trial, rho
                    improved = True
        if not improved:
            step *= 0.5
    margin = 1.0 - best
    if margin <= 0:
        raise SynthesisError(
            f"pattern search exhausted budget {budget} without a stable point "
            f"(best max radius {best:.6f})"
        )
    return Controller(H, tuple(interval), margin)


def synthesize(
    r: Realization,
    interval: tuple[float, float],
    grid_points: int = DEFAULT_GRID,
    rate_bisection_iters: int = 10,
) -> Controller:
    """LMI synthesis with a bisection on the certified contraction rate,
    falling back to pattern search if every LMI attempt fails."""
    best: Controller | None = None
    try:
        best = synthesize_lmi(r, interval, decay=1.0, grid_points=grid_points)
    except SynthesisError:
        pass
    if best is not None:
        lo, hi = 0.1, 1.0
        for _ in range(rate_bisection_iters):
            mid = 0.5 * (lo + hi)
            try:
                cand = synthesize_lmi(r, interval, decay=mid, grid_points=grid_points)
            except SynthesisError:
                lo = mid
                continue
            hi = mid
            if cand.margin > best.margin:
                best = cand
        return best
    return fallback_search(r, interval, grid_points=grid_points)


def verify_gain_set(r: Realization, H: np.ndarray, gains: np.ndarray) -> float:
    """Max spectral radius of F + c G H over a set of complex gains."""
    GH = r.G @ H.reshape(1, -1)
    return max(float(np.abs(np.linalg.eigvals(r.F + c * GH)).max()) for c in gains)


def synthesize_for_gains(
    r: Realization,
    gains: np.ndarray,
    interval: tuple[float, float],
    grid_points: int = DEFAULT_GRID,
    maxfev: int = 1200,
) -> Controller:
    """Minimax synthesis against an explicit complex gain set.

    Minimizes the worst spectral radius over the gain set while keeping
    the real-interval grid radius below 1 - 2e-4 (the certificate the
    robustness check demands). Deterministic Nelder-Mead restarts from
    deadbeat-inspired seeds plus the vertex-LMI solution when feasible.
    The reported margin is against the worse of the two verifications.
    """
    from scipy.optimize import minimize

    _check_interval(interval)
    real_grid = np.linspace(interval[0], interval[1], grid_points)
    cap = 1.0 - 2.0 * STABILITY_HEADROOM
    m = r.order

    def real_rho(H: np.ndarray) -> float:
        GH = r.G @ H.reshape(1, -1)
        return max(
            float(np.abs(np.linalg.eigvals(r.F + l * GH)).max()) for l in real_grid
        )

    def objective(h: np.ndarray) -> float:
        rho = verify_gain_set(r, h, gains)
        return rho + 100.0 * max(0.0, real_rho(h) - cap)

    l_mid = 0.5 * (interval[0] + interval[1])
    seeds = [-r.F[m - 1, :] / l_mid * s - 0.01 for s in (0.05, 0.15, 0.4, 0.8)]
    try:
        seeds.append(synthesize_lmi(r, interval, grid_points=grid_points).H)
    except SynthesisError:
        pass

    best_val, best_H = np.inf, None
    for H0 in seeds:
        res = minimize(
            objective,
            np.asarray(H0, dtype=float),
            method="Nelder-Mead",
            options=dict(maxfev=maxfev, xatol=1e-10, fatol=1e-12),
        )
        if res.fun < best_val:
            best_val, best_H = res.fun, res.x
    if best_H is None:
        raise SynthesisError("no synthesis seed produced a candidate")
    rho = max(verify_gain_set(r, best_H, gains), real_rho(best_H))
    margin = 1.0 - rho
    if margin <= 0:
        raise SynthesisError(
            f"gain-set synthesis found no stable controller (max radius {rho:.6f})"
        )
    return Controller(np.asarray(best_H), tuple(interval), margin)
