"""Multi-agent simulation of the structured (internal-model) algorithm and
the unstructured gradient-tracking baseline.

Both run in substituted dual coordinates: the dual internal state and dual
output are stored pre-multiplied by W2, so every product in the update
uses only entries of W2^2 (graph-sparse) and the matrix square root W2 is
never formed. The substitution leaves the primal iterates unchanged and
starts the dual trajectory inside range(W2), as the exact-tracking result
requires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .consensus import ConsensusTriplet
from .costs import aggregate_gradient, optimal_point
from .models import Realization

DIVERGENCE_LIMIT = 1e12


class DivergenceError(RuntimeError):
    """A state norm crossed the divergence threshold."""

    def __init__(self, step: int, norm: float):
        super().__init__(f"state norm {norm:.3e} at step {step} exceeds "
                         f"{DIVERGENCE_LIMIT:.0e}")
        self.step = step


@dataclass
class StructuredState:
    """Stacked per-agent states. Xi/Om are (N, m, n): agent, model block,
    coordinate. Y is the primal output, U the substituted dual output."""

    Xi: np.ndarray
    Om: np.ndarray
    Y: np.ndarray
    U: np.ndarray

    @classmethod
    def zeros(cls, N: int, m: int, n: int) -> "StructuredState":
        return cls(
            Xi=np.zeros((N, m, n)),
            Om=np.zeros((N, m, n)),
            Y=np.zeros((N, n)),
            U=np.zeros((N, n)),
        )


@dataclass
class UnstructuredState:
    X: np.ndarray  # (N, n) primal iterates
    V: np.ndarray  # (N, n) substituted duals v = W2 w

    @classmethod
    def zeros(cls, N: int, n: int) -> "UnstructuredState":
        return cls(X=np.zeros((N, n)), V=np.zeros((N, n)))


@dataclass
class SimulationTrace:
    k: np.ndarray
    epsilon: np.ndarray
    consensus_err: np.ndarray
    track_err: np.ndarray  # nan where no optimal-trajectory oracle exists

    def __len__(self) -> int:
        return len(self.k)

    def asymptotic_error(self) -> float:
        """Max epsilon over the last four fifths of the horizon."""
        T = len(self.k)
        return float(self.epsilon[T - int(np.ceil(4 * T / 5)):].max())


def _guard(step: int, *arrays: np.ndarray):
    for a in arrays:
        norm = float(np.abs(a).max(initial=0.0))
        if not np.isfinite(norm) or norm > DIVERGENCE_LIMIT:
            raise DivergenceError(step, norm)


def structured_step(
    state: StructuredState,
    costs,
    triplet: ConsensusTriplet,
    realization: Realization,
    H: np.ndarray,
    mu: float,
    tau: float,
    k: int,
) -> tuple[StructuredState, np.ndarray]:
    """One synchronous round: combine, local gradients, internal-model
    update, new outputs. Returns (new state, combined primal iterates x)."""
    F, G = realization.F, realization.G.ravel()
    Y, U = state.Y, state.U

    X = triplet.W1 @ Y  # combine: x_i = sum_j a_ij y_j
    W3Y = triplet.W3 @ Y
    grad = np.stack([costs[i].gradient(k, Y[i]) for i in range(len(costs))])
    g_x = mu * grad + W3Y + U
    g_w = triplet.W2sq @ Y

    Xi = np.einsum("ab,ibn->ian", F, state.Xi) + G[None, :, None] * g_x[:, None, :]
    Om = np.einsum("ab,ibn->ian", F, state.Om) + G[None, :, None] * g_w[:, None, :]
    # The dual recursion lives in range(W2): its consensus component is
    # never driven and must stay exactly zero. Re-project to stop round-off
    # leakage from exciting that undamped (and, for mis-specified models,
    # unstable) internal-model mode.
    Om -= Om.mean(axis=0, keepdims=True)
    Y_new = np.einsum("a,ian->in", H, Xi)
    U_new = -tau * np.einsum("a,ian->in", H, Om)
    _guard(k, Xi, Om, Y_new, U_new)
    return StructuredState(Xi, Om, Y_new, U_new), X


def unstructured_step(
    state: UnstructuredState,
    costs,
    triplet: ConsensusTriplet,
    mu: float,
    k: int,
) -> UnstructuredState:
    """Gradient descent-ascent on the online Lagrangian, unit step-size."""
    X, V = state.X, state.V
    grad = np.stack([costs[i].gradient(k, X[i]) for i in range(len(costs))])
    Z = X - (mu * grad + V + triplet.W3 @ X)
    V_new = V + triplet.W2sq @ Z
    X_new = triplet.W1 @ Z
    _guard(k, Z, V_new, X_new)
    return UnstructuredState(X_new, V_new)


@dataclass
class SimulationProblem:
    """Everything one run needs besides the horizon."""

    costs: list
    triplet: ConsensusTriplet
    realization: Realization | None = None
    H: np.ndarray | None = None
    mu: float = 0.05
    tau: float = 1.0
    quadratic: bool = True

    @property
    def N(self) -> int:
        return len(self.costs)

    @property
    def n(self) -> int:
        return self.costs[0].dim


def _metrics(problem: SimulationProblem, k: int, X: np.ndarray):
    x_bar = X.mean(axis=0)
    eps = float(np.linalg.norm(aggregate_gradient(problem.costs, k, x_bar)) ** 2)
    cons = float(((X - x_bar) ** 2).sum())
    if problem.quadratic:
        track = float(np.linalg.norm(x_bar - optimal_point(problem.costs, k)))
    else:
        track = np.nan
    return eps, cons, track


def run_structured(problem: SimulationProblem, T: int) -> SimulationTrace:
    """Simulate the internal-model algorithm from the all-zero start."""
    if T < 1:
        raise ValueError("horizon must be >= 1")
    if problem.realization is None or problem.H is None:
        raise ValueError("structured run needs a realization and controller")
    m = problem.realization.order
    state = StructuredState.zeros(problem.N, m, problem.n)
    return _run(problem, T, state, structured=True)


def run_unstructured(problem: SimulationProblem, T: int) -> SimulationTrace:
    """Simulate the gradient-tracking baseline from the all-zero start."""
    if T < 1:
        raise ValueError("horizon must be >= 1")
    state = UnstructuredState.zeros(problem.N, problem.n)
    return _run(problem, T, state, structured=False)


def _run(problem, T, state, structured):
    eps = np.empty(T)
    cons = np.empty(T)
    track = np.empty(T)
    for k in range(T):
        if structured:
            state, X = structured_step(
                state,
                problem.costs,
                problem.triplet,
                problem.realization,
                problem.H,
                problem.mu,
                problem.tau,
                k,
            )
        else:
            X = state.X
            state = unstructured_step(state, problem.costs, problem.triplet,
                                      problem.mu, k)
        eps[k], cons[k], track[k] = _metrics(problem, k, X)
    return SimulationTrace(np.arange(T), eps, cons, track)
