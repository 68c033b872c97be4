import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codopt import graphs, models


def unit_circle_multiset(rng, max_pairs=2, max_mult=2) -> models.RootMultiset:
    """Random conjugate-closed multiset of marginally stable roots."""
    roots = [(complex(1.0), int(rng.integers(1, max_mult + 1)))]
    for _ in range(int(rng.integers(0, max_pairs + 1))):
        theta = float(rng.uniform(0.3, np.pi - 0.3))
        m = int(rng.integers(1, max_mult + 1))
        z = complex(np.cos(theta), np.sin(theta))
        roots.append((z, m))
        roots.append((z.conjugate(), m))
    return models.RootMultiset(tuple(roots))


def test_model_coefficients():
    assert models.model_for_signal("constant").coeffs == (-1.0,)
    assert models.model_for_signal("ramp").coeffs == (1.0, -2.0)
    nu = 0.4
    sine = models.model_for_signal("sine", nu)
    assert sine.coeffs == pytest.approx((1.0, -2.0 * np.cos(nu)))
    sq = models.model_for_signal("sine_squared", nu)
    expect = np.polymul([1.0, -1.0], [1.0, -2.0 * np.cos(2 * nu), 1.0])
    assert np.allclose(sq.full_coeffs(), expect)
    with pytest.raises(ValueError):
        models.model_for_signal("sawtooth")


def test_approx_model_degree_and_roots():
    nu = 5.0
    for L in (1, 2, 3):
        p = models.model_for_signal("approx", nu, L)
        assert p.degree == 2 * L + 1
        roots = np.roots(p.full_coeffs())
        assert np.allclose(np.abs(roots), 1.0, atol=1e-9)
        for ell in range(1, L + 1):
            target = np.exp(1j * ell * nu)
            assert min(abs(roots - target)) < 1e-9
    with pytest.raises(ValueError):
        models.model_for_signal("approx", nu, 0)


def test_polynomial_multiplication():
    p = models.MonicPolynomial((-1.0,))
    q = models.MonicPolynomial((1.0, -1.2))
    prod = p * q
    assert prod.degree == 3
    assert np.allclose(
        prod.full_coeffs(), np.polymul([1.0, -1.0], [1.0, -1.2, 1.0])
    )


def test_companion_realization_structure():
    p = models.MonicPolynomial((0.5, -1.5, 2.0))
    r = models.companion_realization(p)
    assert r.order == 3
    assert np.allclose(r.F[:2, 1:], np.eye(2))
    assert np.allclose(r.F[:2, 0], 0.0)
    assert np.allclose(r.F[2], [-0.5, 1.5, -2.0])
    assert np.allclose(r.G.ravel(), [0.0, 0.0, 1.0])
    # characteristic polynomial of F is p itself
    assert np.allclose(np.poly(r.F), p.full_coeffs())


def test_roots_round_trip_named_models():
    for kind, nu in (("constant", 0.0), ("ramp", 0.0),
                     ("sine", 0.1), ("sine_squared", 0.25)):
        p = models.model_for_signal(kind, nu)
        back = models.poly_from_roots(models.roots_of(p))
        assert np.allclose(back.full_coeffs(), p.full_coeffs(), atol=1e-8)


@settings(deadline=None, max_examples=30)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_roots_round_trip_random_multisets(seed):
    rng = np.random.default_rng(seed)
    ms = unit_circle_multiset(rng)
    p = models.poly_from_roots(ms)
    # wide tolerance: double roots of higher-degree polynomials are only
    # recoverable to ~sqrt(machine precision) by any root finder
    recovered = models.roots_of(p, tol=1e-4)
    assert recovered.total_degree() == ms.total_degree()
    for r, m in ms.roots:
        match = [mm for rr, mm in recovered.roots if abs(rr - r) < 1e-3]
        assert match == [m]


def test_roots_of_detects_multiplicity():
    # (z-1)^2 (z^2 - 2 cos(0.3) z + 1)
    p = models.model_for_signal("ramp") * models.MonicPolynomial(
        (1.0, -2.0 * np.cos(0.3))
    )
    ms = models.roots_of(p)
    mult = {complex(round(r.real, 4), round(r.imag, 4)): m for r, m in ms.roots}
    assert mult[complex(1.0, 0.0)] == 2


def test_union_roots_max_multiplicity():
    a = models.roots_of(models.model_for_signal("ramp"))          # (z-1)^2
    b = models.roots_of(models.model_for_signal("sine_squared", 0.2))  # (z-1)(..)
    u = models.union_roots(a, b)
    # root 1 appears with multiplicity max(2, 1) = 2; pair adds 2 more
    assert u.total_degree() == 4
    one = [m for r, m in u.roots if abs(r - 1.0) < 1e-9]
    assert one == [2]
    # union is idempotent
    assert models.union_roots(u, u).total_degree() == 4


def test_poly_from_roots_rejects_unpaired_complex_root():
    ms = models.RootMultiset(((complex(0.0, 1.0), 1),))
    with pytest.raises(ValueError):
        models.poly_from_roots(ms)


def test_distributed_union_reaches_global_in_diameter_rounds():
    rng = np.random.default_rng(0)
    for trial in range(50):
        N = int(rng.integers(3, 10))
        kind = ("cycle", "path", "star", "erdos_renyi")[trial % 4]
        g = graphs.make_graph(kind, N, p=0.5, seed=trial)
        local = [models.poly_from_roots(unit_circle_multiset(rng, max_mult=1))
                 for _ in range(N)]
        K = graphs.diameter(g)
        result = models.distributed_common_denominator(g, local, K)

        expected = models.roots_of(local[0])
        for p in local[1:]:
            expected = models.union_roots(expected, models.roots_of(p))

        for ms in result:
            assert ms.total_degree() == expected.total_degree()
            for r, m in expected.roots:
                match = [mm for rr, mm in ms.roots if abs(rr - r) < 1e-5]
                assert match == [m]


def test_diameter_minus_one_round_is_insufficient():
    g = graphs.make_graph("path", 4)
    # only agent 0 knows the oscillating root pair
    local = [models.model_for_signal("sine", 0.5)] + [
        models.model_for_signal("constant") for _ in range(3)
    ]
    K = graphs.diameter(g) - 1
    result = models.distributed_common_denominator(g, local, K)
    assert result[3].total_degree() < 3  # far end never saw the pair
    full = models.distributed_common_denominator(g, local, K + 1)
    assert all(ms.total_degree() == 3 for ms in full)


def test_distributed_union_validates_lengths():
    g = graphs.make_graph("cycle", 4)
    with pytest.raises(ValueError):
        models.distributed_common_denominator(
            g, [models.model_for_signal("constant")] * 3, K=1
        )
