import numpy as np
import pytest

from codopt import models, synthesis


@pytest.fixture(scope="module")
def scalar_realization():
    # z - 1: F = [[1]], G = [[1]]
    return models.companion_realization(models.model_for_signal("constant"))


@pytest.fixture(scope="module")
def sine_realization():
    return models.companion_realization(models.model_for_signal("sine", 0.1))


def test_verify_stability_zero_controller_is_marginal(scalar_realization):
    rho = synthesis.verify_robust_stability(
        scalar_realization, np.zeros(1), (0.5, 1.5)
    )
    assert rho == pytest.approx(1.0, abs=1e-15)


def test_verify_stability_matches_brute_force(sine_realization):
    H = np.array([0.2, -0.3])
    interval = (0.3, 2.0)
    rho = synthesis.verify_robust_stability(sine_realization, H, interval, 50)
    expected = max(
        np.abs(np.linalg.eigvals(synthesis.closed_loop(sine_realization, H, l))).max()
        for l in np.linspace(*interval, 50)
    )
    assert rho == pytest.approx(expected)


def test_interval_validation(scalar_realization):
    for bad in ((0.0, 1.0), (-1.0, 1.0), (2.0, 1.0)):
        with pytest.raises(ValueError):
            synthesis.synthesize_lmi(scalar_realization, bad)
    with pytest.raises(ValueError):
        synthesis.verify_robust_stability(scalar_realization, np.zeros(1), (0.5, 1.5), 1)


def test_scalar_minimax_value(scalar_realization):
    """For F = G = 1 and gains in [0.5, 1.5] the best worst-case radius is
    max(|1 + 0.5 H|, |1 + 1.5 H|), minimized at H = -1 with value 0.5."""
    c = synthesis.synthesize(scalar_realization, (0.5, 1.5))
    assert 1.0 - c.margin == pytest.approx(0.5, abs=1e-3)
    assert c.H[0] == pytest.approx(-1.0, abs=5e-3)


def test_lmi_solution_passes_posthoc_vertex_check(sine_realization):
    interval = (0.2, 1.0)
    c = synthesis.synthesize_lmi(sine_realization, interval)
    for l in interval:
        rho = np.abs(
            np.linalg.eigvals(synthesis.closed_loop(sine_realization, c.H, l))
        ).max()
        assert rho < 1.0 - synthesis.STABILITY_HEADROOM
    assert c.margin > synthesis.STABILITY_HEADROOM


def test_degenerate_interval_single_vertex(scalar_realization):
    c = synthesis.synthesize_lmi(scalar_realization, (1.0, 1.0))
    assert np.abs(1.0 + c.H[0]) < 1.0 - synthesis.STABILITY_HEADROOM


def test_fallback_search_stabilizes(sine_realization):
    c = synthesis.fallback_search(sine_realization, (0.2, 1.0))
    rho = synthesis.verify_robust_stability(sine_realization, c.H, (0.2, 1.0))
    assert rho < 1.0
    assert c.margin == pytest.approx(1.0 - rho)


def test_verify_gain_set_brute_force(sine_realization):
    H = np.array([0.2, -0.3])
    gains = np.array([0.5 + 0.1j, 1.0, 1.5 - 0.2j])
    rho = synthesis.verify_gain_set(sine_realization, H, gains)
    expected = max(
        np.abs(
            np.linalg.eigvals(
                sine_realization.F + c * sine_realization.G @ H.reshape(1, -1)
            )
        ).max()
        for c in gains
    )
    assert rho == pytest.approx(expected)


def test_gain_set_synthesis_stabilizes_complex_gains(sine_realization):
    rng = np.random.default_rng(1)
    base = np.linspace(0.2, 1.0, 6)
    gains = base + 1j * rng.uniform(0.0, 0.05, 6)
    c = synthesis.synthesize_for_gains(sine_realization, gains, (0.2, 1.0))
    assert synthesis.verify_gain_set(sine_realization, c.H, gains) < 1.0
    assert (
        synthesis.verify_robust_stability(sine_realization, c.H, (0.2, 1.0))
        < 1.0 - synthesis.STABILITY_HEADROOM
    )


def test_synthesis_failure_raises(scalar_realization):
    # no single H can stabilize 1 + l H for l spanning four orders of magnitude:
    # |1 + l_hi H| < 1 forces |H| < 2/l_hi, leaving 1 + l_lo H ~ 1.
    with pytest.raises(synthesis.SynthesisError):
        synthesis.synthesize_lmi(scalar_realization, (1e-3, 1e4))
