import numpy as np
import pytest

from codopt import consensus, graphs


@pytest.fixture(scope="module")
def W():
    return graphs.metropolis_weights(graphs.make_graph("cycle", 8))


def test_table_formulas(W):
    I = np.eye(8)
    t = consensus.build_triplet("aug_dgm", W, n=3)
    assert np.allclose(t.W1, W @ W)
    assert np.allclose(t.W2sq, (I - W) @ (I - W))
    assert np.allclose(t.W3, 0)
    t = consensus.build_triplet("exact_diffusion", W, n=3)
    assert np.allclose(t.W1, 0.5 * (I + W))
    assert np.allclose(t.W2sq, 0.5 * (I - W))
    assert np.allclose(t.W3, 0)
    t = consensus.build_triplet("diging", W, n=3)
    assert np.allclose(t.W1, I)
    assert np.allclose(t.W2sq, (I - W) @ (I - W))
    assert np.allclose(t.W3, I - W @ W)
    t = consensus.build_triplet("extra", W, n=3)
    assert np.allclose(t.W1, I)
    assert np.allclose(t.W2sq, 0.5 * (I - W))
    assert np.allclose(t.W3, 0.5 * (I - W))


@pytest.mark.parametrize("name", consensus.TRIPLET_NAMES)
def test_validate_all_triplets(W, name):
    report = consensus.validate_triplet(consensus.build_triplet(name, W, n=2))
    assert report.ok, [c for c in report.checks if not c.ok]


def test_validate_flags_bad_triplet(W):
    t = consensus.build_triplet("diging", W, n=2)
    bad = consensus.ConsensusTriplet(
        "broken", t.W1, t.W2sq + 0.1 * np.eye(8), t.W3, n=2
    )
    report = consensus.validate_triplet(bad)
    assert not report.ok
    failing = {c.name for c in report.checks if not c.ok}
    assert "W2sq kills consensus" in failing


def test_build_rejects_bad_inputs(W):
    with pytest.raises(ValueError):
        consensus.build_triplet("nope", W, n=2)
    with pytest.raises(ValueError):
        consensus.build_triplet("diging", W + 0.1, n=2)
    with pytest.raises(ValueError):
        consensus.build_triplet("diging", W, n=0)


def test_lifted_shape_and_spectrum(W):
    t = consensus.build_triplet("extra", W, n=3)
    L = t.lifted("W2sq")
    assert L.shape == (24, 24)
    base = np.linalg.eigvalsh(t.W2sq)
    lifted = np.linalg.eigvalsh(L)
    assert np.allclose(np.sort(np.repeat(base, 3)), np.sort(lifted))


def test_gain_relevant_spectrum_formula(W):
    t = consensus.build_triplet("diging", W, n=2)
    rng = np.random.default_rng(3)
    A_blocks = []
    for _ in range(8):
        B = rng.standard_normal((2, 2))
        A_blocks.append(B @ B.T + np.eye(2))
    mu, tau = 0.2, 1.5
    lo, hi = consensus.gain_relevant_spectrum(t, A_blocks, mu, tau)
    lam = np.concatenate([np.linalg.eigvalsh(A) for A in A_blocks])
    w3 = np.linalg.eigvalsh(t.W3).max()
    w2 = np.linalg.eigvalsh(t.W2sq).max()
    assert lo == pytest.approx(mu * lam.min())
    assert hi == pytest.approx(mu * lam.max() + w3 + tau * w2)


def test_instance_gain_spectrum_conjugate_closed(W):
    t = consensus.build_triplet("diging", W, n=1)
    A_blocks = [np.array([[a]]) for a in np.linspace(1.0, 5.0, 8)]
    gains = consensus.instance_gain_spectrum(t, A_blocks, mu=0.1, tau=1.0)
    # returned gains live in the closed upper half-plane and are deduped
    assert (gains.imag >= -1e-9).all()
    for i, a in enumerate(gains):
        for b in gains[i + 1 :]:
            assert abs(a - b) > 1e-8


def test_instance_gain_spectrum_matches_lifted_closed_loop(W):
    """The union of eig(F + c G H) over the gain set must reproduce the
    spectrum of the fully assembled lifted closed loop."""
    n, N = 1, 8
    t = consensus.build_triplet("diging", W, n=n)
    rng = np.random.default_rng(0)
    A_blocks = [np.array([[a]]) for a in rng.uniform(1.0, 5.0, N)]
    mu, tau = 0.1, 1.0
    # small arbitrary controller; stability is irrelevant for this identity
    F = np.array([[0.0, 1.0], [-1.0, 1.9]])
    G = np.array([[0.0], [1.0]])
    H = np.array([[0.1, -0.1]])

    # assemble C exactly as the gain-set routine describes
    M = np.diag([mu * float(A[0, 0]) for A in A_blocks]) + t.W3
    U, _, _ = np.linalg.svd(np.eye(N) - np.ones((N, N)) / N)
    Q = U[:, : N - 1]
    d = N - 1
    C = np.block([[M, -tau * Q], [Q.T @ t.W2sq, np.zeros((d, d))]])
    lifted = np.kron(F, np.eye(2 * N - 1)) + np.kron(G @ H, C)
    direct = np.linalg.eigvals(lifted)

    per_gain = np.concatenate(
        [np.linalg.eigvals(F + c * (G @ H)) for c in np.linalg.eigvals(C)]
    )
    # multiset comparison: greedily pair each lifted eigenvalue with its
    # nearest unconsumed counterpart
    assert len(direct) == len(per_gain)
    remaining = list(per_gain)
    for lam in direct:
        j = int(np.argmin(np.abs(np.array(remaining) - lam)))
        assert abs(remaining[j] - lam) < 1e-8
        remaining.pop(j)

    # and the exported gain set covers eig(C) up to conjugation
    gains = consensus.instance_gain_spectrum(t, A_blocks, mu, tau)
    evc = np.linalg.eigvals(C)
    for c in evc:
        c = complex(c.real, abs(c.imag))
        assert min(abs(c - g) for g in gains) < 1e-7
