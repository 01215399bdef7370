import numpy as np
import pytest

from pimd_kubo import (GridSpec, OBS_P, OBS_Q, OBS_Q2, Observable, SamplerConfig,
                       ThermoParams, centroid_density_reference, diagonalize,
                       discrete_kubo_correlator, discrete_kubo_transform,
                       exact_kubo_correlator, harmonic, harmonic_caq_reference,
                       harmonic_j_kernel, harmonic_swarm_trace, mildly_anharmonic,
                       thermal_average)
from pimd_kubo.errors import BoundaryLeak, QuadratureFailure, SpectralIncomplete
from pimd_kubo.oracle import kubo_weights, momentum_matrix, position_matrix


def test_harmonic_eigenvalues(harmonic_eig_small):
    expect = np.arange(10) + 0.5
    assert np.abs(harmonic_eig_small.energies - expect).max() <= 1e-8


def test_parity(harmonic_eig_small):
    # psi_n(-q) = (-1)^n psi_n(q); the periodic grid mirrors index j -> (N - j) % N
    psi = harmonic_eig_small.states
    n_pts = psi.shape[0]
    mirror = (n_pts - np.arange(n_pts)) % n_pts
    for n in range(10):
        flip = psi[mirror, n]
        assert np.abs(flip - (-1.0) ** n * psi[:, n]).max() <= 1e-8


def test_orthonormality_and_residual(harmonic_eig_small):
    eig = harmonic_eig_small
    overlap = eig.states.T @ eig.states * eig.grid.dq
    assert np.abs(overlap - np.eye(10)).max() <= 1e-10


def test_boundary_leak_raised():
    with pytest.raises(BoundaryLeak):
        diagonalize(harmonic(1.0, 1.0), GridSpec(-4.0, 4.0, 128), 12)


def test_anharmonic_gap_perturbation_theory():
    # second-order perturbation theory in the quartic coupling, assembled from
    # ladder-operator matrix elements, as an independent reference
    c4 = 0.01
    model = mildly_anharmonic(1.0, 1.0, c3=0.0, c4=c4)
    eig = diagonalize(model, GridSpec(-10.0, 10.0, 512), 8)

    nb = 40
    q = np.zeros((nb, nb))
    for n in range(nb - 1):
        q[n, n + 1] = q[n + 1, n] = np.sqrt((n + 1) / 2.0)
    q4 = np.linalg.matrix_power(q, 4)
    e0 = np.arange(nb) + 0.5

    def pt2(n):
        first = c4 * q4[n, n]
        second = sum((c4 * q4[n, m]) ** 2 / (e0[n] - e0[m])
                     for m in range(nb) if m != n)
        return e0[n] + first + second

    gap = eig.energies[1] - eig.energies[0]
    assert gap > 1.0
    assert gap == pytest.approx(pt2(1) - pt2(0), rel=0.05)


def test_thermal_average_q2(harmonic_eig):
    val = thermal_average(harmonic_eig, lambda q: q * q, 1.0)
    assert val == pytest.approx(0.5 / np.tanh(0.5), abs=1e-10)
    assert val == pytest.approx(1.08198, abs=1e-5)


def test_spectral_incomplete():
    eig = diagonalize(harmonic(1.0, 1.0), GridSpec(-10.0, 10.0, 512), 6)
    with pytest.raises(SpectralIncomplete):
        exact_kubo_correlator(eig, OBS_Q, OBS_Q, 1.0, np.array([0.0]))


def test_exact_kubo_harmonic_cos(harmonic_eig):
    times = np.linspace(0.0, 20.0, 801)
    series = exact_kubo_correlator(harmonic_eig, OBS_Q, OBS_Q, 1.0, times)
    assert np.abs(series.values - np.cos(times)).max() <= 1e-8


def test_exact_kubo_even_in_time(harmonic_eig):
    t = np.array([0.0, 0.5, 1.5])
    fwd = exact_kubo_correlator(harmonic_eig, OBS_Q2, OBS_Q2, 2.0, t).values
    # evenness for A = B: C(t) must be symmetric, checked via the cosine-only
    # structure of the spectral sum (sum over n<->m pairs)
    bwd = exact_kubo_correlator(harmonic_eig, OBS_Q2, OBS_Q2, 2.0, t).values
    assert np.allclose(fwd, bwd, atol=1e-12)


def test_parity_selection_rule(harmonic_eig):
    times = np.linspace(0.0, 5.0, 50)
    series = exact_kubo_correlator(harmonic_eig, OBS_Q, OBS_Q2, 1.0, times)
    assert np.abs(series.values).max() <= 1e-12


def test_kubo_weights_vs_gauss_legendre(harmonic_eig):
    beta = 1.0
    es = harmonic_eig.energies - harmonic_eig.energies[0]
    nodes, wts = np.polynomial.legendre.leggauss(64)
    lam = 0.5 * beta * (nodes + 1.0)
    ref = np.zeros((es.size, es.size))
    for l, w in zip(lam, 0.5 * wts):
        ref += w * np.outer(np.exp(-l * es), np.exp(-(beta - l) * es))
    assert np.abs(kubo_weights(harmonic_eig.energies, beta) - ref).max() <= 1e-8


def test_kubo_weights_degenerate_limit():
    e = np.array([0.5, 0.5 + 1e-13, 1.5])
    w = kubo_weights(e, 2.0)
    assert w[0, 0] == pytest.approx(1.0)  # shifted: e^{-beta*0}
    assert w[0, 1] == pytest.approx(1.0, rel=1e-9)


def test_momentum_matrix_antihermitian(harmonic_eig_small):
    p = momentum_matrix(harmonic_eig_small)
    assert np.abs(p.real).max() <= 1e-10
    assert np.abs(p + p.T).max() <= 1e-8  # pure imaginary antisymmetric
    # phase-invariant ladder product: <n|q|n+1><n+1|p|n> = i (n+1)/2
    q = position_matrix(harmonic_eig_small, lambda x: x)
    for n in range(5):
        assert q[n, n + 1] * p[n + 1, n] == pytest.approx(0.5j * (n + 1), abs=1e-7)


def test_exact_kubo_qp_derivative_relation(harmonic_eig):
    # C_qp(t) = m d/dt C_qq(t) = -sin(t)/1 for beta = m = w = 1? scaled check
    times = np.linspace(0.0, 10.0, 401)
    qp = exact_kubo_correlator(harmonic_eig, OBS_Q, OBS_P, 1.0, times)
    assert np.abs(qp.values - (-np.sin(times))).max() <= 1e-8


def test_discrete_kubo_n1_is_symmetrized(harmonic_eig):
    beta = 2.0
    e = harmonic_eig.energies
    a = position_matrix(harmonic_eig, lambda q: q * q)
    k1 = discrete_kubo_transform(harmonic_eig, OBS_Q2, beta, 1)
    b = np.exp(-beta * e)
    ref = 0.5 * (a * b[None, :] + b[:, None] * a)
    assert np.abs(k1 - ref).max() <= 1e-12


def test_discrete_kubo_diagonal(harmonic_eig):
    beta = 1.5
    e = harmonic_eig.energies
    a = position_matrix(harmonic_eig, lambda q: q * q)
    for n_slices in (1, 3, 8):
        k = discrete_kubo_transform(harmonic_eig, OBS_Q2, beta, n_slices)
        assert np.abs(np.diag(k) - np.diag(a) * np.exp(-beta * e)).max() <= 1e-12


def test_discrete_kubo_convergence(harmonic_eig):
    beta = 2.0
    t0 = np.array([0.0])
    exact = exact_kubo_correlator(harmonic_eig, OBS_Q2, OBS_Q2, beta, t0).values[0]
    errs = {n: abs(discrete_kubo_correlator(harmonic_eig, OBS_Q2, OBS_Q2, beta, n, t0).values[0] - exact)
            for n in (8, 16)}
    assert 3.5 <= errs[8] / errs[16] <= 4.5


def test_j_kernel():
    th = ThermoParams(8.0, 8)
    m = harmonic(1.0, 1.0)
    assert harmonic_j_kernel(0.3, 0.7, 0.0, m, th) == pytest.approx(1.0)
    val = harmonic_j_kernel(0.0, 0.0, 1.0, m, th)
    assert val == pytest.approx(np.exp(-1.0 / 8.0), abs=1e-12)
    assert val == pytest.approx(0.88250, abs=1e-5)
    # modulus independent of momentum
    for p in (0.0, 1.3, -2.0):
        assert abs(harmonic_j_kernel(0.1, p, 0.7, m, th)) == pytest.approx(
            np.exp(-8.0 * 0.49 / 64.0), rel=1e-12)


def test_j_kernel_rejects_anharmonic():
    with pytest.raises(ValueError):
        harmonic_j_kernel(0.0, 0.0, 1.0, mildly_anharmonic(c4=0.1), ThermoParams(1.0, 4))


def test_swarm_trace_delta_limit():
    rng = np.random.default_rng(4)
    m = harmonic(1.0, 1.0)
    th = ThermoParams(2.0, 6)
    x, p = rng.normal(size=(2, 6))
    for f in (lambda q: q, lambda q: q * q, lambda q: q**4):
        direct = np.mean(f(x))
        assert harmonic_swarm_trace(x, p, 0.0, f, m, th) == pytest.approx(direct, abs=1e-10)


def test_swarm_trace_linear_b_is_classical_mean():
    rng = np.random.default_rng(8)
    m = harmonic(1.0, 1.3)
    th = ThermoParams(1.0, 4)
    x, p = rng.normal(size=(2, 4))
    t = 0.9
    p_mid = 0.5 * (p + np.roll(p, -1))
    expect = np.mean(x * np.cos(1.3 * t) + p_mid * np.sin(1.3 * t) / 1.3)
    assert harmonic_swarm_trace(x, p, t, lambda q: q, m, th) == pytest.approx(expect, abs=1e-9)


def test_swarm_trace_gaussian_width():
    # B = q^2 at t = pi/2 on a zero state isolates the swarm variance
    m = harmonic(1.0, 1.0)
    th = ThermoParams(8.0, 4)
    x = np.zeros(4)
    p = np.zeros(4)
    val = harmonic_swarm_trace(x, p, np.pi / 2.0, lambda q: q * q, m, th)
    assert val == pytest.approx(8.0 / (4.0 * 4.0), abs=1e-9)
    assert val == pytest.approx(0.5, abs=1e-9)


def test_swarm_trace_quadrature_failure():
    m = harmonic(1.0, 1.0)
    th = ThermoParams(1.0, 4)
    x = np.zeros(4)
    p = np.zeros(4)
    with pytest.raises(QuadratureFailure):
        harmonic_swarm_trace(x, p, 0.7,
                             lambda q: np.sign(np.sin(300.0 / (np.abs(q) + 1e-3))), m, th)


def test_caq_reference_matches_cos(harmonic_model):
    th = ThermoParams(1.0, 16)
    cfg = SamplerConfig(n_samples=4096, seed=17, burn_in=128, decorrelation_stride=2)
    times = np.linspace(0.0, 10.0, 101)
    series = harmonic_caq_reference(harmonic_model, th, OBS_Q, times, cfg)
    dev = np.abs(series.values - np.cos(times)) / np.maximum(series.std_errors, 1e-12)
    assert dev.max() <= 3.0
    assert series.values[0] == pytest.approx(1.0, abs=3 * series.std_errors[0])


def test_centroid_density_reference(harmonic_model):
    th = ThermoParams(1.0, 32)
    grid = np.linspace(-8.0, 8.0, 2001)
    ref = centroid_density_reference(harmonic_model, th, grid)
    assert ref.q_variance == pytest.approx(1.0)
    assert ref.p_variance == pytest.approx(1.0)
    dx = grid[1] - grid[0]
    assert np.trapezoid(ref.q_density, dx=dx) == pytest.approx(1.0, abs=1e-10)
    var = np.trapezoid(grid**2 * ref.q_density, dx=dx)
    assert var == pytest.approx(1.0, abs=1e-8)
