"""Exact quantum references: grid diagonalization and spectral correlators.

The Hamiltonian is represented on a uniform position grid with a Fourier
(periodic plane-wave) kinetic operator, which is exponentially accurate for
states that vanish at the box edges.  Kubo-transformed correlators are then
energy-basis double sums; the imaginary-time-discretized transform and the
closed-form harmonic kernels provide independent cross checks.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import BoundaryLeak, QuadratureFailure, SpectralIncomplete
from .model import HARMONIC, potential_eval
from .ringpoly import MOMENTUM, Observable
from .sampler import draw_momenta, sample_ring_positions
from .series import CorrelationSeries
from ._stats import block_standard_error

_DEGENERATE_CUT = 1e-10
_BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    q_min: float
    q_max: float
    n_points: int

    def __post_init__(self):
        if not self.q_min < self.q_max:
            raise ValueError("q_min must be < q_max")
        if self.n_points < 64:
            raise ValueError("n_points must be >= 64")

    @property
    def dq(self):
        return (self.q_max - self.q_min) / self.n_points

    def points(self):
        # periodic box: q_max is identified with q_min and not duplicated
        return self.q_min + self.dq * np.arange(self.n_points)


@dataclass
class EigenSystem:
    """Lowest eigenpairs of the grid Hamiltonian, quadrature-normalized."""

    energies: np.ndarray
    states: np.ndarray  # (n_points, n_retained), sum psi^2 dq = 1
    grid: GridSpec
    mass: float
    hbar: float

    @property
    def n_retained(self):
        return self.energies.size


def _kinetic_matrix(grid, mass, hbar):
    n = grid.n_points
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=grid.dq)
    t = np.fft.ifft(np.fft.fft(np.eye(n), axis=0) * (hbar**2 * k**2 / (2.0 * mass))[:, None], axis=0).real
    return 0.5 * (t + t.T)


def diagonalize(model, grid, n_retained, hbar=1.0):
    """Lowest n_retained eigenpairs of p^2/2m + V on the grid."""
    if n_retained < 1 or n_retained > grid.n_points:
        raise ValueError("n_retained must be in [1, n_points]")
    q = grid.points()
    h = _kinetic_matrix(grid, model.mass, hbar)
    h[np.diag_indices_from(h)] += potential_eval(model, q)
    energies, vecs = np.linalg.eigh(h)
    energies = energies[:n_retained]
    states = vecs[:, :n_retained] / math.sqrt(grid.dq)
    # canonical sign: largest-magnitude component positive
    idx = np.argmax(np.abs(states), axis=0)
    signs = np.sign(states[idx, np.arange(n_retained)])
    states = states * signs[None, :]

    edge = max(np.abs(states[0]).max(), np.abs(states[-1]).max())
    if edge >= _BOUNDARY_TOL:
        raise BoundaryLeak(f"retained eigenstate amplitude {edge:.2e} at the grid edge")
    e_max = float(energies[-1])
    if e_max > 0 and grid.dq > (np.pi / 4.0) * hbar / math.sqrt(2.0 * model.mass * e_max):
        raise ValueError("grid spacing does not resolve the de Broglie scale of the highest retained state")
    return EigenSystem(energies, states, grid, model.mass, hbar)


def position_matrix(eig, f):
    """Matrix elements <n| f(q) |m> by grid quadrature."""
    fq = f(eig.grid.points())
    return (eig.states.T * fq) @ eig.states * eig.grid.dq


def momentum_matrix(eig):
    """Matrix elements <n| p |m> = -i hbar <n| d/dq |m> (spectral derivative)."""
    n = eig.grid.n_points
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=eig.grid.dq)
    dpsi = np.fft.ifft(1j * k[:, None] * np.fft.fft(eig.states, axis=0), axis=0).real
    return -1j * eig.hbar * (eig.states.T @ dpsi) * eig.grid.dq


def observable_matrix(eig, obs):
    if obs.kind == MOMENTUM:
        return momentum_matrix(eig)
    return position_matrix(eig, obs.f)


def thermal_average(eig, f, beta):
    """<f(q)> over the retained thermal density."""
    es = eig.energies - eig.energies[0]
    boltz = np.exp(-beta * es)
    _check_complete(boltz)
    diag = np.diag(position_matrix(eig, f))
    return float((boltz * diag).sum() / boltz.sum())


def _check_complete(boltz):
    if boltz[-1] / boltz.sum() >= 1e-12:
        raise SpectralIncomplete(
            "highest retained state carries thermal weight >= 1e-12; retain more states")


def kubo_weights(energies, beta):
    """Thermal weights (e^{-b En} - e^{-b Em}) / (b (Em - En)), shifted by E0.

    Near-degenerate pairs use the series e^{-b En}(1 - x/2 + x^2/6 - x^3/24),
    x = b (Em - En), removing the 0/0 without branching on exact equality.
    Distant pairs factor out the smaller energy so every exponent is <= 0.
    """
    es = energies - energies[0]
    de = es[None, :] - es[:, None]  # Em - En
    x = beta * de
    bn = np.exp(-beta * es)[:, None]
    near = np.abs(de) < _DEGENERATE_CUT * np.maximum(1.0, np.abs(es)[:, None])
    absx = np.abs(x)
    safe = np.where(near, 1.0, absx)
    bmin = np.exp(-beta * np.minimum(es[None, :], es[:, None]))
    w = np.where(near,
                 bn * (1.0 - x / 2.0 + x**2 / 6.0 - x**3 / 24.0),
                 bmin * -np.expm1(-safe) / safe)
    return w


def exact_kubo_correlator(eig, a_obs, b_obs, beta, times):
    """Spectral evaluation of the Kubo-transformed correlator C_AB(t).

    C(t) = (1/Z) sum_nm w_nm A_nm B_mn exp(i (En - Em) t / hbar); the result
    of a Hermitian pair is real and the imaginary residue is checked.
    """
    times = np.asarray(times, dtype=float)
    es = eig.energies - eig.energies[0]
    boltz = np.exp(-beta * es)
    _check_complete(boltz)
    z = boltz.sum()
    a_mat = observable_matrix(eig, a_obs)
    b_mat = observable_matrix(eig, b_obs)
    g = kubo_weights(eig.energies, beta) * a_mat * b_mat.T / z
    # element (n, m) pairs A_nm B_mn with <m|B(t)|n> = B_mn e^{i(Em - En)t/hbar}
    de = (es[None, :] - es[:, None]).ravel() / eig.hbar
    g = g.ravel()

    vals = np.empty(times.size, dtype=complex)
    chunk = 512
    for lo in range(0, times.size, chunk):
        hi = min(lo + chunk, times.size)
        vals[lo:hi] = np.exp(1j * np.outer(times[lo:hi], de)) @ g
    residue = np.abs(vals.imag).max() if vals.size else 0.0
    if residue >= 1e-10 * max(1.0, np.abs(vals.real).max()):
        raise RuntimeError(f"imaginary residue {residue:.2e} of the spectral sum")
    meta = {"method": "oracle", "A": a_obs.label, "B": b_obs.label, "beta": beta}
    return CorrelationSeries(times, vals.real, np.zeros_like(times), meta)


def discrete_kubo_transform(eig, a_obs, beta, n_slices):
    """Trapezoid-discretized Kubo transform of A in the retained eigenbasis.

    K = (1/2N)(A e^{-bH} + e^{-bH} A) + (1/N) sum_{j=1}^{N-1}
        e^{-b j H / N} A e^{-b (1 - j/N) H}
    """
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    e = eig.energies
    a_mat = observable_matrix(eig, a_obs)
    bn = np.exp(-beta * e)
    k = 0.5 / n_slices * (a_mat * bn[None, :] + bn[:, None] * a_mat)
    for j in range(1, n_slices):
        lam = beta * j / n_slices
        k = k + (np.exp(-lam * e)[:, None] * a_mat * np.exp(-(beta - lam) * e)[None, :]) / n_slices
    return k


def discrete_kubo_correlator(eig, a_obs, b_obs, beta, n_slices, times):
    """Pair the discretized transform with exact real-time evolution of B."""
    times = np.asarray(times, dtype=float)
    es = eig.energies - eig.energies[0]
    boltz = np.exp(-beta * es)
    _check_complete(boltz)
    z = np.exp(-beta * eig.energies).sum()
    k_mat = discrete_kubo_transform(eig, a_obs, beta, n_slices)
    b_mat = observable_matrix(eig, b_obs)
    g = (k_mat * b_mat.T / z).ravel()
    de = (es[None, :] - es[:, None]).ravel() / eig.hbar
    vals = np.empty(times.size, dtype=complex)
    chunk = 512
    for lo in range(0, times.size, chunk):
        hi = min(lo + chunk, times.size)
        vals[lo:hi] = np.exp(1j * np.outer(times[lo:hi], de)) @ g
    meta = {"method": "discrete_kubo", "A": a_obs.label, "B": b_obs.label,
            "beta": beta, "n_slices": n_slices}
    return CorrelationSeries(times, vals.real, np.zeros_like(times), meta)


# ----------------------------------------------------------------------
# closed-form harmonic kernels

def _require_harmonic(model):
    if model.kind != HARMONIC:
        raise ValueError("closed-form kernel is defined for the harmonic model only")


def harmonic_j_kernel(x_k, p_mid, eta, model, thermo):
    """Gaussian-damped phase factor of the harmonic path kernel.

    exp(-beta m w^2 eta^2 / (8N)) * exp(i eta p_mid / hbar), where p_mid is
    the cyclic bond-midpoint momentum supplied by the caller.  The bead
    position does not enter for a harmonic well.
    """
    _require_harmonic(model)
    del x_k
    damp = math.exp(-thermo.beta * model.mass * model.omega**2 * eta**2 / (8.0 * thermo.n_beads))
    return damp * complex(math.cos(eta * p_mid / thermo.hbar), math.sin(eta * p_mid / thermo.hbar))


def harmonic_swarm_trace(x, p, t, b, model, thermo, tol=1e-8):
    """Bead-averaged Gaussian swarm value of a position observable at time t.

    Each bead contributes the expectation of B under a Gaussian of variance
    beta hbar^2 sin^2(w t) / (4 m N) centered on the classically evolved
    bead position; at sin(w t) = 0 the Gaussian is a delta (analytic limit).
    """
    _require_harmonic(model)
    f = b.f if isinstance(b, Observable) else b
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    n = x.size
    w, m = model.omega, model.mass
    s, c = math.sin(w * t), math.cos(w * t)
    p_mid = 0.5 * (p + np.roll(p, -1))
    centers = x * c + p_mid * s / (m * w)
    if s == 0.0:
        return float(np.mean(f(centers)))
    sigma = math.sqrt(thermo.beta * thermo.hbar**2 * s**2 / (4.0 * m * n))
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # convergence trouble surfaces via abserr
        for mu in centers:
            def integrand(xx, _mu=mu):
                return f(xx) * math.exp(-0.5 * ((xx - _mu) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))

            val, err = quad(integrand, mu - 8.0 * sigma, mu + 8.0 * sigma,
                            epsabs=1e-12, epsrel=1e-12, limit=200)
            if err > tol:
                raise QuadratureFailure(f"quadrature error estimate {err:.2e} exceeds {tol:.0e}")
            total += val
    return total / n


def harmonic_caq_reference(model, thermo, a_obs, times, cfg, workers=None):
    """Monte Carlo closed-form reference for C_Aq(t) in a harmonic well.

    Positions are sampled from R(x), bead momenta from the Maxwell
    distribution; the position centroid then evolves classically from the
    bond-midpoint momenta and is correlated against A0 at time zero.
    """
    _require_harmonic(model)
    times = np.asarray(times, dtype=float)
    x = sample_ring_positions(model, thermo, cfg, workers=workers)
    p = draw_momenta(thermo, model, cfg, "bead")
    a0 = np.mean(a_obs.f(x), axis=1)
    qc = x.mean(axis=1)
    pc_mid = (0.5 * (p + np.roll(p, -1, axis=1))).mean(axis=1)
    w, m = model.omega, model.mass
    x0_t = qc[:, None] * np.cos(w * times)[None, :] + (pc_mid / (m * w))[:, None] * np.sin(w * times)[None, :]
    prod = a0[:, None] * x0_t
    vals = prod.mean(axis=0)
    errs = block_standard_error(prod)
    meta = {"method": "caq_reference", "A": a_obs.label, "B": "q",
            "beta": thermo.beta, "n_beads": thermo.n_beads, "seed": cfg.seed}
    return CorrelationSeries(times, vals, errs, meta)


@dataclass
class CentroidDensityReference:
    q_grid: np.ndarray
    q_density: np.ndarray
    q_variance: float
    p_variance: float


def centroid_density_reference(model, thermo, grid):
    """Analytic harmonic phase-space centroid density.

    Gaussian in q_c with variance 1/(beta m w^2) (the harmonic centroid
    potential is the bare well up to a constant), Gaussian in p_c with
    variance m/beta.
    """
    _require_harmonic(model)
    grid = np.asarray(grid, dtype=float)
    var_q = 1.0 / (thermo.beta * model.mass * model.omega**2)
    rho = np.exp(-0.5 * grid**2 / var_q) / math.sqrt(2.0 * math.pi * var_q)
    return CentroidDensityReference(grid, rho, var_q, model.mass / thermo.beta)
