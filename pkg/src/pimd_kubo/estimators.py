"""Correlation-function estimators, spectra and error bars.

Correlators are assembled from fresh equilibrium initial conditions, one
microcanonical trajectory per sample; origin averaging along a single long
trajectory is deliberately avoided because RPMD trajectories do not resample
the thermal ensemble.  Accumulations reduce over full, deterministically
ordered arrays, so results are identical for any work partitioning.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _streams
from ._stats import block_standard_error
from .dynamics import _cmd_propagate, _propagate_batch
from .errors import GridTooCoarse, InsufficientSamples, UnsupportedObservable
from .ringpoly import MOMENTUM, POSITION
from .sampler import draw_momenta, resolve_workers, sample_ring_positions
from .series import CorrelationSeries

CENTROID_DELTA = "centroid_delta"
POSITION_DELTA = "position_delta"

_TRAJ_CHUNK = 1024  # trajectories per propagation chunk (fixed; not tied to threads)


@dataclass(frozen=True)
class FilterSpec:
    """One of the two built-in delta filters of the preaveraged formalism."""

    kind: str

    def __post_init__(self):
        if self.kind not in (CENTROID_DELTA, POSITION_DELTA):
            raise ValueError(f"unknown filter kind {self.kind!r}")


def block_error(samples, n_blocks=16):
    """Blocked standard error of the mean, per time point for 2D input."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] < 2 * n_blocks:
        raise InsufficientSamples(f"need at least {2 * n_blocks} samples")
    return block_standard_error(samples, n_blocks)


def _model_meta(model, thermo):
    meta = {"model": model.kind, "mass": model.mass, "beta": thermo.beta,
            "n_beads": thermo.n_beads, "hbar": thermo.hbar}
    if model.kind in ("harmonic", "mildly_anharmonic"):
        meta["omega"] = model.omega
    return meta


def _initial_values(obs, positions, momenta):
    if obs.kind == POSITION:
        return obs.f(positions).mean(axis=1)
    if obs.kind == MOMENTUM:
        return momenta.mean(axis=1)
    raise ValueError(f"unknown observable kind {obs.kind!r}")


def _chunks(n):
    return [(lo, min(lo + _TRAJ_CHUNK, n)) for lo in range(0, n, _TRAJ_CHUNK)]


def _rpmd_correlator_from_ic(x0, p0, model, thermo, integrator_cfg, a_obs, b_obs,
                             workers=None):
    n = x0.shape[0]
    a0 = _initial_values(a_obs, x0, p0)
    b_t = np.empty((n, integrator_cfg.n_steps + 1))

    def job(span):
        lo, hi = span
        rec, _, _ = _propagate_batch(x0[lo:hi], p0[lo:hi], model, thermo,
                                     integrator_cfg.dt, integrator_cfg.n_steps, [b_obs])
        b_t[lo:hi] = rec[0].T

    spans = _chunks(n)
    nw = resolve_workers(workers)
    if nw <= 1 or len(spans) <= 1:
        for s in spans:
            job(s)
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            list(pool.map(job, spans))
    prod = a0[:, None] * b_t
    return prod.mean(axis=0), block_error(prod), prod


def rpmd_kubo_correlator(model, thermo, sampler_cfg, integrator_cfg, a_obs, b_obs,
                         momentum_convention="bead", workers=None):
    """Kubo-transformed correlator from RPMD trajectories.

    Initial positions are sampled from the ring density, initial momenta
    from the Maxwell distribution (bead or bond-midpoint convention); the
    estimator is the ensemble mean of A0(0) * B0(t) with blocked errors.
    """
    if sampler_cfg.n_samples < 32:
        raise InsufficientSamples("need at least 32 trajectories")
    from .dynamics import _check_accuracy

    _check_accuracy(integrator_cfg, model)
    x0 = sample_ring_positions(model, thermo, sampler_cfg, workers=workers)
    p0 = draw_momenta(thermo, model, sampler_cfg, momentum_convention)
    values, errors, _ = _rpmd_correlator_from_ic(x0, p0, model, thermo, integrator_cfg,
                                                 a_obs, b_obs, workers)
    meta = _model_meta(model, thermo)
    meta.update({"method": "rpmd", "A": a_obs.label, "B": b_obs.label,
                 "seed": sampler_cfg.seed, "dt": integrator_cfg.dt,
                 "momentum_convention": momentum_convention})
    return CorrelationSeries(integrator_cfg.times(), values, errors, meta)


def cmd_kubo_correlator(model, thermo, table, sampler_cfg, integrator_cfg, a_obs, b_obs,
                        workers=None):
    """Kubo-transformed correlator from centroid dynamics on a force table.

    A must be linear (the position centroid q or the momentum); centroid
    positions are the centroids of an unconstrained ring ensemble, centroid
    momenta are exact Gaussians of variance m/beta.
    """
    if not (a_obs.kind == MOMENTUM or (a_obs.kind == POSITION and a_obs.label == "q")):
        raise UnsupportedObservable("centroid dynamics is defined for linear A only (q or p)")
    if sampler_cfg.n_samples < 32:
        raise InsufficientSamples("need at least 32 trajectories")
    x0 = sample_ring_positions(model, thermo, sampler_cfg, workers=workers)
    qc0 = x0.mean(axis=1)
    gen = _streams.stream(sampler_cfg.seed, _streams.CMD_MOMENTA, 0)
    pc0 = math.sqrt(model.mass / thermo.beta) * gen.standard_normal(qc0.size)

    qs, ps = _cmd_propagate(qc0, pc0, table, model.mass, integrator_cfg.dt,
                            integrator_cfg.n_steps)
    a0 = qc0 if a_obs.kind == POSITION else pc0
    if b_obs.kind == POSITION:
        b_t = b_obs.f(qs).T
    else:
        b_t = ps.T
    prod = a0[:, None] * b_t
    meta = _model_meta(model, thermo)
    meta.update({"method": "cmd", "A": a_obs.label, "B": b_obs.label,
                 "seed": sampler_cfg.seed, "dt": integrator_cfg.dt})
    return CorrelationSeries(integrator_cfg.times(), prod.mean(axis=0),
                             block_error(prod), meta)


# ----------------------------------------------------------------------
# derivative route to momentum correlators

_D_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0])
_D_EDGE = {
    0: np.array([-25.0, 48.0, -36.0, 16.0, -3.0]),
    1: np.array([-3.0, -10.0, 18.0, -6.0, 1.0]),
}


def kubo_momentum_correlator_via_derivative(series, mass):
    """C_Ap(t) = m dC_Aq/dt via 4th-order finite differences.

    One-sided stencils at the grid ends; standard errors propagate through
    the stencil coefficients assuming independent points.
    """
    n = len(series)
    if n < 5:
        raise GridTooCoarse("need at least 5 time points")
    h = series.dt
    omega = series.metadata.get("omega")
    if omega is not None and h * omega > 0.2:
        raise GridTooCoarse(f"dt * omega = {h * omega:.3f} exceeds 0.2")
    f = series.values
    se = series.std_errors
    d = np.empty(n)
    dse = np.empty(n)

    def stencil(coeffs, idx):
        return coeffs @ f[idx] / (12.0 * h), math.sqrt(((coeffs**2) @ (se[idx] ** 2))) / (12.0 * h)

    for j, c in _D_EDGE.items():
        d[j], dse[j] = stencil(c, np.arange(5))
        d[n - 1 - j], dse[n - 1 - j] = stencil(-c[::-1], np.arange(n - 5, n))
    core = np.arange(2, n - 2)
    d[core] = (f[core - 2] - 8.0 * f[core - 1] + 8.0 * f[core + 1] - f[core + 2]) / (12.0 * h)
    dse[core] = np.sqrt(se[core - 2] ** 2 + 64.0 * se[core - 1] ** 2
                        + 64.0 * se[core + 1] ** 2 + se[core + 2] ** 2) / (12.0 * h)
    meta = dict(series.metadata)
    meta["B"] = "p"
    meta["derived"] = "time derivative of " + str(series.metadata.get("B", "?"))
    return CorrelationSeries(series.times, mass * d, mass * dse, meta)


# ----------------------------------------------------------------------
# filtered densities and spectra

@dataclass
class DensityEstimate:
    centers: np.ndarray
    density: np.ndarray
    bin_width: float
    metadata: dict


def filtered_density_estimate(filter_spec, model, thermo, sampler_cfg, grid=None,
                              workers=None):
    """Histogram estimate of the filtered density rho_0 on a uniform grid.

    CentroidDelta bins the position centroid (the momentum factor is the
    analytic Gaussian of variance m/beta and is reported in the metadata);
    PositionDelta bins the pooled per-bead marginal of the ring density.
    With grid=None the bin width follows Scott's rule.
    """
    ens = sample_ring_positions(model, thermo, sampler_cfg, workers=workers)
    if filter_spec.kind == CENTROID_DELTA:
        data = ens.mean(axis=1)
    else:
        data = ens.ravel()
    if data.size < 32:
        raise InsufficientSamples("need at least 32 samples")
    if grid is None:
        width = 3.49 * data.std() * data.size ** (-1.0 / 3.0)
        lo = data.mean() - 5.0 * data.std()
        nbins = max(8, int(math.ceil((data.max() + width - lo) / width)))
        edges = lo + width * np.arange(nbins + 1)
    else:
        edges = np.asarray(grid, dtype=float)
        width = float(edges[1] - edges[0])
    counts, edges = np.histogram(data, bins=edges)
    density = counts / (counts.sum() * width)
    meta = _model_meta(model, thermo)
    meta.update({"filter": filter_spec.kind, "bin_rule": "scott" if grid is None else "given",
                 "bin_width": width, "n_samples": int(data.size)})
    if filter_spec.kind == CENTROID_DELTA:
        meta["p_variance"] = model.mass / thermo.beta
    return DensityEstimate(0.5 * (edges[:-1] + edges[1:]), density, width, meta)


def spectrum(series, window="none"):
    """Cosine transform of the even-extended series; returns (omega, |F|).

    window="hann" tapers the series to zero at the last time before the even
    extension; intensities are reported as magnitudes, so they are >= 0.
    """
    if window not in ("none", "hann"):
        raise ValueError("window must be 'none' or 'hann'")
    v = series.values.copy()
    n = v.size
    if n < 2:
        raise ValueError("series too short for a spectrum")
    dt = series.dt
    if window == "hann":
        v *= np.cos(0.5 * np.pi * np.arange(n) / (n - 1)) ** 2
    ext = np.concatenate([v, v[-2:0:-1]])
    amp = np.abs(np.fft.rfft(ext)) * dt
    omega = 2.0 * np.pi * np.fft.rfftfreq(ext.size, d=dt)
    return omega, amp
