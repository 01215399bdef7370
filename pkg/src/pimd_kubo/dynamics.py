"""Time propagation: RPMD, CMD on a tabulated centroid force, classical limit.

RPMD uses the split-operator scheme: half potential kick, exact rotation of
the free ring polymer in normal modes, half potential kick.  The rotation is
exact for the spring term, so internal-mode stiffness never limits the time
step; accuracy is governed by dt times the physical frequency.  The zero
mode receives no spring force, only drift, so the centroid decouples from
the springs identically.
"""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridEscape
from .model import potential_eval
from .ringpoly import (MOMENTUM, POSITION, RingPolymerState, free_rp_frequencies,
                       normal_mode_transform)
from .sampler import _grad_fn, sample_ring_positions_constrained
from ._stats import block_standard_error


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be > 0")
        if self.n_steps < 1:
            raise ValueError("n_steps must be > 0")

    def times(self):
        return self.dt * np.arange(self.n_steps + 1)


def _check_accuracy(cfg, model):
    if model.kind in ("harmonic", "mildly_anharmonic") and cfg.dt * model.omega >= 0.5:
        raise ValueError("dt * omega must stay below 0.5 for the split-operator scheme")


def _rotation_factors(thermo, model, dt):
    w = free_rp_frequencies(thermo)
    cosw = np.cos(w * dt)
    sin_over = np.empty_like(w)
    msin = np.empty_like(w)
    nz = w > 0
    sin_over[nz] = np.sin(w[nz] * dt) / (model.mass * w[nz])
    sin_over[~nz] = dt / model.mass
    msin[nz] = model.mass * w[nz] * np.sin(w[nz] * dt)
    msin[~nz] = 0.0
    return cosw, sin_over, msin


def _propagate_batch(x, p, model, thermo, dt, n_steps, record):
    """Evolve (n_traj, N) arrays, recording centroid observables every step.

    record is a list of Observable; returns (recorded (n_obs, n_steps+1,
    n_traj), final positions, final momenta).
    """
    grad = _grad_fn(model)
    cosw, sin_over, msin = _rotation_factors(thermo, model, dt)
    sqrt_n = math.sqrt(thermo.n_beads)

    a = normal_mode_transform(x, "forward")
    b = normal_mode_transform(p, "forward")
    x_cur = x.copy()
    f_nm = normal_mode_transform(-grad(x_cur), "forward")

    out = np.empty((len(record), n_steps + 1, x.shape[0]))

    def snapshot(step):
        for i, obs in enumerate(record):
            if obs.kind == POSITION:
                out[i, step] = obs.f(x_cur).mean(axis=1)
            elif obs.kind == MOMENTUM:
                out[i, step] = b[:, 0] / sqrt_n
            else:
                raise ValueError(f"unknown observable kind {obs.kind!r}")

    snapshot(0)
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        b += half * f_nm
        a, b = a * cosw + b * sin_over, b * cosw - a * msin
        x_cur = normal_mode_transform(a, "inverse")
        f_nm = normal_mode_transform(-grad(x_cur), "forward")
        b += half * f_nm
        snapshot(step)
    return out, x_cur, normal_mode_transform(b, "inverse")


def rpmd_step(state, model, thermo, dt):
    """One split-operator step: half kick, exact free-ring rotation, half kick."""
    _, x1, p1 = _propagate_batch(state.positions[None, :], state.momenta[None, :],
                                 model, thermo, dt, 1, [])
    return RingPolymerState(x1[0], p1[0])


def free_ring_polymer_step(state, thermo, model, dt):
    """Exact free-ring-polymer rotation alone (the kick-free substep)."""
    cosw, sin_over, msin = _rotation_factors(thermo, model, dt)
    a = normal_mode_transform(state.positions, "forward")
    b = normal_mode_transform(state.momenta, "forward")
    a, b = a * cosw + b * sin_over, b * cosw - a * msin
    return RingPolymerState(normal_mode_transform(a, "inverse"),
                            normal_mode_transform(b, "inverse"))


def rpmd_trajectory(initial, model, thermo, cfg, record):
    """Propagate one ring polymer, recording centroid observables per step.

    Returns (times, {label: series}) with series of length n_steps + 1.
    """
    _check_accuracy(cfg, model)
    out, _, _ = _propagate_batch(initial.positions[None, :], initial.momenta[None, :],
                                 model, thermo, cfg.dt, cfg.n_steps, record)
    return cfg.times(), {obs.label: out[i, :, 0] for i, obs in enumerate(record)}


def ring_hamiltonian(state, model, thermo):
    """Conserved quantity of the RPMD flow: kinetic + spring + potential."""
    from .ringpoly import spring_energy

    kin = float(np.sum(state.momenta**2)) / (2.0 * model.mass)
    pot = float(np.sum(potential_eval(model, state.positions)))
    return kin + spring_energy(state, thermo, model) + pot


def classical_trajectory(q0, p0, model, cfg):
    """Velocity Verlet on V; shares the RPMD code path at N = 1 bit for bit."""
    from .model import ThermoParams
    from .ringpoly import OBS_P, OBS_Q

    _check_accuracy(cfg, model)
    thermo = ThermoParams(beta=1.0, n_beads=1)  # beta is inert for a single bead
    state = RingPolymerState(np.array([float(q0)]), np.array([float(p0)]))
    times, rec = rpmd_trajectory(state, model, thermo, cfg, [OBS_Q, OBS_P])
    return times, rec["q"], rec["p"]


# ----------------------------------------------------------------------
# CMD: centroid force table and centroid dynamics

@dataclass
class CentroidForceTable:
    """Mean constrained force on a centroid grid, with a natural cubic spline."""

    grid: np.ndarray
    force: np.ndarray
    std_errors: np.ndarray
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.force = np.asarray(self.force, dtype=float)
        self.std_errors = np.asarray(self.std_errors, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly ascending")
        if not (self.grid.shape == self.force.shape == self.std_errors.shape):
            raise ValueError("grid, force and std_errors must have equal shape")
        self._spline = CubicSpline(self.grid, self.force, bc_type="natural")

    def force_at(self, q):
        q = np.asarray(q, dtype=float)
        if np.any(q < self.grid[0]) or np.any(q > self.grid[-1]):
            raise GridEscape("centroid left the tabulated force range")
        return self._spline(q)

    def potential_at(self, q):
        """Effective centroid potential from the integrated spline, zero at grid[0]."""
        q = np.asarray(q, dtype=float)
        if np.any(q < self.grid[0]) or np.any(q > self.grid[-1]):
            raise GridEscape("centroid left the tabulated force range")
        return -self._spline.antiderivative()(q)


def _node_seed(seed, index):
    return (int(seed) * 1000003 + 7919 * (index + 1)) % (2**63)


def build_centroid_force_table(model, thermo, cfg, grid, workers=None):
    """Constrained-ensemble mean force -<(1/N) sum_k V'(x_k)> on each node."""
    grid = np.asarray(grid, dtype=float)
    grad = _grad_fn(model)
    force = np.empty_like(grid)
    errs = np.empty_like(grid)
    for i, q_c in enumerate(grid):
        node_cfg = dataclasses.replace(cfg, seed=_node_seed(cfg.seed, i))
        ens = sample_ring_positions_constrained(model, thermo, node_cfg, q_c, workers=workers)
        vals = -grad(ens).mean(axis=1)
        force[i] = vals.mean()
        errs[i] = block_standard_error(vals)
    return CentroidForceTable(grid, force, errs)


def _cmd_propagate(q, p, table, mass, dt, n_steps):
    """Velocity Verlet for centroid phase-space points (vectorized)."""
    q = np.array(q, dtype=float, copy=True)
    p = np.array(p, dtype=float, copy=True)
    qs = np.empty((n_steps + 1,) + q.shape)
    ps = np.empty_like(qs)
    qs[0], ps[0] = q, p
    f = table.force_at(q)
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        p += half * f
        q += dt * p / mass
        f = table.force_at(q)  # raises GridEscape outside the table
        p += half * f
        qs[step], ps[step] = q, p
    return qs, ps


def cmd_trajectory(q_c0, p_c0, table, mass, cfg):
    """Centroid trajectory under the interpolated mean force."""
    qs, ps = _cmd_propagate(float(q_c0), float(p_c0), table, mass, cfg.dt, cfg.n_steps)
    return cfg.times(), qs, ps
