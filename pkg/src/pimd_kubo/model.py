"""One-dimensional potential models and the thermodynamic state.

Three potential families cover the physics exercised by the package:
a harmonic well (exactness statements), a mildly anharmonic well
(cubic/quartic perturbations, spurious-peak studies) and a pure quartic
well (strong nonlinearity).  Natural units throughout; hbar is carried
as a parameter of the thermodynamic state.
"""

from dataclasses import dataclass

import numpy as np

HARMONIC = "harmonic"
MILDLY_ANHARMONIC = "mildly_anharmonic"
QUARTIC = "quartic"

_KINDS = (HARMONIC, MILDLY_ANHARMONIC, QUARTIC)


@dataclass(frozen=True)
class PotentialModel:
    """A 1D potential V(q) with analytic gradient.

    kind        one of "harmonic", "mildly_anharmonic", "quartic"
    mass        particle mass, > 0
    omega       angular frequency (harmonic part), > 0 where used
    c3, c4      cubic and quartic coefficients (mildly_anharmonic)
    a4          quartic strength for V = a4 q^4 / 4 (quartic)
    """

    kind: str
    mass: float = 1.0
    omega: float = 1.0
    c3: float = 0.0
    c4: float = 0.0
    a4: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ValueError("mass must be finite and > 0")
        if self.kind in (HARMONIC, MILDLY_ANHARMONIC):
            if not (np.isfinite(self.omega) and self.omega > 0):
                raise ValueError("omega must be finite and > 0")
        if self.kind == MILDLY_ANHARMONIC:
            if not np.isfinite(self.c3):
                raise ValueError("c3 must be finite")
            if not (np.isfinite(self.c4) and self.c4 >= 0):
                raise ValueError("c4 must be finite and >= 0")
        if self.kind == QUARTIC:
            if not (np.isfinite(self.a4) and self.a4 > 0):
                raise ValueError("a4 must be finite and > 0")

    def poly_coefficients(self):
        """Coefficients (v2, v3, v4) of V = v2 q^2 + v3 q^3 + v4 q^4."""
        if self.kind == HARMONIC:
            return 0.5 * self.mass * self.omega**2, 0.0, 0.0
        if self.kind == MILDLY_ANHARMONIC:
            return 0.5 * self.mass * self.omega**2, self.c3, self.c4
        return 0.0, 0.0, 0.25 * self.a4


def harmonic(mass=1.0, omega=1.0):
    return PotentialModel(HARMONIC, mass=mass, omega=omega)


def mildly_anharmonic(mass=1.0, omega=1.0, c3=0.0, c4=0.0):
    return PotentialModel(MILDLY_ANHARMONIC, mass=mass, omega=omega, c3=c3, c4=c4)


def quartic(a4=1.0, mass=1.0):
    return PotentialModel(QUARTIC, mass=mass, a4=a4)


@dataclass(frozen=True)
class ThermoParams:
    """Inverse temperature, bead count and Planck constant."""

    beta: float
    n_beads: int
    hbar: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError("beta must be finite and > 0")
        if int(self.n_beads) != self.n_beads or self.n_beads < 1:
            raise ValueError("n_beads must be an integer >= 1")
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError("hbar must be finite and > 0")

    @property
    def omega_n(self):
        """Ring-polymer spring frequency N/(beta*hbar)."""
        return self.n_beads / (self.beta * self.hbar)


def _check_finite(q):
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        raise ValueError("non-finite position rejected")
    return q


def potential_eval(model, q):
    """V(q).  Accepts scalars or arrays; rejects non-finite input."""
    q = _check_finite(q)
    v2, v3, v4 = model.poly_coefficients()
    v = v2 * q * q
    if v3 != 0.0:
        v = v + v3 * q**3
    if v4 != 0.0:
        v = v + v4 * q**4
    return v if v.ndim else float(v)


def potential_grad(model, q):
    """dV/dq, analytic."""
    q = _check_finite(q)
    v2, v3, v4 = model.poly_coefficients()
    g = 2.0 * v2 * q
    if v3 != 0.0:
        g = g + 3.0 * v3 * q * q
    if v4 != 0.0:
        g = g + 4.0 * v4 * q**3
    return g if g.ndim else float(g)


def delta_v(model, q, eta):
    """Path-splitting correction (V(q+eta/2) + V(q-eta/2))/2 - V(q).

    Even in eta; for a harmonic well it is m omega^2 eta^2 / 8,
    independent of q.
    """
    q = _check_finite(q)
    eta = _check_finite(eta)
    half = 0.5 * eta
    return (potential_eval(model, q + half) + potential_eval(model, q - half)) / 2.0 - potential_eval(model, q)
