"""Spectral densities, thermal occupations, and thermofield splitting.

A bath is described by a spectral density J(omega) supported on
[0, omega_max] together with thermal parameters (beta, statistics).  At
finite temperature the bath is doubled: an auxiliary copy with negated
frequencies is added, and a thermal Bogoliubov rotation maps the pair to
two zero-temperature reservoirs with effective densities

    bosonic:    J1 = (1 + n(omega)) J,    J2 = n(omega) J
    fermionic:  J1 = (1 - f(omega)) J,    J2 = f(omega) J

where n/f are the Bose/Fermi occupations.  Everything downstream (chain
mapping, time evolution, master-equation kernels) consumes J1 and J2 on
the physical frequency axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit, gammaincc

from .errors import (
    DomainError,
    SingularityError,
    StatisticsMismatchError,
    ValidationError,
)

BOSONIC = "bosonic"
FERMIONIC = "fermionic"

#: default hard support cutoff, in units of omega_c
OMEGA_MAX_FACTOR = 10.0
#: default bound on the relative spectral weight beyond omega_max
TAIL_TOL = 1e-3


@dataclass(frozen=True)
class SpectralDensity:
    """Bath spectral density on [0, omega_max].

    Use the :meth:`ohmic` / :meth:`tabulated` constructors; the raw
    constructor performs no family-specific validation.
    """

    family: str
    omega_max: float
    eta: float = 0.0
    s: float = 1.0
    omega_c: float = 1.0
    table: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def ohmic(
        cls,
        eta: float,
        s: float,
        omega_c: float,
        omega_max: float | None = None,
        tail_tol: float = TAIL_TOL,
    ) -> "SpectralDensity":
        """Power-law density with exponential cutoff, J = eta w^s e^(-w/w_c).

        Parameters
        ----------
        eta : overall coupling strength, > 0.
        s : exponent; s < 1 sub-ohmic, s = 1 ohmic, s > 1 super-ohmic.
        omega_c : cutoff frequency, > 0.
        omega_max : hard support cutoff; defaults to 10 * omega_c.
        tail_tol : maximum allowed relative weight beyond omega_max.
        """
        if eta <= 0:
            raise ValidationError(f"eta must be > 0, got {eta}")
        if s <= 0:
            raise ValidationError(f"s must be > 0, got {s}")
        if omega_c <= 0:
            raise ValidationError(f"omega_c must be > 0, got {omega_c}")
        if omega_max is None:
            omega_max = OMEGA_MAX_FACTOR * omega_c
        if omega_max <= 0:
            raise ValidationError(f"omega_max must be > 0, got {omega_max}")
        # relative truncated weight: Gamma(s+1, omega_max/omega_c) / Gamma(s+1)
        tail = float(gammaincc(s + 1.0, omega_max / omega_c))
        if tail > tail_tol:
            raise ValidationError(
                f"support cutoff omega_max={omega_max} leaves relative tail "
                f"{tail:.3e} > tail_tol={tail_tol:.3e}; raise omega_max or tail_tol"
            )
        return cls(family="ohmic_family", omega_max=float(omega_max),
                   eta=float(eta), s=float(s), omega_c=float(omega_c))

    @classmethod
    def tabulated(cls, table: np.ndarray) -> "SpectralDensity":
        """Piecewise-linear density from an (n, 2) array of (omega, J) rows."""
        table = np.asarray(table, dtype=float)
        if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
            raise ValidationError("table must be an (n>=2, 2) array of (omega, J)")
        w = table[:, 0]
        if w[0] != 0.0:
            raise ValidationError("tabulated density must start at omega = 0")
        if np.any(np.diff(w) <= 0):
            raise ValidationError("table frequencies must be strictly increasing")
        if np.any(table[:, 1] < 0):
            raise ValidationError("spectral density values must be >= 0")
        return cls(family="tabulated", omega_max=float(w[-1]), table=table)

    def __call__(self, omega):
        """Evaluate J(omega); omega may be a scalar or array in [0, omega_max]."""
        w = np.asarray(omega, dtype=float)
        if np.any(w < 0) or np.any(w > self.omega_max * (1 + 1e-12)):
            raise DomainError(
                f"omega outside support [0, {self.omega_max}]"
            )
        if self.family == "ohmic_family":
            with np.errstate(divide="ignore"):
                # 0^s with s > 0 is 0; power handles arrays cleanly
                val = self.eta * np.power(w, self.s) * np.exp(-w / self.omega_c)
        else:
            val = np.interp(w, self.table[:, 0], self.table[:, 1])
        return val if np.ndim(omega) else float(val)


@dataclass(frozen=True)
class ThermalParameters:
    """Inverse temperature and exchange statistics of the bath.

    beta = inf selects the zero-temperature limit.
    """

    beta: float
    statistics: str = BOSONIC

    def __post_init__(self):
        if self.statistics not in (BOSONIC, FERMIONIC):
            raise StatisticsMismatchError(
                f"statistics must be '{BOSONIC}' or '{FERMIONIC}', got {self.statistics!r}"
            )
        if not (self.beta > 0):  # also rejects nan
            raise ValidationError(f"beta must be > 0 (or inf), got {self.beta}")

    @property
    def zero_temperature(self) -> bool:
        return np.isinf(self.beta)


def occupation(thermal: ThermalParameters, omega):
    """Mean thermal occupation of a mode at frequency omega.

    Bosonic: 1/(e^(beta w) - 1) for omega > 0; diverges at omega = 0,
    which raises, and negative frequencies are rejected.  Fermionic:
    1/(e^(beta w) + 1) on the whole axis (levels below the Fermi energy
    fill up), equal to 1/2 at omega = 0.
    """
    w = np.asarray(omega, dtype=float)
    if thermal.statistics == BOSONIC:
        if np.any(w < 0):
            raise DomainError("bosonic occupation requires omega >= 0")
        if np.any(w == 0):
            raise SingularityError("bosonic occupation diverges at omega = 0")
        if thermal.zero_temperature:
            n = np.zeros_like(w)
        else:
            with np.errstate(over="ignore"):
                n = 1.0 / np.expm1(thermal.beta * w)
    else:
        if thermal.zero_temperature:
            n = np.select([w < 0, w == 0], [np.ones_like(w), np.full_like(w, 0.5)], 0.0)
        else:
            n = expit(-thermal.beta * w)
    return n if np.ndim(omega) else float(n)


@dataclass(frozen=True)
class ThermofieldDensities:
    """Effective zero-temperature densities of the doubled bath.

    j1 couples to the primary reservoir (absorption by the system from
    chain 1), j2 to the auxiliary negative-frequency reservoir.  Both are
    callables on (0, omega_max]; j2 vanishes identically at beta = inf.
    """

    source: SpectralDensity
    thermal: ThermalParameters
    j1: Callable = field(repr=False)
    j2: Callable = field(repr=False)

    @property
    def omega_max(self) -> float:
        return self.source.omega_max


def thermofield_densities(
    density: SpectralDensity, thermal: ThermalParameters
) -> ThermofieldDensities:
    """Split J into the pair (J1, J2) seen by the two doubled reservoirs."""

    if thermal.statistics == BOSONIC:
        def j1(w):
            return density(w) * (1.0 + occupation(thermal, w))

        def j2(w):
            if thermal.zero_temperature:
                return np.zeros_like(np.asarray(w, dtype=float)) if np.ndim(w) else 0.0
            return density(w) * occupation(thermal, w)
    else:
        def j1(w):
            return density(w) * (1.0 - occupation(thermal, w))

        def j2(w):
            return density(w) * occupation(thermal, w)

    return ThermofieldDensities(source=density, thermal=thermal, j1=j1, j2=j2)


def thermofield_couplings(frequencies, couplings, thermal: ThermalParameters):
    """Split discrete mode couplings g_k into the doubled pair (g1, g2).

    Bosonic: g1 = g cosh(theta), g2 = g sinh(theta) with
    cosh^2(theta) = 1 + n(omega); fermionic: g1 = g sqrt(1 - f),
    g2 = g sqrt(f).  Satisfies g1^2 - g2^2 = g^2 (bosonic) and
    g1^2 + g2^2 = g^2 (fermionic).
    """
    w = np.asarray(frequencies, dtype=float)
    g = np.asarray(couplings, dtype=float)
    if w.shape != g.shape:
        raise ValidationError("frequencies and couplings must have matching shapes")
    n = occupation(thermal, w)
    if thermal.statistics == BOSONIC:
        return g * np.sqrt(1.0 + n), g * np.sqrt(n)
    return g * np.sqrt(1.0 - n), g * np.sqrt(n)


def dispersion(k: float, omega_max: float):
    """Linear dispersion omega(k) = omega_max * k for k in [0, 1]."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0) or np.any(k_arr > 1):
        raise DomainError("dispersion argument k must lie in [0, 1]")
    val = omega_max * k_arr
    return val if np.ndim(k) else float(val)
