"""Second-order master equation with time-dependent memory kernels.

The reduced density matrix evolves under the Born / second-order
time-convolutionless generator

    drho/dt = -i[H_S, rho] + [A1(t) rho, L*] + [A2(t) rho, L]
              + [L, rho A1(t)*] + [L*, rho A2(t)*],

    A1(t) = int_0^t a1(u) L(-u) du,   A2(t) = int_0^t a2(u) L*(-u) du,

with interaction-picture operators L(-u) = exp(-i H_S u) L exp(i H_S u)
evaluated in closed form through the eigendecomposition of H_S.  The
kernels a1, a2 are frequency integrals of the spectral density weighted
by the thermal occupation.  The generator is trace-free and maps
Hermitian matrices to Hermitian matrices; trace drift therefore measures
pure integrator error and is gated.

The outer integrator is classical RK4.  Its stages sit at t, t + dt/2
and t + dt, so the kernel table must be sampled at dt/2: every stage
then lands exactly on a grid point of the running history integrals,
which are accumulated by a fourth-order cumulative rule.  This keeps the
whole scheme at fourth order, which the step-halving convergence gate
requires.
"""

from __future__ import annotations

import logging
import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning

from .errors import AccuracyError, ValidationError
from .lattice import (DOT_LOWER_DOWN, DOT_LOWER_UP, DOT_NUMBER_DOWN,
                      DOT_NUMBER_UP, SIGMA_X, SIGMA_Y, SIGMA_Z)
from .quadutil import segmented_oscillatory_quad, thermal_breakpoints
from .series import TimeSeries
from .spectral import BOSONIC, SpectralDensity, ThermalParameters, occupation

logger = logging.getLogger(__name__)

#: trace drift beyond this aborts the integration
TRACE_TOL = 1e-6
#: transient negative eigenvalues past this are logged
POSITIVITY_TOL = 1e-6


def _uniform_grid(t_final: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if t_final <= 0:
        raise ValidationError(f"t_final must be > 0, got {t_final}")
    n = int(round(t_final / dt))
    if n < 1 or abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValidationError(
            f"t_final={t_final} is not an integer multiple of dt={dt}"
        )
    return np.linspace(0.0, n * dt, n + 1)


@dataclass(frozen=True)
class KernelTable:
    """Memory kernels a1, a2 sampled on a uniform time grid."""

    times: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValidationError("kernel grid needs at least two points")
        if t[0] != 0.0:
            raise ValidationError("kernel grid must start at t = 0")
        steps = np.diff(t)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValidationError("kernel grid must be uniform and increasing")
        if self.alpha1.shape != t.shape or self.alpha2.shape != t.shape:
            raise ValidationError("kernel arrays must match the time grid")
        a10 = self.alpha1[0]
        scale = max(1.0, np.abs(self.alpha1).max())
        if abs(a10.imag) > 1e-10 * scale or a10.real < -1e-12 * scale:
            raise ValidationError(
                f"alpha1(0) must be real and non-negative, got {a10}"
            )

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def subsample(self, factor: int) -> "KernelTable":
        """Every factor-th sample: the same kernels on a coarser grid."""
        if factor < 1 or (self.times.size - 1) % factor != 0:
            raise ValidationError(
                f"cannot subsample {self.times.size - 1} intervals by {factor}"
            )
        return KernelTable(times=self.times[::factor],
                           alpha1=self.alpha1[::factor],
                           alpha2=self.alpha2[::factor])


def compute_kernels(
    density: SpectralDensity, thermal: ThermalParameters, t_final: float, dt: float
) -> KernelTable:
    """Kernel table a1(t) = int J (1+n) e^{-iwt} dw, a2(t) = int J n e^{+iwt} dw.

    (Fermionic baths use 1-f and f.)  Each grid point is an adaptive
    quadrature; oscillatory tails are handled with dedicated weights.
    """
    grid = _uniform_grid(t_final, dt)
    beta = thermal.beta
    zero_t = thermal.zero_temperature
    bose = thermal.statistics == BOSONIC

    def n_of(w: float) -> float:
        if zero_t:
            return 0.0
        x = beta * w
        if x > 700.0:  # occupation underflows; avoid exp overflow
            return math.exp(-x)
        if bose:
            return 1.0 / math.expm1(x)
        return 1.0 / (math.exp(x) + 1.0)

    def f1(w: float) -> float:
        if w <= 0.0:
            return 0.0
        occ = n_of(w)
        return density(w) * ((1.0 + occ) if bose else (1.0 - occ))

    def f2(w: float) -> float:
        if w <= 0.0:
            return 0.0
        return density(w) * n_of(w)

    b = density.omega_max
    breaks = thermal_breakpoints(beta, b)
    alpha1 = np.empty(grid.shape, dtype=complex)
    alpha2 = np.empty(grid.shape, dtype=complex)
    skip_a2 = zero_t and bose  # n = 0: a2 vanishes identically
    with _warnings.catch_warnings():
        _warnings.simplefilter("error", IntegrationWarning)
        try:
            for i, t in enumerate(grid):
                alpha1[i] = (segmented_oscillatory_quad(f1, 0.0, b, t, "cos", breaks)
                             - 1j * segmented_oscillatory_quad(f1, 0.0, b, t, "sin", breaks))
                if skip_a2:
                    alpha2[i] = 0.0
                else:
                    alpha2[i] = (segmented_oscillatory_quad(f2, 0.0, b, t, "cos", breaks)
                                 + 1j * segmented_oscillatory_quad(f2, 0.0, b, t, "sin", breaks))
        except IntegrationWarning as exc:
            raise AccuracyError(f"kernel quadrature failed at t = {t:g}: {exc}") from exc
    return KernelTable(times=grid, alpha1=alpha1, alpha2=alpha2)


def _cumulative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order cumulative integral along axis 0 of a uniform grid.

    Segment [t_{m-1}, t_m] integrates the cubic through the four nearest
    nodes; the boundary segments use the one-sided four-point rule.
    """
    n = values.shape[0]
    if n < 4:
        raise ValidationError("cumulative rule needs at least four grid points")
    f = values
    seg = np.empty_like(f[1:])
    seg[0] = (h / 24.0) * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
    seg[1:-1] = (h / 24.0) * (-f[:-3] + 13.0 * f[1:-2] + 13.0 * f[2:-1] - f[3:])
    seg[-1] = (h / 24.0) * (f[-4] - 5.0 * f[-3] + 19.0 * f[-2] + 9.0 * f[-1])
    out = np.empty_like(f)
    out[0] = 0.0
    np.cumsum(seg, axis=0, out=out[1:])
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """Validated system density matrix (2x2 spin or 4x4 dot)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.shape not in ((2, 2), (4, 4)):
            raise ValidationError(f"density matrix must be 2x2 or 4x4, got {m.shape}")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValidationError("density matrix must be Hermitian to 1e-12")
        if abs(np.trace(m) - 1.0) > 1e-10:
            raise ValidationError(f"density matrix trace {np.trace(m)} != 1")
        if np.linalg.eigvalsh(m).min() < -POSITIVITY_TOL:
            raise ValidationError("density matrix has eigenvalue below tolerance")

    @classmethod
    def from_state(cls, psi) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(matrix=np.outer(v, v.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


_SPIN_OBSERVABLES = (("sx", SIGMA_X), ("sy", SIGMA_Y), ("sz", SIGMA_Z))
_DOT_OBSERVABLES = (("n_up", DOT_NUMBER_UP), ("n_dn", DOT_NUMBER_DOWN))


def integrate_me(
    h_s: np.ndarray,
    l_op: np.ndarray,
    kernels: KernelTable,
    rho0: DensityMatrix,
    dt: float,
    t_final: float,
    measure_stride: int = 1,
) -> TimeSeries:
    """Integrate the second-order master equation with fixed-step RK4.

    The kernel grid must be sampled at dt/2 and cover [0, t_final]; the
    running history operators A1, A2 are then available exactly at every
    RK4 stage.  Records sx, sy, sz for a spin system and n_up, n_dn for
    the dot; trace deviation and the minimal eigenvalue are reported as
    diagnostics, positivity violations beyond tolerance are logged but
    not repaired, and trace drift beyond TRACE_TOL aborts.
    """
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(matrix=np.asarray(rho0))
    if measure_stride < 1:
        raise ValidationError(f"measure_stride must be >= 1, got {measure_stride}")
    grid = _uniform_grid(t_final, dt)
    n_steps = grid.size - 1
    if abs(kernels.dt - 0.5 * dt) > 1e-9 * dt:
        raise ValidationError(
            f"kernel grid spacing {kernels.dt} must equal dt/2 = {0.5 * dt}: "
            "RK4 stages must land on kernel samples"
        )
    if kernels.times.size < 2 * n_steps + 1:
        raise ValidationError(
            f"kernel table ends at {kernels.t_final}, shorter than t_final = {t_final}"
        )
    d = rho0.dim
    h_s = np.asarray(h_s, dtype=complex)
    l_op = np.asarray(l_op, dtype=complex)
    if h_s.shape != (d, d) or l_op.shape != (d, d):
        raise ValidationError("H_S and L must match the density-matrix dimension")
    if np.abs(h_s - h_s.conj().T).max() > 1e-12 * max(1.0, np.abs(h_s).max()):
        raise ValidationError("H_S must be Hermitian")

    vals, w = np.linalg.eigh(h_s)
    wh = w.conj().T
    l_tilde = wh @ l_op @ w
    omega = vals[:, None] - vals[None, :]
    m = 2 * n_steps + 1
    tau = kernels.times[:m]
    phases = np.exp(-1j * tau[:, None, None] * omega[None, :, :])
    i1 = _cumulative(kernels.alpha1[:m, None, None] * phases, kernels.dt)
    i2 = _cumulative(kernels.alpha2[:m, None, None] * phases, kernels.dt)
    a1 = w[None] @ (l_tilde[None] * i1) @ wh[None]
    a2 = w[None] @ (l_tilde.conj().T[None] * i2) @ wh[None]
    a1d = a1.conj().transpose(0, 2, 1)
    a2d = a2.conj().transpose(0, 2, 1)
    l_dag = l_op.conj().T

    def rhs(idx: int, rho: np.ndarray) -> np.ndarray:
        t1 = a1[idx] @ rho
        t2 = a2[idx] @ rho
        t3 = rho @ a1d[idx]
        t4 = rho @ a2d[idx]
        return (-1j * (h_s @ rho - rho @ h_s)
                + (t1 @ l_dag - l_dag @ t1)
                + (t2 @ l_op - l_op @ t2)
                + (l_op @ t3 - t3 @ l_op)
                + (l_dag @ t4 - t4 @ l_dag))

    observables = _SPIN_OBSERVABLES if d == 2 else _DOT_OBSERVABLES
    times: list[float] = []
    records: dict[str, list] = {name: [] for name, _ in observables}
    diag: dict[str, list] = {"trace_dev": [], "min_eigenvalue": []}
    warn_list: list[str] = []

    def record(t: float, rho: np.ndarray) -> None:
        times.append(t)
        for name, op in observables:
            records[name].append(float(np.trace(op @ rho).real))
        trace_dev = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        diag["trace_dev"].append(trace_dev)
        diag["min_eigenvalue"].append(min_eig)
        if min_eig < -POSITIVITY_TOL and not warn_list:
            msg = (f"t={t:g}: density matrix eigenvalue {min_eig:.3e} below "
                   f"-{POSITIVITY_TOL:g} (transient second-order violation)")
            warn_list.append(msg)
            logger.warning(msg)

    rho = rho0.matrix.copy()
    record(0.0, rho)
    for step in range(n_steps):
        base = 2 * step
        k1 = rhs(base, rho)
        k2 = rhs(base + 1, rho + (0.5 * dt) * k1)
        k3 = rhs(base + 1, rho + (0.5 * dt) * k2)
        k4 = rhs(base + 2, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(np.trace(rho) - 1.0)
        # not <= (rather than >) so a NaN trace aborts too
        if not drift <= TRACE_TOL:
            raise AccuracyError(
                f"trace drift {drift:.3e} at t = {grid[step + 1]:g} exceeds "
                f"{TRACE_TOL:g}; reduce dt"
            )
        if (step + 1) % measure_stride == 0 or step + 1 == n_steps:
            record(grid[step + 1], rho)

    diagnostics = TimeSeries(times=np.array(times),
                             columns={k: np.array(v) for k, v in diag.items()})
    return TimeSeries(times=np.array(times),
                      columns={k: np.array(v) for k, v in records.items()},
                      diagnostics=diagnostics, warnings=warn_list)


def anderson_me(
    coulomb_u: float,
    level: float,
    t_hyb: float,
    kernels: KernelTable,
    rho0: DensityMatrix,
    dt: float,
    t_final: float,
    measure_stride: int = 1,
) -> TimeSeries:
    """Master equation for the interacting dot.

    H_S = V (n_up + n_dn) + U n_up n_dn with tunneling operator
    L = -t_hyb (d_up + d_dn); reports the spin-resolved populations.
    """
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(matrix=np.asarray(rho0))
    if rho0.dim != 4:
        raise ValidationError("anderson_me needs a 4x4 density matrix")
    h_s = level * (DOT_NUMBER_UP + DOT_NUMBER_DOWN) + coulomb_u * (DOT_NUMBER_UP @ DOT_NUMBER_DOWN)
    l_op = -t_hyb * (DOT_LOWER_UP + DOT_LOWER_DOWN)
    return integrate_me(h_s, l_op, kernels, rho0, dt, t_final,
                        measure_stride=measure_stride)
