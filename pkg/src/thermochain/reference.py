"""Independent reference solutions for validating the chain evolution.

Two kinds of oracle live here.  The pure-dephasing spin-boson model has
a closed-form solution: the population is frozen and the coherence
decays by an explicit frequency integral, evaluated below with adaptive
quadrature.  For everything else, small discrete star environments are
propagated exactly in the full doubled Hilbert space (dense
eigendecomposition when feasible, sparse Krylov propagation otherwise),
giving numerically exact curves the tensor-network evolution must
reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.sparse.linalg import expm_multiply

from .errors import (DimensionCapError, StatisticsMismatchError, ValidationError)
from .lattice import (FERMION_LOWER, FERMION_PARITY, SIGMA_X, SIGMA_Y, SIGMA_Z,
                      SPIN_KINDS, SystemSpec, boson_annihilator)
from .quadutil import segmented_oscillatory_quad, thermal_breakpoints
from .series import TimeSeries
from .spectral import (BOSONIC, FERMIONIC, SpectralDensity, ThermalParameters,
                       occupation, thermofield_couplings)

#: largest dimension propagated by dense eigendecomposition
DENSE_EIG_LIMIT = 4000
#: hard cap on the doubled star Hilbert-space dimension
DIMENSION_CAP = 200_000

_EPSABS = 1e-12
_EPSREL = 1e-10
_LIMIT = 400


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValidationError("times must be a non-empty 1-d array")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValidationError("times must be non-negative and strictly increasing")
    return t


def _thermal_weight(thermal: ThermalParameters):
    """coth(beta w / 2) for bosons, tanh(beta w / 2) for fermions; 1 at T=0."""
    if thermal.zero_temperature:
        return lambda w: 1.0
    half_beta = 0.5 * thermal.beta
    if thermal.statistics == BOSONIC:
        return lambda w: 1.0 / math.tanh(half_beta * w)
    return lambda w: math.tanh(half_beta * w)


def dephasing_phi(density: SpectralDensity, thermal: ThermalParameters, times):
    """Dephasing exponent phi(t) of the pure-dephasing spin-boson model.

    phi(t) = int_0^wmax J(w) coth(beta w / 2) (1 - cos w t) / w^2 dw.
    The coherence envelope is exp(-4 phi(t)).
    """
    if thermal.statistics != BOSONIC:
        raise StatisticsMismatchError("the dephasing solution is bosonic")
    t_arr = _check_times(times)
    b = density.omega_max
    coth = _thermal_weight(thermal)
    breaks = thermal_breakpoints(thermal.beta, b)

    def g(w):
        if w <= 0.0:
            return 0.0
        return density(w) * coth(w) / (w * w)

    out = np.empty_like(t_arr)
    for i, t in enumerate(t_arr):
        if t == 0.0:
            out[i] = 0.0
            continue
        split = min(b, 2.0 * math.pi / t)
        head_pts = [p for p in breaks if 0.0 < p < split] or None
        # combined integrand near w = 0: g(w) alone may be non-integrable
        head, _ = quad(lambda w: g(w) * 2.0 * math.sin(0.5 * w * t) ** 2,
                       0.0, split, points=head_pts,
                       epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
        if split >= b:
            out[i] = head
            continue
        mid_pts = [p for p in breaks if split < p < b] or None
        mid, _ = quad(g, split, b, points=mid_pts,
                      epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
        tail, _ = quad(g, split, b, weight="cos", wvar=t,
                       epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
        out[i] = head + mid - tail
    return out


def bath_correlation(density: SpectralDensity, thermal: ThermalParameters, times):
    """Free-bath coupling autocorrelation alpha(t).

    Bosonic: int J(w) [coth(beta w / 2) cos wt - i sin wt] dw; fermionic:
    int J(w) [cos wt - i tanh(beta w / 2) sin wt] dw.  Equals the sum of
    the two doubled-reservoir kernels, which the master-equation module
    exploits as a consistency check.
    """
    t_arr = _check_times(times)
    b = density.omega_max
    weight = _thermal_weight(thermal)
    breaks = thermal_breakpoints(thermal.beta, b)

    def weighted(w):
        return density(w) * weight(w) if w > 0 else 0.0

    def plain(w):
        return density(w)

    if thermal.statistics == BOSONIC:
        re_f, im_f = weighted, plain
    else:
        re_f, im_f = plain, weighted
    out = np.empty(t_arr.shape, dtype=complex)
    for i, t in enumerate(t_arr):
        re = segmented_oscillatory_quad(re_f, 0.0, b, t, "cos", breaks)
        im = segmented_oscillatory_quad(im_f, 0.0, b, t, "sin", breaks)
        out[i] = re - 1j * im
    return out


@dataclass(frozen=True)
class DephasingSolution:
    """Closed-form dephasing trajectory with its inputs attached."""

    times: np.ndarray
    phi: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    amp0: complex
    amp1: complex
    omega_s: float

    def __post_init__(self):
        if not (self.times.shape == self.phi.shape == self.sx.shape
                == self.sy.shape == self.sz.shape):
            raise ValidationError("dephasing solution arrays must share one grid")
        if self.times[0] == 0.0 and abs(self.phi[0]) > 1e-12:
            raise ValidationError("phi(0) must vanish")
        if np.any(np.diff(self.phi) < -1e-12):
            raise ValidationError("phi must be non-decreasing")

    def to_series(self) -> TimeSeries:
        return TimeSeries(times=self.times,
                          columns={"sx": self.sx, "sy": self.sy, "sz": self.sz})


def dephasing_observables(amp0, amp1, omega_s: float, times, phi) -> DephasingSolution:
    """Spin expectations under pure dephasing, given the exponent phi(t).

    sigma_z is conserved; the coherence rotates at the bare splitting and
    decays by exp(-4 phi(t)):

        <sx> + i <sy> = 2 conj(a) b exp(i omega_s t - 4 phi(t)).

    (Verified against exact diagonalization; the factor 4 follows from
    the doubled commutator structure of the sigma_z coupling.)
    """
    norm = abs(amp0) ** 2 + abs(amp1) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"amplitudes not normalized: |a|^2+|b|^2 = {norm}")
    t_arr = _check_times(times)
    phi_arr = np.asarray(phi, dtype=float)
    coherence = (2.0 * np.conj(amp0) * amp1
                 * np.exp(1j * omega_s * t_arr - 4.0 * phi_arr))
    sz = abs(amp0) ** 2 - abs(amp1) ** 2
    return DephasingSolution(times=t_arr, phi=phi_arr,
                             sx=coherence.real, sy=coherence.imag,
                             sz=np.full_like(t_arr, sz),
                             amp0=complex(amp0), amp1=complex(amp1),
                             omega_s=float(omega_s))


def dephasing_series(
    system: SystemSpec,
    density: SpectralDensity,
    thermal: ThermalParameters,
    times,
) -> TimeSeries:
    """End-to-end dephasing oracle: phi quadrature plus observables."""
    if system.kind != "spin_dephasing" or system.coupling_op not in (None, "sigma_z"):
        raise ValidationError("closed form requires a spin with sigma_z coupling")
    t_arr = _check_times(times)
    phi = dephasing_phi(density, thermal, t_arr)
    sol = dephasing_observables(system.amp0, system.amp1, system.omega_s, t_arr, phi)
    return sol.to_series()


def _kron_chain(factors, sparse: bool):
    out = None
    for f in factors:
        if out is None:
            out = sp.csr_matrix(f) if sparse else np.asarray(f)
        else:
            out = sp.kron(out, f, format="csr") if sparse else np.kron(out, f)
    return out


def _embed(site_ops: dict, dims, sparse: bool):
    """Kronecker embedding of per-site operators (identity elsewhere)."""
    factors = [site_ops.get(i, sp.identity(d, format="csr") if sparse else np.eye(d))
               for i, d in enumerate(dims)]
    return _kron_chain(factors, sparse)


def _jw_modes(n_modes: int, sparse: bool):
    """Annihilation operators of n_modes fermion modes (parity strings)."""
    lower, parity, ident = FERMION_LOWER, FERMION_PARITY, np.eye(2)
    ops = []
    for j in range(n_modes):
        factors = [parity] * j + [lower] + [ident] * (n_modes - j - 1)
        ops.append(_kron_chain(factors, sparse))
    return ops


def _propagate(h, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Exact psi(t) columns for each requested time."""
    dim = psi0.size
    if dim <= DENSE_EIG_LIMIT:
        h_dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        vals, vecs = np.linalg.eigh(h_dense)
        coef = vecs.conj().T @ psi0
        phases = np.exp(-1j * np.outer(vals, times))
        return vecs @ (phases * coef[:, None])
    gen = sp.csr_matrix(-1j * h)
    steps = np.diff(times)
    uniform = steps.size > 0 and np.allclose(steps, steps[0], rtol=1e-12, atol=0.0)
    if uniform and times[0] == 0.0:
        psis = expm_multiply(gen, psi0, start=times[0], stop=times[-1],
                             num=times.size, endpoint=True)
        return np.asarray(psis).T
    out = np.empty((dim, times.size), dtype=complex)
    psi = psi0.astype(complex)
    prev = 0.0
    for i, t in enumerate(times):
        if t != prev:
            psi = expm_multiply(gen * (t - prev), psi)
        out[:, i] = psi
        prev = t
    return out


def _expectations(psis: np.ndarray, op) -> np.ndarray:
    return np.real(np.einsum("it,it->t", psis.conj(), op @ psis))


def exact_diagonalization(
    frequencies,
    couplings,
    thermal: ThermalParameters,
    system: SystemSpec,
    n_max: int | None = None,
    t_grid=None,
) -> TimeSeries:
    """Exact evolution of the doubled discrete-star model.

    Each physical mode (omega_k, g_k) becomes a reservoir pair with
    couplings split by the thermal occupation; the star Hamiltonian

        H = H_S + sum_k w_k (n1k - n2k)
            + sum_k [g1k (L* a1k + a1k* L) + g2k (L a2k + a2k* L*)]

    is propagated exactly from the system state times the doubled vacuum
    (an empty mode list gives free system evolution).  Records the same
    observables as the chain evolution.
    """
    w = np.atleast_1d(np.asarray(frequencies, dtype=float))
    g = np.atleast_1d(np.asarray(couplings, dtype=float))
    if w.shape != g.shape or w.ndim != 1:
        raise ValidationError("frequencies and couplings must be matching 1-d arrays")
    t_arr = _check_times(t_grid)
    spin = system.kind in SPIN_KINDS
    if spin and thermal.statistics != BOSONIC:
        raise StatisticsMismatchError("spin systems pair with a bosonic bath")
    if not spin and thermal.statistics != FERMIONIC:
        raise StatisticsMismatchError("the interacting dot pairs with a fermionic bath")
    g1, g2 = thermofield_couplings(w, g, thermal)
    n_modes = w.size

    if spin:
        if n_max is None:
            if n_modes > 0:
                raise ValidationError("bosonic star propagation needs n_max")
            n_max = 0
        d = n_max + 1
        dims = [2] + [d] * (2 * n_modes)
        total = 2 * d ** (2 * n_modes)
        if total > DIMENSION_CAP:
            raise DimensionCapError(
                f"doubled star dimension {total} exceeds the cap {DIMENSION_CAP}"
            )
        sparse = total > DENSE_EIG_LIMIT
        if n_modes > 0:
            a = boson_annihilator(d)
            num = a.conj().T @ a
            coupling = system.bath_coupling()
        h = 0.0
        h = h + _embed({0: system.hamiltonian()}, dims, sparse)
        for k in range(n_modes):
            s1, s2 = 1 + k, 1 + n_modes + k
            h = h + w[k] * _embed({s1: num}, dims, sparse)
            h = h - w[k] * _embed({s2: num}, dims, sparse)
            term1 = g1[k] * _embed({0: coupling.conj().T, s1: a}, dims, sparse)
            term2 = g2[k] * _embed({0: coupling, s2: a}, dims, sparse)
            h = h + term1 + term1.conj().T + term2 + term2.conj().T
        psi0 = np.array([1.0], dtype=complex)
        vecs = [system.initial_vector()] + [np.eye(d)[:, 0]] * (2 * n_modes)
        for v in vecs:
            psi0 = np.kron(psi0, v)
        observables = [("sx", _embed({0: SIGMA_X}, dims, sparse)),
                       ("sy", _embed({0: SIGMA_Y}, dims, sparse)),
                       ("sz", _embed({0: SIGMA_Z}, dims, sparse))]
    else:
        total = 2 ** (2 + 2 * n_modes)
        if total > DIMENSION_CAP:
            raise DimensionCapError(
                f"doubled star dimension {total} exceeds the cap {DIMENSION_CAP}"
            )
        sparse = total > DENSE_EIG_LIMIT
        modes = _jw_modes(2 + 2 * n_modes, sparse)
        d_up, d_dn = modes[0], modes[1]
        a1 = modes[2:2 + n_modes]
        a2 = modes[2 + n_modes:]
        n_up = d_up.conj().T @ d_up
        n_dn = d_dn.conj().T @ d_dn
        tunnel = -system.t_hyb * (d_up + d_dn)
        h = system.level * (n_up + n_dn) + system.coulomb_u * (n_up @ n_dn)
        for k in range(n_modes):
            h = h + w[k] * (a1[k].conj().T @ a1[k] - a2[k].conj().T @ a2[k])
            term1 = g1[k] * (tunnel.conj().T @ a1[k])
            term2 = g2[k] * (tunnel @ a2[k])
            h = h + term1 + term1.conj().T + term2 + term2.conj().T
        up_occ = system.initial_dot in ("up", "double")
        dn_occ = system.initial_dot in ("down", "double")
        psi0 = np.array([1.0], dtype=complex)
        for occupied in [up_occ, dn_occ] + [False] * (2 * n_modes):
            psi0 = np.kron(psi0, np.array([0.0, 1.0] if occupied else [1.0, 0.0]))
        observables = [("n_up", n_up), ("n_dn", n_dn)]

    psis = _propagate(h, psi0, t_arr)
    columns = {name: _expectations(psis, op) for name, op in observables}
    return TimeSeries(times=t_arr, columns=columns)


def thermal_occupation_check(
    frequencies, thermal: ThermalParameters, t_grid, n_max: int | None = None
) -> TimeSeries:
    """Physical mode occupations of the evolving doubled vacuum.

    With the couplings switched off, each mode pair evolves under
    w (n1 - n2) alone and the reconstructed physical number operator
    (written in the doubled modes) must stay pinned at the thermal
    occupation for all times.  Columns are named n_0, n_1, ...
    """
    w = np.atleast_1d(np.asarray(frequencies, dtype=float))
    t_arr = _check_times(t_grid)
    n_th = np.atleast_1d(occupation(thermal, w))
    columns = {}
    for k, wk in enumerate(w):
        if thermal.statistics == BOSONIC:
            if n_max is None:
                raise ValidationError("bosonic occupation check needs n_max")
            d = n_max + 1
            a = boson_annihilator(d)
            ident = np.eye(d)
            a1 = np.kron(a, ident)
            a2 = np.kron(ident, a)
            h = wk * (a1.conj().T @ a1 - a2.conj().T @ a2)
            ch = math.sqrt(1.0 + n_th[k])
            sh = math.sqrt(n_th[k])
            # b = cosh(theta) a1 + sinh(theta) a2*
            phys = (ch * a1 + sh * a2.conj().T)
        else:
            a1 = np.kron(FERMION_LOWER, np.eye(2))
            a2 = np.kron(FERMION_PARITY, FERMION_LOWER)
            h = wk * (a1.conj().T @ a1 - a2.conj().T @ a2)
            ch = math.sqrt(1.0 - n_th[k])
            sh = math.sqrt(n_th[k])
            # b = cos(theta) a1 + sin(theta) a2*
            phys = (ch * a1 + sh * a2.conj().T)
        number = phys.conj().T @ phys
        psi0 = np.zeros(h.shape[0], dtype=complex)
        psi0[0] = 1.0
        psis = _propagate(h, psi0, t_arr)
        columns[f"n_{k}"] = _expectations(psis, number)
    return TimeSeries(times=t_arr, columns=columns)
