"""Star-to-chain mapping via orthogonal-polynomial recurrences.

A continuum reservoir with density Jw on [0, omega_max] is first
discretized into a positive quadrature measure {(omega_i, w_i)}.  The
three-term recurrence of the monic polynomials orthogonal under that
measure,

    pi_{n+1}(x) = (x - alpha_n) pi_n(x) - beta_n pi_{n-1}(x),

yields the chain geometry directly: alpha_n are on-site energies,
sqrt(beta_{n+1}) nearest-neighbour hoppings, and sqrt(beta_0) (the total
weight) the system-chain coupling.  Coefficients are computed on the
physical frequency axis, so they carry frequency units and need no
rescaling downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import roots_legendre

from .errors import (
    BreakdownError,
    EmptyMeasureError,
    ValidationError,
)

#: orthogonality residual above which the Lanczos fallback is used
RESIDUAL_TOL = 1e-8
#: Gauss-Legendre points per quadrature panel
_PANEL_ORDER = 10
#: smallest panel edge of the log-graded rule, relative to omega_max
_LOG_FLOOR = 1e-8
#: weights below max(w) * this are dropped (denormal protection)
_WEIGHT_FLOOR = 1e-250

GRADINGS = ("linear", "log")


@dataclass(frozen=True)
class DiscretizedMeasure:
    """Positive discrete measure sum_i w_i delta(x - x_i), nodes ascending."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or weights.ndim != 1 or nodes.size != weights.size:
            raise ValidationError("nodes and weights must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise ValidationError("measure contains non-finite entries")
        if nodes.size and np.any(np.diff(nodes) <= 0):
            raise ValidationError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValidationError("weights must be strictly positive (drop zeros upstream)")

    @classmethod
    def from_samples(cls, nodes, weights) -> "DiscretizedMeasure":
        """Sort, merge duplicate nodes, and drop (near-)zero weights."""
        nodes = np.asarray(nodes, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if nodes.size != weights.size:
            raise ValidationError("nodes and weights must have equal length")
        if np.any(weights < 0):
            raise ValidationError("weights must be non-negative")
        order = np.argsort(nodes, kind="stable")
        nodes, weights = nodes[order], weights[order]
        if nodes.size:
            uniq, inverse = np.unique(nodes, return_inverse=True)
            merged = np.zeros_like(uniq)
            np.add.at(merged, inverse, weights)
            nodes, weights = uniq, merged
            keep = weights > (weights.max() * _WEIGHT_FLOOR if weights.size else 0.0)
            nodes, weights = nodes[keep], weights[keep]
        return cls(nodes=nodes, weights=weights)

    @property
    def count(self) -> int:
        return int(self.nodes.size)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def support(self) -> tuple[float, float]:
        if not self.count:
            return (0.0, 0.0)
        return (float(self.nodes[0]), float(self.nodes[-1]))


def discretize(jw, omega_max: float, n_nodes: int, grading: str = "linear") -> DiscretizedMeasure:
    """Build a composite Gauss-Legendre measure for the density ``jw``.

    Parameters
    ----------
    jw : callable evaluating the density on arrays of frequencies.
    omega_max : support cutoff, > 0.
    n_nodes : requested node count; the realized count is the next
        multiple of the panel order and may slightly exceed it.
    grading : 'linear' for uniform panels, 'log' for geometrically
        shrinking panels towards omega = 0 (densities singular or sharply
        varying at low frequency).
    """
    if omega_max <= 0:
        raise ValidationError(f"omega_max must be > 0, got {omega_max}")
    if n_nodes < 1:
        raise ValidationError(f"n_nodes must be >= 1, got {n_nodes}")
    if grading not in GRADINGS:
        raise ValidationError(f"grading must be one of {GRADINGS}, got {grading!r}")

    order = min(_PANEL_ORDER, max(1, n_nodes))
    panels = max(1, math.ceil(n_nodes / order))
    if grading == "linear" or panels < 4:
        edges = np.linspace(0.0, omega_max, panels + 1)
    else:
        # geometric panels resolve a singular or sharply peaked endpoint,
        # but starve the bulk of nodes if used across the whole domain:
        # products of high-degree recurrence polynomials then cannot be
        # integrated there.  Split the budget: geometric panels below
        # omega_max / 10, uniform panels above.
        split = 0.1 * omega_max
        n_geo = max(2, panels // 3)
        n_lin = panels - n_geo
        # interior geometric edges ascending from split * _LOG_FLOOR
        # (exclusive of split itself, which the uniform part contributes)
        geo = split * _LOG_FLOOR ** (np.arange(n_geo - 1, 0, -1) / (n_geo - 1))
        lin = np.linspace(split, omega_max, n_lin + 1)
        edges = np.concatenate(([0.0], geo, lin))

    gx, gw = roots_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    quad_w = (half[:, None] * gw[None, :]).ravel()

    values = np.asarray(jw(nodes), dtype=float)
    if values.shape != nodes.shape:
        raise ValidationError("density callable must return one value per node")
    if not np.all(np.isfinite(values)):
        raise ValidationError("density evaluated to non-finite values on quadrature nodes")
    if np.any(values < 0):
        raise ValidationError("density evaluated to negative values on quadrature nodes")
    return DiscretizedMeasure.from_samples(nodes, quad_w * values)


@dataclass(frozen=True)
class ChainCoefficients:
    """Recurrence coefficients of one reservoir chain.

    ``alphas[n]`` is the on-site energy of chain site n, ``betas[0]`` the
    total weight of the underlying measure (the squared system-chain
    coupling), and ``sqrt(betas[n])`` for n >= 1 the hopping between
    sites n-1 and n.  ``reservoir_index`` is 1 for the primary and 2 for
    the auxiliary (negative-frequency) reservoir.
    """

    alphas: np.ndarray
    betas: np.ndarray
    reservoir_index: int = 1
    support: tuple[float, float] | None = None

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        betas = np.asarray(self.betas, dtype=float)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        if self.reservoir_index not in (1, 2):
            raise ValidationError("reservoir_index must be 1 or 2")
        if alphas.size != betas.size:
            raise ValidationError("alphas and betas must have equal length")
        if alphas.size and np.any(betas <= 0):
            raise BreakdownError(
                "non-positive beta coefficient", index=int(np.argmax(betas <= 0))
            )
        if self.support is not None and alphas.size:
            lo, hi = self.support
            slack = 1e-9 * max(abs(lo), abs(hi), 1.0)
            if np.any(alphas < lo - slack) or np.any(alphas > hi + slack):
                raise ValidationError("alpha coefficients leave the measure support")

    @classmethod
    def empty(cls, reservoir_index: int = 2) -> "ChainCoefficients":
        return cls(alphas=np.empty(0), betas=np.empty(0), reservoir_index=reservoir_index)

    @property
    def chain_length(self) -> int:
        return int(self.alphas.size)

    @property
    def is_empty(self) -> bool:
        return self.chain_length == 0

    @property
    def total_weight(self) -> float:
        return float(self.betas[0]) if self.chain_length else 0.0

    @property
    def coupling(self) -> float:
        """System-chain coupling, sqrt of the total measure weight."""
        return math.sqrt(self.total_weight)

    @property
    def hops(self) -> np.ndarray:
        """Hopping amplitudes sqrt(beta_n), n = 1..M-1."""
        return np.sqrt(self.betas[1:])

    def jacobi_matrix(self) -> np.ndarray:
        """Symmetric tridiagonal matrix carrying alphas and sqrt(betas)."""
        m = self.chain_length
        jac = np.diag(self.alphas)
        off = self.hops
        jac[np.arange(m - 1), np.arange(1, m)] = off
        jac[np.arange(1, m), np.arange(m - 1)] = off
        return jac


def _weighted_orthonormal_values(
    coeffs: ChainCoefficients, measure: DiscretizedMeasure
) -> np.ndarray:
    """Rows sqrt(w_i) q_n(x_i) of the orthonormal polynomials.

    The recurrence is run on the weight-scaled values directly: the bare
    q_n(x_i) can overflow at far-tail nodes of wide-dynamic-range (log
    graded) measures, while the scaled values stay near or below 1
    wherever orthonormality holds.
    """
    m = coeffs.chain_length
    nodes = measure.nodes
    p = np.zeros((m, nodes.size))
    if m == 0:
        return p
    p[0] = np.sqrt(measure.weights) / math.sqrt(coeffs.betas[0])
    if m > 1:
        p[1] = (nodes - coeffs.alphas[0]) * p[0] / math.sqrt(coeffs.betas[1])
    for n in range(1, m - 1):
        p[n + 1] = (
            (nodes - coeffs.alphas[n]) * p[n] - math.sqrt(coeffs.betas[n]) * p[n - 1]
        ) / math.sqrt(coeffs.betas[n + 1])
    return p


def orthogonality_residual(measure: DiscretizedMeasure, coeffs: ChainCoefficients) -> float:
    """Largest off-diagonal normalized overlap of the recurrence polynomials.

    Exact orthogonality under the discrete measure gives 0; the value
    measures how far finite-precision recurrence construction drifted.
    """
    if coeffs.is_empty:
        return 0.0
    p = _weighted_orthonormal_values(coeffs, measure)
    gram = p @ p.T
    np.fill_diagonal(gram, 0.0)
    return float(np.abs(gram).max())


def _stieltjes(measure: DiscretizedMeasure, m: int) -> ChainCoefficients:
    """Discretized Stieltjes procedure in normalized (overflow-safe) form."""
    x, w = measure.nodes, measure.weights
    alphas = np.zeros(m)
    betas = np.zeros(m)
    betas[0] = w.sum()
    q_prev = np.zeros_like(x)
    q = np.full_like(x, 1.0 / math.sqrt(betas[0]))
    for n in range(m):
        alphas[n] = w @ (x * q * q)
        if n == m - 1:
            break
        r = (x - alphas[n]) * q - (math.sqrt(betas[n]) if n else 0.0) * q_prev
        betas[n + 1] = w @ (r * r)
        if not betas[n + 1] > 0:
            raise BreakdownError("Stieltjes recurrence lost all weight", index=n + 1)
        q_prev, q = q, r / math.sqrt(betas[n + 1])
    return ChainCoefficients(alphas=alphas, betas=betas, support=measure.support)


def _lanczos(measure: DiscretizedMeasure, m: int) -> ChainCoefficients:
    """Lanczos tridiagonalization with full reorthogonalization.

    Accumulates in extended precision; used as the fallback when plain
    Stieltjes loses orthogonality.
    """
    x = measure.nodes.astype(np.longdouble)
    w = measure.weights.astype(np.longdouble)
    alphas = np.zeros(m, dtype=np.longdouble)
    betas = np.zeros(m, dtype=np.longdouble)
    betas[0] = w.sum()
    basis = np.zeros((m, x.size), dtype=np.longdouble)
    v = np.sqrt(w)
    v /= np.sqrt(v @ v)
    basis[0] = v
    v_prev = np.zeros_like(v)
    for n in range(m):
        u = x * v
        alphas[n] = v @ u
        if n == m - 1:
            break
        r = u - alphas[n] * v - (np.sqrt(betas[n]) if n else 0.0) * v_prev
        for _ in range(2):  # twice is enough (Kahan)
            r -= basis[: n + 1].T @ (basis[: n + 1] @ r)
        betas[n + 1] = r @ r
        if not betas[n + 1] > 0:
            raise BreakdownError("Lanczos recurrence broke down", index=n + 1)
        v_prev, v = v, r / np.sqrt(betas[n + 1])
        basis[n + 1] = v
    return ChainCoefficients(
        alphas=alphas.astype(float), betas=betas.astype(float), support=measure.support
    )


def recurrence_coefficients(
    measure: DiscretizedMeasure, m: int, reservoir_index: int = 1
) -> ChainCoefficients:
    """Chain coefficients of the first ``m`` recurrence steps of ``measure``.

    Runs the Stieltjes procedure and falls back to extended-precision
    Lanczos with full reorthogonalization if a beta turns non-positive or
    the orthogonality residual exceeds RESIDUAL_TOL.
    """
    if m < 1:
        raise ValidationError(f"chain length must be >= 1, got {m}")
    if measure.count == 0 or measure.total_weight <= 0:
        raise EmptyMeasureError("measure carries no weight; nothing to map")
    if m > measure.count:
        raise ValidationError(
            f"chain length {m} exceeds the {measure.count} distinct measure nodes; "
            "raise the quadrature node count"
        )
    try:
        coeffs = _stieltjes(measure, m)
        if orthogonality_residual(measure, coeffs) > RESIDUAL_TOL:
            coeffs = _lanczos(measure, m)
    except BreakdownError:
        coeffs = _lanczos(measure, m)
    return replace(coeffs, reservoir_index=reservoir_index)


def tridiagonalize_discrete(
    frequencies, couplings, reservoir_index: int = 1
) -> ChainCoefficients:
    """Map a finite discrete star environment to its equivalent chain.

    The measure nodes are the mode frequencies and the weights the
    squared couplings; the full chain (one site per distinct frequency)
    is returned.  Agrees with ``recurrence_coefficients`` on the same
    measure to within roundoff.
    """
    couplings = np.asarray(couplings, dtype=float)
    measure = DiscretizedMeasure.from_samples(frequencies, couplings**2)
    if measure.count == 0:
        raise EmptyMeasureError("all couplings are zero; star has no environment")
    coeffs = _lanczos(measure, measure.count)
    return ChainCoefficients(
        alphas=coeffs.alphas,
        betas=coeffs.betas,
        reservoir_index=reservoir_index,
        support=measure.support,
    )
