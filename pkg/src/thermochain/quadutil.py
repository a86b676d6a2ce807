"""Adaptive quadrature of oscillatory frequency integrals.

Integrals of the form int_a^b f(w) trig(w t) dw turn slowly convergent
for plain adaptive rules once many periods fit inside [a, b].  The
helper splits off a short leading interval (at most one period, so an
integrable endpoint singularity of f at a is still handled by the
ordinary adaptive rule) and treats the remainder with the dedicated
oscillatory-weight algorithm.
"""

from __future__ import annotations

import math

from scipy.integrate import quad

#: oscillation count below which plain adaptive quadrature is used
_PLAIN_PERIODS = 2.0
_EPSABS = 1e-12
_EPSREL = 1e-10
_LIMIT = 400


def segmented_oscillatory_quad(f, a: float, b: float, t: float, kind: str,
                               breakpoints=()) -> float:
    """Sum of oscillatory integrals over [a, b] split at interior breakpoints.

    Breakpoints mark known sharp features (e.g. the thermal knee at
    w ~ 1/beta) that a 21-point panel over the full range would step
    straight over.
    """
    edges = [a] + [p for p in sorted(breakpoints) if a < p < b] + [b]
    return sum(oscillatory_quad(f, lo, hi, t, kind)
               for lo, hi in zip(edges[:-1], edges[1:]))


def thermal_breakpoints(beta: float, omega_max: float):
    """Quadrature split points for a thermal factor with inverse scale beta."""
    if not math.isfinite(beta):
        return ()
    knee = 10.0 / beta
    if knee < 0.25 * omega_max:
        return (knee,)
    return ()


def oscillatory_quad(f, a: float, b: float, t: float, kind: str) -> float:
    """Evaluate int_a^b f(w) * trig(w t) dw with trig = cos or sin."""
    if kind not in ("cos", "sin"):
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    if b <= a:
        return 0.0
    t = float(t)
    if t == 0.0:
        if kind == "sin":
            return 0.0
        val, _ = quad(f, a, b, epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
        return val
    trig = math.cos if kind == "cos" else math.sin
    periods = abs(t) * (b - a) / (2.0 * math.pi)
    if periods <= _PLAIN_PERIODS:
        val, _ = quad(lambda w: f(w) * trig(w * t), a, b,
                      epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
        return val
    split = min(b, a + 2.0 * math.pi / abs(t))
    head, _ = quad(lambda w: f(w) * trig(w * t), a, split,
                   epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
    tail, _ = quad(f, split, b, weight=kind, wvar=t,
                   epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
    return head + tail
