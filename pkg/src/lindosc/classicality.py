"""Decoherence and classical-correlation diagnostics.

Two dimensionless measures drive everything here:

* delta_qd = hbar/(2 sqrt(sigma)), the degree of quantum decoherence
  (1 for a pure state, tanh(eps) at the thermal asymptote);
* delta_cc = sqrt(sigma)/|spq|, the degree of classical correlations
  (small when the state is strongly correlated in q-p).

The time scales are the reciprocal initial growth rates of the
decoherence exponent: ``decoherence_time`` from the exact short-time
rate, ``thermal_time`` from the relaxation of the uncertainty
determinant.  Non-positive rates mean the scale is infinite; the result
then carries ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import InitialGaussian, ModelParams, MomentState
from .states import ABGamma


class _Sentinel:
    __slots__ = ("_name",)

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


#: Distinguished return of delta_cc when spq is numerically zero (kept
#: out of the float range so CSV output stays portable).
NO_CORRELATIONS = _Sentinel("NO_CORRELATIONS")


@dataclass(frozen=True)
class ClassicalityThresholds:
    qd_max: float = 0.9
    cc_max: float = 10.0


@dataclass(frozen=True)
class TimeScaleResult:
    """A characteristic time plus the tag of the printed formula branch
    that produced it.  ``value`` is math.inf when the defining rate is
    non-positive."""

    value: float
    formula_branch: str

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


def delta_qd(state: MomentState, params: ModelParams) -> float:
    sig = state.sigma
    if sig <= 0:
        raise ValueError(f"uncertainty determinant must be positive, got {sig}")
    return params.hbar / (2.0 * math.sqrt(sig))


def delta_qd_from_abgamma(abg: ABGamma) -> float:
    """Equivalent coefficient-level form (1/2) sqrt(alpha/gamma)."""
    return 0.5 * math.sqrt(abg.alpha / abg.gamma)


def delta_cc(state: MomentState, params: ModelParams, zero_tol: float = 1e-12):
    """sqrt(sigma)/|spq|, or NO_CORRELATIONS when |spq| <= zero_tol *
    sqrt(sqq*spp)."""
    scale = math.sqrt(state.sqq * state.spp)
    if abs(state.spq) <= zero_tol * scale:
        return NO_CORRELATIONS
    return math.sqrt(state.sigma) / abs(state.spq)


def delta_cc_from_abgamma(abg: ABGamma):
    """Equivalent coefficient-level form 2 sqrt(alpha*gamma)/|beta|."""
    if abg.beta == 0.0:
        return NO_CORRELATIONS
    return 2.0 * math.sqrt(abg.alpha * abg.gamma) / abs(abg.beta)


def _squeeze_terms(init: InitialGaussian) -> tuple[float, float, float]:
    # delta +- r^2/(delta (1-r^2)) and the correlation slope r/(delta sqrt(1-r^2))
    if init.delta <= 0 or abs(init.r) >= 1.0:
        raise ValueError(f"invalid initial state: delta={init.delta}, r={init.r}")
    one_m_r2 = 1.0 - init.r ** 2
    shift = init.r ** 2 / (init.delta * one_m_r2)
    slope = init.r / (init.delta * math.sqrt(one_m_r2))
    return init.delta + shift, init.delta - shift, slope


def decoherence_rate(params: ModelParams, init: InitialGaussian) -> float:
    """Initial growth rate of the off-diagonal suppression coefficient,

        2 [ lam (delta + r^2/(delta(1-r^2))) coth_eps
          + mu  (delta - r^2/(delta(1-r^2))) coth_eps
          - lam - mu - omega r/(delta sqrt(1-r^2)) ].

    Zero for the Glauber state at zero temperature; negative rates mean
    no decoherence takes place.
    """
    s_plus, s_minus, slope = _squeeze_terms(init)
    c = params.coth_eps
    return 2.0 * (params.lam * s_plus * c + params.mu * s_minus * c
                  - params.lam - params.mu - params.omega * slope)


def decoherence_time(params: ModelParams, init: InitialGaussian) -> TimeScaleResult:
    """Reciprocal of ``decoherence_rate``; infinite when the rate is not
    positive.  The branch tag records which special form the inputs
    match (the general value equals the special form identically there).
    """
    rate = decoherence_rate(params, init)
    if init.r == 0.0 and params.mu == 0.0 and params.coth_eps == 1.0:
        branch = "uncorrelated-zero-temperature"
    elif init.r == 0.0:
        branch = "uncorrelated"
    else:
        branch = "general"
    if rate <= 0.0:
        return TimeScaleResult(value=math.inf, formula_branch=branch)
    return TimeScaleResult(value=1.0 / rate, formula_branch=branch)


def decoherence_time_uncorrelated(params: ModelParams, delta: float) -> TimeScaleResult:
    """r = 0 reduction: 1/(2 (lam + mu)(delta coth_eps - 1))."""
    rate = 2.0 * (params.lam + params.mu) * (delta * params.coth_eps - 1.0)
    value = math.inf if rate <= 0 else 1.0 / rate
    return TimeScaleResult(value=value, formula_branch="uncorrelated")


def decoherence_time_zero_temperature(params: ModelParams, delta: float) -> TimeScaleResult:
    """r = 0, mu = 0, T = 0 reduction: 1/(2 lam (delta - 1))."""
    rate = 2.0 * params.lam * (delta - 1.0)
    value = math.inf if rate <= 0 else 1.0 / rate
    return TimeScaleResult(value=value, formula_branch="uncorrelated-zero-temperature")


def decoherence_time_high_temperature(params: ModelParams, init: InitialGaussian,
                                      kT: float) -> TimeScaleResult:
    """Leading high-temperature form, with tau = 2kT/(hbar omega):

        1 / (2 tau [lam (delta + r^2/(delta(1-r^2)))
                    + mu (delta - r^2/(delta(1-r^2)))])
    """
    s_plus, s_minus, _ = _squeeze_terms(init)
    tau = 2.0 * kT / (params.hbar * params.omega)
    rate = 2.0 * tau * (params.lam * s_plus + params.mu * s_minus)
    value = math.inf if rate <= 0 else 1.0 / rate
    return TimeScaleResult(value=value, formula_branch="high-temperature")


def decoherence_time_high_temperature_uncorrelated(params: ModelParams, delta: float,
                                                   kT: float) -> TimeScaleResult:
    """High-temperature r = 0 form: hbar omega / (4 (lam + mu) delta kT)."""
    rate = 4.0 * (params.lam + params.mu) * delta * kT / (params.hbar * params.omega)
    value = math.inf if rate <= 0 else 1.0 / rate
    return TimeScaleResult(value=value, formula_branch="high-temperature-uncorrelated")


def thermal_time(params: ModelParams, init: InitialGaussian) -> TimeScaleResult:
    """Relaxation scale of the uncertainty determinant toward its
    asymptote,

        1 / (2 [lam S+ coth_eps + mu S- coth_eps - 2 lam]),

    with S+- = delta +- 1/(delta (1-r^2)).  Infinite when the bracket is
    not positive (e.g. pure-state start at zero temperature).
    """
    if init.delta <= 0 or abs(init.r) >= 1.0:
        raise ValueError(f"invalid initial state: delta={init.delta}, r={init.r}")
    inv = 1.0 / (init.delta * (1.0 - init.r ** 2))
    s_plus, s_minus = init.delta + inv, init.delta - inv
    c = params.coth_eps
    rate = 2.0 * (params.lam * s_plus * c + params.mu * s_minus * c - 2.0 * params.lam)
    if rate <= 0.0:
        return TimeScaleResult(value=math.inf, formula_branch="general")
    return TimeScaleResult(value=1.0 / rate, formula_branch="general")


def thermal_time_high_temperature(params: ModelParams, init: InitialGaussian,
                                  kT: float) -> TimeScaleResult:
    """High-temperature thermal scale 1/(2 tau [lam S+ + mu S-])."""
    inv = 1.0 / (init.delta * (1.0 - init.r ** 2))
    tau = 2.0 * kT / (params.hbar * params.omega)
    rate = 2.0 * tau * (params.lam * (init.delta + inv) + params.mu * (init.delta - inv))
    value = math.inf if rate <= 0 else 1.0 / rate
    return TimeScaleResult(value=value, formula_branch="high-temperature")


def classicality_window(traj, params: ModelParams,
                        thresholds: ClassicalityThresholds | None = None,
                        time_resolution: float | None = None) -> list[tuple[float, float]]:
    """Maximal intervals of the trajectory where delta_qd <= qd_max and
    delta_cc <= cc_max hold simultaneously.

    The trajectory samples locate the crossings; each endpoint is then
    refined by bisection (via ``traj.state_at``) to ``time_resolution``,
    default 1e-3/omega.  NO_CORRELATIONS counts as failing the
    correlation test.
    """
    if thresholds is None:
        thresholds = ClassicalityThresholds()
    if time_resolution is None:
        time_resolution = 1e-3 / params.omega

    def indicator(state: MomentState) -> bool:
        if delta_qd(state, params) > thresholds.qd_max:
            return False
        cc = delta_cc(state, params)
        return cc is not NO_CORRELATIONS and cc <= thresholds.cc_max

    def refine(t_lo: float, t_hi: float, lo_ok: bool) -> float:
        # invariant: indicator differs between the two ends
        while t_hi - t_lo > time_resolution:
            mid = 0.5 * (t_lo + t_hi)
            if indicator(traj.state_at(mid)) == lo_ok:
                t_lo = mid
            else:
                t_hi = mid
        return 0.5 * (t_lo + t_hi)

    samples = list(traj)
    if not samples:
        return []
    flags = [indicator(s) for s in samples]
    windows: list[tuple[float, float]] = []
    open_t: float | None = samples[0].t if flags[0] else None
    for (prev, cur), (f_prev, f_cur) in zip(zip(samples, samples[1:]),
                                            zip(flags, flags[1:])):
        if f_prev == f_cur:
            continue
        t_cross = refine(prev.t, cur.t, f_prev)
        if f_cur:
            open_t = t_cross
        else:
            windows.append((open_t, t_cross))
            open_t = None
    if open_t is not None:
        windows.append((open_t, samples[-1].t))
    return windows
