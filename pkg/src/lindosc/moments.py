"""Time evolution of the Gaussian moments.

Two routes that must agree:

* ``evolve`` integrates the five coupled moment equations with an
  adaptive embedded Runge-Kutta pair (dense output, tight tolerances);
* ``sigma_closed`` / ``sigma_pq_closed`` evaluate the printed
  closed-form expressions for the uncertainty determinant sigma(t) and
  the covariance sigma_pq(t).

The closed form for sigma_pq carries an overall sign ambiguity relative
to the initial covariance convention used everywhere else in this
package.  ``resolve_sigma_pq_sign`` settles it empirically against the
ODE route; the resolved flag is reported in all CLI output headers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .model import (DiffusionCoefficients, InitialGaussian, ModelParams,
                    MomentState, gibbs_coefficients, initial_covariance)


class IntegrationError(RuntimeError):
    """Raised when the adaptive integrator cannot meet its tolerances."""


def moment_rhs(state: MomentState, params: ModelParams,
               coeffs: DiffusionCoefficients) -> np.ndarray:
    """Right-hand side of the moment system, ordered like ``MomentState.as_array``:

        d<q>/dt   =  <p>/m - (lam - mu) <q>
        d<p>/dt   = -m omega^2 <q> - (lam + mu) <p>
        d sqq/dt  =  2 spq/m - 2 (lam - mu) sqq + 2 d_qq
        d spp/dt  = -2 m omega^2 spq - 2 (lam + mu) spp + 2 d_pp
        d spq/dt  =  spp/m - m omega^2 sqq - 2 lam spq + 2 d_pq
    """
    rhs = _rhs_factory(params, coeffs)
    return np.array(rhs(state.t, state.as_array()))


def _rhs_factory(params: ModelParams,
                 coeffs: DiffusionCoefficients) -> Callable:
    # Plain-float arithmetic: the integrator calls this millions of times.
    m = params.m
    mw2 = params.m * params.omega ** 2
    lm = params.lam - params.mu
    lp = params.lam + params.mu
    two_lam = 2.0 * params.lam
    dqq2 = 2.0 * coeffs.d_qq
    dpp2 = 2.0 * coeffs.d_pp
    dpq2 = 2.0 * coeffs.d_pq

    def rhs(t, y):
        sq, sp, sqq, spp, spq = y
        return (
            sp / m - lm * sq,
            -mw2 * sq - lp * sp,
            2.0 * spq / m - 2.0 * lm * sqq + dqq2,
            -2.0 * mw2 * spq - 2.0 * lp * spp + dpp2,
            spp / m - mw2 * sqq - two_lam * spq + dpq2,
        )

    return rhs


@dataclass
class MomentTrajectory:
    """Moment samples on a time grid, plus integrator metadata.

    When produced by ``evolve`` the trajectory keeps the dense
    interpolant so ``state_at`` can evaluate between samples (used by
    the classicality-window bisection).  Hand-built trajectories fall
    back to linear interpolation.
    """

    samples: tuple[MomentState, ...]
    meta: dict = field(default_factory=dict)
    interpolant: Callable | None = field(default=None, repr=False, compare=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def state_at(self, t: float) -> MomentState:
        ts = self.times
        if not (ts[0] <= t <= ts[-1]):
            raise ValueError(f"t={t} outside trajectory span [{ts[0]}, {ts[-1]}]")
        if self.interpolant is not None:
            y = self.interpolant(t)
            return MomentState(t, *(float(v) for v in y))
        i = int(np.searchsorted(ts, t, side="right") - 1)
        if i >= len(ts) - 1:
            return self.samples[-1]
        a, b = self.samples[i], self.samples[i + 1]
        w = (t - a.t) / (b.t - a.t)
        vals = [(1.0 - w) * x + w * y for x, y in zip(a.as_array(), b.as_array())]
        return MomentState(t, *vals)


def evolve(init: MomentState, params: ModelParams, t_grid: Sequence[float],
           coeffs: DiffusionCoefficients | None = None,
           rtol: float = 1e-10, atol: float = 1e-12) -> MomentTrajectory:
    """Integrate the moment equations from ``init`` over ``t_grid``.

    ``t_grid`` must be strictly increasing and start at ``init.t``.
    Diffusion coefficients default to the Gibbs-bath values.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size < 1:
        raise ValueError("t_grid must be a non-empty 1-D sequence")
    if abs(ts[0] - init.t) > 1e-12 * max(1.0, abs(init.t)):
        raise ValueError(f"t_grid must start at init.t={init.t}, got {ts[0]}")
    if ts.size > 1 and np.any(np.diff(ts) <= 0):
        raise ValueError("t_grid must be strictly increasing")

    if coeffs is None:
        coeffs = gibbs_coefficients(params)

    if ts.size == 1:
        return MomentTrajectory(samples=(init,), meta={"method": "none", "n_steps": 0})

    rhs = _rhs_factory(params, coeffs)
    sol = solve_ivp(rhs, (ts[0], ts[-1]), list(init.as_array()), method="RK45",
                    rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise IntegrationError(
            f"adaptive step integration failed near t={sol.t[-1]:.6g}: {sol.message}")

    ys = sol.sol(ts)
    samples = [init]
    for k in range(1, ts.size):
        samples.append(MomentState(float(ts[k]), *(float(v) for v in ys[:, k])))
    meta = {"method": "RK45", "rtol": rtol, "atol": atol,
            "n_steps": len(sol.t) - 1, "n_rhs_evals": int(sol.nfev)}
    return MomentTrajectory(samples=tuple(samples), meta=meta, interpolant=sol.sol)


def asymptotic_covariance(params: ModelParams) -> MomentState:
    """Stationary Gibbs-state moments (requires lam > 0):

        sqq -> hbar*coth_eps / (2 m omega),  spp -> hbar*m*omega*coth_eps / 2,
        spq -> 0, means -> 0.
    """
    if params.lam <= 0:
        raise ValueError("asymptotic state requires lam > 0 (no relaxation otherwise)")
    c = params.coth_eps
    sqq = params.hbar * c / (2.0 * params.m * params.omega)
    spp = 0.5 * params.hbar * params.m * params.omega * c
    return MomentState(t=math.inf, sq=0.0, sp=0.0, sqq=sqq, spp=spp, spq=0.0)


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class ClosedFormContext:
    """Abbreviations shared by the closed-form expressions.

    omega_eff = sqrt(omega^2 - mu^2) is the drift-modified oscillation
    frequency (the t = 0 limit of sigma_closed forces this choice);
    s_plus/s_minus = delta +/- 1/(delta (1 - r^2)); r_factor =
    r/sqrt(1 - r^2); coth_eps copied from the parameters.
    """

    omega_eff: float
    s_plus: float
    s_minus: float
    r_factor: float
    coth_eps: float

    @classmethod
    def from_inputs(cls, params: ModelParams, init: InitialGaussian) -> "ClosedFormContext":
        w2 = params.omega ** 2 - params.mu ** 2
        if w2 <= 0:
            raise ValueError(f"|mu| < omega required for the closed forms, "
                             f"got mu={params.mu}, omega={params.omega}")
        if init.delta <= 0 or abs(init.r) >= 1.0:
            raise ValueError(f"invalid initial state: delta={init.delta}, r={init.r}")
        inv = 1.0 / (init.delta * (1.0 - init.r ** 2))
        return cls(omega_eff=math.sqrt(w2),
                   s_plus=init.delta + inv,
                   s_minus=init.delta - inv,
                   r_factor=init.r / math.sqrt(1.0 - init.r ** 2),
                   coth_eps=params.coth_eps)


def sigma_closed(t: float, ctx: ClosedFormContext, params: ModelParams) -> float:
    """Closed-form uncertainty determinant sigma(t).

    Equals hbar^2/4 at t = 0 for every valid initial state and relaxes
    to (hbar*coth_eps/2)^2 for lam > 0.
    """
    lam, mu, w = params.lam, params.mu, params.omega
    oe, c = ctx.omega_eff, ctx.coth_eps
    cos2 = math.cos(2.0 * oe * t)
    sin2 = math.sin(2.0 * oe * t)
    oe2 = oe * oe
    decay4 = math.exp(-4.0 * lam * t) * (1.0 - ctx.s_plus * c + c * c)
    osc = ((ctx.s_plus - 2.0 * c) * (w * w - mu * mu * cos2) / oe2
           + ctx.s_minus * mu * sin2 / oe
           + 2.0 * ctx.r_factor * mu * w * (1.0 - cos2) / oe2)
    decay2 = math.exp(-2.0 * lam * t) * c * osc
    return 0.25 * params.hbar ** 2 * (decay4 + decay2 + c * c)


def sigma_pq_closed(t: float, ctx: ClosedFormContext, params: ModelParams) -> float:
    """Closed-form covariance sigma_pq(t), evaluated exactly as printed.

    The printed expression is the mirror image (overall sign) of the
    covariance that evolves from the initial-state convention used by
    ``initial_covariance``; multiply by the flag from
    ``resolve_sigma_pq_sign`` before comparing with the ODE route.
    """
    lam, mu, w = params.lam, params.mu, params.omega
    oe, c = ctx.omega_eff, ctx.coth_eps
    cos2 = math.cos(2.0 * oe * t)
    sin2 = math.sin(2.0 * oe * t)
    bracket = ((mu * w * (2.0 * c - ctx.s_plus) - 2.0 * w * w * ctx.r_factor) * cos2
               + w * oe * ctx.s_minus * sin2
               + mu * w * (ctx.s_plus - 2.0 * c)
               + 2.0 * mu * mu * ctx.r_factor)
    return params.hbar / (4.0 * oe * oe) * math.exp(-2.0 * lam * t) * bracket


_SIGN_PROBE = (ModelParams(lam=0.1, mu=0.05, coth_eps=2.0),
               InitialGaussian(delta=2.0, r=0.5))


def resolve_sigma_pq_sign(params: ModelParams | None = None,
                          init: InitialGaussian | None = None,
                          n_times: int = 17) -> int:
    """Empirically pick the overall sign (+1 or -1) that reconciles
    ``sigma_pq_closed`` with the ODE route.

    The residual of each candidate sign is accumulated over a short
    trajectory.  Configurations whose covariance is identically zero
    (e.g. delta = 1, r = 0, mu = 0) cannot distinguish the signs; they
    fall back to a fixed probe configuration.
    """
    if params is None or init is None:
        params, init = _SIGN_PROBE
    ctx = ClosedFormContext.from_inputs(params, init)
    t_end = 2.0 * math.pi / ctx.omega_eff
    ts = np.linspace(0.0, t_end, n_times)
    traj = evolve(initial_covariance(init, params), params, ts)

    closed = np.array([sigma_pq_closed(t, ctx, params) for t in ts])
    ode = np.array([s.spq for s in traj])
    scale = max(math.sqrt(s.sqq * s.spp) for s in traj)
    if np.max(np.abs(closed)) < 1e-10 * scale and np.max(np.abs(ode)) < 1e-10 * scale:
        if (params, init) == _SIGN_PROBE:
            return 1
        return resolve_sigma_pq_sign()  # degenerate case: use the probe
    res_plus = float(np.sum(np.abs(closed - ode)))
    res_minus = float(np.sum(np.abs(-closed - ode)))
    return -1 if res_minus < res_plus else 1
