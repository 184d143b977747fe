"""Parameter records and bath coefficients for the damped oscillator.

The model is a harmonic oscillator of mass m and frequency omega coupled
to a thermal bath through a friction constant lambda and a symplectic
drift constant mu.  Temperature enters only through coth(hbar*omega/2kT),
which is stored directly so that the zero-temperature limit (coth = 1)
and the high-temperature limit (coth ~ 2kT/hbar*omega) are both exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelParams:
    """Oscillator and bath constants.

    Attributes
    ----------
    m, omega, hbar : mass, angular frequency, Planck constant (all > 0).
    lam : friction constant, >= 0.  Named ``lam`` because ``lambda`` is
        reserved in Python.
    mu : symplectic drift constant; physically sensible runs keep
        |mu| <= lam < omega.
    coth_eps : coth(hbar*omega / 2kT), >= 1.  Equal to 1 at T = 0.
    """

    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    lam: float = 0.0
    mu: float = 0.0
    coth_eps: float = 1.0

    @classmethod
    def from_temperature(cls, kT: float, *, m: float = 1.0, omega: float = 1.0,
                         hbar: float = 1.0, lam: float = 0.0, mu: float = 0.0) -> "ModelParams":
        base = cls(m=m, omega=omega, hbar=hbar, lam=lam, mu=mu)
        return cls(m=m, omega=omega, hbar=hbar, lam=lam, mu=mu,
                   coth_eps=coth_from_temperature(kT, base))


@dataclass(frozen=True)
class DiffusionCoefficients:
    """Diffusion coefficients of the master equation, in physical units."""

    d_pp: float
    d_qq: float
    d_pq: float = 0.0


@dataclass(frozen=True)
class InitialGaussian:
    """Correlated coherent state: squeezing delta > 0, correlation |r| < 1,
    centroid (q0, p0).  delta = 1, r = 0 is the Glauber coherent state."""

    delta: float = 1.0
    r: float = 0.0
    q0: float = 0.0
    p0: float = 0.0


@dataclass(frozen=True)
class MomentState:
    """First and second central moments of a Gaussian state at time t.

    sq, sp are the means of q and p; sqq, spp, spq the centered second
    moments.  ``sigma`` is the generalized uncertainty determinant
    sqq*spp - spq**2 (>= hbar**2/4 for physical states).
    """

    t: float
    sq: float
    sp: float
    sqq: float
    spp: float
    spq: float

    @property
    def sigma(self) -> float:
        return self.sqq * self.spp - self.spq ** 2

    def as_array(self):
        return (self.sq, self.sp, self.sqq, self.spp, self.spq)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(params: ModelParams, init: InitialGaussian | None = None) -> ValidationReport:
    """Check parameter ranges.  Hard violations go to ``errors``; the
    weak-coupling caution (lam > 0.1*omega) is only a warning.  Callers
    decide whether to abort."""
    report = ValidationReport()
    err = report.errors.append

    if params.m <= 0:
        err(f"mass must be positive, got m={params.m}")
    if params.omega <= 0:
        err(f"frequency must be positive, got omega={params.omega}")
    if params.hbar <= 0:
        err(f"hbar must be positive, got hbar={params.hbar}")
    if params.lam < 0:
        err(f"friction constant must be non-negative, got lambda={params.lam}")
    elif params.lam < abs(params.mu):
        err(f"lambda >= |mu| required (coordinate diffusion would be negative): "
            f"lambda={params.lam}, mu={params.mu}")
    if abs(params.mu) >= params.omega:
        err(f"|mu| < omega required (modified frequency undefined): "
            f"mu={params.mu}, omega={params.omega}")
    if params.coth_eps < 1.0:
        err(f"coth_eps must be >= 1, got {params.coth_eps}")

    if init is not None:
        if init.delta <= 0:
            err(f"squeezing parameter must be positive, got delta={init.delta}")
        if abs(init.r) >= 1.0:
            err(f"correlation coefficient must satisfy |r| < 1, got r={init.r}")

    if params.omega > 0 and params.lam > 0.1 * params.omega:
        report.warnings.append(
            f"weak-coupling assumption strained: lambda/omega = "
            f"{params.lam / params.omega:.3g} > 0.1")
    return report


def coth_from_temperature(kT: float, params: ModelParams) -> float:
    """coth(hbar*omega / 2kT) for bath temperature kT >= 0 (energy units).

    kT = 0 returns exactly 1.  Large kT goes through 1/tanh, which tends
    to 2kT/(hbar*omega) without overflow.
    """
    if kT < 0:
        raise ValueError(f"temperature must be non-negative, got kT={kT}")
    if kT == 0:
        return 1.0
    eps = params.hbar * params.omega / (2.0 * kT)
    return 1.0 / math.tanh(eps)


def gibbs_coefficients(params: ModelParams) -> DiffusionCoefficients:
    """Diffusion coefficients of the bath that relaxes toward the Gibbs state:

        d_pp = (lam + mu)/2 * hbar*m*omega * coth_eps
        d_qq = (lam - mu)/2 * hbar/(m*omega) * coth_eps
        d_pq = 0

    In the high-temperature limit d_pp tends to the classical Kramers
    value 2*m*lam*kT (at lam = mu).
    """
    if params.lam < abs(params.mu):
        raise ValueError(f"lambda >= |mu| required, got lambda={params.lam}, mu={params.mu}")
    hw = params.hbar * params.coth_eps
    d_pp = 0.5 * (params.lam + params.mu) * hw * params.m * params.omega
    d_qq = 0.5 * (params.lam - params.mu) * hw / (params.m * params.omega)
    return DiffusionCoefficients(d_pp=d_pp, d_qq=d_qq, d_pq=0.0)


def initial_covariance(init: InitialGaussian, params: ModelParams) -> MomentState:
    """Moments of the correlated coherent state at t = 0.

        sqq = hbar*delta / (2 m omega)
        spq = hbar*r / (2 sqrt(1 - r^2))
        spp = hbar*m*omega / (2 delta (1 - r^2))

    spp is assembled from the uncertainty identity
    spp = (hbar^2/4 + spq^2)/sqq, which is the same expression
    reassociated so the minimum-uncertainty product holds to rounding.
    """
    if init.delta <= 0:
        raise ValueError(f"delta must be positive, got {init.delta}")
    if abs(init.r) >= 1.0:
        raise ValueError(f"|r| < 1 required, got r={init.r}")
    hbar = params.hbar
    sqq = hbar * init.delta / (2.0 * params.m * params.omega)
    spq = hbar * init.r / (2.0 * math.sqrt(1.0 - init.r ** 2))
    spp = (0.25 * hbar * hbar + spq * spq) / sqq
    return MomentState(t=0.0, sq=init.q0, sp=init.p0, sqq=sqq, spp=spp, spq=spq)
