"""Gaussian density matrices and Wigner functions.

Every pointwise evaluator is a pure function of a moment record and the
model constants, written with numpy operations so scalars and grids work
alike.  The primary parameterization uses the covariances directly; an
equivalent (alpha, beta, gamma) parameterization is exposed for the
coefficient-level identities it satisfies, and the two are tested to
agree pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, MomentState


@dataclass(frozen=True)
class ABGamma:
    """Coefficient triple of the exponential form of a Gaussian density
    matrix: alpha = 1/(2 sqq), gamma = sigma/(2 hbar^2 sqq),
    beta = spq/(hbar sqq)."""

    alpha: float
    beta: float
    gamma: float


def abgamma(state: MomentState, params: ModelParams) -> ABGamma:
    if state.sqq <= 0:
        raise ValueError(f"sqq must be positive, got {state.sqq}")
    h = params.hbar
    return ABGamma(alpha=1.0 / (2.0 * state.sqq),
                   beta=state.spq / (h * state.sqq),
                   gamma=state.sigma / (2.0 * h * h * state.sqq))


def density_matrix_at(state: MomentState, params: ModelParams, q, q_prime):
    """Position-representation density matrix rho(q, q').

    Complex-valued; the imaginary part carries the mean momentum and the
    q-p correlation.  Accepts scalars or broadcastable arrays.
    """
    h = params.hbar
    sqq, sig = state.sqq, state.sigma
    s = 0.5 * (np.asarray(q, dtype=float) + np.asarray(q_prime, dtype=float)) - state.sq
    d = np.asarray(q, dtype=float) - np.asarray(q_prime, dtype=float)
    exponent = (-(s * s) / (2.0 * sqq)
                - sig * d * d / (2.0 * h * h * sqq)
                + 1j * (state.spq * s * d / (h * sqq) + state.sp * d / h))
    return np.exp(exponent) / math.sqrt(2.0 * math.pi * sqq)


def density_matrix_via_abgamma(state: MomentState, params: ModelParams, q, q_prime):
    """Same kernel through the (alpha, beta, gamma) form in the
    sum/difference variables S = (q + q')/2, D = q - q'."""
    a = abgamma(state, params)
    h = params.hbar
    s = 0.5 * (np.asarray(q, dtype=float) + np.asarray(q_prime, dtype=float))
    d = np.asarray(q, dtype=float) - np.asarray(q_prime, dtype=float)
    exponent = (-a.alpha * s * s - a.gamma * d * d
                + 1j * a.beta * s * d
                + 2.0 * a.alpha * state.sq * s
                + 1j * (state.sp / h - a.beta * state.sq) * d
                - a.alpha * state.sq ** 2)
    return math.sqrt(a.alpha / math.pi) * np.exp(exponent)


def wigner_at(state: MomentState, params: ModelParams, q, p):
    """Bivariate Gaussian Wigner function from the covariance matrix."""
    sig = state.sigma
    if sig <= 0:
        raise ValueError(f"uncertainty determinant must be positive, got {sig}")
    dq = np.asarray(q, dtype=float) - state.sq
    dp = np.asarray(p, dtype=float) - state.sp
    quad = state.spp * dq * dq + state.sqq * dp * dp - 2.0 * state.spq * dq * dp
    return np.exp(-quad / (2.0 * sig)) / (2.0 * math.pi * math.sqrt(sig))


def wigner_via_abgamma(state: MomentState, params: ModelParams, q, p):
    """Wigner function assembled from the (alpha, beta, gamma) triple."""
    a = abgamma(state, params)
    h = params.hbar
    dq = np.asarray(q, dtype=float) - state.sq
    dp = np.asarray(p, dtype=float) - state.sp
    shear = h * a.beta * dq - dp
    return (math.sqrt(a.alpha / a.gamma) / (2.0 * math.pi * h)
            * np.exp(-shear * shear / (4.0 * h * h * a.gamma) - a.alpha * dq * dq))


def stationary_density(params: ModelParams, q, q_prime):
    """Stationary (Gibbs) density matrix; real-valued kernel."""
    if params.lam <= 0:
        raise ValueError("stationary state requires lam > 0")
    c = params.coth_eps
    mw = params.m * params.omega
    h = params.hbar
    qs = np.asarray(q, dtype=float)
    qp = np.asarray(q_prime, dtype=float)
    exponent = -(mw / (4.0 * h)) * ((qs + qp) ** 2 / c + (qs - qp) ** 2 * c)
    return math.sqrt(mw / (math.pi * h * c)) * np.exp(exponent)


def stationary_wigner(params: ModelParams, q, p):
    """Stationary Wigner function, an isotropic thermal Gaussian in the
    scaled coordinates (q sqrt(m omega), p/sqrt(m omega))."""
    if params.lam <= 0:
        raise ValueError("stationary state requires lam > 0")
    c = params.coth_eps
    mw = params.m * params.omega
    h = params.hbar
    qs = np.asarray(q, dtype=float)
    ps = np.asarray(p, dtype=float)
    return np.exp(-(mw * qs * qs + ps * ps / mw) / (h * c)) / (math.pi * h * c)


def purity(state: MomentState, params: ModelParams,
           n: int = 2048, box_sigmas: float = 8.0) -> float:
    """Tr rho^2 by midpoint quadrature of the squared kernel over a
    (q, q') box of +- box_sigmas * sqrt(sqq) around the mean.

    For a Gaussian state this equals hbar/(2 sqrt(sigma)); n = 2048
    resolves the narrow difference-coordinate direction for mixed
    states up to coth_eps of a few tens.
    """
    std = math.sqrt(state.sqq)
    lo = state.sq - box_sigmas * std
    hi = state.sq + box_sigmas * std
    h = (hi - lo) / n
    qs = lo + h * (np.arange(n) + 0.5)
    rho = density_matrix_at(state, params, qs[:, None], qs[None, :])
    return float(np.sum(rho.real ** 2 + rho.imag ** 2) * h * h)
