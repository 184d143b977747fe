"""Explicit finite-difference solver for the phase-space transport equation

    dW/dt = -(p/m) dW/dq + m omega^2 q dW/dp
            + (lam + mu) d(p W)/dp + (lam - mu) d(q W)/dq
            + d_pp d2W/dp2 + d_qq d2W/dq2   [+ 2 d_pq d2W/dqdp]

on a uniform cell-centered grid.  Spatial derivatives are second-order
centered stencils with zero-Dirichlet ghost cells (an optional
first-order upwind variant exists for the advective part); time stepping
is classic RK4 with a CFL-bounded step.  This route exists to
cross-check the moment ODEs, so runs are deliberately capped to a few
relaxation times; the analytic path owns the asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import (DiffusionCoefficients, InitialGaussian, ModelParams,
                    MomentState, gibbs_coefficients, initial_covariance)
from .moments import MomentTrajectory, asymptotic_covariance, evolve
from .states import wigner_at


class FPError(RuntimeError):
    """Grid construction or stability failure of the phase-space solver."""


@dataclass(frozen=True)
class GridSpec:
    """Requested grid geometry: half-width in units of the worst-case
    standard deviation, and point counts per axis."""

    box_sigmas: float = 8.0
    nq: int = 256
    np: int = 256


@dataclass(frozen=True)
class FPScheme:
    advection: str = "centered"          # "centered" | "upwind"
    cfl_safety: float = 0.4
    cross_term: bool = False             # mixed-derivative stencil for d_pq

    def __post_init__(self):
        if self.advection not in ("centered", "upwind"):
            raise ValueError(f"unknown advection scheme {self.advection!r}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")


@dataclass
class PhaseGrid:
    """Uniform cell-centered phase-space grid with the W values on it."""

    q_min: float
    q_max: float
    p_min: float
    p_max: float
    nq: int
    np: int
    values: np.ndarray = field(repr=False)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.nq

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.np

    @property
    def q_centers(self) -> np.ndarray:
        return self.q_min + self.dq * (np.arange(self.nq) + 0.5)

    @property
    def p_centers(self) -> np.ndarray:
        return self.p_min + self.dp * (np.arange(self.np) + 0.5)

    def mass(self) -> float:
        return float(self.values.sum() * self.dq * self.dp)

    def copy(self) -> "PhaseGrid":
        return replace(self, values=self.values.copy())


@dataclass
class FPRun:
    """Result of a phase-space run: grid snapshots, the extracted moment
    trajectory, and bookkeeping.  ``valid`` is False when the mass drift
    exceeded its bound (the data is still returned for inspection)."""

    snapshots: list[tuple[float, PhaseGrid]]
    moments: MomentTrajectory
    mass_drift: float
    dt: float
    n_steps: int
    valid: bool


def _rotation_envelope(state: MomentState, m_omega: float) -> tuple[float, float]:
    # Largest eigenvalue of the covariance in scaled coordinates bounds
    # sqq(t) and spp(t)/(m omega)^2 under free rotation.
    a = state.sqq
    b = state.spp / m_omega ** 2
    c = state.spq / m_omega
    half_tr = 0.5 * (a + b)
    disc = math.sqrt(max(0.0, half_tr * half_tr - (a * b - c * c)))
    lam_max = half_tr + disc
    return lam_max, lam_max * m_omega ** 2


def build_grid(params: ModelParams, init: InitialGaussian,
               spec: GridSpec = GridSpec()) -> PhaseGrid:
    """Symmetric grid sized so every Gaussian reached over the horizon
    keeps at least ~(box_sigmas - few) standard deviations of clearance:
    the bound combines the free-rotation envelope of the initial
    covariance, the asymptotic covariance (when lam > 0), and the
    centroid excursion.  Initialized with the initial-state Wigner
    function; raises FPError when the discrete mass differs from 1 by
    more than 1e-6 (box too small for the requested horizon).
    """
    if spec.box_sigmas < 6:
        raise ValueError(f"box_sigmas must be >= 6, got {spec.box_sigmas}")
    if spec.nq < 16 or spec.np < 16:
        raise ValueError("grid needs at least 16 points per axis")

    state0 = initial_covariance(init, params)
    m_omega = params.m * params.omega
    qvar, pvar = _rotation_envelope(state0, m_omega)
    if params.lam > 0:
        inf_state = asymptotic_covariance(params)
        qvar = max(qvar, inf_state.sqq)
        pvar = max(pvar, inf_state.spp)
    amp_q = math.hypot(init.q0, init.p0 / m_omega)
    amp_p = math.hypot(init.p0, m_omega * init.q0)
    half_q = amp_q + spec.box_sigmas * math.sqrt(qvar)
    half_p = amp_p + spec.box_sigmas * math.sqrt(pvar)

    grid = PhaseGrid(q_min=-half_q, q_max=half_q, p_min=-half_p, p_max=half_p,
                     nq=spec.nq, np=spec.np,
                     values=np.zeros((spec.nq, spec.np)))
    grid.values = wigner_at(state0, params,
                            grid.q_centers[:, None], grid.p_centers[None, :])
    mass = grid.mass()
    if abs(mass - 1.0) > 1e-6:
        raise FPError(f"box too small for the requested horizon: "
                      f"initial mass {mass!r} deviates from 1 by more than 1e-6")
    return grid


def fp_rhs(grid: PhaseGrid, params: ModelParams, coeffs: DiffusionCoefficients,
           scheme: FPScheme = FPScheme()) -> np.ndarray:
    """Discrete right-hand side on the grid interior (ghost cells zero)."""
    w = grid.values
    dq, dp = grid.dq, grid.dp
    q = grid.q_centers[:, None]
    p = grid.p_centers[None, :]
    wp = np.pad(w, 1)

    w_qm, w_qp = wp[:-2, 1:-1], wp[2:, 1:-1]
    w_pm, w_pp_ = wp[1:-1, :-2], wp[1:-1, 2:]

    v_q = p / params.m                       # dq/dt of the underlying flow
    v_p = -params.m * params.omega ** 2 * q  # dp/dt
    if scheme.advection == "centered":
        adv = -v_q * (w_qp - w_qm) / (2.0 * dq) - v_p * (w_pp_ - w_pm) / (2.0 * dp)
    else:
        ddq = np.where(v_q > 0, (w - w_qm) / dq, (w_qp - w) / dq)
        ddp = np.where(v_p > 0, (w - w_pm) / dp, (w_pp_ - w) / dp)
        adv = -v_q * ddq - v_p * ddp

    # dissipative divergence terms; the padded products keep F = 0 ghosts
    fq = np.pad(q * w, 1)
    fp_ = np.pad(p * w, 1)
    div = ((params.lam - params.mu) * (fq[2:, 1:-1] - fq[:-2, 1:-1]) / (2.0 * dq)
           + (params.lam + params.mu) * (fp_[1:-1, 2:] - fp_[1:-1, :-2]) / (2.0 * dp))

    diff = (coeffs.d_qq * (w_qp - 2.0 * w + w_qm) / dq ** 2
            + coeffs.d_pp * (w_pp_ - 2.0 * w + w_pm) / dp ** 2)
    if scheme.cross_term and coeffs.d_pq != 0.0:
        mixed = (wp[2:, 2:] - wp[2:, :-2] - wp[:-2, 2:] + wp[:-2, :-2]) / (4.0 * dq * dp)
        diff = diff + 2.0 * coeffs.d_pq * mixed

    return adv + div + diff


def cfl_time_step(grid: PhaseGrid, params: ModelParams,
                  coeffs: DiffusionCoefficients, scheme: FPScheme) -> float:
    """Largest allowed step: cfl_safety times the most restrictive of the
    advective and diffusive stability bounds."""
    q_ext = max(abs(grid.q_min), abs(grid.q_max))
    p_ext = max(abs(grid.p_min), abs(grid.p_max))
    v_q = p_ext / params.m + abs(params.lam - params.mu) * q_ext
    v_p = params.m * params.omega ** 2 * q_ext + (params.lam + params.mu) * p_ext
    bounds = []
    if v_q > 0:
        bounds.append(grid.dq / v_q)
    if v_p > 0:
        bounds.append(grid.dp / v_p)
    if coeffs.d_qq > 0:
        bounds.append(grid.dq ** 2 / (2.0 * coeffs.d_qq))
    if coeffs.d_pp > 0:
        bounds.append(grid.dp ** 2 / (2.0 * coeffs.d_pp))
    if not bounds:
        raise FPError("degenerate problem: no advection and no diffusion")
    return scheme.cfl_safety * min(bounds)


def run_fp(params: ModelParams, init: InitialGaussian,
           grid_spec: GridSpec = GridSpec(), t_end: float = 1.0,
           snapshot_times=None, scheme: FPScheme = FPScheme(),
           coeffs: DiffusionCoefficients | None = None,
           mass_tol: float = 1e-3,
           max_relaxations: float | None = 5.0) -> FPRun:
    """Integrate the transport equation to ``t_end``.

    Moments are extracted at every snapshot time (default: 0 and t_end).
    Horizons beyond ``max_relaxations/lam`` are refused, since explicit
    stepping to the asymptotic regime is wasteful; pass
    ``max_relaxations=None`` to override deliberately.
    """
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if (max_relaxations is not None and params.lam > 0
            and t_end > max_relaxations / params.lam * (1.0 + 1e-12)):
        raise FPError(
            f"t_end={t_end:g} exceeds {max_relaxations:g}/lam="
            f"{max_relaxations / params.lam:g}; use the moment routes for "
            f"asymptotics or pass max_relaxations=None")
    if coeffs is None:
        coeffs = gibbs_coefficients(params)
    if snapshot_times is None:
        snapshot_times = [0.0, t_end]
    times = [float(t) for t in snapshot_times]
    if times != sorted(times) or times[0] < 0 or times[-1] > t_end * (1 + 1e-12):
        raise ValueError("snapshot_times must be sorted within [0, t_end]")

    grid = build_grid(params, init, grid_spec)
    dt_max = cfl_time_step(grid, params, coeffs, scheme)

    def step(w: np.ndarray, h: float) -> np.ndarray:
        g = replace(grid, values=w)
        k1 = fp_rhs(g, params, coeffs, scheme)
        g.values = w + 0.5 * h * k1
        k2 = fp_rhs(g, params, coeffs, scheme)
        g.values = w + 0.5 * h * k2
        k3 = fp_rhs(g, params, coeffs, scheme)
        g.values = w + h * k3
        k4 = fp_rhs(g, params, coeffs, scheme)
        return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    w = grid.values
    t_now = 0.0
    n_steps = 0
    mass0 = grid.mass()
    mass_drift = 0.0
    snapshots: list[tuple[float, PhaseGrid]] = []
    samples: list[MomentState] = []
    for t_snap in times:
        span = t_snap - t_now
        if span > 0:
            n = max(1, math.ceil(span / dt_max))
            h = span / n
            for _ in range(n):
                w = step(w, h)
            t_now = t_snap
            n_steps += n
        snap = replace(grid, values=w.copy())
        snapshots.append((t_snap, snap))
        samples.append(extract_moments(snap, t=t_snap))
        mass_drift = max(mass_drift, abs(snap.mass() - mass0))

    traj = MomentTrajectory(samples=tuple(samples),
                            meta={"engine": "fp", "dt": dt_max, "n_steps": n_steps})
    return FPRun(snapshots=snapshots, moments=traj, mass_drift=mass_drift,
                 dt=dt_max, n_steps=n_steps, valid=mass_drift <= mass_tol)


def extract_moments(grid: PhaseGrid, t: float = 0.0) -> MomentState:
    """First and second central moments of the grid values by discrete
    midpoint sums, normalized by the current mass."""
    w = grid.values
    cell = grid.dq * grid.dp
    mass = float(w.sum()) * cell
    if mass <= 0:
        raise FPError(f"non-positive mass {mass!r} on grid")
    q = grid.q_centers[:, None]
    p = grid.p_centers[None, :]
    mq = float((q * w).sum()) * cell / mass
    mp = float((p * w).sum()) * cell / mass
    dq_ = q - mq
    dp_ = p - mp
    sqq = float((dq_ * dq_ * w).sum()) * cell / mass
    spp = float((dp_ * dp_ * w).sum()) * cell / mass
    spq = float((dq_ * dp_ * w).sum()) * cell / mass
    return MomentState(t=t, sq=mq, sp=mp, sqq=sqq, spp=spp, spq=spq)


def l1_distance(grid: PhaseGrid, reference: np.ndarray) -> float:
    """Discrete L1 norm of (values - reference) over the grid."""
    return float(np.abs(grid.values - reference).sum() * grid.dq * grid.dp)


def convergence_study(params: ModelParams, init: InitialGaussian, t_end: float,
                      sizes=(128, 256, 512), box_sigmas: float = 8.0,
                      scheme: FPScheme = FPScheme()) -> dict:
    """Grid-refinement study against the moment-ODE route.

    For each n in ``sizes`` runs an n x n grid to ``t_end``, records the
    L1 distance to the Gaussian built from the ODE moments and the
    relative deviations of the extracted second moments.  Returns
    ``{"rows": [...], "ratios": [...]}`` where ratios are successive L1
    shrink factors (expect ~4 for a second-order scheme under 2x
    refinement).
    """
    ode_end = evolve(initial_covariance(init, params), params,
                     [0.0, t_end]).samples[-1]
    scale = math.sqrt(ode_end.sqq * ode_end.spp)
    rows = []
    for n in sizes:
        run = run_fp(params, init, GridSpec(box_sigmas=box_sigmas, nq=n, np=n),
                     t_end=t_end)
        t_last, snap = run.snapshots[-1]
        ref = wigner_at(ode_end, params,
                        snap.q_centers[:, None], snap.p_centers[None, :])
        got = run.moments.samples[-1]
        rows.append({
            "n": n,
            "l1_error": l1_distance(snap, ref),
            "dev_sqq": abs(got.sqq - ode_end.sqq) / ode_end.sqq,
            "dev_spp": abs(got.spp - ode_end.spp) / ode_end.spp,
            "dev_spq": abs(got.spq - ode_end.spq) / scale,
            "mass_drift": run.mass_drift,
            "valid": run.valid,
        })
    ratios = [rows[k]["l1_error"] / rows[k + 1]["l1_error"]
              for k in range(len(rows) - 1)]
    return {"rows": rows, "ratios": ratios}


def write_snapshot_csv(path, grid: PhaseGrid, t: float) -> None:
    """Grid values as CSV, one q-row per line, with a geometry header."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# nq={grid.nq} np={grid.np} "
                 f"q_min={grid.q_min:.17g} q_max={grid.q_max:.17g} "
                 f"p_min={grid.p_min:.17g} p_max={grid.p_max:.17g} t={t:.17g}\n")
        for row in grid.values:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def read_snapshot_csv(path) -> tuple[PhaseGrid, float]:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing snapshot header")
        fields = dict(item.split("=") for item in header[1:].split())
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = PhaseGrid(q_min=float(fields["q_min"]), q_max=float(fields["q_max"]),
                     p_min=float(fields["p_min"]), p_max=float(fields["p_max"]),
                     nq=int(fields["nq"]), np=int(fields["np"]), values=values)
    if grid.values.shape != (grid.nq, grid.np):
        raise ValueError(f"{path}: value block shape {grid.values.shape} does not "
                         f"match header ({grid.nq}, {grid.np})")
    return grid, float(fields["t"])
