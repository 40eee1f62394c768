"""Stereographic reduction of the identical-oscillator circle flow.

The sine-flavor flow dtheta_j = (kappa/N) sum_k sin(theta_k - theta_j + alpha)
projects, relative to the reference oscillator theta_N, onto points of the
real line x_j = (1 + cos b_j)/sin b_j with b_j = theta_j - theta_N.  The
projected points move by a common affine transformation, so the whole flow
collapses to two scalar functions (f, g) with x_j(t) = g(t) + f(t) x_j(0).

Oscillators coincident with theta_N at t = 0 stay coincident and are moved to
the trailing positions; the permutation is recorded so reconstruction reports
errors in the caller's original indexing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPhase, IntegrationError
from .integrate import IntegratorSettings, Trajectory, _integrate_array, integrate
from .invariants import order_parameter_R
from .state import Flavor, PhaseConfig, make_phase_config

COINCIDENCE_TOL = 1e-12


def _wrapped_difference(beta: float) -> float:
    """beta reduced to (-pi, pi]."""
    return float(np.mod(beta + np.pi, 2.0 * np.pi) - np.pi)


def stereo_project_phase(theta_j: float, theta_n: float) -> float:
    """Stereographic coordinate x = (1+cos b)/sin b = sin b/(1-cos b).

    The two closed forms are selected by comparing |1 - cos b| with |sin b|:
    the first is stable near b = +-pi/2, the second near b = pi.  Raises
    CoincidentPhase when theta_j = theta_n mod 2pi within 1e-12 (the map has
    a pole there).
    """
    beta = theta_j - theta_n
    if abs(_wrapped_difference(beta)) < COINCIDENCE_TOL:
        raise CoincidentPhase(f"phase difference {beta!r} is a projection pole")
    c, s = np.cos(beta), np.sin(beta)
    if abs(1.0 - c) > abs(s):
        return float(s / (1.0 - c))
    return float((1.0 + c) / s)


@dataclass(frozen=True)
class ProjectedPhaseData:
    """Frozen projected initial data of the reduction.

    x0 holds the N - m projected points in rearranged order, m counts the
    oscillators coincident with the reference (including the reference
    itself), and perm maps rearranged positions to original indices with the
    reference last.
    """

    x0: np.ndarray
    m: int
    kappa: float
    alpha: float
    perm: np.ndarray
    theta_ref0: float

    @property
    def n(self) -> int:
        return self.x0.size + self.m


def as_sine_alpha(cfg: PhaseConfig) -> float:
    """Frustration of the equivalent sine-flavor flow.

    cos(theta_j - theta_k + alpha) = sin(theta_k - theta_j + (pi/2 - alpha)),
    so a cosine configuration reduces with alpha_sine = pi/2 - alpha.
    """
    return cfg.alpha if cfg.flavor is Flavor.SINE else np.pi / 2.0 - cfg.alpha


def project_phase_config(cfg: PhaseConfig) -> ProjectedPhaseData:
    """Build the projected initial data, rearranging coincident oscillators
    to the trailing positions (they stay coincident by autonomy).

    The reduction is derived for identical oscillators; heterogeneous
    natural frequencies are rejected.
    """
    if np.ptp(cfg.nu) != 0.0:
        raise ValueError("the stereographic reduction requires identical frequencies")
    theta = cfg.theta
    n = theta.size
    ref = theta[-1]
    coincident = [j for j in range(n - 1)
                  if abs(_wrapped_difference(theta[j] - ref)) < COINCIDENCE_TOL]
    leading = [j for j in range(n - 1) if j not in coincident]
    perm = np.array(leading + coincident + [n - 1])
    x0 = np.array([stereo_project_phase(theta[j], ref) for j in leading])
    return ProjectedPhaseData(x0=x0, m=len(coincident) + 1, kappa=cfg.kappa,
                              alpha=as_sine_alpha(cfg), perm=perm,
                              theta_ref0=float(ref))


def ab_coefficients(x: np.ndarray, m: int, kappa: float,
                    alpha: float) -> tuple[float, float]:
    """The two coefficient functions driving dx_j = A + B x_j, for an
    ensemble of len(x) projected oscillators plus m coincident ones.

    Both satisfy |A| <= kappa and |B| <= kappa (Cauchy-Schwarz on the
    rational pair 2x/(x^2+1), (x^2-1)/(x^2+1)), which excludes finite-time
    blow-up of the reduced flow.
    """
    x = np.asarray(x, dtype=float)
    n = x.size + m
    c, s = np.cos(alpha), np.sin(alpha)
    t1 = 2.0 * x / (x * x + 1.0)
    t2 = (x * x - 1.0) / (x * x + 1.0)
    a = (kappa / n) * (m * s + np.sum(t1 * c + t2 * s))
    b = (kappa / n) * (m * c + np.sum(-t1 * s + t2 * c))
    return float(a), float(b)


@dataclass
class ReducedPhaseTrajectory:
    times: np.ndarray
    f: np.ndarray
    g: np.ndarray
    data: ProjectedPhaseData


def integrate_fg(data: ProjectedPhaseData, settings: IntegratorSettings,
                 t_final: float) -> ReducedPhaseTrajectory:
    """Integrate f' = B f, g' = A + B g from (f, g)(0) = (1, 0), evaluating
    the coefficients at the transported points f x0 + g.

    The a-priori bounds |f| <= e^{kappa t} and |g| <= e^{kappa t} - 1 are
    verified at record points; violation beyond 10% signals integrator
    failure.
    """
    x0, m, kappa, alpha = data.x0, data.m, data.kappa, data.alpha

    def rhs(fg):
        a, b = ab_coefficients(fg[0] * x0 + fg[1], m, kappa, alpha)
        return np.array([b * fg[0], a + b * fg[1]])

    times, states = _integrate_array(rhs, np.array([1.0, 0.0]), settings, t_final)
    times = np.array(times)
    states = np.array(states)
    f, g = states[:, 0], states[:, 1]
    envelope = np.exp(abs(kappa) * times)
    if np.any(np.abs(f) > envelope * 1.1) or np.any(np.abs(g) > (envelope - 1.0) * 1.1 + 1e-9):
        raise IntegrationError("reduced flow violated its a-priori bound by more than 10%")
    if np.any(f <= 0.0):
        raise IntegrationError("orientation factor f lost positivity")
    return ReducedPhaseTrajectory(times=times, f=f, g=g, data=data)


@dataclass
class PhaseReductionReport:
    max_error: float
    affine_identity_residual: float


def reconstruct_and_compare(full: Trajectory,
                            reduced: ReducedPhaseTrajectory) -> PhaseReductionReport:
    """Max over recorded times and oscillators of
    |g + f x_j(0) - project(theta_j(t), theta_N(t))|, in original indexing.

    Also verifies the affine cross-ratio identity
    (x_i - x_j)(t) (x_k(0) - x_l(0)) = (x_i(0) - x_j(0)) (x_k - x_l)(t)
    over all index pairs, normalized by the largest term.
    """
    data = reduced.data
    if len(full.times) != len(reduced.times) or \
            float(np.max(np.abs(np.array(full.times) - reduced.times))) > 1e-12:
        raise ValueError("full and reduced trajectories use different time grids")
    lead = data.perm[: data.x0.size]
    max_err = 0.0
    max_identity = 0.0
    x0 = data.x0
    diffs0 = x0[:, None] - x0[None, :]
    for idx in range(len(reduced.times)):
        theta = full.states[idx]
        ref = theta[-1]
        xt = np.array([stereo_project_phase(theta[j], ref) for j in lead])
        recon = reduced.g[idx] + reduced.f[idx] * x0
        max_err = max(max_err, float(np.max(np.abs(recon - xt))) if xt.size else 0.0)
        if xt.size >= 2:
            diffs_t = xt[:, None] - xt[None, :]
            lhs = diffs_t[:, :, None, None] * diffs0[None, None, :, :]
            rhs = diffs0[:, :, None, None] * diffs_t[None, None, :, :]
            scale = max(1.0, float(np.max(np.abs(lhs))))
            max_identity = max(max_identity,
                               float(np.max(np.abs(lhs - rhs))) / scale)
    return PhaseReductionReport(max_error=max_err,
                                affine_identity_residual=max_identity)


def co_integrate(cfg: PhaseConfig, settings: IntegratorSettings,
                 t_final: float) -> PhaseReductionReport:
    """Integrate the full flow and the reduced flow on the same grid and
    compare.  The full system is integrated on the rearranged ordering so
    the reference oscillator sits last."""
    data = project_phase_config(cfg)
    full_cfg = make_phase_config(cfg.theta[data.perm], cfg.nu[data.perm],
                                 cfg.kappa, data.alpha, Flavor.SINE)
    full = integrate(full_cfg, settings, t_final)
    reduced = integrate_fg(data, settings, t_final)
    return reconstruct_and_compare(full, reduced)


# ---------------------------------------------------------------------------
# asymptotic dichotomy


@dataclass(frozen=True)
class DichotomyResult:
    verdict: str                 # "SyncR1" | "IncoherenceR0" | "Inconclusive"
    r_final: float
    precondition_ok: bool
    total_phase_monotone: bool


def dichotomy_check(theta0: np.ndarray, alpha: float, kappa: float,
                    t_final: float, eps: float = 1e-3,
                    settings: IntegratorSettings | None = None) -> DichotomyResult:
    """Classify the long-run order parameter of the frustrated cosine flow.

    Branch SyncR1 requires alpha in (0, pi/2) with initial diameter below
    2 alpha; branch IncoherenceR0 requires alpha in (-pi/2, 0) with pairwise
    distinct phases.  A violated precondition is reported but the run still
    proceeds (Inconclusive is then an admissible outcome).
    """
    theta0 = np.asarray(theta0, dtype=float)
    if settings is None:
        settings = IntegratorSettings(dt=1e-2, record_every=10)
    precondition_ok = True
    if alpha > 0:
        spread = float(theta0.max() - theta0.min()) if theta0.size else 0.0
        precondition_ok = 0 < alpha < np.pi / 2 and spread < 2 * alpha
    elif alpha < 0:
        wrapped = np.mod(theta0, 2.0 * np.pi)
        distinct = len(np.unique(np.round(wrapped, 12))) == theta0.size
        precondition_ok = -np.pi / 2 < alpha < 0 and distinct
    cfg = make_phase_config(theta0, 0.0, kappa, alpha, Flavor.COSINE)
    traj = integrate(cfg, settings, t_final)
    sums = traj.states.sum(axis=1)
    monotone = bool(np.all(np.diff(sums) >= -1e-9))
    r_final, _ = order_parameter_R(traj.final_state)
    if r_final > 1.0 - eps:
        verdict = "SyncR1"
    elif r_final < eps:
        verdict = "IncoherenceR0"
    else:
        verdict = "Inconclusive"
    return DichotomyResult(verdict=verdict, r_final=r_final,
                           precondition_ok=precondition_ok,
                           total_phase_monotone=monotone)
