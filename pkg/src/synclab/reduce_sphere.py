"""Stereographic reduction of the unfrustrated sphere flow.

Projecting the ensemble from the reference particle x_N onto the hyperplane
orthogonal to it, y_j = x_N + 2 (x_j - x_N)/||x_j - x_N||^2, turns the flow
dx_j = (kappa/N) sum_k (x_k - <x_j, x_k> x_j) into a coupled system for
(y_1..y_{N-1}, x_N), which in turn collapses onto three low-dimensional
quantities: a scaling a(t) > 0, a translation b(t) in the hyperplane, and an
orthogonal matrix M(t), with

    y_i(t) = M(t) (a(t) y_i(0) + b(t)),      x_N(t) = M(t) x_N(0).

The reduction is implemented for V = I only (the stated reduced systems
carry no frustration) and for pairwise-distinct initial data (multiplicity
m = 1 at the reference).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoint, IntegrationError, PassedThroughProjectionPoint
from dataclasses import replace as _replace

from .integrate import (
    IntegratorSettings,
    Projection,
    _integrate_array,
    integrate,
    polar_factor,
)
from .state import SphereConfig

COINCIDENCE_TOL = 1e-12
BLOWUP_LIMIT = 1e12


def sphere_stereo_project(x_j: np.ndarray, x_n: np.ndarray) -> np.ndarray:
    """y = x_N + 2 (x_j - x_N)/||x_j - x_N||^2, a point of the hyperplane
    orthogonal to x_N.  Raises CoincidentPoint at the projection pole."""
    x_j = np.asarray(x_j, dtype=float)
    x_n = np.asarray(x_n, dtype=float)
    diff = x_j - x_n
    d2 = float(diff @ diff)
    if d2 < COINCIDENCE_TOL ** 2:
        raise CoincidentPoint("cannot project the reference point itself")
    return x_n + (2.0 / d2) * diff


def sphere_stereo_invert(y_j: np.ndarray, x_n: np.ndarray) -> np.ndarray:
    """Inverse map back to the sphere:
    x = 2y/(1+||y||^2) + (||y||^2 - 1)/(1+||y||^2) x_N.  Requires y _|_ x_N."""
    y_j = np.asarray(y_j, dtype=float)
    x_n = np.asarray(x_n, dtype=float)
    if abs(float(y_j @ x_n)) > 1e-8 * max(1.0, float(np.linalg.norm(y_j))):
        raise ValueError("y must be orthogonal to the reference point")
    n2 = float(y_j @ y_j)
    return (2.0 * y_j + (n2 - 1.0) * x_n) / (1.0 + n2)


def project_all(x: np.ndarray) -> np.ndarray:
    """Project rows x[0..N-2] relative to the reference x[N-1]."""
    x = np.asarray(x, dtype=float)
    return np.array([sphere_stereo_project(xi, x[-1]) for xi in x[:-1]])


@dataclass(frozen=True)
class ProjectedSphereData:
    """Frozen projected initial data: N-1 points of the hyperplane
    orthogonal to the initial reference x_N(0)."""

    y0: np.ndarray
    x_n0: np.ndarray
    kappa: float

    @property
    def n(self) -> int:
        return self.y0.shape[0] + 1

    @property
    def dim(self) -> int:
        return self.x_n0.size


def project_sphere_config(cfg: SphereConfig) -> ProjectedSphereData:
    """Requires pairwise-distinct points (the reduction is restricted to
    multiplicity one at the reference) and V = I, Omega = 0."""
    x = cfg.x
    diff = x[:, None, :] - x[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    iu = np.triu_indices(x.shape[0], k=1)
    if np.any(dist[iu] < COINCIDENCE_TOL):
        raise CoincidentPoint("initial sphere points must be pairwise distinct")
    if cfg.a != 1.0 or np.any(cfg.w != 0.0) or np.any(cfg.omega != 0.0):
        raise ValueError("the sphere reduction is certified for V = I, Omega = 0 only")
    return ProjectedSphereData(y0=project_all(x), x_n0=x[-1].copy(),
                               kappa=cfg.kappa)


# ---------------------------------------------------------------------------
# the projected N-1 body system


@dataclass
class StereoTrajectory:
    times: np.ndarray
    y: np.ndarray      # (T, N-1, d+1)
    x_n: np.ndarray    # (T, d+1)
    data: ProjectedSphereData


def _stereo_rhs(state: np.ndarray, kappa: float, n: int) -> np.ndarray:
    ys = state[:-1]
    x_n = state[-1]
    norm2 = np.sum(ys * ys, axis=1)
    w = 1.0 / (1.0 + norm2)
    drift = 2.0 * (w[:, None] * ys).sum(axis=0)       # sum 2 y_j/(1+|y_j|^2)
    radial = 1.0 + np.sum((norm2 - 1.0) * w)
    inner = (ys @ ys.T * w[None, :]).sum(axis=1)      # sum_j <y_i,y_j>/(1+|y_j|^2)
    dys = (kappa / n) * (drift[None, :] + radial * ys - 2.0 * inner[:, None] * x_n[None, :])
    dx_n = (kappa / n) * drift
    return np.vstack([dys, dx_n[None, :]])


def integrate_stereo_full(data: ProjectedSphereData, settings: IntegratorSettings,
                          t_final: float) -> StereoTrajectory:
    """Integrate the coupled (y, x_N) system.

    ||x_N|| = 1 and <y_i, x_N> = 0 are re-imposed after every step; a
    projected point running past 1e12 in norm aborts the run (the particle
    passed through the projection point of the chart).
    """
    kappa, n = data.kappa, data.n
    state0 = np.vstack([data.y0, data.x_n0[None, :]])

    def project(state):
        ys = state[:-1]
        x_n = state[-1] / np.linalg.norm(state[-1])
        ys = ys - np.outer(ys @ x_n, x_n)
        return np.vstack([ys, x_n[None, :]])

    def postcheck(state):
        if np.max(np.abs(state[:-1])) > BLOWUP_LIMIT:
            raise PassedThroughProjectionPoint(
                "a projected point exceeded 1e12; the chart broke down")

    times, states = _integrate_array(
        lambda s: _stereo_rhs(s, kappa, n), state0, settings, t_final,
        project=project, postcheck=postcheck)
    states = np.array(states)
    return StereoTrajectory(times=np.array(times), y=states[:, :-1],
                            x_n=states[:, -1], data=data)


# ---------------------------------------------------------------------------
# the (a, b, M) system


@dataclass
class ReducedSphereTrajectory:
    times: np.ndarray
    a: np.ndarray      # (T,)
    b: np.ndarray      # (T, d+1)
    m: np.ndarray      # (T, d+1, d+1)
    data: ProjectedSphereData


def _abm_rhs(state: np.ndarray, data: ProjectedSphereData,
             update_m: bool) -> np.ndarray:
    dim = data.dim
    a = state[0]
    b = state[1:1 + dim]
    yk = a * data.y0 + b[None, :]
    norm2 = np.sum(yk * yk, axis=1)
    w = 1.0 / (1.0 + norm2)
    kappa, n = data.kappa, data.n
    da = (kappa / n) * (1.0 + np.sum((norm2 - 1.0) * w)) * a
    db = kappa * b + (kappa / n) * 2.0 * a * (w[:, None] * data.y0).sum(axis=0)
    out = np.empty_like(state)
    out[0] = da
    out[1:1 + dim] = db
    if update_m:
        m = state[1 + dim:].reshape(dim, dim)
        z = (kappa / n) * 2.0 * (w[:, None] * yk).sum(axis=0)
        ell = np.outer(z, data.x_n0) - np.outer(data.x_n0, z)
        out[1 + dim:] = (m @ ell).ravel()
    else:
        out[1 + dim:] = 0.0
    return out


def integrate_abM(data: ProjectedSphereData, settings: IntegratorSettings,
                  t_final: float, update_m: bool = True) -> ReducedSphereTrajectory:
    """Integrate the (a, b, M) system from (1, 0, I).

    M is re-orthogonalized through its polar factor after every step (drift
    in M would contaminate reconstruction comparisons) and b is re-projected
    onto the hyperplane orthogonal to x_N(0).  The (a, b) equations do not
    involve M, so ``update_m=False`` freezes M at the identity without
    changing them.  A nonpositive a signals integrator failure: the exact
    flow keeps a > 0.
    """
    dim = data.dim
    state0 = np.concatenate([[1.0], np.zeros(dim), np.eye(dim).ravel()])

    def project(state):
        out = state.copy()
        b = out[1:1 + dim]
        out[1:1 + dim] = b - (b @ data.x_n0) * data.x_n0
        if update_m:
            m = out[1 + dim:].reshape(dim, dim)
            out[1 + dim:] = polar_factor(m).ravel()
        return out

    def postcheck(state):
        if state[0] <= 0.0:
            raise IntegrationError("scaling factor a lost positivity")

    times, states = _integrate_array(
        lambda s: _abm_rhs(s, data, update_m), state0, settings, t_final,
        project=project, postcheck=postcheck)
    states = np.array(states)
    return ReducedSphereTrajectory(
        times=np.array(times), a=states[:, 0], b=states[:, 1:1 + dim],
        m=states[:, 1 + dim:].reshape(-1, dim, dim), data=data)


def reconstruct_abM(reduced: ReducedSphereTrajectory) -> tuple[np.ndarray, np.ndarray]:
    """y_i(t) = M(t)(a(t) y_i(0) + b(t)) and x_N(t) = M(t) x_N(0)."""
    data = reduced.data
    y = np.einsum("tab,tkb->tka",
                  reduced.m,
                  reduced.a[:, None, None] * data.y0[None, :, :]
                  + reduced.b[:, None, :])
    x_n = np.einsum("tab,b->ta", reduced.m, data.x_n0)
    return y, x_n


def rho_squared_reduced(a: float, b: np.ndarray, data: ProjectedSphereData) -> float:
    """Squared order parameter from the reduced variables alone: M drops out
    of every Euclidean quantity."""
    yk = a * data.y0 + b[None, :]
    norm2 = np.sum(yk * yk, axis=1)
    w = 1.0 / (1.0 + norm2)
    tangential = 2.0 * (w[:, None] * yk).sum(axis=0)
    radial = 1.0 + np.sum((norm2 - 1.0) * w)
    return float((tangential @ tangential + radial ** 2) / data.n ** 2)


# ---------------------------------------------------------------------------
# whole-chain comparison


@dataclass
class SphereReductionReport:
    full_vs_stereo: float
    stereo_vs_abm: float
    full_vs_abm: float
    m_orthogonality: float
    a_min: float
    b_orthogonality: float
    inner_product_law_residual: float
    rho_consistency: float

    @property
    def three_way_max(self) -> float:
        return max(self.full_vs_stereo, self.stereo_vs_abm, self.full_vs_abm)


def reduction_chain_report(cfg: SphereConfig, settings: IntegratorSettings,
                           t_final: float) -> SphereReductionReport:
    """Co-integrate the full flow, the projected system, and the (a, b, M)
    system on one grid; report every pairwise discrepancy plus the
    structural invariants of the reduced representation."""
    data = project_sphere_config(cfg)
    full = integrate(cfg, _replace(settings, projection=Projection.NORMALIZE),
                     t_final)
    stereo = integrate_stereo_full(data, settings, t_final)
    reduced = integrate_abM(data, settings, t_final)
    y_abm, xn_abm = reconstruct_abM(reduced)

    err_fs = err_sa = err_fa = 0.0
    for idx in range(len(full.times)):
        xs = full.states[idx]
        y_full = project_all(xs)
        err_fs = max(err_fs, float(np.max(np.abs(y_full - stereo.y[idx]))),
                     float(np.max(np.abs(xs[-1] - stereo.x_n[idx]))))
        err_sa = max(err_sa, float(np.max(np.abs(stereo.y[idx] - y_abm[idx]))),
                     float(np.max(np.abs(stereo.x_n[idx] - xn_abm[idx]))))
        err_fa = max(err_fa, float(np.max(np.abs(y_full - y_abm[idx]))),
                     float(np.max(np.abs(xs[-1] - xn_abm[idx]))))

    eye = np.eye(data.dim)
    m_orth = float(np.max(np.linalg.norm(
        np.swapaxes(reduced.m, 1, 2) @ reduced.m - eye, axis=(1, 2))))
    b_orth = float(np.max(np.abs(reduced.b @ data.x_n0)))

    # difference inner products scale by a(t)^2: <y_i-y_j, y_k-y_l>(t)
    law = 0.0
    nm1 = data.n - 1
    if nm1 >= 2:
        quads = [(i, j, k, l) for i in range(nm1) for j in range(nm1)
                 for k in range(nm1) for l in range(nm1) if i != j and k != l]
        d0 = {(i, j): data.y0[i] - data.y0[j] for i in range(nm1) for j in range(nm1)}
        base = {q: float(d0[(q[0], q[1])] @ d0[(q[2], q[3])]) for q in quads}
        for idx in (len(full.times) - 1, len(full.times) // 2):
            yt = stereo.y[idx]
            a2 = reduced.a[idx] ** 2
            for q in quads:
                lhs = float((yt[q[0]] - yt[q[1]]) @ (yt[q[2]] - yt[q[3]]))
                law = max(law, abs(lhs - a2 * base[q]) / max(1.0, abs(lhs)))

    rho_dev = 0.0
    for idx in range(len(full.times)):
        from_points = float(np.linalg.norm(full.states[idx].mean(axis=0))) ** 2
        from_reduced = rho_squared_reduced(reduced.a[idx], reduced.b[idx], data)
        rho_dev = max(rho_dev, abs(from_points - from_reduced))

    return SphereReductionReport(
        full_vs_stereo=err_fs, stereo_vs_abm=err_sa, full_vs_abm=err_fa,
        m_orthogonality=m_orth, a_min=float(reduced.a.min()),
        b_orthogonality=b_orth, inner_product_law_residual=law,
        rho_consistency=rho_dev)


# ---------------------------------------------------------------------------
# aggregation certification


@dataclass
class SphereAggregationResult:
    hypothesis_ok: bool
    w_norm_op: float
    w_norm_fro: float
    initial_gap: float
    aggregated: bool
    final_max_distance: float
    fitted_rate: float
    predicted_rate: float
    rate_consistent: bool

    @property
    def verdict(self) -> str:
        if not self.hypothesis_ok:
            return "Unconditioned"
        return "Aggregated" if self.aggregated else "NotAggregated"


def sphere_aggregation_check(cfg: SphereConfig, t_final: float,
                             settings: IntegratorSettings | None = None,
                             distance_threshold: float = 1e-4) -> SphereAggregationResult:
    """Run the frustrated sphere flow and certify complete aggregation.

    The hypothesis is ||W||_op < a together with
    max_{i,j}(1 - <x_i(0), x_j(0)>) < 1 - ||W||_op/a; the Frobenius norm is
    reported alongside since the certified inequality does not pin the norm
    down.  A log-linear fit of the aggregation diameter is compared with the
    Gronwall envelope rate 2 kappa (a - ||W||_op): the measured decay must
    reach at least half of it.
    """
    from .invariants import aggregation_diameter, max_pairwise_distance

    if settings is None:
        settings = IntegratorSettings(dt=1e-3, record_every=25)
    settings = _replace(settings, projection=Projection.NORMALIZE)
    w_op = float(np.linalg.norm(cfg.w, 2))
    w_fro = float(np.linalg.norm(cfg.w))
    gap0 = aggregation_diameter(cfg.x)
    hypothesis = (cfg.a > 0 and w_op < cfg.a and cfg.shared_omega is True
                  and gap0 < 1.0 - w_op / cfg.a)

    traj = integrate(cfg, settings, t_final)
    diam = np.array([aggregation_diameter(s) for s in traj.states])
    final_dist = max_pairwise_distance(traj.final_state)

    predicted = 2.0 * cfg.kappa * (cfg.a - w_op)
    fit_mask = (diam > 1e-24) & (diam < gap0 / 4.0) if gap0 > 0 else np.zeros_like(diam, bool)
    if np.count_nonzero(fit_mask) >= 2:
        slope = np.polyfit(traj.times[fit_mask], np.log(diam[fit_mask]), 1)[0]
        fitted = -float(slope)
    else:
        fitted = float("nan")
    consistent = bool(np.isfinite(fitted) and fitted >= 0.5 * predicted)

    return SphereAggregationResult(
        hypothesis_ok=bool(hypothesis), w_norm_op=w_op, w_norm_fro=w_fro,
        initial_gap=float(gap0), aggregated=bool(final_dist < distance_threshold),
        final_max_distance=float(final_dist), fitted_rate=fitted,
        predicted_rate=predicted, rate_consistent=consistent)
