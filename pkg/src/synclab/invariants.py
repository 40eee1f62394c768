"""Conserved and monotone functionals of the three flows, with drift reports.

The registry at the bottom names every functional the toolkit certifies;
scenario checks and the CLI refer to functionals by those names.  Drift is
measured relative to max(|value at t=0|, 1e-8) so functionals legitimately
near zero do not blow up the relative measure; the frustrated circle
functional is evaluated in log space to avoid overflow of its exponential
factor on long runs.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .errors import DegenerateDenominator, SingularDifference, ZeroFactor
from .integrate import Trajectory
from .state import Config, PhaseConfig, SphereConfig, UnitaryConfig

REL_FLOOR = 1e-8
DEGENERACY_EPS = 1e-14


# ---------------------------------------------------------------------------
# circle functionals


def functional_I(theta: np.ndarray) -> float:
    """Cyclic product of half-angle sines, prod_i sin((theta_{i+1}-theta_i)/2),
    with theta_{N+1} = theta_1.  Conserved by the unfrustrated cosine flow."""
    theta = np.asarray(theta, dtype=float)
    return float(np.prod(np.sin((np.roll(theta, -1) - theta) / 2.0)))


def functional_J_alpha(theta: np.ndarray, alpha: float) -> float:
    """I(theta) * exp(tan(alpha) * sum theta); conserved for |alpha| < pi/2.

    Overflows for large total phase; long-run drift measurement goes through
    :func:`functional_J_alpha_log` instead.
    """
    _check_j_alpha(alpha)
    theta = np.asarray(theta, dtype=float)
    return functional_I(theta) * float(np.exp(np.tan(alpha) * theta.sum()))


def functional_J_alpha_log(theta: np.ndarray, alpha: float) -> tuple[float, float]:
    """(sign, log magnitude) of the frustrated invariant.

    sign(I) together with log|I| + tan(alpha) * sum(theta); sign is 0 when
    some adjacent pair coincides exactly.
    """
    _check_j_alpha(alpha)
    theta = np.asarray(theta, dtype=float)
    sines = np.sin((np.roll(theta, -1) - theta) / 2.0)
    sign = float(np.prod(np.sign(sines)))
    with np.errstate(divide="ignore"):
        logmag = float(np.sum(np.log(np.abs(sines))) + np.tan(alpha) * theta.sum())
    return sign, logmag


def _check_j_alpha(alpha: float):
    if abs(alpha) >= np.pi / 2 - 1e-9:
        raise ValueError("J_alpha is singular at |alpha| = pi/2 (tan blows up)")


def cross_ratio_K(theta: np.ndarray, a: int, b: int, c: int, d: int) -> float:
    """Half-angle-sine cross-ratio of four phases; conserved for all
    |alpha| <= pi/2 including the endpoints."""
    theta = np.asarray(theta, dtype=float)
    if theta.size < 4:
        raise ValueError("cross ratio needs at least four oscillators")
    if len({a, b, c, d}) != 4:
        raise ValueError("cross-ratio indices must be distinct")
    s = lambda p, q: np.sin((theta[p] - theta[q]) / 2.0)
    denom = s(a, c) * s(b, d)
    if abs(denom) < DEGENERACY_EPS:
        raise DegenerateDenominator(
            f"cross-ratio denominator {denom:.3e} below {DEGENERACY_EPS:g}")
    return float(s(a, b) * s(c, d) / denom)


def order_parameter_R(theta: np.ndarray) -> tuple[float, float]:
    """Kuramoto order parameter: R e^{i phi} = mean of e^{i theta_j}.

    phi is reported as 0 when R < 1e-14 (the phase is undefined there).
    """
    z = np.mean(np.exp(1j * np.asarray(theta, dtype=float)))
    r = float(np.abs(z))
    phi = float(np.angle(z)) if r >= 1e-14 else 0.0
    return r, phi


def phase_diameter(theta: np.ndarray) -> float:
    theta = np.asarray(theta, dtype=float)
    return float(theta.max() - theta.min())


# ---------------------------------------------------------------------------
# sphere functionals


def _pairwise_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def sphere_cross_ratio_H(x: np.ndarray, a: int, b: int, c: int, d: int) -> float:
    """Chord-length cross-ratio of four sphere points; conserved by the
    unfrustrated sphere flow with identical rotation matrices."""
    x = np.asarray(x, dtype=float)
    if len({a, b, c, d}) != 4:
        raise ValueError("cross-ratio indices must be distinct")
    l = lambda p, q: np.linalg.norm(x[p] - x[q])
    denom = l(a, c) * l(b, d)
    if denom < DEGENERACY_EPS:
        raise DegenerateDenominator(
            f"cross-ratio denominator {denom:.3e} below {DEGENERACY_EPS:g}")
    return float(l(a, b) * l(c, d) / denom)


def ptolemy_residual(x: np.ndarray, a: int, b: int, c: int, d: int) -> float:
    """l_ab l_cd + l_bc l_ad - l_ac l_bd; zero iff the four points are
    concyclic with that vertex order (Ptolemy equality and its converse)."""
    x = np.asarray(x, dtype=float)
    l = lambda p, q: np.linalg.norm(x[p] - x[q])
    return float(l(a, b) * l(c, d) + l(b, c) * l(a, d) - l(a, c) * l(b, d))


def sphere_order_parameter(x: np.ndarray) -> float:
    """rho = norm of the centroid, in [0, 1]."""
    return float(np.linalg.norm(np.mean(np.asarray(x, dtype=float), axis=0)))


def sphere_squared_diameter(x: np.ndarray) -> float:
    """D_M = sum over ordered pairs of squared chord distances."""
    return float(np.sum(_pairwise_distances(np.asarray(x, dtype=float)) ** 2))


def skew_frustration_product(x: np.ndarray) -> float:
    """prod_{i<j} ||x_i - x_j||; conserved by pure skew frustration (a = 0)."""
    x = np.asarray(x, dtype=float)
    dist = _pairwise_distances(x)
    iu = np.triu_indices(x.shape[0], k=1)
    factors = dist[iu]
    if np.any(factors < DEGENERACY_EPS):
        i = int(np.argmin(factors))
        raise ZeroFactor(
            f"pair {iu[0][i]},{iu[1][i]} coincides within {DEGENERACY_EPS:g}")
    return float(np.prod(factors))


def max_pairwise_distance(x: np.ndarray) -> float:
    return float(np.max(_pairwise_distances(np.asarray(x, dtype=float))))


def min_pairwise_distance(x: np.ndarray) -> float:
    dist = _pairwise_distances(np.asarray(x, dtype=float))
    iu = np.triu_indices(dist.shape[0], k=1)
    return float(np.min(dist[iu]))


def aggregation_diameter(x: np.ndarray) -> float:
    """max_{i,j} (1 - <x_i, x_j>), computed as squared chordal distance / 2
    to avoid cancellation once the ensemble is nearly aggregated."""
    return float(np.max(_pairwise_distances(np.asarray(x, dtype=float)) ** 2) / 2.0)


def affine_fit_residual(x: np.ndarray, m: int) -> float:
    """Largest singular value of the centered point matrix beyond the first m;
    zero iff the points lie in an m-dimensional affine subspace."""
    x = np.asarray(x, dtype=float)
    s = np.linalg.svd(x - x.mean(axis=0), compute_uv=False)
    return float(s[m:].max()) if s.size > m else 0.0


# ---------------------------------------------------------------------------
# matrix functionals


def matrix_diameter(u: np.ndarray) -> float:
    """D(U) = max Frobenius distance over pairs."""
    u = np.asarray(u, dtype=complex)
    diff = u[:, None] - u[None, :]
    return float(np.max(np.linalg.norm(diff, axis=(2, 3))))


def matrix_cross_ratio_spectrum(u: np.ndarray, i: int, j: int, k: int,
                                l: int) -> np.ndarray:
    """Eigenvalues of (U_i-U_k)(U_i-U_l)^{-1}(U_j-U_l)(U_j-U_k)^{-1},
    sorted lexicographically by (re, im).

    Requires i != l and j != k with both inverted differences
    well-conditioned (condition number below 1e12).
    """
    u = np.asarray(u, dtype=complex)
    if i == l or j == k:
        raise ValueError("need i != l and j != k")
    d_il = u[i] - u[l]
    d_jk = u[j] - u[k]
    for name, m in (("U_i - U_l", d_il), ("U_j - U_k", d_jk)):
        if np.linalg.cond(m) > 1e12:
            raise SingularDifference(f"{name} is numerically singular")
    c = (u[i] - u[k]) @ np.linalg.inv(d_il) @ (u[j] - u[l]) @ np.linalg.inv(d_jk)
    ev = np.linalg.eigvals(c)
    return np.array(sorted(ev, key=lambda z: (z.real, z.imag)))


def spectrum_matching_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between two eigenvalue multisets: the min-max matching over
    permutations (exact up to size 6, greedy beyond).

    A plain lexicographic sort is unstable when two eigenvalues share a real
    part (complex-conjugate pairs), so multiset comparison is used whenever a
    spectrum is compared across time.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("spectra have different sizes")
    n = a.size
    if n <= 6:
        best = np.inf
        for perm in itertools.permutations(range(n)):
            cand = max(abs(a[i] - b[p]) for i, p in enumerate(perm))
            best = min(best, cand)
        return float(best)
    remaining = list(range(n))
    worst = 0.0
    for i in range(n):
        jbest = min(remaining, key=lambda j: abs(a[i] - b[j]))
        worst = max(worst, abs(a[i] - b[jbest]))
        remaining.remove(jbest)
    return float(worst)


# ---------------------------------------------------------------------------
# model-dispatching diameter


def diameters(cfg: Config) -> float:
    """The model's diameter functional: phase spread D(Theta), summed squared
    chord distances D_M(X), or max pairwise Frobenius distance D(U)."""
    if isinstance(cfg, PhaseConfig):
        return phase_diameter(cfg.theta)
    if isinstance(cfg, SphereConfig):
        return sphere_squared_diameter(cfg.x)
    if isinstance(cfg, UnitaryConfig):
        return matrix_diameter(cfg.u)
    raise TypeError(f"not a model configuration: {type(cfg)!r}")


# ---------------------------------------------------------------------------
# observables and drift reports


class Kind(enum.Enum):
    CONSERVED = "conserved"
    CONSERVED_LOG = "conserved-log"
    NON_INCREASING = "non-increasing"
    NON_DECREASING = "non-decreasing"
    BOUNDED = "bounded"
    RECORD = "record"


@dataclass(frozen=True)
class Observable:
    """A named functional evaluated on (config, state)."""

    label: str
    kind: Kind
    fn: object  # callable(config, state) -> float | complex ndarray

    def series(self, traj: Trajectory) -> np.ndarray:
        return np.array([self.fn(traj.config, s) for s in traj.states])


def _indices_label(name: str, idx) -> str:
    return name + "_" + "_".join(str(i) for i in idx)


def make_observable(name: str, config: Config, indices=None,
                    kind: Kind | None = None) -> Observable:
    """Look up a registered functional by name.

    ``indices`` selects the oscillators for cross-ratio-type functionals.
    An unknown name raises ValueError.
    """
    label = name if indices is None else _indices_label(name, indices)
    idx = tuple(indices) if indices is not None else None

    def need_idx(n):
        if idx is None or len(idx) != n:
            raise ValueError(f"observable {name!r} needs {n} indices")

    if name == "kuramoto_I":
        ob = Observable(label, Kind.CONSERVED, lambda c, s: functional_I(s))
    elif name == "kuramoto_J":
        alpha = config.alpha if isinstance(config, PhaseConfig) else 0.0
        ob = Observable(label, Kind.CONSERVED_LOG,
                        lambda c, s: functional_J_alpha_log(s, alpha)[1])
    elif name == "kuramoto_K":
        need_idx(4)
        ob = Observable(label, Kind.CONSERVED, lambda c, s: cross_ratio_K(s, *idx))
    elif name == "order_R":
        ob = Observable(label, Kind.RECORD, lambda c, s: order_parameter_R(s)[0])
    elif name == "total_phase":
        ob = Observable(label, Kind.NON_DECREASING, lambda c, s: float(np.sum(s)))
    elif name == "phase_diameter":
        ob = Observable(label, Kind.RECORD, lambda c, s: phase_diameter(s))
    elif name == "sphere_H":
        need_idx(4)
        ob = Observable(label, Kind.CONSERVED,
                        lambda c, s: sphere_cross_ratio_H(s, *idx))
    elif name == "ptolemy":
        need_idx(4)
        ob = Observable(label, Kind.BOUNDED, lambda c, s: ptolemy_residual(s, *idx))
    elif name == "sphere_rho":
        ob = Observable(label, Kind.RECORD, lambda c, s: sphere_order_parameter(s))
    elif name == "sphere_rho_sq":
        ob = Observable(label, Kind.NON_DECREASING,
                        lambda c, s: sphere_order_parameter(s) ** 2)
    elif name == "sphere_DM":
        default = Kind.NON_INCREASING if config.kappa > 0 else Kind.NON_DECREASING
        ob = Observable(label, default, lambda c, s: sphere_squared_diameter(s))
    elif name == "pair_inner":
        need_idx(2)
        i, j = idx
        ob = Observable(label, Kind.CONSERVED, lambda c, s: float(s[i] @ s[j]))
    elif name == "pair_distance_product":
        ob = Observable(label, Kind.CONSERVED,
                        lambda c, s: skew_frustration_product(s))
    elif name == "matrix_D":
        ob = Observable(label, Kind.RECORD, lambda c, s: matrix_diameter(s))
    elif name == "matrix_cross_ratio":
        need_idx(4)
        ob = Observable(label, Kind.CONSERVED,
                        lambda c, s: matrix_cross_ratio_spectrum(s, *idx))
    else:
        raise ValueError(f"unknown functional name {name!r}")
    if kind is not None:
        ob = Observable(ob.label, kind, ob.fn)
    return ob


OBSERVABLE_NAMES = (
    "kuramoto_I", "kuramoto_J", "kuramoto_K", "order_R", "total_phase",
    "phase_diameter", "sphere_H", "ptolemy", "sphere_rho", "sphere_rho_sq",
    "sphere_DM", "pair_inner", "pair_distance_product", "matrix_D",
    "matrix_cross_ratio",
)


@dataclass
class DriftReport:
    """Deviation summary of one functional along one trajectory.

    For conserved functionals the deviations are against the t=0 value (the
    relative one normalized by max(|v0|, 1e-8)); for log-space functionals
    max_abs_dev is the max |delta log| and max_rel_dev = |expm1(delta log)|;
    for monotone functionals the deviations quantify the largest
    wrong-direction step; for bounded functionals they are the largest
    absolute value attained.  verdict is True iff the deviation relevant to
    the kind stays within ``tolerance``.
    """

    name: str
    kind: Kind
    v0: object
    max_abs_dev: float
    max_rel_dev: float
    tolerance: float
    verdict: bool

    def to_dict(self) -> dict:
        v0 = self.v0
        if isinstance(v0, np.ndarray):
            v0 = [[z.real, z.imag] for z in v0]
        elif isinstance(v0, complex):
            v0 = [v0.real, v0.imag]
        return {
            "name": self.name,
            "kind": self.kind.value,
            "v0": v0,
            "max_abs_dev": self.max_abs_dev,
            "max_rel_dev": self.max_rel_dev,
            "tolerance": self.tolerance,
            "verdict": "pass" if self.verdict else "fail",
        }


def _drift_one(ob: Observable, values: np.ndarray, tolerance: float) -> DriftReport:
    v0 = values[0]
    if ob.kind is Kind.CONSERVED:
        if values.ndim > 1:  # eigenvalue multisets: match, do not track branches
            devs = np.array([spectrum_matching_distance(values[0], v)
                             for v in values])
            scale = max(float(np.max(np.abs(v0))), REL_FLOOR)
        else:
            devs = np.abs(values - v0)
            scale = max(abs(float(np.real_if_close(v0))), REL_FLOOR)
        max_abs = float(devs.max())
        max_rel = max_abs / scale
        ok = max_rel < tolerance
    elif ob.kind is Kind.CONSERVED_LOG:
        dlog = np.abs(values - v0)
        max_abs = float(dlog.max())
        max_rel = float(np.max(np.abs(np.expm1(np.minimum(dlog, 700.0)))))
        ok = max_rel < tolerance
    elif ob.kind in (Kind.NON_INCREASING, Kind.NON_DECREASING):
        diffs = np.diff(values)
        wrong = np.maximum(diffs, 0.0) if ob.kind is Kind.NON_INCREASING \
            else np.maximum(-diffs, 0.0)
        max_abs = float(wrong.max()) if wrong.size else 0.0
        max_rel = max_abs / max(abs(float(v0)), REL_FLOOR)
        ok = max_abs <= tolerance
    elif ob.kind is Kind.BOUNDED:
        max_abs = float(np.max(np.abs(values)))
        max_rel = max_abs
        ok = max_abs < tolerance
    else:  # RECORD: nothing to verify
        max_abs = max_rel = 0.0
        ok = True
    return DriftReport(name=ob.label, kind=ob.kind, v0=v0, max_abs_dev=max_abs,
                       max_rel_dev=max_rel, tolerance=tolerance, verdict=ok)


def drift_report(traj: Trajectory, observables: list[Observable],
                 tolerance: float = 1e-6) -> list[DriftReport]:
    """Evaluate every observable at the recorded states and summarize drift.

    Requires at least two recorded states.  The per-kind semantics of the
    deviations are documented on :class:`DriftReport`.
    """
    if len(traj) < 2:
        raise ValueError("drift needs a trajectory with at least two records")
    reports = []
    for ob in observables:
        values = ob.series(traj)
        reports.append(_drift_one(ob, values, tolerance))
    return reports


def drift_reports_to_json(reports: list[DriftReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


def drift_reports_to_csv(reports: list[DriftReport]) -> str:
    """Fixed-column CSV: name, v0, max_abs_dev, max_rel_dev, verdict."""
    lines = ["name,v0,max_abs_dev,max_rel_dev,verdict"]
    for r in reports:
        if isinstance(r.v0, np.ndarray):
            v0 = ";".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in r.v0)
        else:
            v0 = f"{float(np.real_if_close(r.v0)):.17g}"
        lines.append(f"{r.name},{v0},{r.max_abs_dev:.17g},{r.max_rel_dev:.17g},"
                     f"{'pass' if r.verdict else 'fail'}")
    return "\n".join(lines) + "\n"


def equilibrium_residual(cfg: Config) -> float:
    """Sup norm of the model rhs; below ~1e-10 the state is an equilibrium."""
    rhs = dynamics.make_rhs(cfg)(dynamics.state_of(cfg))
    return float(np.max(np.abs(rhs)))
