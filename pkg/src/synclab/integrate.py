"""Time integration with manifold projection and trajectory recording.

Two schemes: classical fixed-step RK4 (the default; conserved-functional
tests need controlled, explainable drift, and fixed steps make the
drift-vs-dt scaling clean) and the adaptive Dormand-Prince 5(4) pair.
Projection modes rescale sphere points to unit norm or replace unitaries by
their polar factor after every step.  A single integration is deterministic
and single-threaded; identical inputs give bit-identical trajectories.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dynamics
from .errors import IntegrationError, StepSizeUnderflow
from .state import Config, SphereConfig, UnitaryConfig


class Scheme(enum.Enum):
    RK4 = "rk4"
    DOPRI5 = "dopri5"


class Projection(enum.Enum):
    NONE = "none"
    NORMALIZE = "normalize"
    POLAR = "polar"


@dataclass(frozen=True)
class IntegratorSettings:
    scheme: Scheme = Scheme.RK4
    dt: float = 1e-3
    rtol: float = 1e-8
    atol: float = 1e-10
    projection: Projection = Projection.NONE
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (0 < self.rtol <= 1e-2 and 0 < self.atol <= 1e-2):
            raise ValueError("tolerances must lie in (0, 1e-2]")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")


def default_settings(cfg: Config, **overrides) -> IntegratorSettings:
    """RK4 with the model's natural projection."""
    if isinstance(cfg, SphereConfig):
        proj = Projection.NORMALIZE
    elif isinstance(cfg, UnitaryConfig):
        proj = Projection.POLAR
    else:
        proj = Projection.NONE
    return replace(IntegratorSettings(projection=proj), **overrides)


@dataclass
class Trajectory:
    """Recorded states of one integration.

    ``states[i]`` is the state array at ``times[i]``; ``config`` carries the
    constant flow parameters.  Named observable series are attached by the
    invariants machinery after the fact (observables are evaluated at record
    points only, never between steps).
    """

    times: np.ndarray
    states: np.ndarray
    config: Config
    observables: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.times.size

    def config_at(self, i: int) -> Config:
        return self.config.with_state(self.states[i])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


# ---------------------------------------------------------------------------
# projections


def polar_factor(m: np.ndarray, tol: float = 1e-14, max_iter: int = 50) -> np.ndarray:
    """Unitary (orthogonal) factor of the polar decomposition.

    Newton iteration U <- (U + U^{-*})/2; quadratically convergent for the
    nearly-unitary matrices produced by one integrator step, and dimension
    here is small (<= 16), so no external decomposition is needed.
    Accepts a single matrix or a stack.
    """
    u = np.array(m, dtype=m.dtype if np.iscomplexobj(m) else float, copy=True)
    for _ in range(max_iter):
        inv_star = np.linalg.inv(np.conj(np.swapaxes(u, -1, -2)))
        nxt = 0.5 * (u + inv_star)
        delta = np.max(np.abs(nxt - u))
        u = nxt
        if delta < tol:
            break
    return u


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _projector(cfg: Config, mode: Projection):
    if mode is Projection.NONE:
        return None
    if mode is Projection.NORMALIZE:
        if not isinstance(cfg, SphereConfig):
            raise ValueError("Normalize projection applies to sphere configurations")
        return _normalize_rows
    if mode is Projection.POLAR:
        if not isinstance(cfg, UnitaryConfig):
            raise ValueError("Polar projection applies to unitary configurations")
        return polar_factor
    raise ValueError(f"unknown projection {mode!r}")


# ---------------------------------------------------------------------------
# steppers

# Dormand-Prince 5(4) tableau (autonomous form); the 5th-order solution is
# propagated.
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dopri5_step(f, y, h):
    ks = [f(y)]
    for i in range(1, 7):
        yi = y
        for a, k in zip(_DP_A[i], ks):
            yi = yi + (h * a) * k
        ks.append(f(yi))
    y5 = y
    y4 = y
    for b5, b4, k in zip(_DP_B5, _DP_B4, ks):
        if b5:
            y5 = y5 + (h * b5) * k
        if b4:
            y4 = y4 + (h * b4) * k
    return y5, y5 - y4


def _check_finite(y):
    if not np.all(np.isfinite(y if not np.iscomplexobj(y) else y.view(float))):
        raise IntegrationError("non-finite state detected during integration")


def _integrate_array(rhs, y0: np.ndarray, settings: IntegratorSettings,
                     t_final: float, project=None, postcheck=None):
    """Core driver on a raw state array.  Returns (times list, states list)."""
    y = np.array(y0, copy=True)
    times = [0.0]
    states = [y.copy()]
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if t_final == 0.0:
        return times, states

    if settings.scheme is Scheme.RK4:
        # uniform step h <= dt that divides t_final exactly
        n_steps = max(1, int(math.ceil(t_final / settings.dt - 1e-9)))
        h = t_final / n_steps
        for i in range(1, n_steps + 1):
            y = _rk4_step(rhs, y, h)
            if project is not None:
                y = project(y)
            if postcheck is not None:
                postcheck(y)
            if i % settings.record_every == 0 or i == n_steps:
                _check_finite(y)
                times.append(i * h)
                states.append(y.copy())
        return times, states

    # DOPRI5 with standard error-per-step control
    t = 0.0
    h = min(settings.dt, t_final)
    accepted = 0
    while t < t_final:
        h = min(h, t_final - t)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StepSizeUnderflow(f"step size underflow at t = {t:.6g}")
        y_new, err = _dopri5_step(rhs, y, h)
        sc = settings.atol + settings.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = np.sqrt(np.mean(np.abs(err / sc) ** 2))
        if err_norm <= 1.0:
            t += h
            y = y_new
            if project is not None:
                y = project(y)
            if postcheck is not None:
                postcheck(y)
            accepted += 1
            if accepted % settings.record_every == 0 or t >= t_final:
                _check_finite(y)
                # avoid duplicate record when the stride lands on the end
                if t > times[-1]:
                    times.append(t)
                    states.append(y.copy())
        factor = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return times, states


def integrate(cfg: Config, settings: IntegratorSettings, t_final: float) -> Trajectory:
    """Integrate a model configuration on [0, t_final]."""
    rhs = dynamics.make_rhs(cfg)
    project = _projector(cfg, settings.projection)
    times, states = _integrate_array(rhs, dynamics.state_of(cfg), settings,
                                     t_final, project=project)
    return Trajectory(times=np.array(times), states=np.array(states), config=cfg)


# ---------------------------------------------------------------------------
# order verification


@dataclass(frozen=True)
class OrderEstimate:
    order: float
    exact: bool

    def __str__(self):
        return "exact" if self.exact else f"p = {self.order:.2f}"


def convergence_order(cfg: Config, scheme: Scheme, t_final: float = 1.0,
                      dt: float = 0.02) -> OrderEstimate:
    """Richardson order estimate from a halving sequence of fixed steps.

    Both schemes are driven at fixed steps (DOPRI5 propagates its 5th-order
    solution).  When the step-halving differences vanish, the scheme is exact
    on this problem and ``exact`` is reported instead of an order.
    """
    rhs = dynamics.make_rhs(cfg)
    y0 = dynamics.state_of(cfg)

    def run(h):
        n = int(round(t_final / h))
        y = np.array(y0, copy=True)
        for _ in range(n):
            if scheme is Scheme.RK4:
                y = _rk4_step(rhs, y, h)
            else:
                y, _ = _dopri5_step(rhs, y, h)
        return y

    y1, y2, y3 = run(dt), run(dt / 2), run(dt / 4)
    e1 = np.max(np.abs(y1 - y2))
    e2 = np.max(np.abs(y2 - y3))
    scale = max(1.0, float(np.max(np.abs(y3))))
    if e1 < 1e-13 * scale and e2 < 1e-13 * scale:
        return OrderEstimate(order=float("nan"), exact=True)
    return OrderEstimate(order=float(np.log2(e1 / e2)), exact=False)
