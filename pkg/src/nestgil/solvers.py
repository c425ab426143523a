"""Proximal-gradient engines and softplus parameter schedules.

All solvers minimize ``0.5 ||Phi x - y||^2 + R(x)`` where ``R`` enters only
through a ``restore(m, k, mu)`` callable returning the (approximate) prox of
``mu R`` at ``m`` for stage ``k``. Iterates may have any shape; ``Phi`` acts on
their row-major flattening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class DivergenceError(FloatingPointError):
    """An iterate became non-finite or blew up."""

    def __init__(self, stage, reason):
        super().__init__(f"divergence at stage {stage}: {reason}")
        self.stage = stage


DIVERGENCE_FACTOR = 1e8


def softplus(x):
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class ScheduleParams:
    """Slopes and offsets of the step, threshold and relaxation schedules.

    Defaults are the untrained initial guesses; zero slopes give constant
    schedules.
    """

    alpha1: float = -0.2
    c1: float = 0.1
    alpha2: float = -0.5
    c2: float = -2.0
    alpha3: float = 0.5
    c3: float = 0.0

    def __post_init__(self):
        if self.alpha1 > 0:
            raise ValueError(f"alpha1 must be <= 0 (decreasing step), got {self.alpha1}")
        if self.alpha2 > 0:
            raise ValueError(f"alpha2 must be <= 0 (decreasing threshold), got {self.alpha2}")
        if self.alpha3 < 0:
            raise ValueError(f"alpha3 must be >= 0 (increasing relaxation), got {self.alpha3}")


def _check_stage(k):
    if k < 1:
        raise ValueError(f"stage index must be >= 1, got {k}")


def schedule_mu(k, p: ScheduleParams = ScheduleParams()) -> float:
    _check_stage(k)
    return float(softplus(p.alpha1 * k + p.c1))


def schedule_tau(k, p: ScheduleParams = ScheduleParams()) -> float:
    _check_stage(k)
    return float(softplus(p.alpha2 * k + p.c2))


def schedule_gamma(k, p: ScheduleParams = ScheduleParams()) -> float:
    """Sigmoid of a softplus, ``1 / (1 + exp(1 - 2 sp(alpha3 k + c3)))``."""
    _check_stage(k)
    g = softplus(p.alpha3 * k + p.c3)
    return float(1.0 / (1.0 + math.exp(1.0 - 2.0 * g)))


def _as_schedule(value) -> Callable[[int], float]:
    if callable(value):
        return value
    const = float(value)
    return lambda k: const


@dataclass
class SolverState:
    k: int
    x: np.ndarray
    h: np.ndarray
    objective_trace: list = field(default_factory=list)
    x_history: list | None = None
    u_history: list | None = None


class _Forward:
    def __init__(self, phi, y, shape):
        self.phi = phi
        self.y = np.asarray(y, dtype=float)
        self.shape = shape

    def apply(self, x):
        if hasattr(self.phi, "apply"):
            return self.phi.apply(np.ravel(x))
        return np.asarray(self.phi) @ np.ravel(x)

    def adjoint(self, w):
        if hasattr(self.phi, "adjoint"):
            v = self.phi.adjoint(w)
        else:
            v = np.asarray(self.phi).T @ w
        return np.reshape(v, self.shape)

    def grad(self, x):
        return self.adjoint(self.apply(x) - self.y)


def _init(phi, y, x0, shape):
    if x0 is None:
        fwd = _Forward(phi, y, shape if shape is not None else (-1,))
        x0 = fwd.adjoint(fwd.y)
    x0 = np.array(x0, dtype=float)
    return _Forward(phi, y, x0.shape), x0


class _Guard:
    def __init__(self, x0):
        self.limit = DIVERGENCE_FACTOR * max(float(np.linalg.norm(x0)), 1.0)

    def __call__(self, k, *arrays):
        for a in arrays:
            if not np.all(np.isfinite(a)):
                raise DivergenceError(k, "non-finite iterate")
            if np.linalg.norm(a) > self.limit:
                raise DivergenceError(k, "iterate norm exceeded 1e8 x initial norm")


def ista_solve(y, phi, restore, mu=1.0, n_iters=100, x0=None, shape=None,
               objective=None, callback=None) -> SolverState:
    """Plain proximal gradient: gradient step on the data term, then restore.

    Parameters
    ----------
    y : ndarray
        Measurements.
    phi : MeasurementOperator or ndarray
    restore : callable ``(m, k, mu) -> ndarray``
    mu : float or callable ``k -> float``
    n_iters : int
    x0 : ndarray, optional
        Starting point; defaults to ``Phi^T y`` reshaped to ``shape``.
    objective : callable, optional
        Recorded for ``x_0 .. x_K`` in ``objective_trace``.
    """
    fwd, x = _init(phi, y, x0, shape)
    mu = _as_schedule(mu)
    guard = _Guard(x)
    state = SolverState(0, x, x)
    if objective is not None:
        state.objective_trace.append(float(objective(x)))
    for k in range(1, n_iters + 1):
        mu_k = mu(k)
        m = x - mu_k * fwd.grad(x)
        x = np.asarray(restore(m, k, mu_k), dtype=float)
        guard(k, x)
        state.k, state.x, state.h = k, x, x
        if objective is not None:
            state.objective_trace.append(float(objective(x)))
        if callback is not None:
            callback(state)
    return state


def fista_solve(y, phi, restore, mu=1.0, n_iters=100, x0=None, shape=None,
                objective=None, callback=None) -> SolverState:
    """FISTA with the ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`` momentum."""
    fwd, x = _init(phi, y, x0, shape)
    mu = _as_schedule(mu)
    guard = _Guard(x)
    z = x
    t = 1.0
    state = SolverState(0, x, x)
    if objective is not None:
        state.objective_trace.append(float(objective(x)))
    for k in range(1, n_iters + 1):
        mu_k = mu(k)
        x_new = np.asarray(restore(z - mu_k * fwd.grad(z), k, mu_k), dtype=float)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        z = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        guard(k, x, z)
        state.k, state.x, state.h = k, x, z
        if objective is not None:
            state.objective_trace.append(float(objective(x)))
        if callback is not None:
            callback(state)
    return state


def nesterov2_solve(y, phi, restore, mu=None, gamma=None, n_stages=20, x0=None,
                    shape=None, objective=None, callback=None, keep_iterates=False,
                    schedules: ScheduleParams | None = None) -> SolverState:
    """Second Nesterov scheme with convex-combination relaxation.

    Per stage::

        u_k = (1 - g_k) x_{k-1} + g_k h_{k-1}
        m_k = h_{k-1} - mu_k Phi^T (Phi u_k - y)
        h_k = restore(m_k, k, mu_k)
        x_k = (1 - g_k) x_{k-1} + g_k h_k

    ``mu`` and ``gamma`` default to the softplus schedules of ``schedules``.
    Since ``u_k`` and ``x_k`` are convex combinations, a restore that
    projects onto a convex set keeps every iterate inside it.
    """
    p = schedules if schedules is not None else ScheduleParams()
    mu = _as_schedule(mu) if mu is not None else (lambda k: schedule_mu(k, p))
    gamma = _as_schedule(gamma) if gamma is not None else (lambda k: schedule_gamma(k, p))
    fwd, x = _init(phi, y, x0, shape)
    h = x
    guard = _Guard(x)
    state = SolverState(0, x, h)
    if keep_iterates:
        state.x_history = [x]
        state.u_history = []
    if objective is not None:
        state.objective_trace.append(float(objective(x)))
    for k in range(1, n_stages + 1):
        g = gamma(k)
        mu_k = mu(k)
        u = (1.0 - g) * x + g * h
        m = h - mu_k * fwd.grad(u)
        h = np.asarray(restore(m, k, mu_k), dtype=float)
        x = (1.0 - g) * x + g * h
        guard(k, x, h)
        state.k, state.x, state.h = k, x, h
        if keep_iterates:
            state.x_history.append(x)
            state.u_history.append(u)
        if objective is not None:
            state.objective_trace.append(float(objective(x)))
        if callback is not None:
            callback(state)
    return state


def accelerated_gamma(k) -> float:
    """Relaxation ``2 / (k + 1)`` paired with step ``mu / gamma_k`` for the O(1/k^2) rate."""
    return 2.0 / (k + 1.0)
