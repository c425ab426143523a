"""Objective-gap convergence benchmark on a seeded LASSO instance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import gaussian_orthonormal
from .prox import prox_l1
from .solvers import accelerated_gamma, fista_solve, ista_solve, nesterov2_solve

SLOPE_WINDOW = (10, 200)


@dataclass
class LassoInstance:
    """``0.5 ||Phi x - y||^2 + lam ||x||_1`` with orthonormal-row ``Phi``.

    ``y`` is a Gaussian vector scaled by ``y_scale``; for large scales the
    solution support fills all ``m`` rows, the restricted system is square and
    ill-conditioned, and first-order methods show their sublinear rates over
    hundreds of iterations.
    """

    phi: object
    y: np.ndarray
    lam: float

    def objective(self, x) -> float:
        r = self.phi.apply(x) - self.y
        return 0.5 * float(r @ r) + self.lam * float(np.abs(x).sum())

    def restore(self, m, k, mu):
        return prox_l1(m, self.lam * mu)


def make_lasso(seed: int = 0, m: int = 20, n: int = 50, lam: float = 0.1, y_scale: float = 3.0) -> LassoInstance:
    phi = gaussian_orthonormal(m, n, seed)
    y = y_scale * np.random.default_rng([seed, 1]).standard_normal(m)
    return LassoInstance(phi, y, lam)


def lasso_optimum(inst: LassoInstance, n_iters: int = 50000):
    """Long FISTA run used as the reference optimum ``(x*, F*)``."""
    st = fista_solve(inst.y, inst.phi, inst.restore, mu=1.0, n_iters=n_iters, x0=np.zeros(inst.phi.n_cols))
    return st.x, inst.objective(st.x)


def loglog_slope(gaps, window=SLOPE_WINDOW) -> float:
    """Least-squares slope of ``log gap_k`` against ``log k`` over ``window`` (inclusive)."""
    lo, hi = window
    k = np.arange(lo, hi + 1)
    g = np.asarray(gaps, dtype=float)[lo:hi + 1]
    if g.size != k.size:
        raise ValueError(f"trace of length {len(gaps)} does not cover the window {lo}..{hi}")
    if np.any(g <= 0):
        raise ValueError("objective gap must be positive inside the slope window")
    return float(np.polyfit(np.log(k), np.log(g), 1)[0])


def run_rate_bench(inst: LassoInstance, n_iters: int = 500, oracle_iters: int = 50000):
    """Objective gaps ``F(x_k) - F*`` for ISTA, FISTA and Nesterov-II from ``x_0 = 0``.

    Nesterov-II uses ``gamma_k = 2 / (k + 1)`` with step ``1 / gamma_k``
    (``||Phi^T Phi|| = 1``).

    Returns
    -------
    dict with keys ``gaps`` (name -> array of length ``n_iters + 1``),
    ``slopes`` (name -> float), ``x_star``, ``f_star``.
    """
    x_star, f_star = lasso_optimum(inst, oracle_iters)
    x0 = np.zeros(inst.phi.n_cols)
    runs = {
        "ista": ista_solve(inst.y, inst.phi, inst.restore, 1.0, n_iters, x0=x0, objective=inst.objective),
        "fista": fista_solve(inst.y, inst.phi, inst.restore, 1.0, n_iters, x0=x0, objective=inst.objective),
        "nesterov2": nesterov2_solve(inst.y, inst.phi, inst.restore, mu=lambda k: 1.0 / accelerated_gamma(k),
                                     gamma=accelerated_gamma, n_stages=n_iters, x0=x0,
                                     objective=inst.objective),
    }
    gaps = {name: np.asarray(st.objective_trace) - f_star for name, st in runs.items()}
    slopes = {}
    for name, g in gaps.items():
        try:
            slopes[name] = loglog_slope(g)
        except ValueError:
            slopes[name] = float("nan")
    return {"gaps": gaps, "slopes": slopes, "x_star": x_star, "f_star": f_star}
