"""Primal-dual interior-point method for smooth nonlinear programs.

Solves ``min f(x)  s.t.  g(x) = 0,  h(x) <= 0`` by Newton steps on the
perturbed KKT conditions, with slack variables ``z`` for the inequalities
and a centering parameter driven towards zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse import bmat, csr_matrix, diags, identity
from scipy.sparse.linalg import splu

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]
Constraint = Callable[[np.ndarray], tuple[np.ndarray, csr_matrix]]
Hessian = Callable[[np.ndarray, np.ndarray, np.ndarray], csr_matrix]


@dataclass(frozen=True)
class IpmOptions:
    feasibility_tol: float = 1e-9
    gradient_tol: float = 1e-7
    complementarity_tol: float = 1e-9
    cost_tol: float = 1e-9
    max_iterations: int = 150
    step_fraction: float = 0.99995
    centering: float = 0.1
    z0: float = 1.0


@dataclass
class IpmResult:
    x: np.ndarray
    f: float
    lam: np.ndarray
    mu: np.ndarray
    z: np.ndarray
    iterations: int
    converged: bool
    message: str


def box_constraints(lower: np.ndarray, upper: np.ndarray) -> Constraint:
    """Inequalities ``x <= upper`` and ``lower <= x`` for the finite bounds."""
    nx = len(lower)
    iu = np.flatnonzero(np.isfinite(upper))
    il = np.flatnonzero(np.isfinite(lower))
    rows = np.arange(len(iu) + len(il))
    cols = np.concatenate([iu, il])
    vals = np.concatenate([np.ones(len(iu)), -np.ones(len(il))])
    dh = csr_matrix((vals, (rows, cols)), shape=(len(rows), nx))

    def h(x: np.ndarray):
        return np.concatenate([x[iu] - upper[iu], lower[il] - x[il]]), dh

    return h


def interior_point(f_fcn: Objective, x0: np.ndarray, g_fcn: Constraint, h_fcn: Constraint,
                   hess_fcn: Hessian, options: IpmOptions = IpmOptions()) -> IpmResult:
    x = np.asarray(x0, dtype=float).copy()
    nx = len(x)
    f, df = f_fcn(x)
    g, dg = g_fcn(x)
    h, dh = h_fcn(x)
    neq, niq = len(g), len(h)

    gamma = 1.0
    z = np.full(niq, options.z0)
    small = h < -options.z0
    z[small] = -h[small]
    mu = np.full(niq, options.z0)
    big = gamma / z > options.z0
    mu[big] = gamma / z[big]
    lam = np.zeros(neq)
    e = np.ones(niq)

    def conditions(x, f, f_prev, g, h, lam, mu, z, df, dg, dh):
        lx = df + dg.T @ lam + dh.T @ mu
        maxh = np.max(h) if niq else 0.0
        norm_g = np.max(np.abs(g)) if neq else 0.0
        xnorm = np.max(np.abs(x)) if nx else 0.0
        znorm = np.max(np.abs(z)) if niq else 0.0
        lnorm = max(np.max(np.abs(lam)) if neq else 0.0, np.max(np.abs(mu)) if niq else 0.0)
        feas = max(norm_g, maxh) / (1 + max(xnorm, znorm))
        grad = np.max(np.abs(lx)) / (1 + lnorm)
        comp = (z @ mu) / (1 + xnorm) if niq else 0.0
        cost = abs(f - f_prev) / (1 + abs(f_prev))
        return lx, feas, grad, comp, cost

    f_prev = f
    lx, feas, grad, comp, cost = conditions(x, f, f_prev, g, h, lam, mu, z, df, dg, dh)
    for it in range(1, options.max_iterations + 1):
        lxx = hess_fcn(x, lam, mu)
        zinv = 1.0 / z
        dh_zinv = dh.T @ diags(zinv)
        m = lxx + dh_zinv @ diags(mu) @ dh
        n = lx + dh_zinv @ (mu * h + gamma * e)
        kkt = bmat([[m, dg.T], [dg, None]], format="csc")
        rhs = -np.concatenate([n, g])
        try:
            sol = splu(kkt).solve(rhs)
        except RuntimeError:
            # tiny regularization of the primal block rescues rank-deficient steps
            reg = bmat([[m + 1e-10 * identity(nx), dg.T],
                        [dg, -1e-12 * identity(neq)]], format="csc")
            try:
                sol = splu(reg).solve(rhs)
            except RuntimeError:
                return IpmResult(x, f, lam, mu, z, it, False, "singular KKT system")
        if not np.all(np.isfinite(sol)):
            return IpmResult(x, f, lam, mu, z, it, False, "numerically failed step")
        dx, dlam = sol[:nx], sol[nx:]
        dz = -h - z - dh @ dx
        dmu = -mu + zinv * (gamma * e - mu * dz)

        xi = options.step_fraction
        with np.errstate(over="ignore"):
            neg = dz < 0
            alpha_p = min(xi * np.min(-z[neg] / dz[neg]), 1.0) if np.any(neg) else 1.0
            neg = dmu < 0
            alpha_d = min(xi * np.min(-mu[neg] / dmu[neg]), 1.0) if np.any(neg) else 1.0

        x = x + alpha_p * dx
        z = z + alpha_p * dz
        lam = lam + alpha_d * dlam
        mu = mu + alpha_d * dmu
        if niq:
            gamma = options.centering * (z @ mu) / niq

        f_prev = f
        f, df = f_fcn(x)
        g, dg = g_fcn(x)
        h, dh = h_fcn(x)
        lx, feas, grad, comp, cost = conditions(x, f, f_prev, g, h, lam, mu, z, df, dg, dh)
        if not np.all(np.isfinite(x)):
            return IpmResult(x, f, lam, mu, z, it, False, "numerically failed")
        if (feas < options.feasibility_tol and grad < options.gradient_tol
                and comp < options.complementarity_tol and cost < options.cost_tol):
            return IpmResult(x, f, lam, mu, z, it, True, "converged")
    return IpmResult(x, f, lam, mu, z, options.max_iterations, False,
                     f"iteration limit reached (feasibility {feas:.2e}, gradient {grad:.2e})")


def check_hessian(f_fcn: Objective, g_fcn: Constraint, hess_fcn: Hessian, x: np.ndarray,
                  lam: np.ndarray, eps: float = 1e-7,
                  mu: Optional[np.ndarray] = None) -> float:
    """Max abs difference between the analytic Hessian of ``f + lam'g`` and a
    central finite difference of its gradient (inequalities assumed linear)."""
    mu = np.zeros(0) if mu is None else mu

    def grad(xx):
        _, df = f_fcn(xx)
        _, dg = g_fcn(xx)
        return df + dg.T @ lam

    n = len(x)
    fd = np.zeros((n, n))
    for j in range(n):
        step = np.zeros(n)
        step[j] = eps
        fd[:, j] = (grad(x + step) - grad(x - step)) / (2 * eps)
    analytic = hess_fcn(x, lam, mu).toarray()
    return float(np.max(np.abs(analytic - fd)))
