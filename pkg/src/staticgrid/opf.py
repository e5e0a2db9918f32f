"""Multi-objective market and voltage-stability optimal power flow.

The program couples a base operating point to a critical point reached at
loading ``lambda_c``::

    min  G = -omega*(C_D(P_D) - C_S(P_S)) - (1 - omega)*lambda_c

    base:      f(x,   Q_G,  P_G,  P_L) = 0    P_G  = P_G0 + P_S
                                              P_L  = P_L0 + P_D
    critical:  f(x_c, Q_Gc, P_Gc, P_Lc) = 0   P_Gc = (lambda_c + k_Gc)*P_G
                                              P_Lc = lambda_c*P_L,  Q_Lc = lambda_c*Q_L
    bounds:    bids, lambda_c, bus voltages and reactive outputs in both cases

Costs are in R$/h with quantities in MW (p.u. times the system base).
Elastic demand consumes reactive power in the fixed ratio q_d0/p_d0.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy.sparse import csr_matrix, diags, hstack, vstack

from .case_model import DemandBid, PowerCase, SupplyBid
from .ipm import IpmOptions, box_constraints, interior_point
from .network import build_admittance
from .powerflow import dsbus_dv

log = logging.getLogger(__name__)


class OpfError(RuntimeError):
    pass


@dataclass(frozen=True)
class CostPolynomial:
    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def __call__(self, q):
        return self.c0 + self.c1 * q + self.c2 * q * q

    def derivative(self, q):
        return self.c1 + 2.0 * self.c2 * q

    @property
    def convex(self) -> bool:
        return self.c2 >= 0


def active_cost(bid) -> CostPolynomial:
    return CostPolynomial(bid.c_p0, bid.c_p1, bid.c_p2)


def reactive_cost(bid) -> CostPolynomial:
    return CostPolynomial(bid.c_q0, bid.c_q1, bid.c_q2)


def evaluate_costs(supply: Sequence[SupplyBid], p_s_mw: Sequence[float],
                   demand: Sequence[DemandBid], p_d_mw: Sequence[float],
                   q_s_mvar: Optional[Sequence[float]] = None,
                   q_d_mvar: Optional[Sequence[float]] = None) -> tuple[float, float]:
    """Total supply cost C_S and demand benefit C_D in R$/h."""
    c_s = sum(active_cost(b)(p) for b, p in zip(supply, p_s_mw))
    c_d = sum(active_cost(b)(p) for b, p in zip(demand, p_d_mw))
    if q_s_mvar is not None:
        c_s += sum(reactive_cost(b)(q) for b, q in zip(supply, q_s_mvar))
    if q_d_mvar is not None:
        c_d += sum(reactive_cost(b)(q) for b, q in zip(demand, q_d_mvar))
    return float(c_s), float(c_d)


@dataclass(frozen=True)
class OpfOptions:
    lambda_min: float = 1.01
    lambda_max: float = 1.99
    inelastic_share: float = 0.9
    default_v_limits: tuple[float, float] = (0.9, 1.1)
    ipm: IpmOptions = IpmOptions()

    def __post_init__(self) -> None:
        if not self.lambda_min <= self.lambda_max:
            raise OpfError("lambda_min must not exceed lambda_max")
        if not 0 <= self.inelastic_share <= 1:
            raise OpfError("inelastic share must lie in [0, 1]")


@dataclass
class OpfSolution:
    omega: float
    bus_ids: tuple[int, ...]
    p_s: np.ndarray
    p_d: np.ndarray
    q_g: dict[int, float]
    q_gc: dict[int, float]
    lambda_c: float
    k_gc: float
    v: np.ndarray
    theta: np.ndarray
    v_c: np.ndarray
    theta_c: np.ndarray
    objective: float
    surplus: float
    losses: float
    iterations: int
    converged: bool = True
    message: str = ""
    x: Optional[np.ndarray] = field(default=None, repr=False)


def market_case(case: PowerCase, inelastic_share: float = 0.9) -> PowerCase:
    """Base case of the market problem.

    Loads at demand-bid buses keep ``inelastic_share`` of their value.  Active
    output of any generator at a supply-bid bus moves into the market, and so
    does the reactive output of a PQ generator whose bid carries a reactive band.
    """
    demand_buses = {d.bus for d in case.demand if d.connected}
    supply = {s.bus: s for s in case.supply if s.connected}
    pq = tuple(replace(ld, p_load=ld.p_load * inelastic_share, q_load=ld.q_load * inelastic_share)
               if ld.bus in demand_buses else ld for ld in case.pq)
    pqgen = []
    for g in case.pqgen:
        bid = supply.get(g.bus)
        if bid is None:
            pqgen.append(g)
        else:
            q = 0.0 if bid.q_max > bid.q_min else g.q_gen
            pqgen.append(replace(g, p_gen=0.0, q_gen=q))
    pv = tuple(replace(g, p_gen=0.0) if g.bus in supply else g for g in case.pv)
    sw = tuple(replace(g, p_g0=0.0) if g.bus in supply else g for g in case.sw)
    return replace(case, pq=pq, pqgen=tuple(pqgen), pv=pv, sw=sw)


def d2sbus_dv2(ybus: csr_matrix, v: np.ndarray, lam: np.ndarray):
    """Second derivatives of lam' * S_bus w.r.t. polar voltage (aa, av, va, vv)."""
    n = len(v)
    ibus = ybus @ v
    diaglam = diags(lam)
    diag_v = diags(v)
    a = diags(lam * v)
    b = ybus @ diag_v
    c = a @ b.conj()
    d = ybus.conj().T @ diag_v
    e = diag_v.conj() @ (d @ diaglam - diags(d @ lam))
    f = c - a @ diags(ibus.conj())
    g = diags(np.ones(n) / np.abs(v))
    gaa = e + f
    gva = 1j * g @ (e - f)
    gav = gva.T
    gvv = g @ (c + c.T) @ g
    return gaa, gav, gva, gvv


class MarketProblem:
    """Index layout and NLP callbacks of the market / stability program."""

    def __init__(self, case: PowerCase, omega: float, options: OpfOptions = OpfOptions()):
        if not 0 <= omega <= 1:
            raise OpfError(f"weighting factor must lie in [0, 1], got {omega}")
        self.supply = [s for s in case.supply if s.connected]
        self.demand = [d for d in case.demand if d.connected]
        if not self.supply or not self.demand:
            raise OpfError("market OPF needs at least one supply and one demand bid")
        ref = case.phase_reference()
        if ref is None:
            raise OpfError("no phase reference slack generator")
        self.case = market_case(case, options.inelastic_share)
        self.omega = omega
        self.options = options
        mc = self.case
        index = mc.bus_index()
        n = mc.n_bus
        self.n = n
        self.bus_ids = tuple(b.number for b in mc.buses)
        self.sb = mc.system_base
        self.ref = index[ref.bus]
        self.theta_ref = ref.theta0
        self.ybus = build_admittance(mc).matrix.tocsr()

        self.pg0 = np.zeros(n)
        self.qfix = np.zeros(n)
        self.pl0 = np.zeros(n)
        self.ql0 = np.zeros(n)
        vlo = np.full(n, options.default_v_limits[0])
        vhi = np.full(n, options.default_v_limits[1])
        seen = np.zeros(n, dtype=bool)
        self.v_set = np.ones(n)
        qlim: dict[int, list[float]] = {}

        def tighten(i, lo, hi):
            if seen[i]:
                vlo[i], vhi[i] = max(vlo[i], lo), min(vhi[i], hi)
            else:
                vlo[i], vhi[i] = lo, hi
                seen[i] = True

        for g in mc.sw:
            if g.connected:
                i = index[g.bus]
                self.pg0[i] += g.p_g0
                qlim.setdefault(i, [0.0, 0.0])
                qlim[i][0] += g.q_min
                qlim[i][1] += g.q_max
                tighten(i, g.v_min, g.v_max)
                self.v_set[i] = g.v0
        for g in mc.pv:
            if g.connected:
                i = index[g.bus]
                self.pg0[i] += g.p_gen
                qlim.setdefault(i, [0.0, 0.0])
                qlim[i][0] += g.q_min
                qlim[i][1] += g.q_max
                tighten(i, g.v_min, g.v_max)
                self.v_set[i] = g.v0
        for ld in mc.pq:
            if ld.connected:
                i = index[ld.bus]
                self.pl0[i] += ld.p_load
                self.ql0[i] += ld.q_load
                tighten(i, ld.v_min, ld.v_max)
        for g in mc.pqgen:
            if g.connected:
                i = index[g.bus]
                self.pg0[i] += g.p_gen
                self.qfix[i] += g.q_gen
                tighten(i, g.v_min, g.v_max)
        for s in self.supply:
            if s.q_max > s.q_min:
                i = index[s.bus]
                qlim.setdefault(i, [0.0, 0.0])
                qlim[i][0] += s.q_min
                qlim[i][1] += s.q_max
        self.vlo, self.vhi = vlo, vhi
        self.q_buses = np.array(sorted(qlim), dtype=int)
        self.qlo = np.array([qlim[i][0] for i in self.q_buses])
        self.qhi = np.array([qlim[i][1] for i in self.q_buses])
        nq, ns, nd = len(self.q_buses), len(self.supply), len(self.demand)

        self.cq = csr_matrix((np.ones(nq), (self.q_buses, np.arange(nq))), shape=(n, nq))
        self.cs = csr_matrix((np.ones(ns), ([index[s.bus] for s in self.supply], np.arange(ns))),
                             shape=(n, ns))
        self.cd = csr_matrix((np.ones(nd), ([index[d.bus] for d in self.demand], np.arange(nd))),
                             shape=(n, nd))
        self.rd = np.array([d.q_d0 / d.p_d0 if d.p_d0 else 0.0 for d in self.demand])
        q_pos = {int(b): j for j, b in enumerate(self.q_buses)}
        # reactive pricing of a supply bid uses the reactive output at its bus
        self.supply_q = np.array([q_pos.get(index[s.bus], -1) for s in self.supply], dtype=int)

        sizes = [("th", n), ("vm", n), ("thc", n), ("vmc", n), ("qg", nq), ("qgc", nq),
                 ("ps", ns), ("pd", nd), ("lam", 1), ("kgc", 1)]
        self.sl: dict[str, slice] = {}
        start = 0
        for name, size in sizes:
            self.sl[name] = slice(start, start + size)
            start += size
        self.nx = start

        self.cost_s = [active_cost(s) for s in self.supply]
        self.cost_d = [active_cost(d) for d in self.demand]
        self.rcost_s = [reactive_cost(s) for s in self.supply]
        self.rcost_d = [reactive_cost(d) for d in self.demand]
        c1max = max([abs(c.c1) for c in self.cost_s + self.cost_d] + [1.0])
        # whole-objective scaling keeps the minimizer and conditions the KKT system
        self.scale = 1.0 + omega * c1max * self.sb

        lb = np.full(self.nx, -np.inf)
        ub = np.full(self.nx, np.inf)
        for name in ("vm", "vmc"):
            lb[self.sl[name]], ub[self.sl[name]] = vlo, vhi
        for name in ("qg", "qgc"):
            lb[self.sl[name]], ub[self.sl[name]] = self.qlo, self.qhi
        lb[self.sl["ps"]] = [s.p_s_min for s in self.supply]
        ub[self.sl["ps"]] = [s.p_s_max for s in self.supply]
        lb[self.sl["pd"]] = [d.p_d_min for d in self.demand]
        ub[self.sl["pd"]] = [d.p_d_max for d in self.demand]
        lb[self.sl["lam"]], ub[self.sl["lam"]] = options.lambda_min, options.lambda_max
        if np.any(lb > ub):
            raise OpfError("inconsistent variable bounds")
        # zero-width bounds become equality constraints
        self.fixed = np.flatnonzero(lb == ub)
        self.fixed_value = lb[self.fixed]
        lb_box, ub_box = lb.copy(), ub.copy()
        lb_box[self.fixed], ub_box[self.fixed] = -np.inf, np.inf
        self.lb, self.ub = lb, ub
        self.h = box_constraints(lb_box, ub_box)

    # --- helpers ---

    def split(self, x: np.ndarray) -> dict[str, np.ndarray]:
        return {k: x[s] for k, s in self.sl.items()}

    def initial_point(self) -> np.ndarray:
        x = np.zeros(self.nx)
        vm = np.clip(self.v_set, self.vlo, self.vhi)
        x[self.sl["th"]] = self.theta_ref
        x[self.sl["thc"]] = self.theta_ref
        x[self.sl["vm"]] = vm
        x[self.sl["vmc"]] = vm
        q0 = np.clip(0.0, self.qlo, self.qhi)
        x[self.sl["qg"]] = q0
        x[self.sl["qgc"]] = q0
        ps = np.array([s.p_s0 for s in self.supply])
        pd = np.array([d.p_d0 for d in self.demand])
        x[self.sl["ps"]] = np.clip(ps, self.lb[self.sl["ps"]], self.ub[self.sl["ps"]])
        x[self.sl["pd"]] = np.clip(pd, self.lb[self.sl["pd"]], self.ub[self.sl["pd"]])
        x[self.sl["lam"]] = 0.5 * (self.options.lambda_min + self.options.lambda_max)
        return x

    def generation(self, p: dict[str, np.ndarray]) -> np.ndarray:
        return self.pg0 + self.cs @ p["ps"]

    def load(self, p: dict[str, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        return self.pl0 + self.cd @ p["pd"], self.ql0 + self.cd @ (self.rd * p["pd"])

    def surplus(self, x: np.ndarray) -> float:
        p = self.split(x)
        q_s = np.where(self.supply_q >= 0, p["qg"][np.maximum(self.supply_q, 0)], 0.0)
        c_s, c_d = evaluate_costs(self.supply, p["ps"] * self.sb, self.demand, p["pd"] * self.sb,
                                  q_s * self.sb, self.rd * p["pd"] * self.sb)
        return c_d - c_s

    # --- NLP callbacks ---

    def objective(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        p = self.split(x)
        w, sb = self.omega, self.sb
        g_val = -w * self.surplus(x) - (1.0 - w) * p["lam"][0]
        grad = np.zeros(self.nx)
        grad[self.sl["ps"]] = w * sb * np.array(
            [c.derivative(q * sb) for c, q in zip(self.cost_s, p["ps"])])
        grad[self.sl["pd"]] = -w * sb * np.array(
            [c.derivative(q * sb) for c, q in zip(self.cost_d, p["pd"])])
        grad[self.sl["pd"]] -= w * sb * self.rd * np.array(
            [c.derivative(r * q * sb) for c, r, q in zip(self.rcost_d, self.rd, p["pd"])])
        qg = self.sl["qg"].start
        for c, j, in zip(self.rcost_s, self.supply_q):
            if j >= 0:
                grad[qg + j] += w * sb * c.derivative(x[qg + j] * sb)
        grad[self.sl["lam"]] = -(1.0 - w)
        return g_val / self.scale, grad / self.scale

    def objective_hessian(self) -> np.ndarray:
        w, sb = self.omega, self.sb
        d = np.zeros(self.nx)
        d[self.sl["ps"]] = w * sb * sb * 2 * np.array([c.c2 for c in self.cost_s])
        d[self.sl["pd"]] = -w * sb * sb * 2 * np.array(
            [c.c2 for c in self.cost_d]) - w * sb * sb * 2 * self.rd**2 * np.array(
            [c.c2 for c in self.rcost_d])
        qg = self.sl["qg"].start
        for c, j in zip(self.rcost_s, self.supply_q):
            if j >= 0:
                d[qg + j] += w * sb * sb * 2 * c.c2
        return d / self.scale

    def _power(self, th, vm):
        v = vm * np.exp(1j * th)
        return v, v * np.conj(self.ybus @ v)

    def constraints(self, x: np.ndarray) -> tuple[np.ndarray, csr_matrix]:
        p = self.split(x)
        n, sl = self.n, self.sl
        lam, kgc = p["lam"][0], p["kgc"][0]
        v, s = self._power(p["th"], p["vm"])
        vc, sc = self._power(p["thc"], p["vmc"])
        pg = self.generation(p)
        pl, ql = self.load(p)
        qg = self.qfix + self.cq @ p["qg"]
        qgc = self.qfix + self.cq @ p["qgc"]
        g = np.concatenate([
            s.real - pg + pl,
            s.imag - qg + ql,
            sc.real - (lam + kgc) * pg + lam * pl,
            sc.imag - qgc + lam * ql,
            [p["th"][self.ref] - self.theta_ref, p["thc"][self.ref] - self.theta_ref],
            x[self.fixed] - self.fixed_value,
        ])

        ds_da, ds_dv = dsbus_dv(self.ybus.tocsc(), v)
        dsc_da, dsc_dv = dsbus_dv(self.ybus.tocsc(), vc)
        nq, ns = sl["qg"].stop - sl["qg"].start, len(self.supply)
        z_nn = csr_matrix((n, n))
        z_nq = csr_matrix((n, nq))
        z_ns = csr_matrix((n, ns))
        z_n1 = csr_matrix((n, 1))
        cd_r = self.cd @ diags(self.rd)
        rows = [
            [ds_da.real, ds_dv.real, z_nn, z_nn, z_nq, z_nq, -self.cs, self.cd, z_n1, z_n1],
            [ds_da.imag, ds_dv.imag, z_nn, z_nn, -self.cq, z_nq, z_ns, cd_r, z_n1, z_n1],
            [z_nn, z_nn, dsc_da.real, dsc_dv.real, z_nq, z_nq, -(lam + kgc) * self.cs,
             lam * self.cd, csr_matrix((pl - pg).reshape(-1, 1)), csr_matrix(-pg.reshape(-1, 1))],
            [z_nn, z_nn, dsc_da.imag, dsc_dv.imag, z_nq, -self.cq, z_ns, lam * cd_r,
             csr_matrix(ql.reshape(-1, 1)), z_n1],
        ]
        jac = vstack([hstack(r) for r in rows])
        extra_rows = [sl["th"].start + self.ref, sl["thc"].start + self.ref, *self.fixed]
        extra = csr_matrix((np.ones(len(extra_rows)), (np.arange(len(extra_rows)), extra_rows)),
                           shape=(len(extra_rows), self.nx))
        return g, vstack([jac, extra]).tocsr()

    def hessian(self, x: np.ndarray, lam_eq: np.ndarray, mu: np.ndarray) -> csr_matrix:
        p = self.split(x)
        n, sl = self.n, self.sl
        lp, lq = lam_eq[:n], lam_eq[n:2 * n]
        lpc, lqc = lam_eq[2 * n:3 * n], lam_eq[3 * n:4 * n]
        v, _ = self._power(p["th"], p["vm"])
        vc, _ = self._power(p["thc"], p["vmc"])

        def block(vv, lamp, lamq):
            paa, pav, pva, pvv = d2sbus_dv2(self.ybus, vv, lamp.astype(complex))
            qaa, qav, qva, qvv = d2sbus_dv2(self.ybus, vv, lamq.astype(complex))
            return vstack([hstack([paa.real + qaa.imag, pav.real + qav.imag]),
                           hstack([pva.real + qva.imag, pvv.real + qvv.imag])]).tocoo()

        rows, cols, vals = [], [], []

        def add(coo, r0, c0):
            rows.append(coo.row + r0)
            cols.append(coo.col + c0)
            vals.append(coo.data)

        add(block(v, lp, lq), sl["th"].start, sl["th"].start)
        add(block(vc, lpc, lqc), sl["thc"].start, sl["thc"].start)
        # bilinear coupling of lambda_c / k_Gc with the market quantities
        il, ik = sl["lam"].start, sl["kgc"].start
        ps_idx = np.arange(sl["ps"].start, sl["ps"].stop)
        pd_idx = np.arange(sl["pd"].start, sl["pd"].stop)
        w_ps = -(self.cs.T @ lpc)
        w_pd = self.cd.T @ lpc + self.rd * (self.cd.T @ lqc)
        for idx, w, anchor in ((ps_idx, w_ps, il), (ps_idx, w_ps, ik), (pd_idx, w_pd, il)):
            rows += [np.full(len(idx), anchor), idx]
            cols += [idx, np.full(len(idx), anchor)]
            vals += [w, w]
        diag = self.objective_hessian()
        nz = np.flatnonzero(diag)
        rows.append(nz)
        cols.append(nz)
        vals.append(diag[nz])
        return csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(self.nx, self.nx))

    # --- results ---

    def residuals(self, x: np.ndarray) -> dict[str, float]:
        g, _ = self.constraints(x)
        n = self.n
        return {"base P": float(np.max(np.abs(g[:n]))),
                "base Q": float(np.max(np.abs(g[n:2 * n]))),
                "critical P": float(np.max(np.abs(g[2 * n:3 * n]))),
                "critical Q": float(np.max(np.abs(g[3 * n:4 * n])))}

    def package(self, x: np.ndarray, iterations: int, converged: bool, message: str) -> OpfSolution:
        p = self.split(x)
        _, s = self._power(p["th"], p["vm"])
        f, _ = self.objective(x)
        qb = [self.bus_ids[i] for i in self.q_buses]
        return OpfSolution(
            omega=self.omega, bus_ids=self.bus_ids, p_s=p["ps"].copy(), p_d=p["pd"].copy(),
            q_g=dict(zip(qb, p["qg"].tolist())), q_gc=dict(zip(qb, p["qgc"].tolist())),
            lambda_c=float(p["lam"][0]), k_gc=float(p["kgc"][0]),
            v=p["vm"].copy(), theta=p["th"].copy(), v_c=p["vmc"].copy(), theta_c=p["thc"].copy(),
            objective=float(f * self.scale), surplus=self.surplus(x),
            losses=float(np.sum(s.real)) * self.sb, iterations=iterations,
            converged=converged, message=message, x=x.copy())


def _solve(problem: MarketProblem, x0: Optional[np.ndarray]) -> OpfSolution:
    x0 = problem.initial_point() if x0 is None else np.asarray(x0, dtype=float)
    if len(x0) != problem.nx:
        raise OpfError("warm-start vector has the wrong length")
    res = interior_point(problem.objective, x0, problem.constraints, problem.h,
                         problem.hessian, problem.options.ipm)
    message = res.message
    if not res.converged:
        worst = max(problem.residuals(res.x).items(), key=lambda kv: kv[1])
        message = f"{res.message}; largest residual in {worst[0]} balance ({worst[1]:.2e})"
    return problem.package(res.x, res.iterations, res.converged, message)


def solve_market_vsc_opf(case: PowerCase, omega: float, options: OpfOptions = OpfOptions(),
                         x0: Optional[np.ndarray] = None) -> OpfSolution:
    sol = _solve(MarketProblem(case, omega, options), x0)
    if not sol.converged:
        raise OpfError(f"OPF did not converge for omega={omega}: {sol.message}")
    return sol


def pareto_sweep(case: PowerCase, omegas: Sequence[float],
                 options: OpfOptions = OpfOptions(), warm_start: bool = True) -> list[OpfSolution]:
    """One solution per weighting factor; failures are kept with ``converged=False``."""
    for w in omegas:
        if not 0 <= w <= 1:
            raise OpfError(f"weighting factor must lie in [0, 1], got {w}")
    out: list[OpfSolution] = []
    x0 = None
    for w in omegas:
        try:
            sol = _solve(MarketProblem(case, w, options), x0)
        except (OpfError, ArithmeticError, RuntimeError, ValueError) as exc:
            # numerical breakdown is recorded, the sweep goes on
            log.warning("omega=%g failed: %s", w, exc)
            out.append(_failed(case, w, str(exc)))
            continue
        if not sol.converged:
            log.warning("omega=%g did not converge: %s", w, sol.message)
        elif warm_start:
            x0 = sol.x
        out.append(sol)
    return out


def _failed(case: PowerCase, omega: float, message: str) -> OpfSolution:
    n = case.n_bus
    nan = np.full(n, np.nan)
    ns = sum(1 for s in case.supply if s.connected)
    nd = sum(1 for d in case.demand if d.connected)
    return OpfSolution(omega, tuple(b.number for b in case.buses), np.full(ns, np.nan),
                       np.full(nd, np.nan), {}, {}, np.nan, np.nan, nan, nan, nan, nan,
                       np.nan, np.nan, np.nan, 0, False, message)


def supply_names(case: PowerCase) -> list[str]:
    return [case.bus_name(s.bus) for s in case.supply if s.connected]


def write_pareto_csv(case: PowerCase, solutions: Sequence[OpfSolution], out: TextIO) -> None:
    """Dispatch-versus-weighting table: ``weighting`` then P_S (p.u.) per plant."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["weighting"] + supply_names(case))
    for sol in solutions:
        writer.writerow([repr(float(sol.omega))] + [repr(float(p)) for p in sol.p_s])
