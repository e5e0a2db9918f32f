"""Newton-Raphson AC power flow with distributed slack.

The specified net injection at every bus is kept in a small linear model

    P(V, lam, k) = p0 + lam*p_lam + k*p_k - pz*V**2
    Q(V, lam)    = q0 + lam*q_lam         - qz*V**2

where ``k`` is the loss-sharing scalar k_G, ``lam`` the loading parameter of
the continuation power flow, and ``pz``/``qz`` hold loads converted to
constant impedance.  The plain power flow uses ``lam = 0``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.sparse import csc_matrix, diags, hstack, vstack
from scipy.sparse.linalg import splu

from .case_model import PowerCase, PQGen, PQLoad
from .network import build_admittance

log = logging.getLogger(__name__)


class PowerFlowError(RuntimeError):
    pass


class ConvergenceError(PowerFlowError):
    def __init__(self, message: str, iterations: int, mismatch: float):
        super().__init__(message)
        self.iterations = iterations
        self.mismatch = mismatch


class SingularJacobianError(PowerFlowError):
    def __init__(self, iteration: int):
        super().__init__(f"singular Jacobian at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8
    max_iterations: int = 30
    distributed_slack: bool = False
    enforce_q_limits: bool = False
    flat_start: bool = True
    convert_impedance: bool = True
    max_switches: int = 10

    def __post_init__(self) -> None:
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class GenUnit:
    """A voltage-controlling generator (SW or PV record)."""

    kind: str
    row: int
    bus: int
    p: float
    gamma: float
    v_set: float
    q_min: float
    q_max: float


@dataclass
class BusInjections:
    p0: np.ndarray
    q0: np.ndarray
    p_k: np.ndarray
    pz: np.ndarray
    qz: np.ndarray
    p_lam: np.ndarray
    q_lam: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "BusInjections":
        return cls(*(np.zeros(n) for _ in range(7)))

    def copy(self) -> "BusInjections":
        return BusInjections(*(a.copy() for a in (
            self.p0, self.q0, self.p_k, self.pz, self.qz, self.p_lam, self.q_lam)))

    def p_spec(self, vm: np.ndarray, lam: float = 0.0, k: float = 0.0) -> np.ndarray:
        return self.p0 + lam * self.p_lam + k * self.p_k - self.pz * vm**2

    def q_spec(self, vm: np.ndarray, lam: float = 0.0) -> np.ndarray:
        return self.q0 + lam * self.q_lam - self.qz * vm**2


@dataclass
class BusTyping:
    ref: int
    controlled: np.ndarray  # bool, voltage magnitude fixed
    distributed: bool

    def theta_cols(self) -> np.ndarray:
        return np.array([i for i in range(len(self.controlled)) if i != self.ref], dtype=int)

    def v_cols(self) -> np.ndarray:
        return np.flatnonzero(~self.controlled)

    def p_rows(self) -> np.ndarray:
        if self.distributed:
            return np.arange(len(self.controlled))
        return self.theta_cols()

    def q_rows(self) -> np.ndarray:
        return self.v_cols()


@dataclass
class NetworkModel:
    """Everything the Newton iterations need, on the system base."""

    bus_ids: tuple[int, ...]
    ybus: csc_matrix
    injections: BusInjections
    typing: BusTyping
    v_set: np.ndarray
    units: list[GenUnit]
    p_fixed_gen: np.ndarray  # PQgen active output per bus
    q_fixed_gen: np.ndarray
    p_fixed_load: np.ndarray  # constant-power PQ load per bus
    q_fixed_load: np.ndarray
    system_base: float


@dataclass
class PowerFlowSolution:
    bus_ids: tuple[int, ...]
    v: np.ndarray
    theta: np.ndarray
    k_g: float
    p_injected: np.ndarray
    q_injected: np.ndarray
    losses: float
    converged: bool
    iterations: int
    mismatch: float
    p_gen: np.ndarray
    q_gen: np.ndarray
    p_load: np.ndarray
    q_load: np.ndarray
    unit_p: list[tuple[GenUnit, float]] = field(default_factory=list)
    converted: list[tuple[str, int, float]] = field(default_factory=list)
    pinned: dict[int, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    system_base: float = 100.0

    def voltage(self, bus: int) -> complex:
        i = self.bus_ids.index(bus)
        return self.v[i] * np.exp(1j * self.theta[i])


# --- model assembly ---------------------------------------------------------


def build_model(case: PowerCase, distributed_slack: bool = False) -> NetworkModel:
    index = case.bus_index()
    n = case.n_bus
    ref_gen = case.phase_reference()
    if ref_gen is None:
        raise PowerFlowError("no phase reference slack generator")
    inj = BusInjections.zeros(n)
    controlled = np.zeros(n, dtype=bool)
    v_set = np.array([b.v0 for b in case.buses], dtype=float)
    p_fixed_gen = np.zeros(n)
    q_fixed_gen = np.zeros(n)
    p_fixed_load = np.zeros(n)
    q_fixed_load = np.zeros(n)
    units: list[GenUnit] = []

    for row, g in enumerate(case.pv):
        if not g.connected:
            continue
        i = index[g.bus]
        units.append(GenUnit("PV", row, g.bus, g.p_gen, g.gamma, g.v0, g.q_min, g.q_max))
        controlled[i] = True
        v_set[i] = g.v0
    # slack setpoints override PV setpoints at a shared bus
    for row, g in enumerate(case.sw):
        if not g.connected:
            continue
        i = index[g.bus]
        units.append(GenUnit("SW", row, g.bus, g.p_g0, g.gamma, g.v0, g.q_min, g.q_max))
        controlled[i] = True
        v_set[i] = g.v0
    for u in units:
        i = index[u.bus]
        inj.p0[i] += u.p
        if distributed_slack:
            inj.p_k[i] += u.gamma * u.p
    for ld in case.pq:
        if ld.connected:
            i = index[ld.bus]
            p_fixed_load[i] += ld.p_load
            q_fixed_load[i] += ld.q_load
    for g in case.pqgen:
        if g.connected:
            i = index[g.bus]
            p_fixed_gen[i] += g.p_gen
            q_fixed_gen[i] += g.q_gen
    inj.p0 += p_fixed_gen - p_fixed_load
    inj.q0 += q_fixed_gen - q_fixed_load

    typing = BusTyping(index[ref_gen.bus], controlled, distributed_slack)
    if distributed_slack and not np.any(inj.p_k != 0):
        raise PowerFlowError("distributed slack requested but no generator shares losses")
    ybus = build_admittance(case).matrix.tocsc()
    return NetworkModel(tuple(b.number for b in case.buses), ybus, inj, typing, v_set,
                        units, p_fixed_gen, q_fixed_gen, p_fixed_load, q_fixed_load,
                        case.system_base)


# --- Newton kernel ----------------------------------------------------------


def dsbus_dv(ybus: csc_matrix, v: np.ndarray):
    """Partial derivatives of the complex bus injections w.r.t. angle and magnitude."""
    ibus = ybus @ v
    diag_v = diags(v)
    diag_i = diags(ibus)
    diag_vn = diags(v / np.abs(v))
    ds_dvm = diag_v @ (ybus @ diag_vn).conj() + diag_i.conj() @ diag_vn
    ds_dva = 1j * diag_v @ (diag_i - ybus @ diag_v).conj()
    return ds_dva.tocsc(), ds_dvm.tocsc()


def injection_residual(ybus, vm: np.ndarray, va: np.ndarray,
                       p_spec: np.ndarray, q_spec: np.ndarray) -> np.ndarray:
    """Complex per-bus mismatch between network and specified injections."""
    v = vm * np.exp(1j * va)
    s = v * np.conj(ybus @ v)
    return s - (p_spec + 1j * q_spec)


def mismatch(model: NetworkModel, vm, va, lam: float = 0.0, k: float = 0.0,
             typing: Optional[BusTyping] = None) -> np.ndarray:
    typing = typing or model.typing
    inj = model.injections
    res = injection_residual(model.ybus, vm, va, inj.p_spec(vm, lam, k), inj.q_spec(vm, lam))
    return np.concatenate([res.real[typing.p_rows()], res.imag[typing.q_rows()]])


def jacobian(model: NetworkModel, vm, va, typing: Optional[BusTyping] = None,
             with_lambda: bool = False) -> csc_matrix:
    """Jacobian of :func:`mismatch` w.r.t. [theta, V, (k), (lam)]."""
    typing = typing or model.typing
    inj = model.injections
    v = vm * np.exp(1j * va)
    ds_dva, ds_dvm = dsbus_dv(model.ybus, v)
    ds_dvm = ds_dvm + diags(2.0 * (inj.pz + 1j * inj.qz) * vm)
    pr, qr = typing.p_rows(), typing.q_rows()
    tc, vc = typing.theta_cols(), typing.v_cols()
    blocks = [
        [ds_dva[pr][:, tc].real, ds_dvm[pr][:, vc].real],
        [ds_dva[qr][:, tc].imag, ds_dvm[qr][:, vc].imag],
    ]
    if typing.distributed:
        blocks[0].append(csc_matrix(-inj.p_k[pr].reshape(-1, 1)))
        blocks[1].append(csc_matrix((len(qr), 1)))
    if with_lambda:
        blocks[0].append(csc_matrix(-inj.p_lam[pr].reshape(-1, 1)))
        blocks[1].append(csc_matrix(-inj.q_lam[qr].reshape(-1, 1)))
    return vstack([hstack(row) for row in blocks]).tocsc()


def solve_linear(matrix: csc_matrix, rhs: np.ndarray, iteration: int = 1) -> np.ndarray:
    try:
        dx = splu(csc_matrix(matrix)).solve(rhs)
    except RuntimeError:
        raise SingularJacobianError(iteration) from None
    if not np.all(np.isfinite(dx)):
        raise SingularJacobianError(iteration)
    return dx


def newton(model: NetworkModel, vm: np.ndarray, va: np.ndarray, k: float,
           tolerance: float, max_iterations: int, lam: float = 0.0,
           typing: Optional[BusTyping] = None) -> tuple[np.ndarray, np.ndarray, float, int, float]:
    typing = typing or model.typing
    vm, va = vm.copy(), va.copy()
    tc, vc = typing.theta_cols(), typing.v_cols()
    for it in range(max_iterations + 1):
        f = mismatch(model, vm, va, lam, k, typing)
        norm = float(np.max(np.abs(f))) if f.size else 0.0
        if norm <= tolerance:
            return vm, va, k, it, norm
        if it == max_iterations:
            break
        dx = solve_linear(jacobian(model, vm, va, typing), -f, it + 1)
        va[tc] += dx[:len(tc)]
        vm[vc] += dx[len(tc):len(tc) + len(vc)]
        if typing.distributed:
            k += dx[len(tc) + len(vc)]
        if not np.all(np.isfinite(vm)) or np.any(vm <= 0):
            raise ConvergenceError("voltage magnitude collapsed during iterations", it + 1, norm)
    raise ConvergenceError(f"no convergence in {max_iterations} iterations "
                           f"(max mismatch {norm:.3e})", max_iterations, norm)


# --- constant impedance conversion ------------------------------------------


@dataclass(frozen=True)
class ImpedanceLoad:
    """Constant-impedance equivalent of a PQ record at voltage ``v_limit``.

    ``s0`` and ``angle`` are the apparent power and power-factor angle of the
    consumption at conversion (a generator is a negative consumption).
    """

    bus: int
    s0: float
    angle: float
    v_limit: float

    def power(self, v: Union[float, np.ndarray]):
        scale = (np.asarray(v) / self.v_limit) ** 2
        return self.s0 * math.cos(self.angle) * scale, self.s0 * math.sin(self.angle) * scale

    @property
    def coefficients(self) -> tuple[float, float]:
        """(pz, qz) such that P = pz*V**2 and Q = qz*V**2."""
        k = 1.0 / self.v_limit**2
        return self.s0 * math.cos(self.angle) * k, self.s0 * math.sin(self.angle) * k


def convert_to_impedance(record: Union[PQLoad, PQGen], v_limit: float) -> ImpedanceLoad:
    if not record.z_convertible:
        raise ValueError(f"record at bus {record.bus} does not allow impedance conversion")
    if not v_limit > 0:
        raise ValueError("voltage limit must be positive")
    if isinstance(record, PQGen):
        p, q = -record.p_gen, -record.q_gen
    else:
        p, q = record.p_load, record.q_load
    return ImpedanceLoad(record.bus, math.hypot(p, q), math.atan2(q, p), v_limit)


# --- driver -----------------------------------------------------------------


def _initial_point(case: PowerCase, model: NetworkModel, flat_start: bool):
    vm = np.array([b.v0 if b.v0 > 0 else 1.0 for b in case.buses], dtype=float)
    va = np.zeros(case.n_bus) if flat_start else np.array([b.theta0 for b in case.buses])
    ctrl = model.typing.controlled
    vm[ctrl] = model.v_set[ctrl]
    ref = case.phase_reference()
    va[model.typing.ref] = ref.theta0
    return vm, va


def _convert_violations(case: PowerCase, model: NetworkModel, vm: np.ndarray,
                        converted: list[tuple[str, int, float]]) -> bool:
    index = case.bus_index()
    done = {(kind, row) for kind, row, _ in converted}
    changed = False
    for kind, table in (("PQ", case.pq), ("PQgen", case.pqgen)):
        for row, rec in enumerate(table):
            if not rec.connected or not rec.z_convertible or (kind, row) in done:
                continue
            i = index[rec.bus]
            if model.typing.controlled[i]:
                continue
            if vm[i] > rec.v_max:
                v_lim = rec.v_max
            elif vm[i] < rec.v_min:
                v_lim = rec.v_min
            else:
                continue
            zl = convert_to_impedance(rec, v_lim)
            pz, qz = zl.coefficients
            inj = model.injections
            # constant-power part removed, impedance part added
            if kind == "PQ":
                inj.p0[i] += rec.p_load
                inj.q0[i] += rec.q_load
                model.p_fixed_load[i] -= rec.p_load
                model.q_fixed_load[i] -= rec.q_load
            else:
                inj.p0[i] -= rec.p_gen
                inj.q0[i] -= rec.q_gen
                model.p_fixed_gen[i] -= rec.p_gen
                model.q_fixed_gen[i] -= rec.q_gen
            inj.pz[i] += pz
            inj.qz[i] += qz
            converted.append((kind, row, v_lim))
            changed = True
            log.info("%s record %d at bus %d converted to constant impedance (V=%.4f)",
                     kind, row, rec.bus, vm[i])
    return changed


def _unit_limits(model: NetworkModel) -> dict[int, tuple[float, float, float]]:
    index = {b: i for i, b in enumerate(model.bus_ids)}
    out: dict[int, list[float]] = {}
    for u in model.units:
        i = index[u.bus]
        lim = out.setdefault(i, [0.0, 0.0, model.v_set[i]])
        lim[0] += u.q_min
        lim[1] += u.q_max
    return {i: (a, b, c) for i, (a, b, c) in out.items()}


def controlled_q(model: NetworkModel, vm, va) -> np.ndarray:
    """Reactive output of the voltage-controlling units at every bus (0 elsewhere)."""
    v = vm * np.exp(1j * va)
    s = v * np.conj(model.ybus @ v)
    q = s.imag - model.q_fixed_gen + model.q_fixed_load + model.injections.qz * vm**2
    has_units = np.zeros(len(vm), dtype=bool)
    index = {b: i for i, b in enumerate(model.bus_ids)}
    for u in model.units:
        has_units[index[u.bus]] = True
    return np.where(has_units, q, 0.0)


def _check_q_limits(model: NetworkModel, vm, va, pinned: dict[int, float], tol: float) -> bool:
    """Pin units that exceed a reactive bound; release them when the voltage
    error changes sign.  Returns True when the bus typing changed."""
    limits = _unit_limits(model)
    typing = model.typing
    changed = False
    q_units = controlled_q(model, vm, va)
    for i, (qmin, qmax, vset) in limits.items():
        if i in pinned:
            at_max = pinned[i] == qmax
            if (at_max and vm[i] > vset + tol) or (not at_max and vm[i] < vset - tol):
                del pinned[i]
                typing.controlled[i] = True
                vm[i] = vset
                changed = True
            continue
        if not typing.controlled[i]:
            continue
        if q_units[i] > qmax + tol:
            pinned[i] = qmax
        elif q_units[i] < qmin - tol:
            pinned[i] = qmin
        else:
            continue
        typing.controlled[i] = False
        changed = True
    pin = np.zeros(len(vm))
    for i, q in pinned.items():
        pin[i] = q
    model.injections.q0 = model.q_fixed_gen - model.q_fixed_load + pin
    return changed


def solve_power_flow(case: PowerCase, options: SolverOptions = SolverOptions()) -> PowerFlowSolution:
    model = build_model(case, options.distributed_slack)
    vm, va = _initial_point(case, model, options.flat_start)
    k = 0.0
    converted: list[tuple[str, int, float]] = []
    pinned: dict[int, float] = {}
    warnings: list[str] = []
    total_iterations = 0
    norm = 0.0
    for _ in range(options.max_switches + 1):
        vm, va, k, its, norm = newton(model, vm, va, k, options.tolerance,
                                      options.max_iterations)
        total_iterations += its
        changed = False
        if options.convert_impedance and _convert_violations(case, model, vm, converted):
            changed = True
        if options.enforce_q_limits and _check_q_limits(model, vm, va, pinned,
                                                        options.tolerance):
            changed = True
        if not changed:
            break
    else:
        warnings.append("bus typing did not settle; last typing kept")
        log.warning("q-limit / impedance switching did not settle after %d rounds",
                    options.max_switches)
    return _package(model, vm, va, k, total_iterations, norm, converted, pinned, warnings)


def _package(model: NetworkModel, vm, va, k, iterations, norm, converted, pinned,
             warnings) -> PowerFlowSolution:
    v = vm * np.exp(1j * va)
    s = v * np.conj(model.ybus @ v)
    inj = model.injections
    index = {b: i for i, b in enumerate(model.bus_ids)}
    typing = model.typing
    ref = typing.ref

    unit_p: list[tuple[GenUnit, float]] = []
    for u in model.units:
        unit_p.append((u, (1.0 + u.gamma * k) * u.p if typing.distributed else u.p))
    if not typing.distributed:
        # the reference bus balances whatever the other injections leave
        at_ref = [j for j, (u, _) in enumerate(unit_p) if index[u.bus] == ref]
        sw_ref = [j for j in at_ref if unit_p[j][0].kind == "SW"]
        fixed = (model.p_fixed_gen[ref] - model.p_fixed_load[ref] - inj.pz[ref] * vm[ref] ** 2
                 + sum(unit_p[j][1] for j in at_ref if j not in sw_ref))
        p_ref = s.real[ref] - fixed
        total = sum(unit_p[j][0].p for j in sw_ref)
        for j in sw_ref:
            u = unit_p[j][0]
            share = u.p / total if total else 1.0 / len(sw_ref)
            unit_p[j] = (u, p_ref * share)

    p_gen = model.p_fixed_gen.copy()
    for u, p in unit_p:
        p_gen[index[u.bus]] += p
    q_gen = model.q_fixed_gen + controlled_q(model, vm, va)
    p_load = model.p_fixed_load + inj.pz * vm**2
    q_load = model.q_fixed_load + inj.qz * vm**2
    losses = float(np.sum(s.real)) * model.system_base
    return PowerFlowSolution(
        bus_ids=model.bus_ids, v=vm, theta=va, k_g=float(k) if typing.distributed else 0.0,
        p_injected=s.real, q_injected=s.imag, losses=losses, converged=True,
        iterations=iterations, mismatch=norm, p_gen=p_gen, q_gen=q_gen,
        p_load=p_load, q_load=q_load, unit_p=unit_p, converted=list(converted),
        pinned={model.bus_ids[i]: q for i, q in pinned.items()}, warnings=warnings,
        system_base=model.system_base)
