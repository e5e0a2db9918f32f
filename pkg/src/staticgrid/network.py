"""Nodal admittance matrix from the pi-model of lines and transformers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from .case_model import Branch, PowerCase


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class AdmittanceMatrix:
    matrix: csr_matrix
    bus_ids: tuple[int, ...]

    @property
    def index(self) -> dict[int, int]:
        return {b: i for i, b in enumerate(self.bus_ids)}

    def entry(self, i_bus: int, j_bus: int) -> complex:
        idx = self.index
        return complex(self.matrix[idx[i_bus], idx[j_bus]])

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def branch_parameters(branch: Branch) -> tuple[complex, float]:
    """Series admittance and total charging susceptance of one branch.

    Per-km data (``length > 0``) is multiplied by the length first; the
    resulting values are per unit.
    """
    r, x, b = branch.r, branch.x, branch.b
    if branch.length > 0:
        r, x, b = r * branch.length, x * branch.length, b * branch.length
    if x == 0 and r == 0:
        raise NetworkError(f"branch {branch.from_bus}->{branch.to_bus} has zero impedance")
    return 1.0 / complex(r, x), b


def branch_stamp(branch: Branch) -> np.ndarray:
    """2x2 block [[Yff, Yft], [Ytf, Ytt]] of a branch.

    Transformers carry the complex ratio a*exp(j*phi) on the from side.
    """
    ys, b = branch_parameters(branch)
    if branch.is_transformer:
        tap = branch.effective_tap * np.exp(1j * np.deg2rad(branch.phase_shift))
    else:
        tap = 1.0 + 0j
    ych = 0.5j * b
    yff = (ys + ych) / (tap * np.conj(tap))
    yft = -ys / np.conj(tap)
    ytf = -ys / tap
    ytt = ys + ych
    return np.array([[yff, yft], [ytf, ytt]], dtype=complex)


def build_admittance(case: PowerCase) -> AdmittanceMatrix:
    index = case.bus_index()
    n = case.n_bus
    rows: list[int] = []
    cols: list[int] = []
    vals: list[complex] = []
    for br in case.lines:
        if not br.connected:
            continue
        if br.from_bus not in index or br.to_bus not in index:
            raise NetworkError(f"branch {br.from_bus}->{br.to_bus} touches an unknown bus")
        if br.x == 0:
            raise NetworkError(f"branch {br.from_bus}->{br.to_bus} has zero reactance")
        f, t = index[br.from_bus], index[br.to_bus]
        block = branch_stamp(br)
        rows += [f, f, t, t]
        cols += [f, t, f, t]
        vals += [block[0, 0], block[0, 1], block[1, 0], block[1, 1]]
    for sh in case.shunts:
        if not sh.connected:
            continue
        if sh.bus not in index:
            raise NetworkError(f"shunt at unknown bus {sh.bus}")
        i = index[sh.bus]
        rows.append(i)
        cols.append(i)
        vals.append(complex(sh.g, sh.b))
    # duplicate (row, col) pairs are summed on conversion
    matrix = csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n, n))
    matrix.sum_duplicates()
    return AdmittanceMatrix(matrix, tuple(b.number for b in case.buses))
