"""Exact per-fragment variances for both measurement protocols.

Hadamard test (LCU fragments, scaled unitaries): the ancilla X/Y outcome
has variance beta_j^2 (1 - part<phi0|U_j|phik>^2) per part.
Extended swap test (FH fragments): the joint ancilla (x) fragment outcome
has second moment (  <phi0|H_j^2|phi0> + <phik|H_j^2|phik> ) / 2 for both
parts, minus the squared part of the transitional amplitude.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..grouping import MODE_FH, MODE_LCU, FragmentSet, decomposition_norm
from ..pauli import PauliSum
from .statevector import apply_word

RE, IM = 0, 1


@dataclass
class VarianceTable:
    """Exact variances (rows: fragment, cols: Re/Im) plus amplitudes."""

    mode: str
    var: np.ndarray
    amplitudes: np.ndarray
    weights: np.ndarray
    fragments: Optional[FragmentSet] = None
    phi0: Optional[np.ndarray] = None
    phik: Optional[np.ndarray] = None

    @property
    def n_fragments(self) -> int:
        return self.var.shape[0]

    def total_amplitude(self) -> complex:
        return complex(np.sum(self.amplitudes))

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "var_re": self.var[:, RE].tolist(),
            "var_im": self.var[:, IM].tolist(),
            "amplitude_re": np.real(self.amplitudes).tolist(),
            "amplitude_im": np.imag(self.amplitudes).tolist(),
            "weights": self.weights.tolist(),
        }


def _group_action(group: dict, vec: np.ndarray) -> np.ndarray:
    out = np.zeros_like(vec)
    for word, coef in group.items():
        out += coef * apply_word(word, vec)
    return out


def lcu_variances(fs: FragmentSet, phi0: np.ndarray, phik: np.ndarray) -> VarianceTable:
    if fs.mode != MODE_LCU:
        raise ValueError("expected an anticommuting (LCU) fragment set")
    betas = np.array([fs.group_l2(j) for j in range(len(fs.groups))])
    amps = np.zeros(len(fs.groups), dtype=complex)
    var = np.zeros((len(fs.groups), 2))
    for j, g in enumerate(fs.groups):
        if betas[j] == 0.0:
            warnings.warn(f"fragment {j} has zero norm; excluded from variances")
            continue
        amps[j] = np.vdot(phi0, _group_action(g, phik))
        var[j, RE] = betas[j] ** 2 - np.real(amps[j]) ** 2
        var[j, IM] = betas[j] ** 2 - np.imag(amps[j]) ** 2
    var = np.maximum(var, 0.0)
    return VarianceTable(MODE_LCU, var, amps, betas, fs, phi0, phik)


def fh_variances(fs: FragmentSet, phi0: np.ndarray, phik: np.ndarray) -> VarianceTable:
    if fs.mode != MODE_FH:
        raise ValueError("expected a commuting (FH) fragment set")
    gammas = np.array([fs.group_l2(j) for j in range(len(fs.groups))])
    amps = np.zeros(len(fs.groups), dtype=complex)
    var = np.zeros((len(fs.groups), 2))
    for j, g in enumerate(fs.groups):
        if gammas[j] == 0.0:
            warnings.warn(f"fragment {j} has zero norm; excluded from variances")
            continue
        h0 = _group_action(g, phi0)
        hk = _group_action(g, phik)
        second = 0.5 * (np.vdot(h0, h0).real + np.vdot(hk, hk).real)
        amps[j] = np.vdot(h0, phik)
        var[j, RE] = second - np.real(amps[j]) ** 2
        var[j, IM] = second - np.imag(amps[j]) ** 2
    var = np.maximum(var, 0.0)
    return VarianceTable(MODE_FH, var, amps, gammas, fs, phi0, phik)


def fragment_variances(fs: FragmentSet, phi0, phik) -> VarianceTable:
    return (lcu_variances if fs.mode == MODE_LCU else fh_variances)(fs, phi0, phik)


def overlap_variance(s0k: complex, m_r: float, m_i: float, shots: int) -> float:
    """Var[S_0k] for a split (m_r, m_i) of `shots` Hadamard-test repetitions."""
    if m_r + m_i <= 0 or shots < 1:
        raise ValueError("need a positive shot split and at least one shot")
    num_r = 1.0 - np.real(s0k) ** 2
    num_i = 1.0 - np.imag(s0k) ** 2
    total = 0.0
    for num, frac, part in ((num_r, m_r, "real"), (num_i, m_i, "imag")):
        if num > 0.0 and frac == 0.0:
            raise ValueError(f"no shots allocated to the needed {part} part")
        total += 0.0 if num == 0.0 else num / frac
    return total / shots


@dataclass
class ShotAllocation:
    """Fractions m_{jX} (rows: fragment, cols: Re/Im) summing to one."""

    m: np.ndarray
    total_shots: int = 0

    def __post_init__(self):
        if np.any(self.m < 0):
            raise ValueError("negative shot fraction")
        s = self.m.sum()
        if s <= 0:
            raise ValueError("empty allocation")
        self.m = self.m / s


def allocate_shots(vt: VarianceTable, strategy: str = "optimal",
                   total_shots: int = 0) -> ShotAllocation:
    """Optimal (sqrt-variance) or variance-blind sub-optimal fractions."""
    if vt.n_fragments == 0:
        raise ValueError("empty variance table")
    if strategy == "optimal":
        m = np.sqrt(vt.var)
        if m.sum() == 0.0:
            m = np.ones_like(vt.var)
    elif strategy == "subopt":
        m = np.repeat(vt.weights[:, None], 2, axis=1)
        if m.sum() == 0.0:
            m = np.ones_like(vt.var)
    elif strategy == "uniform":
        m = np.ones_like(vt.var)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return ShotAllocation(m=m, total_shots=total_shots)


def element_variance(vt: VarianceTable, alloc: ShotAllocation, shots: int) -> float:
    """Total Var[H_0k] = (1/M) sum_jX Var_jX / m_jX (Re + Im parts)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(vt.var > 0, vt.var / np.where(alloc.m > 0, alloc.m, np.nan), 0.0)
    if np.any(np.isnan(ratio)):
        j, x = map(int, np.argwhere(np.isnan(ratio))[0])
        raise ValueError(f"fragment {j} part {'RI'[x]} has variance but no shots")
    return float(ratio.sum()) / shots


def haar_expected_cost(fs: FragmentSet, d: int):
    """(Var * M, M eps^2) after Haar averaging with sub-optimal fractions."""
    zeta = decomposition_norm(fs)
    return 2.0 * zeta ** 2 * (2.0 - 1.0 / d), 4.0 * zeta ** 2
