"""Toeplitz assembly and the thresholded generalized eigenvalue problem."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


class ThresholdError(ValueError):
    """Every overlap eigendirection fell below the threshold."""


def assemble_toeplitz(row: np.ndarray) -> np.ndarray:
    """Hermitian Toeplitz matrix from its first row."""
    row = np.asarray(row, dtype=complex)
    n = row.shape[0]
    if n < 1:
        raise ValueError("need at least one element")
    out = np.empty((n, n), dtype=complex)
    for k in range(n):
        for l in range(n):
            out[k, l] = row[l - k] if l >= k else np.conj(row[k - l])
    return out


# Eigenvalues of S below this relative level are numerical nullspace and
# always dropped; sampling noise can even push them negative.
_RELATIVE_FLOOR = 64.0 * np.finfo(float).eps


def thresholded_gevp(h_mat: np.ndarray, s_mat: np.ndarray,
                     eps_th: float) -> Tuple[np.ndarray, int]:
    """Project onto overlap eigendirections above eps_th, then solve.

    Returns ascending eigenvalues of the reduced Hermitian-definite pencil
    and the kept dimension n'.
    """
    if eps_th < 0:
        raise ValueError("threshold must be nonnegative")
    h_mat = 0.5 * (h_mat + h_mat.conj().T)
    s_mat = 0.5 * (s_mat + s_mat.conj().T)
    evals, evecs = np.linalg.eigh(s_mat)
    floor = max(eps_th, _RELATIVE_FLOOR * float(np.max(np.abs(evals), initial=0.0)))
    keep = evals > floor
    n_kept = int(np.count_nonzero(keep))
    if n_kept == 0:
        raise ThresholdError(
            f"threshold {eps_th:g} removed all {evals.size} overlap directions")
    basis = evecs[:, keep] / np.sqrt(evals[keep])
    reduced = basis.conj().T @ h_mat @ basis
    reduced = 0.5 * (reduced + reduced.conj().T)
    return np.linalg.eigvalsh(reduced), n_kept


def default_threshold(n: int, shots_s: float, constant: float = 1.0) -> float:
    """Heuristic eps_th = c * n / sqrt(M_S); zero in the infinite-shot limit."""
    if shots_s < 1:
        raise ValueError("need at least one overlap shot")
    if not np.isfinite(shots_s):
        return 0.0
    return constant * n / np.sqrt(shots_s)


def recover_shifted_energy(e_shifted: float, t: float) -> float:
    """Undo the measurement-side shift: the GEVP solved (H-T)w = Sw(E-t)."""
    return e_shifted + t


@dataclass
class KrylovEnsemble:
    """First-row Krylov data plus everything needed to recover energies.

    `t_shift` is the shift eigenvalue t (0 when unshifted); scalar_offset
    carries the identity component excluded from measurement (core energy
    and mapping constants). Recovered energies add both.
    """

    n: int
    dt: float
    s_row: np.ndarray
    h_row: np.ndarray
    t_shift: float = 0.0
    scalar_offset: float = 0.0
    metadata: dict = field(default_factory=dict)

    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        return assemble_toeplitz(self.h_row), assemble_toeplitz(self.s_row)

    def ground_energy(self, eps_th: float = 0.0) -> Tuple[float, int]:
        h_mat, s_mat = self.matrices()
        evals, n_kept = thresholded_gevp(h_mat, s_mat, eps_th)
        recovered = recover_shifted_energy(float(evals[0]),
                                           self.t_shift + self.scalar_offset)
        return recovered, n_kept

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "dt": self.dt,
            "s_row_re": np.real(self.s_row).tolist(),
            "s_row_im": np.imag(self.s_row).tolist(),
            "h_row_re": np.real(self.h_row).tolist(),
            "h_row_im": np.imag(self.h_row).tolist(),
            "t_shift": self.t_shift,
            "scalar_offset": self.scalar_offset,
            "metadata": self.metadata,
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)
