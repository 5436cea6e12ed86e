"""Reference states: Hartree-Fock occupation, CISD, and sector spectra."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Tuple

import numpy as np

from ..pauli import PauliSum
from ..sim.statevector import basis_state, dense_in_sector, sector_indices


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class Occupation:
    occ: frozenset
    virt: frozenset

    def __post_init__(self):
        if self.occ & self.virt:
            raise ValueError("occupied and virtual sets overlap")

    @property
    def n_orb(self) -> int:
        return len(self.occ) + len(self.virt)

    @property
    def determinant_index(self) -> int:
        idx = 0
        for p in self.occ:
            idx |= 1 << p
        return idx


def hf_reference(ints_or_norb, n_elec: int | None = None) -> Occupation:
    """Lowest-index occupation (fixture orbitals are energy-ordered)."""
    if n_elec is None:
        n_orb, n_elec = ints_or_norb.n_orb, ints_or_norb.n_elec
    else:
        n_orb = ints_or_norb
    if n_elec > n_orb:
        raise InfeasibleError(f"{n_elec} electrons in {n_orb} spin orbitals")
    return Occupation(occ=frozenset(range(n_elec)),
                      virt=frozenset(range(n_elec, n_orb)))


def hf_statevector(n_qubits: int, ref: Occupation) -> np.ndarray:
    return basis_state(n_qubits, ref.determinant_index)


def cisd_indices(ref: Occupation, n_qubits: int) -> np.ndarray:
    """Determinants within two excitations of the reference, same number."""
    occ = sorted(ref.occ)
    virt = sorted(ref.virt)
    base = ref.determinant_index
    found = {base}
    for nex in (1, 2):
        for holes in combinations(occ, nex):
            for parts in combinations(virt, nex):
                d = base
                for h in holes:
                    d ^= 1 << h
                for p in parts:
                    d |= 1 << p
                found.add(d)
    return np.array(sorted(found), dtype=np.uint64)


def cisd_ground_state(h: PauliSum, ref: Occupation) -> Tuple[np.ndarray, float]:
    """Lowest eigenpair of H restricted to the singles-doubles space.

    The state comes back embedded in the full 2^N space, normalized.
    """
    if not ref.occ and not ref.virt:
        raise InfeasibleError("empty reference")
    basis = cisd_indices(ref, h.n_qubits)
    if len(basis) == 0:
        raise InfeasibleError("empty CISD space")
    mat = dense_in_sector(h, basis)
    evals, evecs = np.linalg.eigh(mat)
    state = np.zeros(1 << h.n_qubits, dtype=complex)
    state[basis.astype(np.intp)] = evecs[:, 0]
    state /= np.linalg.norm(state)
    return state, float(evals[0])


@dataclass
class SectorSolution:
    """Dense spectrum of H within one particle-number sector."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def first_gap(self, degeneracy_tol: float = 1e-8) -> float:
        e0 = self.eigenvalues[0]
        for e in self.eigenvalues[1:]:
            if e - e0 > degeneracy_tol:
                return float(e - e0)
        raise InfeasibleError("fully degenerate sector spectrum")

    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def reference_weights(self, det_index: int) -> np.ndarray:
        """|<psi_i|det>|^2 spectral weights of a determinant."""
        row = np.nonzero(self.basis == np.uint64(det_index))[0]
        if row.size == 0:
            raise InfeasibleError("determinant outside this sector")
        return np.abs(self.eigenvectors[int(row[0]), :]) ** 2

    def weighted_span(self, det_index: int, quantile: float = 0.999) -> float:
        """Energy span above the ground state holding `quantile` of the
        determinant's spectral weight."""
        w = self.reference_weights(det_index)
        order = np.argsort(self.eigenvalues)
        cum = np.cumsum(w[order])
        idx = int(np.searchsorted(cum, quantile))
        idx = min(idx, len(order) - 1)
        return float(self.eigenvalues[order][idx] - self.eigenvalues[0])

    def ground_state_full(self, n_qubits: int) -> np.ndarray:
        state = np.zeros(1 << n_qubits, dtype=complex)
        state[self.basis.astype(np.intp)] = self.eigenvectors[:, 0]
        return state


def solve_sector(h: PauliSum, n_elec: int) -> SectorSolution:
    basis = sector_indices(h.n_qubits, n_elec)
    mat = dense_in_sector(h, basis)
    evals, evecs = np.linalg.eigh(mat)
    return SectorSolution(basis=basis, eigenvalues=evals, eigenvectors=evecs)
