"""Desk-scale exact statevector engine.

Basis convention: bit q of the basis-state index is qubit q (equivalently
spin orbital q), so |index> = |n_0 n_1 ... > with index = sum n_q 2^q.
Pauli words act as signed permutations of the index set, which keeps every
kernel a vectorized gather/multiply.
"""

from __future__ import annotations

from typing import Iterable, List, Sequence

import numpy as np

from ..pauli import PauliSum, PauliWord


def _parity_signs(z: int, dim: int) -> np.ndarray:
    """(-1)^{popcount(i & z)} for all basis indices i, as int8."""
    idx = np.arange(dim, dtype=np.uint64)
    pc = np.bitwise_count(idx & np.uint64(z))
    return np.where(pc % 2 == 0, 1, -1).astype(np.int8)


def word_phase(word: PauliWord) -> complex:
    """Global i^{|x & z|} phase that converts the XZ form into X/Y/Z."""
    return (1j) ** ((word.x & word.z).bit_count() % 4)


def apply_word(word: PauliWord, vec: np.ndarray) -> np.ndarray:
    """Apply a single Pauli word to a statevector."""
    dim = 1 << word.n_qubits
    idx = (np.arange(dim, dtype=np.uint64) ^ np.uint64(word.x)).astype(np.intp)
    # (P v)[j] = i^{|x&z|} (-1)^{|z & (j^x)|} v[j^x]
    out = vec[idx] * _parity_signs(word.z, dim)[idx]
    ph = word_phase(word)
    return out * ph if ph != 1 else out


class PauliAction:
    """Matrix-free action of a PauliSum, grouped by X-mask.

    Words sharing an X-mask differ only in diagonal sign patterns, so the
    whole sum collapses to one complex diagonal table per distinct mask:
    H v = sum_x  A_x * v[index ^ x].
    """

    def __init__(self, h: PauliSum):
        self.n_qubits = h.n_qubits
        self.dim = 1 << h.n_qubits
        tables: dict[int, np.ndarray] = {}
        sign_cache: dict[int, np.ndarray] = {}
        for word, coef in h.sorted_items():
            if word.z not in sign_cache:
                sign_cache[word.z] = _parity_signs(word.z, self.dim)
            # coefficient of v[j^x] at output j: coef * i^{|x&z|} * (-1)^{|z&x|} * (-1)^{|z&j|}
            scale = coef * word_phase(word) * ((-1) ** ((word.z & word.x).bit_count() % 2))
            tab = tables.get(word.x)
            if tab is None:
                tab = np.zeros(self.dim, dtype=complex)
                tables[word.x] = tab
            tab += scale * sign_cache[word.z]
        self._masks = sorted(tables)
        self._tables = [tables[x] for x in self._masks]
        self._gathers = [
            (np.arange(self.dim, dtype=np.uint64) ^ np.uint64(x)).astype(np.intp)
            for x in self._masks
        ]

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for tab, gather in zip(self._tables, self._gathers):
            out += tab * vec[gather]
        return out

    def expectation(self, vec: np.ndarray) -> float:
        return float(np.real(np.vdot(vec, self(vec))))


def apply_pauli_sum(h: PauliSum, vec: np.ndarray) -> np.ndarray:
    return PauliAction(h)(vec)


def basis_state(n_qubits: int, index: int) -> np.ndarray:
    vec = np.zeros(1 << n_qubits, dtype=complex)
    vec[index] = 1.0
    return vec


class EvolveError(RuntimeError):
    """Matrix-exponential action failed to converge."""


def _lanczos_expm_step(matvec, vec, t: float, tol: float, m_max: int):
    """One e^{-i t H} |vec> substep via Lanczos with full reorthogonalization."""
    norm0 = np.linalg.norm(vec)
    basis = [vec / norm0]
    alphas: List[float] = []
    betas: List[float] = []
    for j in range(m_max):
        w = matvec(basis[j])
        alpha = float(np.real(np.vdot(basis[j], w)))
        alphas.append(alpha)
        w = w - alpha * basis[j]
        if j > 0:
            w = w - betas[-1] * basis[j - 1]
        # full reorthogonalization keeps the small problem faithful
        for b in basis:
            w = w - np.vdot(b, w) * b
        beta = float(np.linalg.norm(w))
        T = np.diag(alphas)
        if betas:
            off = np.array(betas)
            T = T + np.diag(off, 1) + np.diag(off, -1)
        evals, evecs = np.linalg.eigh(T)
        small = evecs @ (np.exp(-1j * t * evals) * evecs[0, :].conj())
        # a-posteriori error estimate: weight leaking into the next basis vector
        err = abs(t) * beta * abs(small[-1])
        if err < tol or beta < 1e-14:
            out = np.zeros_like(vec)
            for coef, b in zip(small, basis):
                out += coef * b
            return out * norm0, True
        betas.append(beta)
        basis.append(w / beta)
    return None, False


def _expm_action(action, center, radius, psi, t, tol, max_refine=200):
    theta = abs(t) * radius
    n_sub = max(1, int(np.ceil(theta / 25.0)))
    for _ in range(max_refine):
        dt_sub = t / n_sub
        cur = psi.astype(complex).copy()
        for _ in range(n_sub):
            cur, ok = _lanczos_expm_step(action, cur, dt_sub, tol / n_sub, 48)
            if not ok:
                cur = None
                break
        if cur is not None:
            return cur * np.exp(-1j * center * t)
        n_sub *= 2
        if n_sub > 1 << 20:
            break
    raise EvolveError("matrix-exponential action did not converge")


def evolve(h: PauliSum, psi: np.ndarray, t: float, tol: float = 1e-10) -> np.ndarray:
    """e^{-i h t} |psi> via Krylov action of the exponential.

    Only H-on-vector products are used. The identity part is peeled off so
    substep counts follow the traceless spectral radius, bounded here by
    the coefficient L1 norm.
    """
    if t == 0.0:
        return psi.astype(complex).copy()
    traceless = h.without_identity()
    action = PauliAction(traceless)
    return _expm_action(action, h.identity_coefficient,
                        traceless.coefficient_l1(), psi, t, tol)


def krylov_states(h: PauliSum, phi0: np.ndarray, dt: float, n: int,
                  tol: float = 1e-10) -> List[np.ndarray]:
    """[|phi_0>, ..., |phi_{n-1}>] with |phi_{k+1}> = e^{-i h dt} |phi_k>."""
    if n < 1:
        raise ValueError("need at least one state")
    states = [phi0.astype(complex).copy()]
    if n == 1:
        return states
    traceless = h.without_identity()
    action = PauliAction(traceless)
    radius = traceless.coefficient_l1()
    center = h.identity_coefficient
    for _ in range(n - 1):
        states.append(_expm_action(action, center, radius, states[-1], dt, tol))
    return states


def exact_first_row(h: PauliSum, states: Sequence[np.ndarray]):
    """Exact S_0k = <phi_0|phi_k> and H_0k = <phi_0|H|phi_k>."""
    phi0 = states[0]
    h_phi0 = PauliAction(h)(phi0)
    s_row = np.array([np.vdot(phi0, st) for st in states])
    h_row = np.array([np.vdot(h_phi0, st) for st in states])
    return s_row, h_row


def dense_in_sector(h: PauliSum, basis_indices: np.ndarray) -> np.ndarray:
    """<b_i|H|b_j> over a list of computational basis states.

    Exact when H preserves the span (e.g. a particle-number sector).
    """
    basis_indices = np.asarray(basis_indices, dtype=np.uint64)
    pos = {int(b): i for i, b in enumerate(basis_indices)}
    nb = len(basis_indices)
    out = np.zeros((nb, nb), dtype=complex)
    for word, coef in h.sorted_items():
        targets = basis_indices ^ np.uint64(word.x)
        pc = np.bitwise_count(basis_indices & np.uint64(word.z))
        signs = np.where(pc % 2 == 0, 1.0, -1.0)
        ph = coef * word_phase(word)
        for j in range(nb):
            i = pos.get(int(targets[j]))
            if i is not None:
                # <b_i|P|b_j> = i^{|x&z|} (-1)^{|z & b_j|}
                out[i, j] += ph * signs[j]
    return out


def sector_indices(n_qubits: int, n_elec: int) -> np.ndarray:
    """All basis indices with the given particle number, ascending."""
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    return idx[np.bitwise_count(idx) == n_elec]


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)
