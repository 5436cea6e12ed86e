"""Jordan-Wigner images of the symmetric-excitation operators."""

from __future__ import annotations

from ..pauli import PauliSum, PauliWord, identity_sum, symmetric_product
from .fermion import FermionSum


def _jw_excitation(n_qubits: int, r: int, s: int) -> PauliSum:
    """JW image of E_rs = a+_r a_s + a+_s a_r (equals 2 n_r when r == s)."""
    if r == s:
        return PauliSum(n_qubits, {
            PauliWord(n_qubits, 0, 0): 1.0,
            PauliWord(n_qubits, 1 << r, 0): -1.0,
        })
    lo, hi = (r, s) if r < s else (s, r)
    string = 0
    for q in range(lo + 1, hi):
        string |= 1 << q
    ends = (1 << lo) | (1 << hi)
    return PauliSum(n_qubits, {
        # X Z..Z X and Y Z..Z Y, each weight 1/2
        PauliWord(n_qubits, string, ends): 0.5,
        PauliWord(n_qubits, string | ends, ends): 0.5,
    })


def jordan_wigner(f: FermionSum, imag_tol: float = 1e-12) -> PauliSum:
    """Map a FermionSum to a real-coefficient PauliSum.

    Raises if any imaginary residue above `imag_tol` survives, which would
    indicate a non-Hermitian input.
    """
    n = f.n_orb
    acc: dict = {}
    if f.scalar:
        acc[PauliWord(n, 0, 0)] = f.scalar
    cache: dict = {}

    def image(pair):
        if pair not in cache:
            cache[pair] = _jw_excitation(n, *pair)
        return cache[pair]

    def accumulate(ps: PauliSum, scale: float):
        for w, c in ps.items():
            acc[w] = acc.get(w, 0.0) + scale * c

    for (r, s), coef in f.one_body.items():
        accumulate(image((r, s)), coef)
    for (a, b), coef in f.two_body.items():
        accumulate(symmetric_product(image(a), image(b)), 2.0 * coef)
    return PauliSum(n, acc, imag_tol=imag_tol).cleaned(1e-13)
