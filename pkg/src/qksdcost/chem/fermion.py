"""Second-quantized Hamiltonians over symmetric excitation operators.

A FermionSum stores  sum_{r<=s} c1[r,s] E_rs
                   + sum_{(a,b)} c2[a,b] (E_a E_b + E_b E_a)  + scalar,
with E_rs = a^+_r a_s + a^+_s a_r (so E_rr = 2 n_r) and canonical
two-body keys: a = (p<=q), b = (r<=s), a <= b lexicographically, and the
all-equal quadruple excluded (absorbed into one-body via n_r^2 = n_r).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .fcidump import IntegralSet

Pair = Tuple[int, int]
TwoBodyKey = Tuple[Pair, Pair]


def _pair(p: int, q: int) -> Pair:
    return (p, q) if p <= q else (q, p)


def two_body_key(a: Pair, b: Pair) -> TwoBodyKey:
    a = _pair(*a)
    b = _pair(*b)
    return (a, b) if a <= b else (b, a)


@dataclass
class FermionSum:
    n_orb: int
    one_body: Dict[Pair, float] = field(default_factory=dict)
    two_body: Dict[TwoBodyKey, float] = field(default_factory=dict)
    scalar: float = 0.0

    def add_one_body(self, r: int, s: int, val: float) -> None:
        if val == 0.0:
            return
        key = _pair(r, s)
        self.one_body[key] = self.one_body.get(key, 0.0) + val

    def add_two_body(self, a: Pair, b: Pair, val: float) -> None:
        if val == 0.0:
            return
        key = two_body_key(a, b)
        if key[0] == key[1] and key[0][0] == key[0][1]:
            # E_pp E_pp + h.c. = 2 (2 n_p)^2 = 4 E_pp: fold into one-body
            self.add_one_body(key[0][0], key[0][0], 4.0 * val)
            return
        self.two_body[key] = self.two_body.get(key, 0.0) + val

    def copy(self) -> "FermionSum":
        return FermionSum(self.n_orb, dict(self.one_body), dict(self.two_body),
                          self.scalar)

    def cleaned(self, tol: float = 0.0) -> "FermionSum":
        return FermionSum(
            self.n_orb,
            {k: v for k, v in self.one_body.items() if abs(v) > tol},
            {k: v for k, v in self.two_body.items() if abs(v) > tol},
            self.scalar,
        )

    def __sub__(self, other: "FermionSum") -> "FermionSum":
        out = self.copy()
        for (r, s), v in other.one_body.items():
            out.add_one_body(r, s, -v)
        for (a, b), v in other.two_body.items():
            out.add_two_body(a, b, -v)
        out.scalar -= other.scalar
        return out

    def __add__(self, other: "FermionSum") -> "FermionSum":
        out = self.copy()
        for (r, s), v in other.one_body.items():
            out.add_one_body(r, s, v)
        for (a, b), v in other.two_body.items():
            out.add_two_body(a, b, v)
        out.scalar += other.scalar
        return out


def build_fermionic_hamiltonian(ints: IntegralSet) -> FermionSum:
    """Express the electronic Hamiltonian over E_rs and (E_a E_b + h.c.).

    Starting point (chemist-order spin-orbital integrals):
        H = sum h_PQ a+_P a_Q + 1/2 sum (PQ|RS) a+_P a+_R a_S a_Q + e_core.
    Normal-ordering the two-body part into products of one-body operators
    yields an effective one-body tensor f = h - (1/2) sum_R g[P,R,R,Q].
    """
    n = ints.n_orb
    h, g = ints.h, ints.g
    f = h - 0.5 * np.einsum("prrq->pq", g)

    out = FermionSum(n, scalar=ints.e_core)
    for p in range(n):
        out.add_one_body(p, p, 0.5 * f[p, p])
        for q in range(p + 1, n):
            if f[p, q] != 0.0:
                out.add_one_body(p, q, f[p, q])

    pairs = [(p, q) for p in range(n) for q in range(p, n)]
    for ia, a in enumerate(pairs):
        wa = 0.5 if a[0] == a[1] else 1.0
        for b in pairs[ia:]:
            wb = 0.5 if b[0] == b[1] else 1.0
            gval = g[a[0], a[1], b[0], b[1]]
            if gval == 0.0:
                continue
            if a == b:
                out.add_two_body(a, b, 0.25 * gval * wa * wb)
            else:
                out.add_two_body(a, b, 0.5 * gval * wa * wb)
    return out.cleaned(1e-14)


# ---------------------------------------------------------------------------
# Canonical effective form: n_r / E_rs / E_rs n_q / irreducible two-body.
# ---------------------------------------------------------------------------

@dataclass
class EffectiveTerms:
    """A FermionSum refactored into shift-compatible atoms.

    number[r]            : coefficient of n_r
    excitation[(r, s)]   : coefficient of E_rs, r < s
    exc_number[(q,(r,s))]: coefficient of E_rs n_q,  r <= s, q not in {r, s}
    residual[(a, b)]     : coefficient of (E_a E_b + E_b E_a), irreducible
    scalar               : plain number
    """

    n_orb: int
    number: Dict[int, float] = field(default_factory=dict)
    excitation: Dict[Pair, float] = field(default_factory=dict)
    exc_number: Dict[Tuple[int, Pair], float] = field(default_factory=dict)
    residual: Dict[TwoBodyKey, float] = field(default_factory=dict)
    scalar: float = 0.0

    def _bump(self, d, key, val):
        if val != 0.0:
            d[key] = d.get(key, 0.0) + val

    def to_fermion_sum(self) -> FermionSum:
        out = FermionSum(self.n_orb, scalar=self.scalar)
        for r, v in self.number.items():
            out.add_one_body(r, r, 0.5 * v)  # n_r = E_rr / 2
        for (r, s), v in self.excitation.items():
            out.add_one_body(r, s, v)
        for (q, (r, s)), v in self.exc_number.items():
            # E_rs n_q = (E_rs E_qq + E_qq E_rs) / 4
            out.add_two_body((r, s), (q, q), 0.25 * v)
        for (a, b), v in self.residual.items():
            out.add_two_body(a, b, v)
        return out.cleaned()


def effective_terms(f: FermionSum) -> EffectiveTerms:
    """Exact refactoring of a FermionSum into the canonical atoms.

    Uses the operator identities (q distinct from r, s):
        E_rq E_sq + E_sq E_rq = E_rs (1 - 2 n_q)        [one shared index]
        E_rs E_qq + E_qq E_rs = 4 E_rs n_q               [diagonal pair]
        E_qq E_qs + E_qs E_qq = 2 E_qs                   [overlapping diag]
    Diagonal-diagonal pairs (E_rr E_qq -> 8 n_r n_q) are split evenly
    between the two possible centers q and r.
    """
    out = EffectiveTerms(f.n_orb, scalar=f.scalar)
    for (r, s), v in f.one_body.items():
        if r == s:
            out._bump(out.number, r, 2.0 * v)
        else:
            out._bump(out.excitation, (r, s), v)

    for ((p, q), (r, s)), v in f.two_body.items():
        a_diag, b_diag = p == q, r == s
        if a_diag and b_diag:
            # 8 v n_p n_r, p != r: split across centers
            out._bump(out.exc_number, (p, (r, r)), 2.0 * v)
            out._bump(out.exc_number, (r, (p, p)), 2.0 * v)
        elif a_diag or b_diag:
            c, (u, w) = (p, (r, s)) if a_diag else (r, (p, q))
            if c == u or c == w:
                # E_cc E_cw + h.c. = 2 E_cw
                other = w if c == u else u
                out._bump(out.excitation, _pair(c, other), 2.0 * v)
            else:
                out._bump(out.exc_number, (c, (u, w)), 4.0 * v)
        else:
            shared = set((p, q)) & set((r, s))
            if (p, q) == (r, s):
                # 2 v E_pq^2 = 2 v (n_p + n_q - 2 n_p n_q); the -4v n_p n_q
                # piece equals -2v E_pp n_q, split evenly across centers
                out._bump(out.number, p, 2.0 * v)
                out._bump(out.number, q, 2.0 * v)
                out._bump(out.exc_number, (q, (p, p)), -1.0 * v)
                out._bump(out.exc_number, (p, (q, q)), -1.0 * v)
            elif len(shared) == 1:
                c = shared.pop()
                u = p if q == c else q
                w = r if s == c else s
                uw = _pair(u, w)
                out._bump(out.excitation, uw, v)
                out._bump(out.exc_number, (c, uw), -2.0 * v)
            else:
                out._bump(out.residual, ((p, q), (r, s)), v)
    return out
