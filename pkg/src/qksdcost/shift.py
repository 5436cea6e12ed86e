"""Shift operators that annihilate the reference state.

T(tau) = sum_q tau1_q n_q
       + sum_q sum_{(r,s): r<=s, q not in {r,s}} tau2_{q,rs} E_rs (n_q - [q occ])
       + c(tau) * identity,
with c = sum_{q occ} sum_{r != q} tau2_{q,rr}. Every two-body piece kills
the reference determinant outright, so T |phi0> = t |phi0> holds for any
parameter values with

    t = sum_{q occ} (tau1_q + sum_{r != q} tau2_{q,rr}).

Measuring H - T instead of H costs nothing extra (t rides on the overlap
matrix) but can shrink the decomposition norm dramatically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from .chem.fcidump import IntegralSet
from .chem.fermion import FermionSum, effective_terms
from .chem.mapping import jordan_wigner
from .chem.reference import Occupation, hf_statevector
from .grouping import (
    decomposition_norm,
    sorted_insertion,
    termwise_fermionic_grouping,
)
from .sim.statevector import PauliAction

Pair = Tuple[int, int]


@dataclass
class ShiftParams:
    """One-body weights, two-body weights keyed (center, (r, s)), and t."""

    tau1: Dict[int, float]
    tau2: Dict[Tuple[int, Pair], float]
    occ: frozenset
    t: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        for (q, (r, s)) in self.tau2:
            if q == r or q == s or r > s:
                raise ValueError(f"invalid tau2 index ({q}, ({r}, {s}))")
        if self.t is None:
            self.t = shift_constant(self.tau1, self.tau2, self.occ)

    def to_json_dict(self) -> dict:
        return {
            "tau1": {str(q): v for q, v in sorted(self.tau1.items())},
            "tau2": {f"{q}|{r},{s}": v
                     for (q, (r, s)), v in sorted(self.tau2.items())},
            "occ": sorted(self.occ),
            "t": self.t,
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "ShiftParams":
        tau2 = {}
        for key, v in d["tau2"].items():
            q, rs = key.split("|")
            r, s = rs.split(",")
            tau2[(int(q), (int(r), int(s)))] = v
        return cls(tau1={int(q): v for q, v in d["tau1"].items()},
                   tau2=tau2, occ=frozenset(d["occ"]), t=d["t"])


def shift_constant(tau1, tau2, occ) -> float:
    t = sum(tau1.get(q, 0.0) for q in occ)
    for (q, (r, s)), v in tau2.items():
        if q in occ and r == s:
            t += v
    return t


def effective_partial_hamiltonian(ints: IntegralSet, ref: Occupation):
    """Split H into the shift-reachable part and its untouched complement.

    Returns (h_s, rest) with h_s + rest == H exactly; `rest` collects the
    irreducible two-body atoms plus the scalar and is invariant under any
    shift of this family.
    """
    from .chem.fermion import build_fermionic_hamiltonian

    eff = effective_terms(build_fermionic_hamiltonian(ints))
    h_s = FermionSum(eff.n_orb)
    for r, v in eff.number.items():
        h_s.add_one_body(r, r, 0.5 * v)
    for (r, s), v in eff.excitation.items():
        h_s.add_one_body(r, s, v)
    for (q, (r, s)), v in eff.exc_number.items():
        h_s.add_two_body((r, s), (q, q), 0.25 * v)
    rest = FermionSum(eff.n_orb, scalar=eff.scalar)
    for (a, b), v in eff.residual.items():
        rest.add_two_body(a, b, v)
    return h_s.cleaned(), rest.cleaned()


def closed_form_shift(ints: IntegralSet, ref: Occupation) -> ShiftParams:
    """Parameters that zero the number and E n sectors outright.

    tau2 copies the E_rs n_q atom coefficients; tau1 additionally absorbs
    the diagonal one-body leakage from the occupied-center subtractions,
    so the shifted Hamiltonian keeps only bare excitations plus the
    irreducible two-body remainder.
    """
    from .chem.fermion import build_fermionic_hamiltonian

    eff = effective_terms(build_fermionic_hamiltonian(ints))
    tau2 = {key: v for key, v in eff.exc_number.items() if v != 0.0}
    tau1: Dict[int, float] = {}
    for r in range(ints.n_orb):
        val = eff.number.get(r, 0.0)
        for q in ref.occ:
            if q != r:
                val += 2.0 * tau2.get((q, (r, r)), 0.0)
        if val != 0.0:
            tau1[r] = val
    return ShiftParams(tau1=tau1, tau2=tau2, occ=frozenset(ref.occ))


def shift_operator(sp: ShiftParams, n_orb: int) -> FermionSum:
    """T(tau) as a FermionSum, identity offset included."""
    out = FermionSum(n_orb)
    for q, v in sp.tau1.items():
        if q >= n_orb:
            raise IndexError(f"tau1 orbital {q} out of range")
        out.add_one_body(q, q, 0.5 * v)
    offset = 0.0
    for (q, (r, s)), v in sp.tau2.items():
        if max(q, r, s) >= n_orb:
            raise IndexError(f"tau2 index ({q},{r},{s}) out of range")
        out.add_two_body((r, s), (q, q), 0.25 * v)
        if q in sp.occ:
            out.add_one_body(r, s, -v)
            if r == s:
                offset += v
    out.scalar += offset
    return out


def apply_shift(f: FermionSum, sp: ShiftParams) -> FermionSum:
    """H - T(tau); the scalar t is recovered downstream, never here."""
    return (f - shift_operator(sp, f.n_orb)).cleaned(1e-14)


def annihilation_check(sp: ShiftParams, ref: Occupation, n_qubits: int) -> float:
    """|| (T - t) |phi0> ||_2 on the reference determinant."""
    t_op = shift_operator(sp, n_qubits)
    mapped = jordan_wigner(t_op)
    phi0 = hf_statevector(n_qubits, ref)
    out = PauliAction(mapped)(phi0)
    return float(np.linalg.norm(out - sp.t * phi0))


def shifted_norm_objective(f: FermionSum, algo: str) -> Callable[[ShiftParams], float]:
    """Norm of the `algo` decomposition of H - T as a function of tau."""
    if algo == "termwise":
        def objective(sp: ShiftParams) -> float:
            return decomposition_norm(termwise_fermionic_grouping(apply_shift(f, sp)))
    elif algo in ("si-fh", "si-lcu"):
        mode = "commuting" if algo == "si-fh" else "anticommuting"

        def objective(sp: ShiftParams) -> float:
            mapped = jordan_wigner(apply_shift(f, sp)).without_identity()
            if len(mapped) == 0:
                return 0.0
            return decomposition_norm(sorted_insertion(mapped, mode))
    else:
        raise ValueError(f"unknown objective algorithm {algo!r}")
    return objective


def refine_shift(f: FermionSum, sp0: ShiftParams, algo: str = "si-fh",
                 initial_step: float = 0.05, tol: float = 1e-10,
                 max_sweeps: int = 20) -> ShiftParams:
    """Derivative-free coordinate descent over tau from a feasible start.

    Every candidate keeps the structural constraint (any tau does), so the
    search just cycles coordinates with an expanding/shrinking step and
    accepts strict improvements. With the term-wise objective the closed
    form is already optimal and this returns the start unchanged.
    """
    residual = annihilation_check(sp0, Occupation(sp0.occ, frozenset(range(f.n_orb)) - sp0.occ), f.n_orb)
    if residual > 1e-9:
        raise ValueError(f"infeasible start: annihilation residual {residual:.2e}")
    objective = shifted_norm_objective(f, algo)

    tau1 = dict(sp0.tau1)
    tau2 = dict(sp0.tau2)
    occ = sp0.occ

    def make(t1, t2):
        return ShiftParams(tau1=dict(t1), tau2=dict(t2), occ=occ)

    best = objective(make(tau1, tau2))
    coords = [("t1", k) for k in sorted(tau1)] + [("t2", k) for k in sorted(tau2)]
    step = initial_step
    for _ in range(max_sweeps):
        improved = False
        for kind, key in coords:
            store = tau1 if kind == "t1" else tau2
            base = store[key]
            for direction in (+1.0, -1.0):
                cur_step = step
                while True:
                    store[key] = base + direction * cur_step
                    val = objective(make(tau1, tau2))
                    if val < best - tol:
                        best = val
                        base = store[key]
                        improved = True
                        cur_step *= 2.0
                    else:
                        store[key] = base
                        break
        if not improved:
            step *= 0.5
            if step < 1e-6:
                break
    return make(tau1, tau2)
