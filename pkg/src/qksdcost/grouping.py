"""Partition Hamiltonians into measurable fragments and score their norms.

Two Pauli-basis modes (greedy SORTED INSERTION over the commutation or
anticommutation graph) plus a term-wise fermionic mode whose fragments are
the canonical atoms of the effective form. The decomposition norm
sum_j (Tr[N_j^dag N_j] / d)^(1/2) is the quantity that sets sampling cost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .chem.fermion import FermionSum, effective_terms
from .pauli import PauliSum, PauliWord, commutes

MODE_LCU = "lcu"
MODE_FH = "fh"
MODE_TERMWISE = "termwise"


@dataclass
class FragmentSet:
    """Groups of term keys with (possibly split) coefficients."""

    mode: str
    n_qubits: int
    groups: List[Dict] = field(default_factory=list)
    weights: List[float] = field(default_factory=list)
    scalar: float = 0.0

    def group_l2(self, j: int) -> float:
        return math.sqrt(sum(c * c for c in self.groups[j].values()))

    def refresh_weights(self) -> None:
        """Recompute Pauli-mode weights (group L2 norms) after a re-split."""
        if self.mode == MODE_TERMWISE:
            raise ValueError("term-wise weights are fixed by the term shapes")
        self.weights = [self.group_l2(j) for j in range(len(self.groups))]

    def to_json_dict(self) -> dict:
        def keystr(k):
            return k.label() if isinstance(k, PauliWord) else repr(k)

        return {
            "mode": self.mode,
            "n_qubits": self.n_qubits,
            "scalar": self.scalar,
            "norm": decomposition_norm(self),
            "groups": [
                {"weight": w, "terms": [{"term": keystr(k), "coefficient": c}
                                        for k, c in g.items()]}
                for g, w in zip(self.groups, self.weights)
            ],
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)


def _pairwise_ok(word: PauliWord, members: Sequence[PauliWord], want_commute: bool) -> bool:
    for m in members:
        if commutes(word, m) != want_commute:
            return False
    return True


def sorted_insertion(h: PauliSum, mode: str) -> FragmentSet:
    """Greedy grouping: big coefficients first, first compatible group wins.

    `mode` is "commuting" (fragments measurable in one rotated basis) or
    "anticommuting" (fragments that square to scaled unitaries). The
    identity term never enters a group; it rides along as `scalar`.
    """
    if mode not in ("commuting", "anticommuting"):
        raise ValueError(f"unknown mode {mode!r}")
    want_commute = mode == "commuting"
    body = h.without_identity()
    if len(body) == 0:
        raise ValueError("nothing to group: Hamiltonian has no non-identity terms")
    order = sorted(body.items(), key=lambda kv: (-abs(kv[1]), kv[0].z, kv[0].x))
    groups: List[Dict[PauliWord, float]] = []
    for word, coef in order:
        for g in groups:
            if _pairwise_ok(word, g.keys(), want_commute):
                g[word] = coef
                break
        else:
            groups.append({word: coef})
    fs = FragmentSet(
        mode=MODE_FH if want_commute else MODE_LCU,
        n_qubits=h.n_qubits,
        groups=groups,
        scalar=h.identity_coefficient,
    )
    fs.refresh_weights()
    return fs


# Term-wise trace weights per unit coefficient. The E_rs n_q row follows
# the closed-form shift optimality analysis, which prices those fragments
# at the same rate as bare excitations.
def _atom_unit_weight(kind: str, key, n_orb: int) -> float:
    if kind == "n":
        return 1.0 / math.sqrt(2.0)
    if kind == "exc":
        r, s = key
        return math.sqrt((3.0 * (r == s) + 1.0) / 2.0)
    if kind == "excn":
        _, (r, s) = key
        return math.sqrt((3.0 * (r == s) + 1.0) / 2.0)
    if kind == "res":
        return _residual_trace_weight(key)
    raise ValueError(kind)


def _residual_trace_weight(key: Tuple[Tuple[int, int], Tuple[int, int]]) -> float:
    """(Tr[T^2]/d)^(1/2) for T = E_a E_b + E_b E_a, via a compacted mapping.

    Only the index order matters for the trace, so the involved modes are
    relabeled onto a handful of qubits first.
    """
    from .chem.mapping import jordan_wigner  # local import avoids a cycle

    (p, q), (r, s) = key
    modes = sorted(set((p, q, r, s)))
    relabel = {m: i for i, m in enumerate(modes)}
    small = FermionSum(len(modes))
    small.add_two_body((relabel[p], relabel[q]), (relabel[r], relabel[s]), 1.0)
    mapped = jordan_wigner(small)
    return math.sqrt(sum(c * c for _, c in mapped.items()))


def termwise_fermionic_grouping(f: FermionSum) -> FragmentSet:
    """One fragment per canonical atom of the effective form."""
    eff = effective_terms(f)
    groups: List[Dict] = []
    weights: List[float] = []

    def push(kind, key, coef):
        if coef == 0.0:
            return
        groups.append({(kind, key): coef})
        weights.append(abs(coef) * _atom_unit_weight(kind, key, f.n_orb))

    for r in sorted(eff.number):
        push("n", r, eff.number[r])
    for key in sorted(eff.excitation):
        push("exc", key, eff.excitation[key])
    for key in sorted(eff.exc_number):
        push("excn", key, eff.exc_number[key])
    for key in sorted(eff.residual):
        push("res", key, eff.residual[key])
    return FragmentSet(mode=MODE_TERMWISE, n_qubits=f.n_orb, groups=groups,
                       weights=weights, scalar=eff.scalar)


def decomposition_norm(fs: FragmentSet) -> float:
    """Sum of fragment trace norms; excludes the identity scalar."""
    return float(sum(fs.weights))


def partition_diagnostics(fs: FragmentSet, h: PauliSum, tol: float = 1e-12) -> List[str]:
    """Empty list when the FragmentSet is a valid partition of h."""
    problems: List[str] = []
    if fs.mode not in (MODE_LCU, MODE_FH):
        return ["verify_partition applies to Pauli-mode fragment sets"]
    if fs.n_qubits != h.n_qubits:
        return ["qubit count mismatch"]
    recon: Dict[PauliWord, float] = {}
    for g in fs.groups:
        for w, c in g.items():
            recon[w] = recon.get(w, 0.0) + c
    body = h.without_identity()
    for w, c in body.items():
        if abs(recon.pop(w, 0.0) - c) > tol:
            problems.append(f"coefficient mismatch on {w.label()}")
    for w, c in recon.items():
        if abs(c) > tol:
            problems.append(f"spurious term {w.label()}")
    want_commute = fs.mode == MODE_FH
    for j, g in enumerate(fs.groups):
        words = list(g.keys())
        for i, a in enumerate(words):
            for b in words[i + 1:]:
                if commutes(a, b) != want_commute:
                    problems.append(
                        f"group {j}: {a.label()} / {b.label()} breaks {fs.mode} mode")
    return problems


def verify_partition(fs: FragmentSet, h: PauliSum, tol: float = 1e-12) -> bool:
    return not partition_diagnostics(fs, h, tol)
