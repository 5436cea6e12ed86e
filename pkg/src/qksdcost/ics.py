"""Iterative coefficient splitting over extended measurement groups.

Terms may belong to every group they are compatible with; the per-term
coefficient is split across those memberships under a reconstruction
constraint, alternating between an equality-constrained QP in the splits
and the closed-form square-root shot reallocation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .chem.reference import Occupation, cisd_ground_state, hf_statevector
from .grouping import MODE_FH, MODE_LCU, FragmentSet, commutes
from .pauli import PauliSum, PauliWord, pauli_product
from .sim.statevector import apply_word
from .sim.variances import IM, RE, ShotAllocation

_M_FLOOR = 1e-12


def pauli_covariance(p: PauliWord, q: PauliWord, phi0: np.ndarray,
                     phik: np.ndarray, part: str) -> float:
    """Cov_X(P_p, P_q) on the ancilla-superposed state pair.

    The operator piece is the symmetrized product (anticommutator over 2),
    whose expectation on |Phi_0k> averages the two system states.
    """
    if part not in ("R", "I"):
        raise ValueError("part must be 'R' or 'I'")
    take = np.real if part == "R" else np.imag
    pv0 = apply_word(p, phi0)
    pvk = apply_word(p, phik)
    if q == p:
        sym0, symk = 1.0, 1.0
    elif not commutes(p, q):
        sym0 = symk = 0.0
    else:
        qv0 = apply_word(q, phi0)
        qvk = apply_word(q, phik)
        sym0 = np.vdot(pv0, qv0).real
        symk = np.vdot(pvk, qvk).real
    avg = 0.5 * (sym0 + symk)
    amp_p = take(np.vdot(phi0, apply_word(p, phik)))
    amp_q = take(np.vdot(phi0, apply_word(q, phik)))
    return float(avg - amp_p * amp_q)


@dataclass
class CovarianceSet:
    """Per-group symmetric covariance matrices for both estimator parts."""

    words: List[List[PauliWord]]
    cov: List[Tuple[np.ndarray, np.ndarray]]

    @property
    def n_groups(self) -> int:
        return len(self.words)


def extend_groups(fs: FragmentSet) -> FragmentSet:
    """Add every compatible term to every group, with zero split weight.

    Keeps the disjoint assignment as the starting split; determinism comes
    from canonical word order.
    """
    if fs.mode not in (MODE_LCU, MODE_FH):
        raise ValueError("only Pauli-mode fragment sets can be extended")
    want_commute = fs.mode == MODE_FH
    all_words = sorted({w for g in fs.groups for w in g},
                       key=lambda w: (w.z, w.x))
    new_groups: List[Dict[PauliWord, float]] = []
    for g in fs.groups:
        ng = dict(g)
        members = list(g.keys())
        for w in all_words:
            if w in ng:
                continue
            if all(commutes(w, m) == want_commute for m in members):
                ng[w] = 0.0
        new_groups.append(ng)
    out = FragmentSet(mode=fs.mode, n_qubits=fs.n_qubits, groups=new_groups,
                      scalar=fs.scalar)
    out.refresh_weights()
    return out


def build_group_covariances(fs: FragmentSet, proxy0: np.ndarray,
                            proxyk: np.ndarray, ridge: float = 1e-10,
                            psd_floor: bool = True) -> CovarianceSet:
    """Assemble Cov_X matrices per group from statevector Gram matrices."""
    want_commute = fs.mode == MODE_FH
    words_per_group: List[List[PauliWord]] = []
    cov: List[Tuple[np.ndarray, np.ndarray]] = []
    for g in fs.groups:
        words = sorted(g.keys(), key=lambda w: (w.z, w.x))
        nw = len(words)
        w0 = np.stack([apply_word(w, proxy0) for w in words])
        wk = np.stack([apply_word(w, proxyk) for w in words])
        if want_commute:
            gram0 = w0.conj() @ w0.T
            gramk = wk.conj() @ wk.T
            avg = 0.5 * (np.real(gram0) + np.real(gramk))
        else:
            # anticommuting pairs have vanishing symmetrized products
            avg = np.eye(nw)
        amps = w0.conj() @ proxyk
        mats = []
        for take in (np.real, np.imag):
            r = take(amps)
            c = avg - np.outer(r, r)
            c = 0.5 * (c + c.T)
            if psd_floor:
                evals, evecs = np.linalg.eigh(c)
                c = (evecs * np.clip(evals, 0.0, None)) @ evecs.T
                c = c + ridge * np.eye(nw)
            mats.append(c)
        words_per_group.append(words)
        cov.append((mats[0], mats[1]))
    return CovarianceSet(words=words_per_group, cov=cov)


def split_qp_step(cs: CovarianceSet, m: np.ndarray, target: PauliSum,
                  base: Optional[Sequence[np.ndarray]] = None,
                  curvature_cut: float = 1e-8) -> List[np.ndarray]:
    """Minimize sum_jX alpha_j' C_jX alpha_j / m_jX under reconstruction.

    Solved through the KKT system of the equality-constrained quadratic
    program, restricted to covariance eigendirections whose curvature
    exceeds `curvature_cut` relative to the group maximum. Flat directions
    carry no predicted variance, and letting the solver roam them produces
    unbounded split coefficients whenever the proxy covariance is rank
    deficient; pinning them to the feasible base point (default: full
    coefficient on the first membership) keeps the step exact on the
    curved subspace and bounded everywhere.
    """
    term_words = sorted({w for words in cs.words for w in words},
                        key=lambda w: (w.z, w.x))
    tindex = {w: i for i, w in enumerate(term_words)}
    nt = len(term_words)
    alpha_target = np.array([target.coefficient(w) for w in term_words])

    idxs = [np.array([tindex[w] for w in words]) for words in cs.words]
    if base is None:
        base = _first_membership_base(cs, idxs, alpha_target)

    bases: List[np.ndarray] = []      # kept eigenvectors per group
    curv: List[np.ndarray] = []       # their curvatures
    lin: List[np.ndarray] = []        # linear term D B' alpha0
    schur = np.zeros((nt, nt))
    rhs = np.zeros(nt)
    global_max = 0.0
    blocks = []
    for j, words in enumerate(cs.words):
        c_r, c_i = cs.cov[j]
        qj = (c_r / max(m[j, RE], _M_FLOOR) + c_i / max(m[j, IM], _M_FLOOR))
        evals, evecs = np.linalg.eigh(0.5 * (qj + qj.T))
        blocks.append((evals, evecs))
        global_max = max(global_max, float(evals[-1]) if evals.size else 0.0)
    for j, (evals, evecs) in enumerate(blocks):
        keep = evals > curvature_cut * max(evals[-1] if evals.size else 0.0, 0.0)
        b = evecs[:, keep]
        d = evals[keep]
        bases.append(b)
        curv.append(d)
        lin.append(d * (b.T @ base[j]))
        if d.size:
            proj = b / d  # columns scaled by 1/curvature
            contrib = b @ proj.T  # B D^-1 B'
            schur[np.ix_(idxs[j], idxs[j])] += contrib
            rhs[idxs[j]] += b @ (b.T @ base[j])
    # constraint residual of the base point is zero by construction, so the
    # multiplier solves S (lam/2) = sum_j A_j B_j D_j^-1 b_j = rhs
    try:
        lam_half = np.linalg.lstsq(schur, rhs, rcond=None)[0]
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular KKT system") from exc

    splits: List[np.ndarray] = []
    for j, idx in enumerate(idxs):
        b, d = bases[j], curv[j]
        if d.size:
            # y_j = -B' a0 + D^-1 B' A' (lam/2)
            y = -(lin[j] / d) + (b.T @ lam_half[idx]) / d
            splits.append(base[j] + b @ y)
        else:
            splits.append(base[j].copy())

    recon = np.zeros(nt)
    for idx, a in zip(idxs, splits):
        np.add.at(recon, idx, a)
    defect = alpha_target - recon
    scale = max(1.0, float(np.max(np.abs(alpha_target))))
    if np.max(np.abs(defect)) > 1e-6 * scale:
        raise RuntimeError("KKT reconstruction residual too large")
    if np.max(np.abs(defect)) > 0:
        # restore exact feasibility through each term's first membership
        repaired = set()
        for j, words in enumerate(cs.words):
            for wi in range(len(words)):
                ti = int(idxs[j][wi])
                if ti not in repaired:
                    splits[j][wi] += defect[ti]
                    repaired.add(ti)
    return splits


def _first_membership_base(cs: CovarianceSet, idxs: Sequence[np.ndarray],
                           alpha_target: np.ndarray) -> List[np.ndarray]:
    assigned = set()
    base = []
    for j, words in enumerate(cs.words):
        a = np.zeros(len(words))
        for wi, w in enumerate(words):
            ti = idxs[j][wi]
            if ti not in assigned:
                a[wi] = alpha_target[ti]
                assigned.add(ti)
        base.append(a)
    return base


def _quadratic_variances(cs: CovarianceSet, splits: Sequence[np.ndarray]) -> np.ndarray:
    var = np.zeros((cs.n_groups, 2))
    for j, a in enumerate(splits):
        var[j, RE] = float(a @ cs.cov[j][RE] @ a)
        var[j, IM] = float(a @ cs.cov[j][IM] @ a)
    return np.maximum(var, 0.0)


def _objective(var: np.ndarray, m: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(var > 0, var / np.maximum(m, _M_FLOOR), 0.0)
    return float(ratio.sum())


@dataclass
class SplitSolution:
    """Converged splits, shot fractions, and the objective history."""

    fragments: FragmentSet
    allocation: ShotAllocation
    objective_trace: List[float]
    metadata: dict = field(default_factory=dict)

    @property
    def cost(self) -> float:
        """M * eps^2 predicted by the optimization states."""
        return self.objective_trace[-1]

    def to_json_dict(self) -> dict:
        return {
            "fragments": self.fragments.to_json_dict(),
            "shot_fractions": self.allocation.m.tolist(),
            "objective_trace": self.objective_trace,
            "metadata": self.metadata,
        }


def ics_optimize(fs: FragmentSet, proxy0: np.ndarray, proxyk: np.ndarray,
                 iters: int = 50, tol: float = 1e-6,
                 extend: bool = True, metadata: Optional[dict] = None) -> SplitSolution:
    """Alternate split QP and square-root reallocation until stationary."""
    if iters < 1:
        raise ValueError("need at least one alternation")
    ext = extend_groups(fs) if extend else fs
    cs = build_group_covariances(ext, proxy0, proxyk)
    splits = [np.array([ext.groups[j].get(w, 0.0) for w in cs.words[j]])
              for j in range(cs.n_groups)]
    weights = np.array([ext.group_l2(j) for j in range(cs.n_groups)])
    m = np.repeat(weights[:, None], 2, axis=1)
    m = m / m.sum()

    var = _quadratic_variances(cs, splits)
    trace = [_objective(var, m)]
    target = _target_sum(ext)
    for _ in range(iters):
        splits = split_qp_step(cs, m, target, base=splits)
        var = _quadratic_variances(cs, splits)
        sqrt_var = np.sqrt(var)
        if sqrt_var.sum() > 0:
            m = sqrt_var / sqrt_var.sum()
        trace.append(_objective(var, m))
        if abs(trace[-2] - trace[-1]) <= tol * max(abs(trace[-2]), 1e-30):
            break

    groups = [dict(zip(cs.words[j], splits[j])) for j in range(cs.n_groups)]
    out = FragmentSet(mode=ext.mode, n_qubits=ext.n_qubits, groups=groups,
                      scalar=ext.scalar)
    out.refresh_weights()
    return SplitSolution(fragments=out,
                         allocation=ShotAllocation(m=np.maximum(m, 0.0)),
                         objective_trace=trace,
                         metadata=metadata or {})


def _target_sum(fs: FragmentSet) -> PauliSum:
    acc: Dict[PauliWord, float] = {}
    for g in fs.groups:
        for w, c in g.items():
            acc[w] = acc.get(w, 0.0) + c
    return PauliSum(fs.n_qubits, acc)


def cisd_proxy_pair(h: PauliSum, ref: Occupation, k: int, dt: float):
    """HF determinant and the phased CISD stand-in for the evolved state."""
    state, e_cisd = cisd_ground_state(h, ref)
    phi0 = hf_statevector(h.n_qubits, ref)
    phik = np.exp(-1j * e_cisd * k * dt) * state
    return phi0, phik, e_cisd
