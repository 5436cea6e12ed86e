"""One-time generator for the bundled molecular fixtures.

Produces, for each molecule, an FCIDUMP file with RHF molecular-orbital
integrals in the STO-3G basis plus a JSON sidecar holding reference
energies (HF, FCI, CISD) computed from the same integrals with
determinant-based Slater-Condon CI. The CI code here is deliberately
independent of the main package (no qubit mapping involved) so the two
routes cross-validate each other.

Run from the repository root:

    python tools/make_fixtures.py [--out src/qksdcost/fixtures]

The STO-3G exponents/contractions are the standard published values.
Geometries are equilibrium geometries (Angstrom); the sidecar records
them verbatim.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os

import numpy as np
from scipy.special import gammainc, gamma

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# ---------------------------------------------------------------------------
# STO-3G basis data: {element: [(shell_type, exponents, coefficients), ...]}
# ---------------------------------------------------------------------------

STO3G = {
    "H": [
        ("S", [3.425250914, 0.6239137298, 0.1688554040],
              [0.1543289673, 0.5353281423, 0.4446345422]),
    ],
    "Li": [
        ("S", [16.11957475, 2.936200663, 0.7946504870],
              [0.1543289673, 0.5353281423, 0.4446345422]),
        ("SP", [0.6362897469, 0.1478600533, 0.0480886784],
               [-0.09996722919, 0.3995128261, 0.7001154689],
               [0.1559162750, 0.6076837186, 0.3919573931]),
    ],
    "Be": [
        ("S", [30.16787069, 5.495115306, 1.487192653],
              [0.1543289673, 0.5353281423, 0.4446345422]),
        ("SP", [1.314833110, 0.3055389383, 0.0993707456],
               [-0.09996722919, 0.3995128261, 0.7001154689],
               [0.1559162750, 0.6076837186, 0.3919573931]),
    ],
    "O": [
        ("S", [130.7093214, 23.80886605, 6.443608313],
              [0.1543289673, 0.5353281423, 0.4446345422]),
        ("SP", [5.033151319, 1.169596125, 0.3803889600],
               [-0.09996722919, 0.3995128261, 0.7001154689],
               [0.1559162750, 0.6076837186, 0.3919573931]),
    ],
}

NUCLEAR_CHARGE = {"H": 1, "Li": 3, "Be": 4, "O": 8}

# Cartesian angular momentum layouts per shell letter.
ANGULAR = {"S": [(0, 0, 0)], "P": [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


class BasisFunction:
    """Contracted Cartesian Gaussian."""

    def __init__(self, center, lmn, exps, coefs):
        self.center = np.asarray(center, dtype=float)
        self.lmn = lmn
        self.exps = np.asarray(exps, dtype=float)
        # Scale by primitive norms, then renormalize the contraction.
        norms = [primitive_norm(a, lmn) for a in self.exps]
        self.coefs = np.asarray(coefs, dtype=float) * norms
        s = 0.0
        for a, ca in zip(self.exps, self.coefs):
            for b, cb in zip(self.exps, self.coefs):
                s += ca * cb * primitive_overlap(a, self.center, lmn, b, self.center, lmn)
        self.coefs /= math.sqrt(s)


def double_factorial(n):
    return 1 if n <= 0 else n * double_factorial(n - 2)


def primitive_norm(a, lmn):
    i, j, k = lmn
    num = (2.0 * a / math.pi) ** 0.75 * (4.0 * a) ** ((i + j + k) / 2.0)
    den = math.sqrt(double_factorial(2 * i - 1) * double_factorial(2 * j - 1)
                    * double_factorial(2 * k - 1))
    return num / den


def hermite_coefs(la, lb, a, b, AB):
    """McMurchie-Davidson expansion E_t^{ij} for one Cartesian direction."""
    p = a + b
    mu = a * b / p
    E = np.zeros((la + 1, lb + 1, la + lb + 1))
    E[0, 0, 0] = math.exp(-mu * AB * AB)
    PA = -b * AB / p
    PB = a * AB / p
    for i in range(la + 1):
        for j in range(lb + 1):
            if i == 0 and j == 0:
                continue
            for t in range(i + j + 1):
                if i > 0:
                    val = PA * E[i - 1, j, t]
                    if t > 0:
                        val += E[i - 1, j, t - 1] / (2.0 * p)
                    if t + 1 <= i + j - 1:
                        val += (t + 1) * E[i - 1, j, t + 1]
                else:
                    val = PB * E[i, j - 1, t]
                    if t > 0:
                        val += E[i, j - 1, t - 1] / (2.0 * p)
                    if t + 1 <= i + j - 1:
                        val += (t + 1) * E[i, j - 1, t + 1]
                E[i, j, t] = val
    return E


def boys(n, T):
    if T < 1e-13:
        return 1.0 / (2 * n + 1)
    return 0.5 * gamma(n + 0.5) * gammainc(n + 0.5, T) / T ** (n + 0.5)


def hermite_coulomb(tmax, umax, vmax, p, PC):
    """R_{tuv} tensor via downward recursion on the Boys order."""
    T = p * float(PC @ PC)
    nmax = tmax + umax + vmax
    F = [boys(n, T) for n in range(nmax + 1)]
    R = {}
    for n in range(nmax, -1, -1):
        R[(n, 0, 0, 0)] = (-2.0 * p) ** n * F[n]
    for total in range(1, nmax + 1):
        for t in range(min(total, tmax) + 1):
            for u in range(min(total - t, umax) + 1):
                v = total - t - u
                if v < 0 or v > vmax:
                    continue
                for n in range(nmax - total, -1, -1):
                    if t > 0:
                        val = PC[0] * R.get((n + 1, t - 1, u, v), 0.0)
                        if t > 1:
                            val += (t - 1) * R.get((n + 1, t - 2, u, v), 0.0)
                    elif u > 0:
                        val = PC[1] * R.get((n + 1, t, u - 1, v), 0.0)
                        if u > 1:
                            val += (u - 1) * R.get((n + 1, t, u - 2, v), 0.0)
                    else:
                        val = PC[2] * R.get((n + 1, t, u, v - 1), 0.0)
                        if v > 1:
                            val += (v - 1) * R.get((n + 1, t, u, v - 2), 0.0)
                    R[(n, t, u, v)] = val
    return R


def primitive_overlap(a, A, lmn1, b, B, lmn2):
    p = a + b
    out = (math.pi / p) ** 1.5
    for d in range(3):
        E = hermite_coefs(lmn1[d], lmn2[d], a, b, A[d] - B[d])
        out *= E[lmn1[d], lmn2[d], 0]
    return out


def primitive_kinetic(a, A, lmn1, b, B, lmn2):
    # T = b(2l+2m+2n+3) S - 2b^2 S(+2) - 1/2 sum l(l-1) S(-2)
    l2, m2, n2 = lmn2
    term = b * (2 * (l2 + m2 + n2) + 3) * primitive_overlap(a, A, lmn1, b, B, lmn2)
    for d, inc in enumerate([(2, 0, 0), (0, 2, 0), (0, 0, 2)]):
        up = tuple(np.add(lmn2, inc))
        term += -2.0 * b * b * primitive_overlap(a, A, lmn1, b, B, up)
        if lmn2[d] >= 2:
            down = tuple(np.subtract(lmn2, inc))
            term += -0.5 * lmn2[d] * (lmn2[d] - 1) * primitive_overlap(a, A, lmn1, b, B, down)
    return term


def primitive_nuclear(a, A, lmn1, b, B, lmn2, C):
    p = a + b
    P = (a * np.asarray(A) + b * np.asarray(B)) / p
    Ex = hermite_coefs(lmn1[0], lmn2[0], a, b, A[0] - B[0])
    Ey = hermite_coefs(lmn1[1], lmn2[1], a, b, A[1] - B[1])
    Ez = hermite_coefs(lmn1[2], lmn2[2], a, b, A[2] - B[2])
    tmax, umax, vmax = lmn1[0] + lmn2[0], lmn1[1] + lmn2[1], lmn1[2] + lmn2[2]
    R = hermite_coulomb(tmax, umax, vmax, p, P - np.asarray(C))
    val = 0.0
    for t in range(tmax + 1):
        for u in range(umax + 1):
            for v in range(vmax + 1):
                val += (Ex[lmn1[0], lmn2[0], t] * Ey[lmn1[1], lmn2[1], u]
                        * Ez[lmn1[2], lmn2[2], v] * R[(0, t, u, v)])
    return 2.0 * math.pi / p * val


def primitive_eri(a, A, l1, b, B, l2, c, C, l3, d, D, l4):
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = (a * np.asarray(A) + b * np.asarray(B)) / p
    Q = (c * np.asarray(C) + d * np.asarray(D)) / q
    E1 = [hermite_coefs(l1[dd], l2[dd], a, b, A[dd] - B[dd]) for dd in range(3)]
    E2 = [hermite_coefs(l3[dd], l4[dd], c, d, C[dd] - D[dd]) for dd in range(3)]
    t1 = [l1[dd] + l2[dd] for dd in range(3)]
    t2 = [l3[dd] + l4[dd] for dd in range(3)]
    R = hermite_coulomb(t1[0] + t2[0], t1[1] + t2[1], t1[2] + t2[2], alpha, P - Q)
    val = 0.0
    for t in range(t1[0] + 1):
        for u in range(t1[1] + 1):
            for v in range(t1[2] + 1):
                e1 = (E1[0][l1[0], l2[0], t] * E1[1][l1[1], l2[1], u]
                      * E1[2][l1[2], l2[2], v])
                if e1 == 0.0:
                    continue
                for tt in range(t2[0] + 1):
                    for uu in range(t2[1] + 1):
                        for vv in range(t2[2] + 1):
                            e2 = (E2[0][l3[0], l4[0], tt] * E2[1][l3[1], l4[1], uu]
                                  * E2[2][l3[2], l4[2], vv])
                            if e2 == 0.0:
                                continue
                            sign = (-1.0) ** (tt + uu + vv)
                            val += e1 * e2 * sign * R[(0, t + tt, u + uu, v + vv)]
    return 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q)) * val


def contracted(f, bf1, bf2, *extra_bfs):
    bfs = (bf1, bf2) + extra_bfs
    val = 0.0
    for prims in itertools.product(*[list(zip(bf.exps, bf.coefs)) for bf in bfs]):
        coef = 1.0
        args = []
        for (a, c), bf in zip(prims, bfs):
            coef *= c
            args.extend([a, bf.center, bf.lmn])
        val += coef * f(*args)
    return val


def build_basis(atoms):
    bfs = []
    for sym, xyz in atoms:
        for shell in STO3G[sym]:
            if shell[0] == "S":
                _, exps, cs = shell
                bfs.append(BasisFunction(xyz, (0, 0, 0), exps, cs))
            else:  # SP shell
                _, exps, cs, cp = shell
                bfs.append(BasisFunction(xyz, (0, 0, 0), exps, cs))
                for lmn in ANGULAR["P"]:
                    bfs.append(BasisFunction(xyz, lmn, exps, cp))
    return bfs


def ao_integrals(atoms):
    bfs = build_basis(atoms)
    n = len(bfs)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = contracted(primitive_overlap, bfs[i], bfs[j])
            T[i, j] = T[j, i] = contracted(primitive_kinetic, bfs[i], bfs[j])
            v = 0.0
            for sym, xyz in atoms:
                Zc = NUCLEAR_CHARGE[sym]
                v -= Zc * contracted(
                    lambda a, A, l1, b, B, l2: primitive_nuclear(a, A, l1, b, B, l2, xyz),
                    bfs[i], bfs[j])
            V[i, j] = V[j, i] = v
    eri = np.zeros((n, n, n, n))
    pair_list = [(i, j) for i in range(n) for j in range(i + 1)]
    for ij, (i, j) in enumerate(pair_list):
        for kl in range(ij + 1):
            k, l = pair_list[kl]
            val = contracted(primitive_eri, bfs[i], bfs[j], bfs[k], bfs[l])
            for a, b in ((i, j), (j, i)):
                for c, d in ((k, l), (l, k)):
                    eri[a, b, c, d] = eri[c, d, a, b] = val
    return S, T, V, eri


def nuclear_repulsion(atoms):
    e = 0.0
    for (s1, r1), (s2, r2) in itertools.combinations(atoms, 2):
        e += NUCLEAR_CHARGE[s1] * NUCLEAR_CHARGE[s2] / np.linalg.norm(np.asarray(r1) - np.asarray(r2))
    return e


def rhf(S, Hcore, eri, n_elec, max_iter=200, tol=1e-12):
    """Closed-shell SCF with DIIS. Returns (E_elec, C, orbital energies)."""
    n = S.shape[0]
    nocc = n_elec // 2
    s_val, s_vec = np.linalg.eigh(S)
    X = s_vec @ np.diag(s_val ** -0.5) @ s_vec.T
    F = Hcore.copy()
    D = None
    errs, focks = [], []
    E_old = 0.0
    for it in range(max_iter):
        Fp = X.T @ F @ X
        eps, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        Cocc = C[:, :nocc]
        D = 2.0 * Cocc @ Cocc.T
        J = np.einsum("pqrs,rs->pq", eri, D)
        K = np.einsum("prqs,rs->pq", eri, D)
        F = Hcore + J - 0.5 * K
        E = 0.5 * np.sum(D * (Hcore + F))
        err = F @ D @ S - S @ D @ F
        errs.append(err)
        focks.append(F.copy())
        if len(errs) > 8:
            errs.pop(0)
            focks.pop(0)
        if abs(E - E_old) < tol and np.max(np.abs(err)) < 1e-9:
            return E, C, eps
        E_old = E
        if len(errs) >= 2:  # DIIS extrapolation
            m = len(errs)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = np.sum(errs[i] * errs[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(B, rhs)[:m]
                F = sum(wi * Fi for wi, Fi in zip(w, focks))
            except np.linalg.LinAlgError:
                pass
    raise RuntimeError("SCF did not converge")


def write_fcidump(path, h_mo, eri_mo, e_core, n_elec, thresh=1e-12):
    n = h_mo.shape[0]
    lines = [f"&FCI NORB={n},NELEC={n_elec},MS2=0,", " ORBSYM=" + "1," * n, " ISYM=1,", "&END"]
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    v = eri_mo[i, j, k, l]
                    if abs(v) > thresh:
                        lines.append(f" {v:23.16E} {i+1:3d} {j+1:3d} {k+1:3d} {l+1:3d}")
    for i in range(n):
        for j in range(i + 1):
            if abs(h_mo[i, j]) > thresh:
                lines.append(f" {h_mo[i,j]:23.16E} {i+1:3d} {j+1:3d}   0   0")
    lines.append(f" {e_core:23.16E}   0   0   0   0")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Determinant CI (Slater-Condon) over spin orbitals, independent reference.
# ---------------------------------------------------------------------------

def spin_orbital_ints(h_mo, eri_mo):
    """Expand spatial MO integrals to interleaved spin orbitals (2i=alpha)."""
    n = h_mo.shape[0]
    ns = 2 * n
    h = np.zeros((ns, ns))
    g = np.zeros((ns, ns, ns, ns))
    for P in range(ns):
        for Q in range(ns):
            if P % 2 == Q % 2:
                h[P, Q] = h_mo[P // 2, Q // 2]
    for P in range(ns):
        for Q in range(ns):
            if P % 2 != Q % 2:
                continue
            for R in range(ns):
                for Ssp in range(ns):
                    if R % 2 != Ssp % 2:
                        continue
                    g[P, Q, R, Ssp] = eri_mo[P // 2, Q // 2, R // 2, Ssp // 2]
    return h, g


def excitation_info(d1, d2):
    diff = d1 ^ d2
    return bin(diff).count("1")


def _occ_list(det):
    occ = []
    i = 0
    while det:
        if det & 1:
            occ.append(i)
        det >>= 1
        i += 1
    return occ


def _apply_string(det, ops):
    """Apply a ladder-operator string (applied right-to-left) to |det>.

    ops: sequence of (is_dagger, index), leftmost operator first.
    Returns (sign, det) or (0, None) when annihilated.
    """
    sign = 1
    for is_dagger, idx in reversed(ops):
        bit = 1 << idx
        if is_dagger == bool(det & bit):
            return 0, None
        if bin(det & (bit - 1)).count("1") % 2:
            sign = -sign
        det ^= bit
    return sign, det


def _string_element(d1, d2, ops):
    sign, det = _apply_string(d2, ops)
    return sign if det == d1 else 0


def slater_condon(d1, d2, h, g):
    """<d1|H|d2> with H = sum h a+a + 1/2 sum (PQ|RS) a+_P a+_R a_S a_Q."""
    ndiff = excitation_info(d1, d2)
    if ndiff > 4:
        return 0.0
    if ndiff == 0:
        occ1 = _occ_list(d1)
        e = sum(h[p, p] for p in occ1)
        for p in occ1:
            for q in occ1:
                e += 0.5 * (g[p, p, q, q] - g[p, q, q, p])
        return e
    if ndiff == 2:
        p = _occ_list(d1 & ~d2)[0]  # in d1 only
        r = _occ_list(d2 & ~d1)[0]  # in d2 only
        sign = _string_element(d1, d2, [(True, p), (False, r)])
        e = h[p, r]
        for R in _occ_list(d1 & d2):
            e += g[p, r, R, R] - g[p, R, R, r]
        return sign * e
    # double excitation: enumerate the four operator assignments exactly
    p, q = _occ_list(d1 & ~d2)
    r, s = _occ_list(d2 & ~d1)
    e = 0.0
    for (P, Q, R, S) in ((p, r, q, s), (p, s, q, r), (q, r, p, s), (q, s, p, r)):
        sgn = _string_element(d1, d2, [(True, P), (True, R), (False, S), (False, Q)])
        if sgn:
            e += 0.5 * g[P, Q, R, S] * sgn
    return e


def sector_determinants(n_spin, n_elec):
    dets = []
    for occ in itertools.combinations(range(n_spin), n_elec):
        d = 0
        for p in occ:
            d |= 1 << p
        dets.append(d)
    return sorted(dets)


def ci_matrix(dets, h, g):
    n = len(dets)
    darr = np.array(dets, dtype=np.uint64)
    H = np.zeros((n, n))
    for i in range(n):
        close = np.nonzero(np.bitwise_count(darr[i] ^ darr[: i + 1]) <= 4)[0]
        for j in close:
            H[i, j] = H[j, i] = slater_condon(dets[i], dets[j], h, g)
    return H


def reference_energies(h_mo, eri_mo, e_core, n_elec):
    h, g = spin_orbital_ints(h_mo, eri_mo)
    ns = h.shape[0]
    hf_det = (1 << n_elec) - 1
    e_hf = slater_condon(hf_det, hf_det, h, g) + e_core

    dets = sector_determinants(ns, n_elec)
    H = ci_matrix(dets, h, g)
    evals = np.linalg.eigvalsh(H)
    e_fci = evals[0] + e_core
    gap = next(ev - evals[0] for ev in evals[1:] if ev - evals[0] > 1e-8)
    spread = float(evals[-1] - evals[0])

    cisd_dets = [d for d in dets if excitation_info(d, hf_det) <= 4]
    Hc = ci_matrix(cisd_dets, h, g)
    e_cisd = np.linalg.eigvalsh(Hc)[0] + e_core
    return e_hf, e_fci, e_cisd, gap, spread


MOLECULES = {
    "h2": {
        "atoms": [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 0.7414))],
        "n_elec": 2,
        "hf_lit": (-1.1167, 0.02),
    },
    "h4": {
        "atoms": [("H", (0.0, 0.0, 0.7414 * k)) for k in range(4)],
        "n_elec": 4,
        "hf_lit": (-2.09, 0.1),
    },
    "lih": {
        "atoms": [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 1.5949))],
        "n_elec": 4,
        "hf_lit": (-7.862, 0.02),
    },
    "beh2": {
        "atoms": [("Be", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 1.3264)),
                  ("H", (0.0, 0.0, -1.3264))],
        "n_elec": 6,
        "hf_lit": (-15.56, 0.05),
    },
    "h2o": {
        "atoms": [("O", (0.0, 0.0, 0.1173)),
                  ("H", (0.0, 0.7572, -0.4692)),
                  ("H", (0.0, -0.7572, -0.4692))],
        "n_elec": 10,
        "hf_lit": (-74.963, 0.05),
    },
}


def generate(name, spec, out_dir):
    atoms_bohr = [(s, tuple(ANGSTROM_TO_BOHR * np.asarray(r))) for s, r in spec["atoms"]]
    S, T, V, eri = ao_integrals(atoms_bohr)
    e_nuc = nuclear_repulsion(atoms_bohr)
    Hcore = T + V
    E_elec, C, eps = rhf(S, Hcore, eri, spec["n_elec"])
    e_hf_scf = E_elec + e_nuc
    lit, lit_tol = spec["hf_lit"]
    assert abs(e_hf_scf - lit) < lit_tol, (name, e_hf_scf, lit)

    h_mo = C.T @ Hcore @ C
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, eri, optimize=True)

    e_hf, e_fci, e_cisd, gap, spread = reference_energies(h_mo, eri_mo, e_nuc, spec["n_elec"])
    assert abs(e_hf - e_hf_scf) < 1e-8, (name, e_hf, e_hf_scf)
    assert e_fci <= e_cisd + 1e-12 <= e_hf + 1e-12

    fcidump = os.path.join(out_dir, f"{name}.fcidump")
    write_fcidump(fcidump, h_mo, eri_mo, e_nuc, spec["n_elec"])
    sidecar = {
        "name": name,
        "basis": "STO-3G",
        "geometry_angstrom": [[s, list(r)] for s, r in spec["atoms"]],
        "n_spatial_orbitals": h_mo.shape[0],
        "n_spin_orbitals": 2 * h_mo.shape[0],
        "n_electrons": spec["n_elec"],
        "core_energy": e_nuc,
        "hf_energy": e_hf,
        "fci_energy": e_fci,
        "cisd_energy": e_cisd,
        "first_gap": gap,
        "spectral_range": spread,
        "generator": "tools/make_fixtures.py (McMurchie-Davidson STO-3G, RHF, Slater-Condon CI)",
    }
    with open(os.path.join(out_dir, f"{name}.json"), "w") as f:
        json.dump(sidecar, f, indent=2)
    print(f"{name:5s}  HF={e_hf:.8f}  FCI={e_fci:.8f}  CISD={e_cisd:.8f}  gap={gap:.6f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="src/qksdcost/fixtures")
    ap.add_argument("--only", nargs="*", default=None)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name, spec in MOLECULES.items():
        if args.only and name not in args.only:
            continue
        generate(name, spec, args.out)


if __name__ == "__main__":
    main()
