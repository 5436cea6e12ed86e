"""FCIDUMP ingestion into spin-orbital integral tensors."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class FcidumpError(ValueError):
    """Malformed FCIDUMP content; message carries the line number."""


@dataclass
class IntegralSet:
    """One- and two-electron integrals over spin orbitals (Hartree).

    Spin orbitals are interleaved: 2i is the alpha and 2i+1 the beta
    partner of spatial orbital i. `g` uses chemist index order (pq|rs)
    and carries the full eight-fold symmetry.
    """

    n_orb: int
    n_elec: int
    h: np.ndarray
    g: np.ndarray
    e_core: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.g))):
            raise ValueError("non-finite integral entries")

    @property
    def n_spatial(self) -> int:
        return self.n_orb // 2

    def validate_symmetry(self, tol: float = 1e-10) -> None:
        if np.max(np.abs(self.h - self.h.T)) > tol:
            raise ValueError("one-body tensor not symmetric")
        g = self.g
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.max(np.abs(g - np.transpose(g, perm))) > tol:
                raise ValueError(f"two-body tensor violates symmetry {perm}")


_EIGHTFOLD = ((0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
              (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0))


def parse_fcidump(path) -> IntegralSet:
    """Parse an FCIDUMP file (spatial orbitals, chemist order, 1-based)."""
    text = Path(path).read_text()
    lines = text.splitlines()

    header_end = None
    header = []
    for i, line in enumerate(lines):
        header.append(line)
        if "&END" in line.upper() or line.strip() == "/":
            header_end = i
            break
    if header_end is None:
        raise FcidumpError("line 1: no &END/&FCI header terminator found")
    head = " ".join(header)
    m_norb = re.search(r"NORB\s*=\s*(\d+)", head, re.IGNORECASE)
    m_nelec = re.search(r"NELEC\s*=\s*(\d+)", head, re.IGNORECASE)
    if not m_norb or not m_nelec:
        raise FcidumpError("line 1: header missing NORB or NELEC")
    norb = int(m_norb.group(1))
    nelec = int(m_nelec.group(1))

    h_sp = np.zeros((norb, norb))
    g_sp = np.zeros((norb, norb, norb, norb))
    h_seen = np.zeros((norb, norb), dtype=bool)
    g_seen = np.zeros((norb, norb, norb, norb), dtype=bool)
    e_core = 0.0

    for lineno in range(header_end + 1, len(lines)):
        line = lines[lineno].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FcidumpError(f"line {lineno + 1}: expected `value i j k l`")
        try:
            val = float(parts[0])
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            raise FcidumpError(f"line {lineno + 1}: non-numeric record") from None
        if min(i, j, k, l) < 0 or max(i, j, k, l) > norb:
            raise FcidumpError(f"line {lineno + 1}: orbital index out of range")
        if i == j == k == l == 0:
            e_core = val
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {lineno + 1}: bad one-body indices")
            a, b = i - 1, j - 1
            for p, q in ((a, b), (b, a)):
                if h_seen[p, q] and abs(h_sp[p, q] - val) > 1e-10:
                    raise FcidumpError(
                        f"line {lineno + 1}: symmetry conflict on h[{p},{q}]")
                h_sp[p, q] = val
                h_seen[p, q] = True
        else:
            if min(i, j, k, l) == 0:
                raise FcidumpError(f"line {lineno + 1}: bad two-body indices")
            idx = (i - 1, j - 1, k - 1, l - 1)
            for perm in _EIGHTFOLD:
                t = tuple(idx[p] for p in perm)
                if g_seen[t] and abs(g_sp[t] - val) > 1e-10:
                    raise FcidumpError(
                        f"line {lineno + 1}: symmetry conflict on g{t}")
                g_sp[t] = val
                g_seen[t] = True

    # expand to interleaved spin orbitals
    n = 2 * norb
    h = np.zeros((n, n))
    g = np.zeros((n, n, n, n))
    for sigma in (0, 1):
        h[sigma::2, sigma::2] = h_sp
        for tau in (0, 1):
            g[sigma::2, sigma::2, tau::2, tau::2] = g_sp
    out = IntegralSet(n_orb=n, n_elec=nelec, h=h, g=g, e_core=e_core)
    out.validate_symmetry()
    return out
