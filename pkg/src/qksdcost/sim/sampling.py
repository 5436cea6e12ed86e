"""Simulated measurement of matrix elements under a shot budget.

Gaussian mode matches the exact means and variances of the two test
protocols; the projective mode draws from the exact outcome distributions
and exists to validate the Gaussian model at small scale.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from ..grouping import MODE_FH, MODE_LCU
from .statevector import apply_word
from .variances import IM, RE, ShotAllocation, VarianceTable


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def _check_feasible(vt: VarianceTable, alloc: ShotAllocation, shots: int) -> None:
    bad = (vt.var > 0) & (alloc.m * shots < 1.0)
    if np.any(bad):
        j, x = map(int, np.argwhere(bad)[0])
        raise ValueError(
            f"allocation starves fragment {j} part {'RI'[x]}: "
            f"m*M = {alloc.m[j, x] * shots:.3g} < 1 with nonzero variance")


def sample_matrix_element(vt: VarianceTable, alloc: ShotAllocation,
                          rng_seed: Union[int, np.random.Generator],
                          mode: str = "gaussian", shots: int | None = None) -> complex:
    """One simulated estimate of sum_j <phi0|N_j|phik> under the allocation."""
    shots = alloc.total_shots if shots is None else shots
    if shots < 1:
        raise ValueError("need a positive total shot count")
    rng = _as_rng(rng_seed)
    _check_feasible(vt, alloc, shots)
    if mode == "gaussian":
        return _sample_gaussian(vt, alloc, rng, shots)
    if mode == "projective":
        return _sample_projective(vt, alloc, rng, shots)
    raise ValueError(f"unknown sampling mode {mode!r}")


def _sample_gaussian(vt, alloc, rng, shots) -> complex:
    out = 0.0 + 0.0j
    noise = rng.normal(size=vt.var.shape)
    for j in range(vt.n_fragments):
        re = np.real(vt.amplitudes[j])
        im = np.imag(vt.amplitudes[j])
        if vt.var[j, RE] > 0:
            re += noise[j, RE] * np.sqrt(vt.var[j, RE] / (alloc.m[j, RE] * shots))
        if vt.var[j, IM] > 0:
            im += noise[j, IM] * np.sqrt(vt.var[j, IM] / (alloc.m[j, IM] * shots))
        out += re + 1j * im
    return out


def _joint_eigenbasis(group: dict, dim: int, rng: np.random.Generator):
    """Common eigenbasis of a commuting Pauli family, with +-1 outcomes."""
    words = list(group.keys())
    for _ in range(8):
        coefs = rng.normal(size=len(words))
        dense = np.zeros((dim, dim), dtype=complex)
        basis = np.eye(dim, dtype=complex)
        for c, w in zip(coefs, words):
            cols = np.stack([apply_word(w, basis[:, i]) for i in range(dim)], axis=1)
            dense += c * cols
        _, vecs = np.linalg.eigh(dense)
        outcomes = np.zeros((len(words), dim))
        ok = True
        for wi, w in enumerate(words):
            applied = np.stack([apply_word(w, vecs[:, i]) for i in range(dim)], axis=1)
            vals = np.real(np.sum(np.conj(vecs) * applied, axis=0))
            if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-8:
                ok = False
                break
            outcomes[wi] = np.sign(vals)
        if ok:
            return vecs, outcomes
    raise RuntimeError("failed to separate the joint eigenbasis")


def _sample_projective(vt, alloc, rng, shots) -> complex:
    if vt.fragments is None or vt.phi0 is None:
        raise ValueError("projective mode needs fragment operators and states")
    fs, phi0, phik = vt.fragments, vt.phi0, vt.phik
    dim = phi0.shape[0]
    out = 0.0 + 0.0j
    for j, group in enumerate(fs.groups):
        if vt.weights[j] == 0.0:
            continue
        shots_re = max(1, int(round(alloc.m[j, RE] * shots)))
        shots_im = max(1, int(round(alloc.m[j, IM] * shots)))
        if fs.mode == MODE_LCU:
            beta = vt.weights[j]
            x = vt.amplitudes[j] / beta
            p_re = np.clip((1.0 + np.real(x)) / 2.0, 0.0, 1.0)
            p_im = np.clip((1.0 + np.imag(x)) / 2.0, 0.0, 1.0)
            mean_re = 2.0 * rng.binomial(shots_re, p_re) / shots_re - 1.0
            mean_im = 2.0 * rng.binomial(shots_im, p_im) / shots_im - 1.0
            out += beta * (mean_re + 1j * mean_im)
        else:
            vecs, outcomes = _joint_eigenbasis(group, dim, rng)
            coefs = np.array(list(group.values()))
            frag_vals = coefs @ outcomes  # fragment eigenvalue per basis vector
            u = vecs.conj().T @ phi0      # <v_i|phi0>
            w = vecs.conj().T @ phik
            for part, nsh in ((RE, shots_re), (IM, shots_im)):
                if part == RE:
                    amp_plus, amp_minus = (u + w) / 2.0, (u - w) / 2.0
                else:
                    amp_plus, amp_minus = (u - 1j * w) / 2.0, (u + 1j * w) / 2.0
                probs = np.concatenate([np.abs(amp_plus) ** 2, np.abs(amp_minus) ** 2])
                probs = np.clip(probs, 0.0, None)
                probs /= probs.sum()
                values = np.concatenate([frag_vals, -frag_vals])
                counts = rng.multinomial(nsh, probs)
                mean = float(counts @ values) / nsh
                out += mean if part == RE else 1j * mean
    return out
