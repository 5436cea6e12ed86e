import itertools

import numpy as np
import pytest

from qksdcost.pipeline import load_molecule

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_word(label: str) -> np.ndarray:
    """Independent dense matrix for a Pauli label (qubit 0 = lowest bit)."""
    mats = [PAULI_1Q[ch] for ch in label]
    out = mats[-1]
    for m in reversed(mats[:-1]):
        out = np.kron(out, m)
    return out


def dense_sum(h) -> np.ndarray:
    dim = 1 << h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for w, c in h.items():
        out += c * dense_word(w.label())
    return out


def all_labels(n_qubits):
    return ["".join(t) for t in itertools.product("IXYZ", repeat=n_qubits)]


def random_pauli_sum(n_qubits, rng, density=0.3, include_identity=False):
    from qksdcost.pauli import PauliSum

    terms = {}
    for lbl in all_labels(n_qubits):
        if lbl == "I" * n_qubits and not include_identity:
            continue
        if rng.random() < density:
            terms[lbl] = float(rng.normal())
    if not terms:
        terms["Z" + "I" * (n_qubits - 1)] = 1.0
    return PauliSum.from_terms(terms)


@pytest.fixture(scope="session")
def h2():
    return load_molecule("h2")


@pytest.fixture(scope="session")
def h4():
    return load_molecule("h4")


@pytest.fixture(scope="session")
def lih():
    return load_molecule("lih")


@pytest.fixture(scope="session")
def beh2():
    return load_molecule("beh2")


@pytest.fixture(scope="session")
def h2o():
    return load_molecule("h2o")


@pytest.fixture(scope="session")
def small_molecules(h2, h4):
    return [h2, h4]
