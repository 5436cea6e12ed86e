import itertools

import numpy as np
import pytest

from qksdcost.pauli import (
    DimensionError,
    PauliSum,
    PauliWord,
    commutes,
    deserialize,
    normalized_trace_inner,
    pauli_product,
    serialize,
    symmetric_product,
)

from conftest import all_labels, dense_sum, dense_word, random_pauli_sum


def test_product_single_qubit_table():
    ph, w = pauli_product(PauliWord.from_label("X"), PauliWord.from_label("Z"))
    assert ph == -1j and w.label() == "Y"
    ph, w = pauli_product(PauliWord.from_label("Z"), PauliWord.from_label("X"))
    assert ph == 1j and w.label() == "Y"


def test_product_identity_is_neutral():
    for lbl in all_labels(2):
        p = PauliWord.from_label(lbl)
        ident = PauliWord.from_label("II")
        for a, b in ((ident, p), (p, ident)):
            ph, w = pauli_product(a, b)
            assert ph == 1 and w == p


def test_product_two_qubit_example():
    ph, w = pauli_product(PauliWord.from_label("XX"), PauliWord.from_label("ZZ"))
    assert ph == -1 and w.label() == "YY"


def test_product_agrees_with_dense_on_all_two_qubit_pairs():
    for l1, l2 in itertools.product(all_labels(2), repeat=2):
        p, q = PauliWord.from_label(l1), PauliWord.from_label(l2)
        phase, w = pauli_product(p, q)
        want = dense_word(l1) @ dense_word(l2)
        assert np.allclose(phase * dense_word(w.label()), want, atol=1e-14)


def test_product_associativity_up_to_phase():
    # associativity up to the tracked phase, dense-checked
    rng = np.random.default_rng(3)
    labels = all_labels(2)
    for _ in range(60):
        a, b, c = (PauliWord.from_label(labels[rng.integers(len(labels))])
                   for _ in range(3))
        ph1, ab = pauli_product(a, b)
        ph2, ab_c = pauli_product(ab, c)
        ph3, bc = pauli_product(b, c)
        ph4, a_bc = pauli_product(a, bc)
        assert ab_c == a_bc
        assert np.isclose(ph1 * ph2, ph3 * ph4)


def test_commutes_matches_dense_commutator():
    for n in (1, 2):
        for l1, l2 in itertools.product(all_labels(n), repeat=2):
            p, q = PauliWord.from_label(l1), PauliWord.from_label(l2)
            m1, m2 = dense_word(l1), dense_word(l2)
            dense_commutes = np.allclose(m1 @ m2 - m2 @ m1, 0.0)
            assert commutes(p, q) == dense_commutes


def test_commutes_examples():
    assert not commutes(PauliWord.from_label("XI"), PauliWord.from_label("ZI"))
    assert commutes(PauliWord.from_label("XX"), PauliWord.from_label("ZZ"))
    for lbl in all_labels(2):
        w = PauliWord.from_label(lbl)
        assert commutes(w, w)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        pauli_product(PauliWord.from_label("X"), PauliWord.from_label("XX"))
    with pytest.raises(DimensionError):
        commutes(PauliWord.from_label("X"), PauliWord.from_label("XX"))
    with pytest.raises(DimensionError):
        normalized_trace_inner(PauliSum.from_terms({"X": 1.0}),
                               PauliSum.from_terms({"XX": 1.0}))


def test_trace_inner_examples():
    a = PauliSum.from_terms({"Z": 0.3})
    assert normalized_trace_inner(a, a) == pytest.approx(0.09, abs=1e-15)
    b = PauliSum.from_terms({"X": 0.7})
    assert normalized_trace_inner(a, b) == 0.0


def test_trace_inner_matches_dense_oracle():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a = random_pauli_sum(3, rng, include_identity=True)
        b = random_pauli_sum(3, rng, include_identity=True)
        da, db = dense_sum(a), dense_sum(b)
        want = np.trace(da.conj().T @ db).real / 8.0
        assert normalized_trace_inner(a, b) == pytest.approx(want, abs=1e-12)


def test_trace_inner_is_squared_l2_norm():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = random_pauli_sum(3, rng)
        want = sum(c * c for _, c in a.items())
        assert normalized_trace_inner(a, a) == pytest.approx(want, rel=1e-14)


def test_symmetric_product_matches_dense():
    rng = np.random.default_rng(7)
    for _ in range(10):
        a = random_pauli_sum(2, rng, include_identity=True)
        b = random_pauli_sum(2, rng, include_identity=True)
        sym = symmetric_product(a, b)
        da, db = dense_sum(a), dense_sum(b)
        assert np.allclose(dense_sum(sym), 0.5 * (da @ db + db @ da), atol=1e-12)


def test_imaginary_coefficients_rejected():
    w = PauliWord.from_label("X")
    with pytest.raises(ValueError):
        PauliSum(1, {w: 1.0 + 1e-6j})
    # tiny imaginary residue is forgiven
    PauliSum(1, {w: 1.0 + 1e-14j})


def test_serialize_round_trip_bit_exact():
    rng = np.random.default_rng(13)
    h = random_pauli_sum(4, rng, density=0.1)
    again = deserialize(serialize(h))
    assert again == h
    for (w1, c1), (w2, c2) in zip(h.sorted_items(), again.sorted_items()):
        assert w1 == w2 and c1 == c2  # bit-exact, not just close


def test_serialize_format():
    h = PauliSum.from_terms({"ZIIZ": 0.3})
    assert serialize(h) == "0.3 ZIIZ\n"


def test_deserialize_rejects_garbage():
    with pytest.raises(ValueError):
        deserialize("0.5 XQ")
    with pytest.raises(ValueError):
        deserialize("not_a_number XX")


def test_zero_coefficients_pruned():
    h = PauliSum.from_terms({"XX": 0.0, "ZZ": 1.0})
    assert len(h) == 1
