import numpy as np
import pytest

from qksdcost.chem import FermionSum
from qksdcost.grouping import (
    FragmentSet,
    decomposition_norm,
    partition_diagnostics,
    sorted_insertion,
    termwise_fermionic_grouping,
    verify_partition,
)
from qksdcost.pauli import PauliSum

from conftest import dense_sum, random_pauli_sum


def test_single_term_single_group():
    h = PauliSum.from_terms({"ZI": 0.5})
    fs = sorted_insertion(h, "commuting")
    assert len(fs.groups) == 1
    assert decomposition_norm(fs) == pytest.approx(0.5)


def test_anticommuting_pair_pythagoras():
    h = PauliSum.from_terms({"XI": 0.4, "ZI": 0.3})
    fs = sorted_insertion(h, "anticommuting")
    assert len(fs.groups) == 1
    assert decomposition_norm(fs) == pytest.approx(0.5)


def test_h2_fh_norm_near_paper_value(h2):
    fs = sorted_insertion(h2.hamiltonian.without_identity(), "commuting")
    # Table-scale value; geometry caveat gives the tolerance
    assert decomposition_norm(fs) == pytest.approx(0.6398, rel=0.02)


def test_h2_lcu_norm_near_paper_value(h2):
    fs = sorted_insertion(h2.hamiltonian.without_identity(), "anticommuting")
    assert decomposition_norm(fs) == pytest.approx(1.7267, rel=0.02)


def test_identity_never_grouped(h2):
    fs = sorted_insertion(h2.hamiltonian, "commuting")
    assert fs.scalar == pytest.approx(h2.hamiltonian.identity_coefficient)
    for g in fs.groups:
        for w in g:
            assert not w.is_identity


def test_grouped_norm_bounded_by_l1():
    rng = np.random.default_rng(2)
    for _ in range(20):
        h = random_pauli_sum(3, rng, density=0.4)
        l1 = h.coefficient_l1()
        for mode in ("commuting", "anticommuting"):
            fs = sorted_insertion(h, mode)
            assert decomposition_norm(fs) <= l1 + 1e-12
            singles = all(len(g) == 1 for g in fs.groups)
            if singles:
                assert decomposition_norm(fs) == pytest.approx(l1)


def test_partition_validity_random():
    rng = np.random.default_rng(4)
    for _ in range(20):
        h = random_pauli_sum(3, rng, density=0.4)
        for mode in ("commuting", "anticommuting"):
            fs = sorted_insertion(h, mode)
            assert verify_partition(fs, h)


def test_verify_catches_perturbation(h2):
    body = h2.hamiltonian.without_identity()
    fs = sorted_insertion(body, "commuting")
    word = next(iter(fs.groups[0]))
    fs.groups[0][word] += 1e-6
    assert not verify_partition(fs, body)
    assert any("coefficient mismatch" in msg
               for msg in partition_diagnostics(fs, body))


def test_determinism_under_relabeled_coefficients():
    # identical magnitude multiset + identical commutation pattern
    # presented in the same order -> identical group structure
    h1 = PauliSum.from_terms({"XX": 0.5, "YY": -0.25, "ZZ": 0.125, "XY": 0.0625})
    h2_ = PauliSum.from_terms({"XX": -0.5, "YY": 0.25, "ZZ": -0.125, "XY": 0.0625})
    for mode in ("commuting", "anticommuting"):
        fs1 = sorted_insertion(h1, mode)
        fs2 = sorted_insertion(h2_, mode)
        assert [sorted(w.label() for w in g) for g in fs1.groups] == \
               [sorted(w.label() for w in g) for g in fs2.groups]
        assert decomposition_norm(fs1) == pytest.approx(decomposition_norm(fs2))


def test_lcu_groups_square_to_scaled_identity(h2):
    fs = sorted_insertion(h2.hamiltonian.without_identity(), "anticommuting")
    for j, g in enumerate(fs.groups):
        part = PauliSum(fs.n_qubits, dict(g))
        dense = dense_sum(part)
        want = (fs.weights[j] ** 2) * np.eye(dense.shape[0])
        assert np.max(np.abs(dense @ dense - want)) < 1e-10


def test_fh_groups_commute_pairwise_dense(h2):
    fs = sorted_insertion(h2.hamiltonian.without_identity(), "commuting")
    for g in fs.groups:
        words = list(g)
        for i, a in enumerate(words):
            da = dense_sum(PauliSum(fs.n_qubits, {a: 1.0}))
            for b in words[i + 1:]:
                db = dense_sum(PauliSum(fs.n_qubits, {b: 1.0}))
                assert np.max(np.abs(da @ db - db @ da)) < 1e-12


def test_empty_hamiltonian_rejected():
    with pytest.raises(ValueError):
        sorted_insertion(PauliSum(2, {}), "commuting")
    with pytest.raises(ValueError):
        sorted_insertion(PauliSum.from_terms({"II": 1.0}), "commuting")


def test_termwise_number_operator_weight():
    f = FermionSum(2)
    f.add_one_body(0, 0, 1.0)  # E_00 = 2 n_0
    fs = termwise_fermionic_grouping(f)
    # per-unit E_rr weight is sqrt(2): one atom 2 n_0 with weight 2/sqrt(2)
    assert decomposition_norm(fs) == pytest.approx(np.sqrt(2.0))


def test_termwise_hopping_weight():
    f = FermionSum(2)
    f.add_one_body(0, 1, 1.0)
    fs = termwise_fermionic_grouping(f)
    assert decomposition_norm(fs) == pytest.approx(1.0 / np.sqrt(2.0))


def test_termwise_weights_match_trace_oracle():
    # (Tr[T^2]/d)^(1/2) from a dense build, for n and E atoms
    f = FermionSum(3)
    f.add_one_body(1, 1, 0.5)   # n_1
    fs = termwise_fermionic_grouping(f)
    from qksdcost.chem import jordan_wigner
    dense = dense_sum(jordan_wigner(f))
    want = np.sqrt(np.trace(dense @ dense).real / dense.shape[0])
    assert decomposition_norm(fs) == pytest.approx(want, abs=1e-12)


def test_termwise_reconstructs_hamiltonian(h4):
    fs = termwise_fermionic_grouping(h4.fermion)
    assert len(fs.groups) == len(fs.weights)
    assert all(len(g) == 1 for g in fs.groups)
    assert decomposition_norm(fs) > 0


def test_fragment_set_json_round_trip(tmp_path, h2):
    fs = sorted_insertion(h2.hamiltonian.without_identity(), "commuting")
    path = tmp_path / "frags.json"
    fs.dump_json(path)
    import json

    data = json.loads(path.read_text())
    assert data["mode"] == "fh"
    assert data["norm"] == pytest.approx(decomposition_norm(fs))
    total = sum(t["coefficient"] for g in data["groups"] for t in g["terms"])
    want = sum(c for _, c in h2.hamiltonian.without_identity().items())
    assert total == pytest.approx(want, abs=1e-12)
