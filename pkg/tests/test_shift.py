import numpy as np
import pytest

from qksdcost.chem import build_fermionic_hamiltonian, jordan_wigner, parse_fcidump, hf_reference
from qksdcost.grouping import (
    decomposition_norm,
    sorted_insertion,
    termwise_fermionic_grouping,
)
from qksdcost.shift import (
    ShiftParams,
    annihilation_check,
    apply_shift,
    closed_form_shift,
    effective_partial_hamiltonian,
    refine_shift,
    shift_constant,
    shift_operator,
    shifted_norm_objective,
)

from conftest import dense_sum


def test_zero_two_body_closed_form(tmp_path):
    path = tmp_path / "diag.fcidump"
    path.write_text("&FCI NORB=2,NELEC=2\n&END\n -1.0 1 1 0 0\n -0.5 2 2 0 0\n")
    ints = parse_fcidump(path)
    ref = hf_reference(ints)
    sp = closed_form_shift(ints, ref)
    assert not sp.tau2
    # tau1_q equals the physical n_q coefficient (2 h_qq in the convention
    # where the diagonal one-body term reads h_qq E_qq = 2 h_qq n_q)
    assert sp.tau1 == pytest.approx({0: -1.0, 1: -1.0, 2: -0.5, 3: -0.5})
    assert sp.t == pytest.approx(-2.0)
    # shifted one-body part loses every number operator
    shifted = apply_shift(build_fermionic_hamiltonian(ints), sp)
    assert not shifted.one_body and not shifted.two_body


def test_one_orbital_system_has_no_tau2(tmp_path):
    path = tmp_path / "one.fcidump"
    path.write_text("&FCI NORB=1,NELEC=2\n&END\n 0.675 1 1 1 1\n -1.25 1 1 0 0\n")
    ints = parse_fcidump(path)
    sp = closed_form_shift(ints, hf_reference(ints))
    assert all(r == s for (_, (r, s)) in sp.tau2)  # only diagonal partners


def test_shift_constant_formula(h2):
    sp = closed_form_shift(h2.ints, h2.ref)
    want = sum(sp.tau1.get(q, 0.0) for q in sp.occ)
    for (q, (r, s)), v in sp.tau2.items():
        if q in sp.occ and r == s:
            want += v
    assert sp.t == pytest.approx(want)
    assert shift_constant(sp.tau1, sp.tau2, sp.occ) == pytest.approx(sp.t)


def test_annihilation_closed_form(small_molecules):
    for mol in small_molecules:
        sp = closed_form_shift(mol.ints, mol.ref)
        assert annihilation_check(sp, mol.ref, mol.n_qubits) < 1e-12


def test_annihilation_any_tau(h2):
    # the structural constraint holds for arbitrary parameters
    rng = np.random.default_rng(0)
    sp0 = closed_form_shift(h2.ints, h2.ref)
    for _ in range(25):
        tau1 = {q: float(rng.normal()) for q in range(h2.n_qubits)}
        tau2 = {key: float(rng.normal()) for key in sp0.tau2}
        sp = ShiftParams(tau1=tau1, tau2=tau2, occ=sp0.occ)
        assert annihilation_check(sp, h2.ref, h2.n_qubits) < 1e-12


def test_corrupted_t_breaks_annihilation(h2):
    sp = closed_form_shift(h2.ints, h2.ref)
    bad = ShiftParams(tau1=dict(sp.tau1), tau2=dict(sp.tau2), occ=sp.occ,
                      t=sp.t + 0.1)
    assert annihilation_check(bad, h2.ref, h2.n_qubits) > 1e-3


def test_effective_partial_plus_rest_is_exact(h2):
    h_s, rest = effective_partial_hamiltonian(h2.ints, h2.ref)
    total = jordan_wigner(h_s + rest)
    diff = total - h2.hamiltonian
    assert max((abs(c) for _, c in diff.items()), default=0.0) < 1e-10
    spec_a = np.linalg.eigvalsh(dense_sum(total))
    spec_b = np.linalg.eigvalsh(dense_sum(h2.hamiltonian))
    assert np.max(np.abs(spec_a - spec_b)) < 1e-10


def test_rest_untouched_by_shift(h2):
    _, rest = effective_partial_hamiltonian(h2.ints, h2.ref)
    sp = closed_form_shift(h2.ints, h2.ref)
    shifted = apply_shift(h2.fermion, sp)
    for key, val in rest.two_body.items():
        assert shifted.two_body.get(key, 0.0) == pytest.approx(val, abs=1e-12)


def test_closed_form_termwise_norm_formula(h2):
    """gamma_T(H_s - T) equals the separable optimum evaluated directly."""
    from qksdcost.chem.fermion import effective_terms

    h_s, _ = effective_partial_hamiltonian(h2.ints, h2.ref)
    sp = closed_form_shift(h2.ints, h2.ref)
    shifted_hs = apply_shift(h_s, sp)
    got = decomposition_norm(termwise_fermionic_grouping(shifted_hs))
    eff = effective_terms(h2.fermion)
    want = 0.0
    for (r, s), eta in eff.excitation.items():
        coupling = eta + sum(v for (q, (rr, ss)), v in eff.exc_number.items()
                             if (rr, ss) == (r, s) and q in h2.ref.occ)
        want += abs(coupling) / np.sqrt(2.0)
    assert got == pytest.approx(want, abs=1e-10)


def test_zero_shift_params_is_identity(h2):
    sp = ShiftParams(tau1={}, tau2={}, occ=h2.ref.occ)
    assert sp.t == 0.0
    shifted = apply_shift(h2.fermion, sp)
    diff = jordan_wigner(shifted) - h2.hamiltonian
    assert max((abs(c) for _, c in diff.items()), default=0.0) < 1e-14


def test_shift_index_out_of_range(h2):
    sp = ShiftParams(tau1={99: 1.0}, tau2={}, occ=h2.ref.occ)
    with pytest.raises(IndexError):
        apply_shift(h2.fermion, sp)


def test_tau2_index_validation():
    with pytest.raises(ValueError):
        ShiftParams(tau1={}, tau2={(1, (1, 2)): 0.5}, occ=frozenset({0}))


def test_norm_monotonicity_all_algorithms(small_molecules):
    for mol in small_molecules:
        sp = closed_form_shift(mol.ints, mol.ref)
        shifted = apply_shift(mol.fermion, sp)
        raw_map = mol.hamiltonian.without_identity()
        shifted_map = jordan_wigner(shifted).without_identity()
        for si_mode in ("commuting", "anticommuting"):
            before = decomposition_norm(sorted_insertion(raw_map, si_mode))
            after = decomposition_norm(sorted_insertion(shifted_map, si_mode))
            assert after <= before + 1e-12
        tw_before = decomposition_norm(termwise_fermionic_grouping(mol.fermion))
        tw_after = decomposition_norm(termwise_fermionic_grouping(shifted))
        assert tw_after <= tw_before + 1e-12


def test_h2_shifted_norms_near_paper(h2):
    sp = closed_form_shift(h2.ints, h2.ref)
    shifted = jordan_wigner(apply_shift(h2.fermion, sp)).without_identity()
    beta = decomposition_norm(sorted_insertion(shifted, "anticommuting"))
    gamma = decomposition_norm(sorted_insertion(shifted, "commuting"))
    assert beta == pytest.approx(0.1812, rel=0.05)
    assert gamma == pytest.approx(0.0906, rel=0.05)


def test_closed_form_is_termwise_optimal(h2):
    """Random feasible perturbations never beat the closed form."""
    rng = np.random.default_rng(42)
    sp = closed_form_shift(h2.ints, h2.ref)
    objective = shifted_norm_objective(h2.fermion, "termwise")
    best = objective(sp)
    for _ in range(1000):
        tau1 = {q: v + rng.uniform(-0.1, 0.1) for q, v in sp.tau1.items()}
        tau2 = {key: v + rng.uniform(-0.1, 0.1) for key, v in sp.tau2.items()}
        cand = ShiftParams(tau1=tau1, tau2=tau2, occ=sp.occ)
        assert objective(cand) >= best - 1e-12


def test_refine_shift_termwise_no_improving_move(h2):
    sp = closed_form_shift(h2.ints, h2.ref)
    out = refine_shift(h2.fermion, sp, algo="termwise", max_sweeps=3)
    objective = shifted_norm_objective(h2.fermion, "termwise")
    assert objective(out) == pytest.approx(objective(sp), abs=1e-12)


def test_refine_shift_si_fh_local_optimality(h2):
    sp = closed_form_shift(h2.ints, h2.ref)
    out = refine_shift(h2.fermion, sp, algo="si-fh", max_sweeps=6)
    objective = shifted_norm_objective(h2.fermion, "si-fh")
    final = objective(out)
    assert final <= objective(sp) + 1e-12
    rng = np.random.default_rng(9)
    for _ in range(100):
        tau1 = {q: v + rng.uniform(-0.02, 0.02) for q, v in out.tau1.items()}
        tau2 = {key: v + rng.uniform(-0.02, 0.02) for key, v in out.tau2.items()}
        cand = ShiftParams(tau1=tau1, tau2=tau2, occ=out.occ)
        assert objective(cand) >= final - 1e-9


def test_shift_operator_json_round_trip(h2, tmp_path):
    sp = closed_form_shift(h2.ints, h2.ref)
    path = tmp_path / "shift.json"
    sp.dump_json(path)
    import json

    back = ShiftParams.from_json_dict(json.loads(path.read_text()))
    assert back.t == pytest.approx(sp.t)
    assert back.tau1 == pytest.approx(sp.tau1)
    assert back.tau2 == pytest.approx(sp.tau2)
    op_a = dense_sum(jordan_wigner(shift_operator(sp, h2.n_qubits)))
    op_b = dense_sum(jordan_wigner(shift_operator(back, h2.n_qubits)))
    assert np.max(np.abs(op_a - op_b)) < 1e-12
