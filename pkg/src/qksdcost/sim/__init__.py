from .statevector import (
    PauliAction,
    apply_pauli_sum,
    apply_word,
    basis_state,
    dense_in_sector,
    evolve,
    exact_first_row,
    haar_state,
    krylov_states,
    sector_indices,
)
from .variances import (
    ShotAllocation,
    VarianceTable,
    allocate_shots,
    element_variance,
    fh_variances,
    fragment_variances,
    haar_expected_cost,
    lcu_variances,
    overlap_variance,
)
from .sampling import sample_matrix_element

__all__ = [
    "PauliAction", "apply_pauli_sum", "apply_word", "basis_state",
    "dense_in_sector", "evolve", "exact_first_row", "haar_state",
    "krylov_states", "sector_indices",
    "ShotAllocation", "VarianceTable", "allocate_shots", "element_variance",
    "fh_variances", "fragment_variances", "haar_expected_cost",
    "lcu_variances", "overlap_variance", "sample_matrix_element",
]
