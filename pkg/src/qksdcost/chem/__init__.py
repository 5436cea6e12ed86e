from .fcidump import FcidumpError, IntegralSet, parse_fcidump
from .fermion import FermionSum, EffectiveTerms, build_fermionic_hamiltonian, effective_terms
from .mapping import jordan_wigner
from .reference import (
    InfeasibleError,
    Occupation,
    SectorSolution,
    cisd_ground_state,
    cisd_indices,
    hf_reference,
    hf_statevector,
    solve_sector,
)

__all__ = [
    "FcidumpError", "IntegralSet", "parse_fcidump",
    "FermionSum", "EffectiveTerms", "build_fermionic_hamiltonian", "effective_terms",
    "jordan_wigner",
    "InfeasibleError", "Occupation", "SectorSolution",
    "cisd_ground_state", "cisd_indices", "hf_reference", "hf_statevector",
    "solve_sector",
]
