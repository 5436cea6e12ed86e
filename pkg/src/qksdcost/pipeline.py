"""End-to-end drivers: fixture loading, measurement plans, costs, trials.

Everything downstream of the CLI lives here so tests can exercise the
same code paths without spawning processes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .chem import (
    FermionSum,
    IntegralSet,
    Occupation,
    SectorSolution,
    build_fermionic_hamiltonian,
    cisd_ground_state,
    hf_reference,
    hf_statevector,
    jordan_wigner,
    parse_fcidump,
    solve_sector,
)
from .gevp import KrylovEnsemble, default_threshold, thresholded_gevp
from .grouping import (
    MODE_FH,
    MODE_LCU,
    FragmentSet,
    decomposition_norm,
    sorted_insertion,
    termwise_fermionic_grouping,
)
from .ics import SplitSolution, cisd_proxy_pair, extend_groups, ics_optimize
from .pauli import PauliSum
from .shift import ShiftParams, apply_shift, closed_form_shift, refine_shift
from .sim.sampling import sample_matrix_element
from .sim.statevector import krylov_states
from .sim.variances import (
    IM,
    RE,
    ShotAllocation,
    VarianceTable,
    allocate_shots,
    element_variance,
    fragment_variances,
)

FIXTURE_DIR = Path(__file__).parent / "fixtures"
BUILTIN_FIXTURES = ("h2", "h4", "lih", "beh2", "h2o")


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / f"{name}.fcidump"


@dataclass
class Molecule:
    """Parsed fixture plus lazily computed exact solutions."""

    name: str
    path: Path
    ints: IntegralSet
    sidecar: dict
    fermion: FermionSum
    ref: Occupation
    hamiltonian: PauliSum
    _sector: Optional[SectorSolution] = None
    _krylov_cache: Dict[float, List[np.ndarray]] = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return self.ints.n_orb

    @property
    def sector(self) -> SectorSolution:
        if self._sector is None:
            self._sector = solve_sector(self.hamiltonian, self.ints.n_elec)
        return self._sector

    @property
    def fci_energy(self) -> float:
        return self.sector.ground_energy

    @property
    def auto_dt(self) -> float:
        """pi over the reference-weighted spectral span.

        The eigenphases of every state carrying reference weight (99.9% of
        it) stay within a half turn, so none of them alias onto the
        ground-state phase; at the same time the weighted phases spread
        over order-one angles, which keeps the Krylov overlap matrix well
        enough conditioned for thresholding to cut noise without biasing
        the energy. Gap-based steps wrap the wide electronic spectrum many
        times over and stall the projection error; full-range steps leave
        the weighted phases so bunched that thresholding bites off most of
        the subspace.
        """
        span = self.sector.weighted_span(self.ref.determinant_index)
        return float(np.pi / span)

    @property
    def default_order(self) -> int:
        return self.n_qubits + 1

    def phi0(self) -> np.ndarray:
        return hf_statevector(self.n_qubits, self.ref)

    def krylov(self, dt: float, n: int) -> List[np.ndarray]:
        key = round(float(dt), 12)
        states = self._krylov_cache.get(key)
        if states is None or len(states) < n:
            states = krylov_states(self.hamiltonian, self.phi0(), dt, n)
            self._krylov_cache[key] = states
        return states[:n]


_MOLECULES: Dict[str, Molecule] = {}


def load_molecule(source) -> Molecule:
    """Load a fixture by short name or FCIDUMP path, with caching."""
    name = str(source)
    if name in BUILTIN_FIXTURES:
        path = fixture_path(name)
    else:
        path = Path(source)
    key = str(path.resolve())
    if key in _MOLECULES:
        return _MOLECULES[key]
    if not path.exists():
        raise FileNotFoundError(f"no fixture or FCIDUMP at {path}")
    ints = parse_fcidump(path)
    sidecar_path = path.with_suffix(".json")
    sidecar = json.loads(sidecar_path.read_text()) if sidecar_path.exists() else {}
    fermion = build_fermionic_hamiltonian(ints)
    mol = Molecule(
        name=path.stem,
        path=path,
        ints=ints,
        sidecar=sidecar,
        fermion=fermion,
        ref=hf_reference(ints),
        hamiltonian=jordan_wigner(fermion),
    )
    _MOLECULES[key] = mol
    return mol


@dataclass
class RunConfig:
    input: str
    mode: str = "fh"                 # lcu | fh
    shift: str = "none"              # none | closed-form | refined
    ics: str = "off"                 # off | cisd | true-state
    order: Optional[int] = None      # default N_q + 1
    dt: Optional[float] = None       # default pi / first gap
    shots: float = 1e8               # per matrix element (H and S alike)
    trials: int = 1
    seed: int = 0
    threshold_constant: float = 1.0
    noise: str = "gaussian"
    out: Optional[str] = None

    def validate(self) -> None:
        if self.mode not in ("lcu", "fh"):
            raise ValueError(f"invalid mode {self.mode!r}")
        if self.shift not in ("none", "closed-form", "refined"):
            raise ValueError(f"invalid shift {self.shift!r}")
        if self.ics not in ("off", "cisd", "true-state"):
            raise ValueError(f"invalid ics {self.ics!r}")
        if self.noise not in ("gaussian", "projective"):
            raise ValueError(f"invalid noise mode {self.noise!r}")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    def config_hash(self) -> str:
        blob = json.dumps(self.__dict__, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _si_mode(mode: str) -> str:
    return "commuting" if mode == "fh" else "anticommuting"


@dataclass
class MeasurementPlan:
    """Everything needed to predict or simulate one pipeline's elements."""

    molecule: Molecule
    config: RunConfig
    n: int
    dt: float
    body: PauliSum                  # measured operator, identity removed
    scalar_offset: float            # identity coefficient of the mapped op
    t_shift: float                  # shift eigenvalue (0 when unshifted)
    shift_params: Optional[ShiftParams]
    base_fragments: FragmentSet
    tables: List[VarianceTable]     # per k, exact states
    allocations: List[ShotAllocation]
    s_row: np.ndarray               # exact overlaps
    body_row: np.ndarray            # exact <phi0|body|phik>
    ics_solutions: List[Optional[SplitSolution]]

    def element_costs(self, shots_scale: float = 1.0) -> np.ndarray:
        """M * eps^2 per k for this plan's tables and allocations."""
        return np.array([
            element_variance(vt, al, 1) for vt, al in zip(self.tables, self.allocations)
        ]) * shots_scale

    def mean_cost(self) -> float:
        return float(np.mean(self.element_costs()))


def shift_for(mol: Molecule, cfg: RunConfig) -> Optional[ShiftParams]:
    if cfg.shift == "none":
        return None
    sp = closed_form_shift(mol.ints, mol.ref)
    if cfg.shift == "refined":
        sp = refine_shift(mol.fermion, sp, algo=f"si-{cfg.mode}")
    return sp


def prepare_plan(cfg: RunConfig, mol: Optional[Molecule] = None) -> MeasurementPlan:
    cfg.validate()
    mol = mol or load_molecule(cfg.input)
    n = cfg.order or mol.default_order
    dt = cfg.dt if cfg.dt is not None else mol.auto_dt
    if np.isfinite(cfg.shots) and cfg.shots < n:
        raise ValueError("shot budget smaller than the Krylov order")

    sp = shift_for(mol, cfg)
    fermion = apply_shift(mol.fermion, sp) if sp else mol.fermion
    mapped = jordan_wigner(fermion)
    body = mapped.without_identity()
    scalar_offset = mapped.identity_coefficient
    t_shift = sp.t if sp else 0.0

    fragments = sorted_insertion(body, _si_mode(cfg.mode))
    states = mol.krylov(dt, n)
    phi0 = states[0]

    extended = extend_groups(fragments) if cfg.ics != "off" else None
    proxy_state = None
    proxy_energy = None
    if cfg.ics == "cisd":
        # the proxy mimics the true evolution, which runs under the full
        # (unshifted) Hamiltonian including its identity part
        proxy_state, proxy_energy = cisd_ground_state(mol.hamiltonian, mol.ref)
    tables: List[VarianceTable] = []
    allocations: List[ShotAllocation] = []
    solutions: List[Optional[SplitSolution]] = []
    for k in range(n):
        if cfg.ics == "off":
            vt = fragment_variances(fragments, phi0, states[k])
            al = allocate_shots(vt, "subopt")
            sol = None
        else:
            if cfg.ics == "cisd":
                pk = np.exp(-1j * proxy_energy * k * dt) * proxy_state
                p0 = phi0
            else:
                p0, pk = phi0, states[k]
            sol = ics_optimize(extended, p0, pk, extend=False,
                               metadata={"k": k, "proxy": cfg.ics,
                                         "cisd_energy": proxy_energy})
            vt = fragment_variances(sol.fragments, phi0, states[k])
            al = sol.allocation
            if cfg.mode == "lcu":
                # advisory: keep ICS only if it predicts an improvement
                base_vt = fragment_variances(fragments, p0, pk)
                base_cost = element_variance(base_vt, allocate_shots(base_vt, "subopt"), 1)
                if sol.cost > base_cost:
                    vt = fragment_variances(fragments, phi0, states[k])
                    al = allocate_shots(vt, "subopt")
                    sol.metadata["kept"] = False
                else:
                    sol.metadata["kept"] = True
        tables.append(vt)
        allocations.append(al)
        solutions.append(sol)

    phi0_body = phi0
    s_row = np.array([np.vdot(phi0_body, st) for st in states])
    body_row = np.array([vt.total_amplitude() for vt in tables])
    return MeasurementPlan(
        molecule=mol, config=cfg, n=n, dt=dt, body=body,
        scalar_offset=scalar_offset, t_shift=t_shift, shift_params=sp,
        base_fragments=fragments, tables=tables, allocations=allocations,
        s_row=s_row, body_row=body_row, ics_solutions=solutions,
    )


def exact_ensemble(plan: MeasurementPlan) -> KrylovEnsemble:
    return KrylovEnsemble(
        n=plan.n, dt=plan.dt, s_row=plan.s_row.copy(), h_row=plan.body_row.copy(),
        t_shift=plan.t_shift, scalar_offset=plan.scalar_offset,
        metadata={"noise": "none"},
    )


def _overlap_noise(s_val: complex, shots: float, rng: np.random.Generator,
                   mode: str) -> complex:
    """Measured overlap with m_R = m_I = 1/2 of `shots` repetitions."""
    if not np.isfinite(shots):
        return s_val
    half = shots / 2.0
    if mode == "gaussian":
        re = np.real(s_val) + rng.normal() * np.sqrt(max(1.0 - np.real(s_val) ** 2, 0.0) / half)
        im = np.imag(s_val) + rng.normal() * np.sqrt(max(1.0 - np.imag(s_val) ** 2, 0.0) / half)
        return re + 1j * im
    n_half = int(half)
    p_re = np.clip((1.0 + np.real(s_val)) / 2.0, 0.0, 1.0)
    p_im = np.clip((1.0 + np.imag(s_val)) / 2.0, 0.0, 1.0)
    re = 2.0 * rng.binomial(n_half, p_re) / n_half - 1.0
    im = 2.0 * rng.binomial(n_half, p_im) / n_half - 1.0
    return re + 1j * im


def _feasible(alloc: ShotAllocation, vt: VarianceTable, shots: float) -> ShotAllocation:
    """Floor active fractions so every noisy entry gets at least one shot.

    The floor is 2/M so the subsequent renormalization cannot push an
    active entry back under 1/M.
    """
    if not np.isfinite(shots):
        return alloc
    m = alloc.m.copy()
    active = vt.var > 0
    m[active] = np.maximum(m[active], 2.0 / shots)
    return ShotAllocation(m=m, total_shots=alloc.total_shots)


def sample_ensemble(plan: MeasurementPlan, trial: int) -> KrylovEnsemble:
    """One noisy (H, S) first-row draw; deterministic in (seed, trial)."""
    cfg = plan.config
    shots = cfg.shots
    s_row = np.empty(plan.n, dtype=complex)
    h_row = np.empty(plan.n, dtype=complex)
    s_row[0] = 1.0  # <phi0|phi0> needs no measurement
    for k in range(plan.n):
        seed_h = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(trial, k, 0))
        rng_h = np.random.default_rng(seed_h)
        if np.isfinite(shots):
            alloc = _feasible(plan.allocations[k], plan.tables[k], shots)
            h_row[k] = sample_matrix_element(plan.tables[k], alloc, rng_h,
                                             mode=cfg.noise, shots=int(shots))
        else:
            h_row[k] = plan.body_row[k]
        if k > 0:
            seed_s = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(trial, k, 1))
            rng_s = np.random.default_rng(seed_s)
            s_row[k] = _overlap_noise(plan.s_row[k], shots, rng_s, cfg.noise)
    return KrylovEnsemble(
        n=plan.n, dt=plan.dt, s_row=s_row, h_row=h_row,
        t_shift=plan.t_shift, scalar_offset=plan.scalar_offset,
        metadata={"trial": trial, "seed": cfg.seed, "shots": shots,
                  "noise": cfg.noise},
    )


@dataclass
class TrialResult:
    trial: int
    energy: float
    error_mha: float
    n_kept: int


def run_trials(plan: MeasurementPlan) -> List[TrialResult]:
    cfg = plan.config
    eps = default_threshold(plan.n, cfg.shots, cfg.threshold_constant)
    e_ref = plan.molecule.fci_energy
    out: List[TrialResult] = []
    for trial in range(cfg.trials):
        ens = sample_ensemble(plan, trial)
        energy, n_kept = ens.ground_energy(eps)
        out.append(TrialResult(trial=trial, energy=energy,
                               error_mha=(energy - e_ref) * 1e3, n_kept=n_kept))
    return out


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def decompose_report(source, mode: str = "fh", shift: str = "closed-form") -> dict:
    mol = load_molecule(source)
    si_mode = _si_mode(mode)
    raw = sorted_insertion(mol.hamiltonian.without_identity(), si_mode)
    raw_norm = decomposition_norm(raw)
    report = {
        "molecule": mol.name,
        "mode": mode,
        "n_qubits": mol.n_qubits,
        "n_terms": len(mol.hamiltonian.without_identity()),
        "raw_norm": raw_norm,
        "coefficient_l1": mol.hamiltonian.without_identity().coefficient_l1(),
        "termwise_norm": decomposition_norm(termwise_fermionic_grouping(mol.fermion)),
    }
    if shift != "none":
        cfg = RunConfig(input=str(source), mode=mode, shift=shift)
        sp = shift_for(mol, cfg)
        shifted = jordan_wigner(apply_shift(mol.fermion, sp)).without_identity()
        shifted_norm = decomposition_norm(sorted_insertion(shifted, si_mode))
        report.update({
            "shifted_norm": shifted_norm,
            "shift_t": sp.t,
            "reduction_percent": (100.0 * (1.0 - shifted_norm / raw_norm)
                                  if raw_norm > 0 else None),
            "termwise_shifted_norm": decomposition_norm(
                termwise_fermionic_grouping(apply_shift(mol.fermion, sp))),
        })
    return report


COST_METHODS = ("si", "ics-true", "ics-cisd", "shift", "shift-ics")


def cost_report(source, mode: str = "fh", order: Optional[int] = None,
                dt: Optional[float] = None,
                methods: Sequence[str] = COST_METHODS) -> dict:
    """Per-method M * eps^2 averaged over the first-row elements."""
    mol = load_molecule(source)
    rows = {}
    variants = {
        "si": RunConfig(input=str(source), mode=mode, shift="none", ics="off"),
        "ics-true": RunConfig(input=str(source), mode=mode, shift="none", ics="true-state"),
        "ics-cisd": RunConfig(input=str(source), mode=mode, shift="none", ics="cisd"),
        "shift": RunConfig(input=str(source), mode=mode, shift="closed-form", ics="off"),
        "shift-ics": RunConfig(input=str(source), mode=mode, shift="closed-form", ics="true-state"),
    }
    for name in methods:
        cfg = replace(variants[name], order=order, dt=dt)
        plan = prepare_plan(cfg, mol)
        rows[name] = {
            "mean_cost": plan.mean_cost(),
            "per_k": plan.element_costs().tolist(),
        }
    return {"molecule": mol.name, "mode": mode,
            "order": order or mol.default_order, "rows": rows}
