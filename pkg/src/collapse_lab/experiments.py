"""The three protocols (electron, photons, retrodiction) and their reports."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import spin_algebra as sa
from .dynamics import (
    AuditReport,
    collapse_ensemble,
    conservation_audit,
    ensemble_expectation,
    evolve_everett,
    sample_outcomes,
)
from .observer_model import (
    M_B,
    M_MINUS,
    M_PLUS,
    M_PM,
    M_PP,
    DeviceKind,
    DeviceSpec,
    MemoryLabel,
    device_unitary,
    electron_register,
    observer_jz,
    retrodiction_register,
    total_jz,
)
from .qcore import STATE_TOL, Operator, StateVec, expectation, inner, tensor_op, tensor_state

DEFAULT_SEED = 20240601
INTERPRETATIONS = ("everett", "copenhagen")

# photon experiment tiers
DENSE_EXPERIMENT_MAX = 10
BITSTRING_EXPERIMENT_MAX = 20


def _interps(interpretation: str) -> tuple:
    if interpretation == "both":
        return INTERPRETATIONS
    if interpretation not in INTERPRETATIONS:
        raise ValueError(f"unknown interpretation {interpretation!r}")
    return (interpretation,)


@dataclass(frozen=True)
class RetrodictionFinding:
    state: str
    probability: float
    false_memory: bool
    rationale: str
    stage: str = ""
    parent: str | None = None

    def as_dict(self) -> dict:
        return {
            "stage": self.stage,
            "state": self.state,
            "probability": self.probability,
            "false_memory": self.false_memory,
            "rationale": self.rationale,
            "parent": self.parent,
        }


@dataclass
class ExperimentReport:
    experiment: str
    interpretations: tuple
    inputs: dict
    table: dict  # observable -> {interpretation: value}
    primary_observable: str
    distribution: dict | list | None = None
    sampled: dict | None = None
    findings: list = field(default_factory=list)
    audit: AuditReport | dict | None = None
    seed: int = DEFAULT_SEED
    runtime: float = 0.0
    units: str = ""

    @property
    def expectations(self) -> dict:
        return dict(self.table.get(self.primary_observable, {}))

    @property
    def delta(self) -> float | None:
        e = self.expectations
        if "everett" in e and "copenhagen" in e:
            return e["everett"] - e["copenhagen"]
        return None


def _ket_name(electron: str, memory) -> str:
    return f"|{electron}>|{memory}>"


# ---------------------------------------------------------------- electron


def electron_record_projectors(register) -> list[Operator]:
    """Projectors onto the M_+ and M_- records, extended by identity on the
    electron, plus the complement (no record) so the family is complete."""
    eye_e = Operator.identity(sa.ELECTRON_LABELS)
    records = [tensor_op(eye_e, Operator.projector(register.ket(m))) for m in (M_PLUS, M_MINUS)]
    rest = Operator(records[0].labels, np.eye(records[0].dim) - records[0].matrix - records[1].matrix,
                    hermitian=True)
    return records + [rest]


def run_electron_experiment(initial: str = "+z", interpretation: str = "both", j0: float = 0.0,
                            samples: int = 0, seed: int = DEFAULT_SEED) -> ExperimentReport:
    """Measure-and-flip device on an electron, then Alice reads Bob's J_z."""
    t0 = time.perf_counter()
    if initial not in sa.ELECTRON_STATES:
        raise ValueError(f"initial electron state must be one of {list(sa.ELECTRON_STATES)}")
    interps = _interps(interpretation)
    reg = electron_register(j0)
    u = device_unitary(DeviceSpec(DeviceKind.MEASURE_AND_FLIP_X, reg))
    psi = tensor_state(sa.ELECTRON_STATES[initial], reg.ket(M_B))
    after = evolve_everett(u, psi)
    projectors = electron_record_projectors(reg)
    ens = collapse_ensemble(after, projectors)

    observables = {"bob_jz": observer_jz(reg), "total_jz": total_jz(reg),
                   "electron_jz": tensor_op(sa.JZ, Operator.identity(reg.names))}
    table = {}
    for name, op in observables.items():
        row = {}
        if "everett" in interps:
            row["everett"] = expectation(op, after)
        if "copenhagen" in interps:
            row["copenhagen"] = ensemble_expectation(ens, op)
        table[name] = row

    probs = ens.probabilities
    dist = {m.name: probs.get(i, 0.0) for i, m in enumerate((M_PLUS, M_MINUS))}
    sampled = None
    if samples:
        draws = sample_outcomes(after, projectors, seed, samples)
        sampled = {"samples": samples,
                   "frequencies": {m.name: float(np.mean(draws == i)) for i, m in enumerate((M_PLUS, M_MINUS))}}
    audit = conservation_audit(u, projectors, observables["total_jz"], psi, name="total_jz")
    return ExperimentReport(
        experiment="electron",
        interpretations=interps,
        inputs={"initial": initial, "j0": float(j0)},
        table=table,
        primary_observable="bob_jz",
        distribution=dist,
        sampled=sampled,
        audit=audit,
        seed=seed,
        runtime=time.perf_counter() - t0,
        units="hbar (electron spin-1/2)",
    )


# ---------------------------------------------------------------- photons


def _photon_dense(n_photons: int):
    psi = sa.product_state(sa.R, n_photons)
    s_n = sa.total_spin_op(n_photons)
    everett = expectation(s_n, psi)
    ens = collapse_ensemble(psi, sa.fixed_count_projectors(n_photons))
    copenhagen = ensemble_expectation(ens, s_n)
    probs = ens.probabilities
    dist = [probs.get(n, 0.0) for n in range(n_photons + 1)]
    return everett, copenhagen, dist


def _photon_bitstring(n_photons: int):
    psi = sa.R.amps
    for _ in range(n_photons - 1):
        psi = np.kron(psi, sa.R.amps)
    everett = float(np.vdot(psi, sa.apply_total_spin(psi, n_photons)).real)
    counts = sa._h_counts(n_photons)
    dist, copenhagen = [], 0.0
    for n in range(n_photons + 1):
        branch = np.where(counts == n, psi, 0.0)
        p = float(np.vdot(branch, branch).real)
        dist.append(p)
        branch = branch / math.sqrt(p)
        copenhagen += p * float(np.vdot(branch, sa.apply_total_spin(branch, n_photons)).real)
    return everett, copenhagen, dist


def _photon_analytic(n_photons: int):
    # additivity of S over slots; fixed-count branches carry zero spin
    everett = n_photons * expectation(sa.S, sa.R)
    dist = sa.fast_count_distribution(n_photons).tolist()
    return everett, 0.0, dist


def run_photon_experiment(n_photons: int, interpretation: str = "both", n_b: float = 0.0,
                          samples: int = 0, seed: int = DEFAULT_SEED) -> ExperimentReport:
    """N right-circular photons, H-count measurement, absorption by Bob."""
    t0 = time.perf_counter()
    if n_photons < 1:
        raise ValueError("need at least one photon")
    interps = _interps(interpretation)
    if n_photons <= DENSE_EXPERIMENT_MAX:
        path, (everett, copenhagen, dist) = "dense", _photon_dense(n_photons)
    elif n_photons <= BITSTRING_EXPERIMENT_MAX:
        path, (everett, copenhagen, dist) = "bitstring", _photon_bitstring(n_photons)
    else:
        path, (everett, copenhagen, dist) = "analytic", _photon_analytic(n_photons)

    values = {"everett": everett, "copenhagen": copenhagen}
    table = {
        "photon_spin": {k: values[k] for k in interps},
        "bob_spin": {k: float(n_b) + values[k] for k in interps},
    }
    sampled = None
    if samples:
        rng = np.random.default_rng(seed)
        draws = rng.binomial(n_photons, 0.5, size=samples) if path == "analytic" else \
            np.searchsorted(np.cumsum(dist), rng.random(samples), side="right").clip(0, n_photons)
        hist = np.bincount(draws, minlength=n_photons + 1)
        sampled = {"samples": samples, "frequencies": (hist / samples).tolist()}
    return ExperimentReport(
        experiment="photons",
        interpretations=interps,
        inputs={"n": n_photons, "n_b": float(n_b), "path": path},
        table=table,
        primary_observable="bob_spin",
        distribution=dist,
        sampled=sampled,
        seed=seed,
        runtime=time.perf_counter() - t0,
        units="hbar (photon spin +-1)",
    )


# ---------------------------------------------------------------- retrodiction


def classify_false_memory(component, history: Sequence[str]) -> bool:
    """True when the last remembered outcome contradicts the electron's
    eigenvalue in the most recently measured basis.

    ``component`` is an (electron label, memory label) pair such as
    ``("-x", "M_+")``; ``history`` lists measured bases, e.g. ``["x"]``.
    """
    if isinstance(component, StateVec):
        component = _as_product_component(component, history[-1])
    try:
        electron, memory = component
    except (TypeError, ValueError):
        raise ValueError(f"component {component!r} is not an (electron, memory) product") from None
    if not history:
        raise ValueError("empty measurement history")
    if len(electron) != 2 or electron[0] not in "+-" or electron[1] != history[-1]:
        raise ValueError(f"electron label {electron!r} is not an eigenstate of the {history[-1]} basis")
    mem = memory if isinstance(memory, MemoryLabel) else MemoryLabel.parse(memory)
    if mem.last_outcome is None:
        return False
    return mem.last_outcome != electron[0]


def _as_product_component(state: StateVec, basis: str):
    """Identify ``state`` with one electron-eigenstate (x) memory product, up to phase."""
    memory_names = sorted({lab[1] for lab in state.labels}, key=[lab[1] for lab in state.labels].index)
    for sign in "+-":
        e = sa.ELECTRON_STATES[sign + basis]
        for m in memory_names:
            ket = tensor_state(e, StateVec.basis(memory_names, m))
            if abs(abs(inner(ket, state)) - 1.0) < STATE_TOL:
                return sign + basis, m
    raise ValueError("state is not a product of an electron eigenstate and a memory label")


def decompose_x_memory(state: StateVec, register) -> list[tuple[str, str, complex]]:
    """Amplitudes in the electron-x (x) memory product basis (nonzero only)."""
    out = []
    for e in ("+x", "-x"):
        for m in register.basis:
            amp = inner(tensor_state(sa.ELECTRON_STATES[e], register.ket(m)), state)
            if abs(amp) > STATE_TOL:
                out.append((e, m.name, amp))
    return out


@dataclass(frozen=True, eq=False)
class RetrodictionSetup:
    register: object
    u1: Operator
    u2: Operator


def retrodiction_setup(j0: float = 0.0) -> RetrodictionSetup:
    reg = retrodiction_register(j0)
    return RetrodictionSetup(
        reg,
        device_unitary(DeviceSpec(DeviceKind.MEASURE_X, reg)),
        device_unitary(DeviceSpec(DeviceKind.MEASURE_Z, reg)),
    )


_BRANCHES = {
    "M_++": ("+z", M_PP),
    "M_+-": ("-z", M_PM),
}


def _branch_key(branch: str) -> str:
    key = "M_" + branch.replace("_", "")[1:] if branch.startswith("M") else branch
    if key not in _BRANCHES:
        raise ValueError(f"unknown branch {branch!r}; expected one of M_++, M_+-")
    return key


def _finding(e: str, m: str, amp: complex, stage: str, history, parent=None) -> RetrodictionFinding:
    mem = MemoryLabel.parse(m)
    if mem.primed:
        false_memory, why = False, "primed pre-state"
    else:
        false_memory = classify_false_memory((e, mem), history)
        if false_memory:
            why = "FALSE MEMORY"
        elif mem.last_outcome is None:
            why = "blank memory"
        else:
            why = "consistent record"
    return RetrodictionFinding(_ket_name(e, m), abs(amp) ** 2, false_memory, why, stage, parent)


def run_retrodiction(branch: str = "M_++", j0: float = 0.0, seed: int = DEFAULT_SEED) -> ExperimentReport:
    """Run the two-measurement history backwards from one observed branch.

    Stage "before_second": U_2^dagger applied to the observed product state,
    read off in the electron-x (x) memory basis. Stage "before_first": U_1^dagger
    applied to each of those components.
    """
    t0 = time.perf_counter()
    key = _branch_key(branch)
    setup = retrodiction_setup(j0)
    reg = setup.register
    e_obs, m_obs = _BRANCHES[key]
    observed = tensor_state(sa.ELECTRON_STATES[e_obs], reg.ket(m_obs))
    u2_inv, u1_inv = setup.u2.dagger(), setup.u1.dagger()
    before_second = evolve_everett(u2_inv, observed)

    findings = []
    components = decompose_x_memory(before_second, reg)
    for e, m, amp in components:
        findings.append(_finding(e, m, amp, "before_second", ["x"]))
    for e, m, amp in components:
        comp = tensor_state(sa.ELECTRON_STATES[e], reg.ket(m))
        pre = evolve_everett(u1_inv, comp)
        for e2, m2, amp2 in decompose_x_memory(pre, reg):
            findings.append(_finding(e2, m2, amp * amp2, "before_first", ["x"], parent=_ket_name(e, m)))

    return ExperimentReport(
        experiment="retrodict",
        interpretations=(),
        inputs={"branch": key, "observed": _ket_name(e_obs, m_obs.name)},
        table={},
        primary_observable="",
        findings=findings,
        seed=seed,
        runtime=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class PhaseRetrodiction:
    phi: float
    false_memory_overlap: float
    findings: tuple


def retrodict_with_phase(phi: float, setup: RetrodictionSetup | None = None) -> PhaseRetrodiction:
    """Retrodict (|+z>|M_++> + e^{i phi}|-z>|M_+->)/sqrt(2) through U_2."""
    setup = setup or retrodiction_setup()
    reg = setup.register
    plus = tensor_state(sa.PLUS_Z, reg.ket(M_PP))
    minus = tensor_state(sa.MINUS_Z, reg.ket(M_PM))
    psi = StateVec.normalized(plus.labels, plus.amps + np.exp(1j * phi) * minus.amps)
    before = evolve_everett(setup.u2.dagger(), psi)
    false_state = tensor_state(sa.MINUS_X, reg.ket(M_PLUS))
    overlap = abs(inner(false_state, before)) ** 2
    findings = tuple(_finding(e, m, amp, "before_second", ["x"])
                     for e, m, amp in decompose_x_memory(before, reg))
    return PhaseRetrodiction(float(phi), float(overlap), findings)


def phase_sweep(phis: Sequence[float]) -> ExperimentReport:
    t0 = time.perf_counter()
    setup = retrodiction_setup()
    rows = [retrodict_with_phase(p, setup) for p in phis]
    findings = [
        RetrodictionFinding(f.state, f.probability, f.false_memory, f.rationale, f"phi={r.phi:.15g}")
        for r in rows for f in r.findings
    ]
    return ExperimentReport(
        experiment="retrodict_phase",
        interpretations=(),
        inputs={"phis": [float(p) for p in phis]},
        table={},
        primary_observable="",
        distribution=[r.false_memory_overlap for r in rows],
        findings=findings,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------- audit


def random_electron_inputs(trials: int, seed: int) -> list[StateVec]:
    """Random a|+x> + b|-x> states, uniform on the Bloch sphere."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        out.append(StateVec.normalized(sa.ELECTRON_LABELS, v[0] * sa.PLUS_X.amps + v[1] * sa.MINUS_X.amps))
    return out


def run_audit(initial: str | None = "+z", j0: float = 0.0, trials: int = 0,
              seed: int = DEFAULT_SEED) -> ExperimentReport:
    """Total J_z before/after the measure-and-flip device under both dynamics.

    With ``trials`` > 0 also checks Everett conservation of total J_z on that
    many random physical inputs and records the worst violation.
    """
    t0 = time.perf_counter()
    reg = electron_register(j0)
    u = device_unitary(DeviceSpec(DeviceKind.MEASURE_AND_FLIP_X, reg))
    jz = total_jz(reg)
    projectors = electron_record_projectors(reg)
    audit = conservation_audit(u, projectors, jz, tensor_state(sa.ELECTRON_STATES[initial], reg.ket(M_B)),
                               name="total_jz")
    extra = {}
    if trials:
        worst = 0.0
        for e in random_electron_inputs(trials, seed):
            rep = conservation_audit(u, projectors, jz, tensor_state(e, reg.ket(M_B)), name="total_jz")
            worst = max(worst, abs(rep.expectation_after_everett - rep.expectation_before))
        extra = {"trials": trials, "max_everett_violation": worst}
    table = {"total_jz": {"everett": audit.expectation_after_everett,
                          "copenhagen": audit.expectation_after_copenhagen}}
    return ExperimentReport(
        experiment="audit",
        interpretations=INTERPRETATIONS,
        inputs={"initial": initial, "j0": float(j0), **extra},
        table=table,
        primary_observable="total_jz",
        audit=audit,
        seed=seed,
        runtime=time.perf_counter() - t0,
        units="hbar (electron spin-1/2)",
    )
