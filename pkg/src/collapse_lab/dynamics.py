"""Unitary (Everett) versus projective-collapse (Copenhagen) dynamics.

Collapse follows the Lueders rule: outcome ``i`` occurs with probability
<psi|P_i|psi> and leaves P_i psi / ||P_i psi||. Monte Carlo sampling of the
same rule uses numpy's PCG64 generator; parallel workers derive their
seeds as ``root ^ k`` (see ``worker_seed``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcore import STATE_TOL, Operator, StateVec, apply, expectation

ZERO_BRANCH_CUTOFF = 1e-12


@dataclass(frozen=True)
class Branch:
    outcome: int
    probability: float
    state: StateVec


@dataclass(frozen=True)
class Ensemble:
    branches: tuple

    def __post_init__(self):
        branches = tuple(self.branches)
        object.__setattr__(self, "branches", branches)
        probs = [b.probability for b in branches]
        if any(p < 0 for p in probs):
            raise ValueError("negative branch probability")
        if abs(sum(probs) - 1.0) > STATE_TOL:
            raise ValueError(f"branch probabilities sum to {sum(probs)!r}")

    @property
    def probabilities(self) -> dict:
        return {b.outcome: b.probability for b in self.branches}

    def __len__(self):
        return len(self.branches)


@dataclass(frozen=True)
class AuditReport:
    observable: str
    expectation_before: float
    expectation_after_everett: float
    expectation_after_copenhagen: float

    @property
    def delta(self) -> float:
        return self.expectation_after_everett - self.expectation_after_copenhagen

    def as_dict(self) -> dict:
        return {
            "observable": self.observable,
            "before": self.expectation_before,
            "everett": self.expectation_after_everett,
            "copenhagen": self.expectation_after_copenhagen,
            "delta": self.delta,
        }


def evolve_everett(u: Operator, psi: StateVec) -> StateVec:
    if not u.unitary:
        raise ValueError("Everett evolution requires a unitary operator")
    # U is verified unitary, so the image passes StateVec's norm check as is
    return apply(u, psi)


def check_projector_family(projectors: Sequence[Operator], tol: float = STATE_TOL) -> None:
    """Raise unless the projectors are complete and mutually orthogonal."""
    if not projectors:
        raise ValueError("empty projector family")
    labels = projectors[0].labels
    dim = len(labels)
    for p in projectors:
        if p.labels != labels:
            raise ValueError("projectors act on different spaces")
    mats = [p.matrix for p in projectors]
    if np.max(np.abs(sum(mats) - np.eye(dim))) > tol:
        raise ValueError("projector family is incomplete (sum != I)")
    diagonal = all(np.count_nonzero(m - np.diag(np.diag(m))) == 0 for m in mats)
    if diagonal:
        # diagonal 0/1 entries summing to I are automatically orthogonal idempotents
        for m in mats:
            d = np.diag(m)
            if np.max(np.minimum(np.abs(d), np.abs(d - 1))) > tol:
                raise ValueError("diagonal projector has entries other than 0 and 1")
        return
    for i, a in enumerate(mats):
        for j in range(i, len(mats)):
            target = a if i == j else 0.0
            if np.max(np.abs(a @ mats[j] - target)) > tol:
                raise ValueError(f"projectors {i} and {j} are not orthogonal projectors")


def collapse_ensemble(psi: StateVec, projectors: Sequence[Operator]) -> Ensemble:
    check_projector_family(projectors)
    branches = []
    for i, p in enumerate(projectors):
        if p.labels != psi.labels:
            raise ValueError("projectors and state live on different spaces")
        image = p.matrix @ psi.amps
        prob = float(np.vdot(image, image).real)
        if prob < ZERO_BRANCH_CUTOFF:
            continue
        branches.append(Branch(i, prob, StateVec.normalized(psi.labels, image)))
    total = sum(b.probability for b in branches)
    # renormalize away the dropped sub-cutoff mass
    branches = [Branch(b.outcome, b.probability / total, b.state) for b in branches]
    return Ensemble(tuple(branches))


def worker_seed(root_seed: int, worker: int) -> int:
    return (int(root_seed) ^ int(worker)) & 0xFFFFFFFFFFFFFFFF


def _draw(ensemble: Ensemble, seed: int, shots: int) -> np.ndarray:
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdf = np.cumsum([b.probability for b in ensemble.branches])
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    return idx


def collapse_sample(psi: StateVec, projectors: Sequence[Operator], rng_seed: int) -> tuple[int, StateVec]:
    """One seeded collapse: (projector index, post-measurement state)."""
    ens = collapse_ensemble(psi, projectors)
    branch = ens.branches[int(_draw(ens, rng_seed, 1)[0])]
    return branch.outcome, branch.state


def sample_outcomes(psi: StateVec, projectors: Sequence[Operator], rng_seed: int, shots: int) -> np.ndarray:
    """Projector indices of ``shots`` independent seeded collapses.

    The first entry equals the outcome ``collapse_sample`` gives for the same seed.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    ens = collapse_ensemble(psi, projectors)
    outcomes = np.array([b.outcome for b in ens.branches])
    return outcomes[_draw(ens, rng_seed, shots)]


def ensemble_expectation(ensemble: Ensemble, op: Operator) -> float:
    return float(sum(b.probability * expectation(op, b.state) for b in ensemble.branches))


def conservation_audit(u: Operator, projectors: Sequence[Operator], op: Operator, psi: StateVec,
                       name: str = "A") -> AuditReport:
    """Expectation of ``op`` before U, after U, and after U followed by collapse."""
    after = evolve_everett(u, psi)
    return AuditReport(
        observable=name,
        expectation_before=expectation(op, psi),
        expectation_after_everett=expectation(op, after),
        expectation_after_copenhagen=ensemble_expectation(collapse_ensemble(after, projectors), op),
    )
