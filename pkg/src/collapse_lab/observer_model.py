"""Observer registers and the measurement-device unitaries built on them.

An observer is a finite register whose basis states are memory transcripts
("M_B" before anything happened, "M_+-" after remembering +1/2 then -1/2).
The register's angular momentum operator is the smallest hermitian choice
consistent with the conservation bookkeeping of the measure-and-flip
device: a constant baseline ``j0`` plus a 1/2 coupling between M_+ and M_-.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

import numpy as np

from .qcore import (
    IsometrySpec,
    Operator,
    StateVec,
    complete_isometry,
    product_labels,
    tensor_op,
    tensor_state,
)
from .spin_algebra import ELECTRON_LABELS, JZ, MINUS_X, MINUS_Z, PLUS_X, PLUS_Z

_LABEL_RE = re.compile(r"^M(')?_(B|[+-]+)$")


@dataclass(frozen=True, order=True)
class MemoryLabel:
    transcript: str = ""
    primed: bool = False

    def __post_init__(self):
        if set(self.transcript) - {"+", "-"}:
            raise ValueError(f"transcript must be over '+'/'-', got {self.transcript!r}")
        if self.primed and self.transcript:
            raise ValueError("only the blank pre-measurement state can be primed")

    @classmethod
    def parse(cls, name: str) -> "MemoryLabel":
        m = _LABEL_RE.match(name)
        if not m:
            raise ValueError(f"not a memory label: {name!r}")
        primed, body = m.groups()
        return cls("" if body == "B" else body, primed=bool(primed))

    @property
    def name(self) -> str:
        return f"M{chr(39) if self.primed else ''}_{self.transcript or 'B'}"

    @property
    def last_outcome(self) -> str | None:
        return self.transcript[-1] if self.transcript else None

    def __str__(self):
        return self.name


M_B = MemoryLabel()
M_B_PRIMED = MemoryLabel(primed=True)
M_PLUS = MemoryLabel("+")
M_MINUS = MemoryLabel("-")
M_PP = MemoryLabel("++")
M_PM = MemoryLabel("+-")

ELECTRON_REGISTER_LABELS = (M_B, M_PLUS, M_MINUS)
RETRODICTION_REGISTER_LABELS = (M_B, M_B_PRIMED, M_PLUS, M_MINUS, M_PP, M_PM)


@dataclass(frozen=True, eq=False)
class ObserverRegister:
    basis: tuple
    j0: float
    jz_op: Operator

    @property
    def names(self) -> tuple:
        return tuple(lab.name for lab in self.basis)

    def ket(self, label: MemoryLabel | str) -> StateVec:
        if isinstance(label, str):
            label = MemoryLabel.parse(label)
        if label not in self.basis:
            raise KeyError(f"{label} is not in this register")
        return StateVec.basis(self.names, label.name)

    def __contains__(self, label) -> bool:
        return label in self.basis


def build_register(labels, j0: float = 0.0) -> ObserverRegister:
    labels = tuple(MemoryLabel.parse(x) if isinstance(x, str) else x for x in labels)
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate memory labels")
    if M_B not in labels:
        raise ValueError("register must contain the blank state M_B")
    m = float(j0) * np.eye(len(labels), dtype=np.complex128)
    if M_PLUS in labels and M_MINUS in labels:
        p, q = labels.index(M_PLUS), labels.index(M_MINUS)
        m[p, q] = m[q, p] = 0.5
    jz = Operator(tuple(lab.name for lab in labels), m, hermitian=True)
    return ObserverRegister(labels, float(j0), jz)


def electron_register(j0: float = 0.0) -> ObserverRegister:
    return build_register(ELECTRON_REGISTER_LABELS, j0)


def retrodiction_register(j0: float = 0.0) -> ObserverRegister:
    return build_register(RETRODICTION_REGISTER_LABELS, j0)


class DeviceKind(str, enum.Enum):
    MEASURE_AND_FLIP_X = "measure_and_flip_x"
    MEASURE_X = "measure_x"
    MEASURE_Z = "measure_z"


# (electron in, memory in, electron out, memory out)
_DEVICE_MAPS = {
    DeviceKind.MEASURE_AND_FLIP_X: [
        ("+x", M_B, "-x", M_PLUS),
        ("-x", M_B, "-x", M_MINUS),
    ],
    DeviceKind.MEASURE_X: [
        ("+x", M_B, "+x", M_PLUS),
        ("-x", M_B, "-x", M_MINUS),
        ("-x", M_B_PRIMED, "-x", M_PLUS),
    ],
    DeviceKind.MEASURE_Z: [
        ("+z", M_PLUS, "+z", M_PP),
        ("-z", M_PLUS, "-z", M_PM),
    ],
}

# measuring devices leave eigenstates of the measured basis alone
_PRESERVED_BASIS = {
    DeviceKind.MEASURE_X: ("+x", "-x"),
    DeviceKind.MEASURE_Z: ("+z", "-z"),
}

_ELECTRON = {"+z": PLUS_Z, "-z": MINUS_Z, "+x": PLUS_X, "-x": MINUS_X}


@dataclass(frozen=True, eq=False)
class DeviceSpec:
    kind: DeviceKind
    register: ObserverRegister

    def __post_init__(self):
        object.__setattr__(self, "kind", DeviceKind(self.kind))
        missing = {lab for row in _DEVICE_MAPS[self.kind] for lab in (row[1], row[3])
                   if lab not in self.register}
        if missing:
            names = ", ".join(sorted(lab.name for lab in missing))
            raise ValueError(f"{self.kind.value} needs register labels {names}")

    def pairs(self) -> list[tuple[StateVec, StateVec]]:
        reg = self.register
        return [
            (tensor_state(_ELECTRON[e_in], reg.ket(m_in)), tensor_state(_ELECTRON[e_out], reg.ket(m_out)))
            for e_in, m_in, e_out, m_out in _DEVICE_MAPS[self.kind]
        ]

    def isometry(self) -> IsometrySpec:
        return IsometrySpec(tuple(self.pairs()))


def device_unitary(spec: DeviceSpec) -> Operator:
    """Unitary on electron (x) register realizing the device's transitions.

    Measuring devices are assembled block by block, one register unitary per
    eigenstate of the measured basis, so the electron's eigenstate is never
    changed even on directions the transitions leave unspecified.
    """
    reg = spec.register
    labels = product_labels(ELECTRON_LABELS, reg.names)
    if spec.kind not in _PRESERVED_BASIS:
        u = complete_isometry(spec.isometry())
    else:
        m = np.zeros((len(labels), len(labels)), dtype=np.complex128)
        for e in _PRESERVED_BASIS[spec.kind]:
            block_pairs = tuple(
                (reg.ket(m_in), reg.ket(m_out))
                for e_in, m_in, _, m_out in _DEVICE_MAPS[spec.kind] if e_in == e
            )
            r = complete_isometry(IsometrySpec(block_pairs))
            proj = np.outer(_ELECTRON[e].amps, _ELECTRON[e].amps.conj())
            m += np.kron(proj, r.matrix)
        u = Operator(labels, m, unitary=True)
    for a, b in spec.pairs():
        if np.max(np.abs(u.matrix @ a.amps - b.amps)) > 1e-10:
            raise ArithmeticError(f"{spec.kind.value} unitary misses a specified transition")
    return u


def total_jz(register: ObserverRegister) -> Operator:
    """J_z of electron plus observer."""
    return (tensor_op(JZ, Operator.identity(register.names))
            + tensor_op(Operator.identity(ELECTRON_LABELS), register.jz_op))


def observer_jz(register: ObserverRegister) -> Operator:
    """J_z of the observer alone, as seen on electron (x) register."""
    return tensor_op(Operator.identity(ELECTRON_LABELS), register.jz_op)
