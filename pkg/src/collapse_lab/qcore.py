"""Dense complex linear algebra over labeled finite-dimensional Hilbert spaces.

States and operators carry the ordered tuple of basis labels they are
expressed in. Product spaces use flattened tuples of factor labels, so
``('+z', 'M_B')`` labels the electron/observer product ket and
``('H', 'V', 'H')`` a three-photon basis string.

Everything here is immutable once built: arrays are flagged read-only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

STATE_TOL = 1e-10
CONSTRUCTION_TOL = 1e-12

Label = Hashable


def _as_tuple(label: Label) -> tuple:
    return label if isinstance(label, tuple) else (label,)


def product_labels(a: Sequence[Label], b: Sequence[Label]) -> tuple:
    return tuple(_as_tuple(x) + _as_tuple(y) for x in a for y in b)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVec:
    """Normalized ket over an ordered basis."""

    labels: tuple
    amps: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        amps = _frozen(self.amps).reshape(-1)
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be distinct")
        if amps.shape[0] != len(labels):
            raise ValueError(f"{amps.shape[0]} amplitudes for {len(labels)} labels")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > STATE_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r}); use StateVec.normalized")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, labels: Sequence[Label], amps) -> "StateVec":
        amps = np.asarray(amps, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(tuple(labels), amps / norm)

    @classmethod
    def basis(cls, labels: Sequence[Label], label: Label) -> "StateVec":
        labels = tuple(labels)
        amps = np.zeros(len(labels), dtype=np.complex128)
        amps[labels.index(label)] = 1.0
        return cls(labels, amps)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def amp(self, label: Label) -> complex:
        return complex(self.amps[self.labels.index(label)])

    def support(self, tol: float = STATE_TOL) -> dict:
        """Labels with non-negligible amplitude, mapped to their amplitude."""
        return {lab: complex(a) for lab, a in zip(self.labels, self.amps) if abs(a) > tol}

    def __repr__(self):
        terms = ", ".join(f"{lab}: {a:.6g}" for lab, a in self.support().items())
        return f"StateVec({{{terms}}})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix acting on a labeled space.

    ``hermitian`` and ``unitary`` are claims made by the caller; they are
    checked at construction to CONSTRUCTION_TOL and a false claim raises.
    """

    labels: tuple
    matrix: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        labels = tuple(self.labels)
        m = _frozen(self.matrix)
        d = len(labels)
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match {d} labels")
        if self.hermitian and not is_hermitian(m):
            raise ValueError("operator flagged hermitian but A != A^dagger")
        if self.unitary and not is_unitary(m):
            raise ValueError("operator flagged unitary but U^dagger U != I")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, labels: Sequence[Label]) -> "Operator":
        return cls(tuple(labels), np.eye(len(labels)), hermitian=True, unitary=True)

    @classmethod
    def projector(cls, state: StateVec) -> "Operator":
        return cls(state.labels, np.outer(state.amps, state.amps.conj()), hermitian=True)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def dagger(self) -> "Operator":
        return Operator(self.labels, self.matrix.conj().T, self.hermitian, self.unitary)

    def entry(self, row: Label, col: Label) -> complex:
        return complex(self.matrix[self.labels.index(row), self.labels.index(col)])

    def __add__(self, other: "Operator") -> "Operator":
        _check_space(self.labels, other.labels)
        return Operator(self.labels, self.matrix + other.matrix,
                        hermitian=self.hermitian and other.hermitian)

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_space(self.labels, other.labels)
        return Operator(self.labels, self.matrix @ other.matrix,
                        unitary=self.unitary and other.unitary)

    def scaled(self, c: float) -> "Operator":
        real = float(np.imag(c)) == 0.0
        return Operator(self.labels, c * self.matrix, hermitian=self.hermitian and real)


def is_hermitian(m: np.ndarray, tol: float = CONSTRUCTION_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def is_unitary(m: np.ndarray, tol: float = CONSTRUCTION_TOL) -> bool:
    return unitarity_defect(m) <= tol


def unitarity_defect(m: np.ndarray) -> float:
    """Largest entry of |U^dagger U - I|."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0))


def _check_space(a: tuple, b: tuple) -> None:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    if a != b:
        raise ValueError("basis label mismatch between operands")


def tensor_state(a: StateVec, b: StateVec) -> StateVec:
    return StateVec(product_labels(a.labels, b.labels), np.kron(a.amps, b.amps))


def tensor_op(a: Operator, b: Operator) -> Operator:
    return Operator(
        product_labels(a.labels, b.labels),
        np.kron(a.matrix, b.matrix),
        hermitian=a.hermitian and b.hermitian,
        unitary=a.unitary and b.unitary,
    )


def apply(op: Operator, psi: StateVec) -> StateVec:
    """Matrix-vector product. Non-unitary operators return the raw image,
    normalized; a null image raises."""
    _check_space(op.labels, psi.labels)
    out = op.matrix @ psi.amps
    if op.unitary:
        return StateVec(psi.labels, out)
    return StateVec.normalized(psi.labels, out)


def inner(a: StateVec, b: StateVec) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_space(a.labels, b.labels)
    return complex(np.vdot(a.amps, b.amps))


def expectation(op: Operator, psi: StateVec) -> float:
    if not op.hermitian:
        raise ValueError("expectation requires a hermitian operator")
    _check_space(op.labels, psi.labels)
    val = np.vdot(psi.amps, op.matrix @ psi.amps)
    scale = max(1.0, float(np.max(np.abs(op.matrix), initial=0.0)))
    if abs(val.imag) > STATE_TOL * scale:
        raise ArithmeticError(f"expectation has imaginary residue {val.imag!r}")
    return float(val.real)


@dataclass(frozen=True)
class IsometrySpec:
    """Partial map ``inputs[k] -> outputs[k]`` on one labeled space."""

    pairs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pairs = tuple((a, b) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            return
        labels = pairs[0][0].labels
        for a, b in pairs:
            if a.labels != labels or b.labels != labels:
                raise ValueError("all isometry pairs must live on a common space")
        if len(pairs) > len(labels):
            raise ValueError(f"over-complete spec: {len(pairs)} pairs in dimension {len(labels)}")
        for name, vecs in (("inputs", self.inputs), ("outputs", self.outputs)):
            gram = vecs.conj().T @ vecs
            if np.max(np.abs(gram - np.eye(len(pairs)))) > STATE_TOL:
                raise ValueError(f"isometry {name} are not orthonormal")

    @property
    def labels(self) -> tuple:
        return self.pairs[0][0].labels

    @property
    def inputs(self) -> np.ndarray:
        return np.column_stack([a.amps for a, _ in self.pairs])

    @property
    def outputs(self) -> np.ndarray:
        return np.column_stack([b.amps for _, b in self.pairs])


def complete_basis(vecs: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns ``vecs`` to an orthonormal basis of C^dim.

    Standard basis vectors are visited in index order; each has the span so
    far projected out (twice, for stability) and is kept if anything
    substantial survives. The kept vector's own index component is real and
    positive, which fixes the phase.
    """
    cols = [vecs[:, k] for k in range(vecs.shape[1])]
    for j in range(dim):
        if len(cols) == dim:
            break
        v = np.zeros(dim, dtype=np.complex128)
        v[j] = 1.0
        for _ in range(2):
            for c in cols:
                v = v - np.vdot(c, v) * c
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            cols.append(v / norm)
    return np.column_stack(cols)


def complete_isometry(spec: IsometrySpec) -> Operator:
    """Deterministic unitary U with U @ input_k = output_k for every pair.

    Input and output sets are each completed by ``complete_basis``; the
    i-th added input direction is sent to the i-th added output direction.
    """
    if not spec.pairs:
        raise ValueError("empty isometry spec")
    dim = len(spec.labels)
    v = complete_basis(spec.inputs, dim)
    w = complete_basis(spec.outputs, dim)
    u = w @ v.conj().T
    return Operator(spec.labels, u, unitary=True)
