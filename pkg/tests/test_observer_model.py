import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collapse_lab import spin_algebra as sa
from collapse_lab.observer_model import (
    M_B,
    M_B_PRIMED,
    M_MINUS,
    M_PLUS,
    M_PM,
    M_PP,
    DeviceKind,
    DeviceSpec,
    MemoryLabel,
    build_register,
    device_unitary,
    electron_register,
    retrodiction_register,
    total_jz,
)
from collapse_lab.qcore import Operator, StateVec, expectation, tensor_state, unitarity_defect

R2 = 1 / math.sqrt(2)


def test_memory_label_names_roundtrip():
    for lab in (M_B, M_B_PRIMED, M_PLUS, M_MINUS, M_PP, M_PM):
        assert MemoryLabel.parse(lab.name) == lab
    assert M_B_PRIMED.name == "M'_B"
    assert M_PM.last_outcome == "-"
    with pytest.raises(ValueError):
        MemoryLabel.parse("M_x")
    with pytest.raises(ValueError):
        MemoryLabel("+", primed=True)


def test_register_blank_only():
    reg = build_register(["M_B"], j0=1.5)
    assert np.array_equal(reg.jz_op.matrix, [[1.5]])


def test_register_validation():
    with pytest.raises(ValueError):
        build_register(["M_B", "M_B"])
    with pytest.raises(ValueError):
        build_register(["M_+", "M_-"])


def test_register_jz_bookkeeping():
    reg = electron_register(0.0)
    jz = reg.jz_op
    assert expectation(jz, reg.ket(M_B)) == 0
    assert expectation(jz, reg.ket(M_PLUS)) == 0
    assert expectation(jz, reg.ket(M_MINUS)) == 0
    sup = StateVec.normalized(reg.names, reg.ket(M_PLUS).amps + reg.ket(M_MINUS).amps)
    assert expectation(jz, sup) == pytest.approx(0.5, abs=1e-15)
    anti = StateVec.normalized(reg.names, reg.ket(M_PLUS).amps - reg.ket(M_MINUS).amps)
    assert expectation(jz, anti) == pytest.approx(-0.5, abs=1e-15)


def test_register_j0_shift():
    reg = electron_register(2.5)
    sup = StateVec.normalized(reg.names, reg.ket(M_PLUS).amps + reg.ket(M_MINUS).amps)
    assert expectation(reg.jz_op, sup) == pytest.approx(3.0, abs=1e-14)


def _ket(e, m, reg):
    return tensor_state(sa.ELECTRON_STATES[e], reg.ket(m))


def test_measure_and_flip_on_plus_z():
    reg = electron_register()
    u = device_unitary(DeviceSpec(DeviceKind.MEASURE_AND_FLIP_X, reg))
    out = u.matrix @ _ket("+z", M_B, reg).amps
    expected = R2 * (_ket("-x", M_PLUS, reg).amps + _ket("-x", M_MINUS, reg).amps)
    assert np.max(np.abs(out - expected)) <= 1e-12


def test_measure_and_flip_on_minus_z():
    reg = electron_register()
    u = device_unitary(DeviceSpec(DeviceKind.MEASURE_AND_FLIP_X, reg))
    out = u.matrix @ _ket("-z", M_B, reg).amps
    expected = R2 * (_ket("-x", M_PLUS, reg).amps - _ket("-x", M_MINUS, reg).amps)
    assert np.max(np.abs(out - expected)) <= 1e-12


def test_u1_transitions():
    reg = retrodiction_register()
    u1 = device_unitary(DeviceSpec(DeviceKind.MEASURE_X, reg))
    assert np.allclose(u1.matrix @ _ket("+x", M_B, reg).amps, _ket("+x", M_PLUS, reg).amps, atol=1e-12)
    assert np.allclose(u1.matrix @ _ket("-x", M_B, reg).amps, _ket("-x", M_MINUS, reg).amps, atol=1e-12)
    assert np.allclose(u1.matrix @ _ket("-x", M_B_PRIMED, reg).amps, _ket("-x", M_PLUS, reg).amps,
                       atol=1e-12)


def test_u2_inverse_on_plus_z_branch():
    reg = retrodiction_register()
    u2 = device_unitary(DeviceSpec(DeviceKind.MEASURE_Z, reg))
    back = u2.dagger().matrix @ _ket("+z", M_PP, reg).amps
    assert np.allclose(back, _ket("+z", M_PLUS, reg).amps, atol=1e-12)


@pytest.mark.parametrize("kind", list(DeviceKind))
@pytest.mark.parametrize("j0", [0.0, -3.0, 7.25])
def test_device_unitaries_are_unitary(kind, j0):
    reg = retrodiction_register(j0) if kind != DeviceKind.MEASURE_AND_FLIP_X else electron_register(j0)
    u = device_unitary(DeviceSpec(kind, reg))
    assert unitarity_defect(u.matrix) <= 1e-12


@pytest.mark.parametrize("kind,basis", [(DeviceKind.MEASURE_X, "x"), (DeviceKind.MEASURE_Z, "z")])
def test_measuring_devices_are_block_diagonal(kind, basis):
    reg = retrodiction_register()
    u = device_unitary(DeviceSpec(kind, reg))
    for sign, other in (("+", "-"), ("-", "+")):
        for m in reg.basis:
            out = u.matrix @ _ket(sign + basis, m, reg).amps
            for m2 in reg.basis:
                assert abs(np.vdot(_ket(other + basis, m2, reg).amps, out)) <= 1e-12


def test_missing_register_labels():
    with pytest.raises(ValueError):
        DeviceSpec(DeviceKind.MEASURE_X, electron_register())
    with pytest.raises(ValueError):
        DeviceSpec(DeviceKind.MEASURE_Z, build_register(["M_B", "M_+"]))


def test_total_jz():
    for j0 in (0.0, 1.25):
        reg = electron_register(j0)
        jz = total_jz(reg)
        assert jz.hermitian
        assert expectation(jz, _ket("+z", M_B, reg)) == pytest.approx(0.5 + j0, abs=1e-15)
        assert expectation(jz, _ket("+x", M_B, reg)) == pytest.approx(j0, abs=1e-15)


def _random_physical_input(seed, reg):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    e = StateVec.normalized(sa.ELECTRON_LABELS, a * sa.PLUS_X.amps + b * sa.MINUS_X.amps)
    return tensor_state(e, reg.ket(M_B))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10))
def test_measure_and_flip_conserves_total_jz(seed, j0):
    reg = electron_register(j0)
    u = device_unitary(DeviceSpec(DeviceKind.MEASURE_AND_FLIP_X, reg))
    psi = _random_physical_input(seed, reg)
    jz = total_jz(reg)
    after = StateVec(psi.labels, u.matrix @ psi.amps)
    assert abs(expectation(jz, after) - expectation(jz, psi)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_measure_and_flip_always_leaves_minus_x(seed):
    reg = electron_register()
    u = device_unitary(DeviceSpec(DeviceKind.MEASURE_AND_FLIP_X, reg))
    out = (u.matrix @ _random_physical_input(seed, reg).amps).reshape(2, len(reg.names))
    rho = out @ out.conj().T  # reduced electron density matrix
    overlap = np.vdot(sa.MINUS_X.amps, rho @ sa.MINUS_X.amps).real
    assert abs(overlap - 1) <= 1e-10


def test_completion_directions_unreachable_from_physical_inputs():
    """Physical inputs only ever land in the span of the specified outputs."""
    reg = electron_register()
    spec = DeviceSpec(DeviceKind.MEASURE_AND_FLIP_X, reg)
    u = device_unitary(spec)
    outs = np.column_stack([b.amps for _, b in spec.pairs()])
    proj = outs @ outs.conj().T
    rng = np.random.default_rng(7)
    for seed in rng.integers(0, 2**32, size=50):
        out = u.matrix @ _random_physical_input(int(seed), reg).amps
        assert np.max(np.abs(out - proj @ out)) <= 1e-12


def test_device_unitary_deterministic():
    reg = retrodiction_register()
    for kind in DeviceKind:
        r = electron_register() if kind == DeviceKind.MEASURE_AND_FLIP_X else reg
        a = device_unitary(DeviceSpec(kind, r)).matrix
        b = device_unitary(DeviceSpec(kind, r)).matrix
        assert a.tobytes() == b.tobytes()


def test_operator_identity_on_register():
    reg = retrodiction_register()
    assert Operator.identity(reg.names).dim == 6
