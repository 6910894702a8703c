from __future__ import annotations

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from pauliforge.circuit import Circuit, CircuitError, Instruction, Op, Qubit
from pauliforge.decompose import decompose
from pauliforge.frame import ONE, Byproduct, CorrectionTable
from pauliforge.pauli import pauli_matrix
from pauliforge.rewrite import RuleName, apply_rule, find_sites
from pauliforge.verify import (
    CorrectionSearchFailed,
    LimitExceeded,
    backend_name,
    branch_operator,
    check_equivalence,
    derive_corrections,
    enumerate_branches,
    install_corrections,
    phase_deviation,
    target_exponential,
)


def eig_exponential(letters: str, theta: float) -> np.ndarray:
    """exp(i theta P) through the spectral decomposition of P."""
    w, v = np.linalg.eigh(pauli_matrix(letters))
    return (v * np.exp(1j * theta * w)) @ v.conj().T


def test_target_examples():
    assert np.allclose(target_exponential("Z", math.pi / 2), np.diag([1j, -1j]))
    assert np.allclose(target_exponential("XYZ", 0.0), np.eye(8))
    for letters in ("ZZ", "XY", "YIZ"):
        assert np.abs(target_exponential(letters, 0.77) - eig_exponential(letters, 0.77)).max() < 1e-12


@pytest.mark.parametrize("letters", ["Z", "XY", "ZZZ", "YXIZ"])
@pytest.mark.parametrize("theta", [0.3, math.pi / 8, 1.234])
def test_target_inverse(letters, theta):
    u = target_exponential(letters, theta) @ target_exponential(letters, -theta)
    assert np.abs(u - np.eye(len(u))).max() < 1e-12


def test_identity_circuit():
    c = Circuit((Qubit(0, "data", 0),), (), 0)
    v = check_equivalence(c, np.eye(2))
    assert v.equivalent and v.branches == 1


def test_measure_plus_state():
    qubits = (Qubit(0, "data", 0), Qubit(1, "ancilla", 1))
    c = Circuit(qubits, (Instruction(Op.PREP_X, (1,)), Instruction(Op.MEAS_X, (1,), cbit=0)), 1)
    branches = enumerate_branches(c)
    assert len(branches) == 1
    assert branches[0].outcomes == {0: 0} and abs(branches[0].probability - 1) < 1e-12


@pytest.mark.parametrize("p, theta", [("ZZ", math.pi / 4), ("ZIZ", 0.7), ("XZYZ", 0.3), ("YY", 1.234)])
def test_decomposed_branches_all_match(p, theta):
    c = decompose(p, theta)
    target = target_exponential(p, theta)
    branches = enumerate_branches(c)
    assert abs(sum(b.probability for b in branches) - 1) < 1e-10
    assert all(phase_deviation(b.operator, target) < 1e-9 for b in branches)
    verdict = check_equivalence(c, target)
    assert verdict.equivalent and verdict.branches == len(branches)
    assert abs(verdict.total_probability - 1) < 1e-10


def test_sign_flipped_theta_fails_with_branch():
    c = decompose("ZIZ", 0.7)
    v = check_equivalence(c, target_exponential("ZIZ", -0.7))
    assert not v.equivalent and v.failing_branch is not None
    assert v.to_dict()["equivalent"] is False


@pytest.mark.parametrize("phi", [0.0, 0.4, math.pi, -2.2])
def test_phase_blindness(phi):
    c = decompose("XZ", 0.3)
    good = target_exponential("XZ", 0.3) * np.exp(1j * phi)
    bad = target_exponential("XZ", -0.3) * np.exp(1j * phi)
    assert check_equivalence(c, good).equivalent
    assert not check_equivalence(c, bad).equivalent


def test_dense_limit_is_reported(monkeypatch):
    c = decompose("Z" * 14, 0.1)
    v = check_equivalence(c, np.eye(2))
    assert v.status == "unverifiable" and "limit" in v.message
    with pytest.raises(LimitExceeded):
        target_exponential("Z" * 14, 0.1)
    monkeypatch.setenv("PAULIFORGE_DENSE_LIMIT", "2")
    v = check_equivalence(decompose("ZZZ", 0.3), target_exponential("ZZ", 0.3))
    assert v.status == "unverifiable"


def test_live_ancilla_is_an_error():
    qubits = (Qubit(0, "data", 0), Qubit(1, "ancilla", 1))
    c = Circuit(qubits, (Instruction(Op.PREP_Z, (1,)),), 0)
    with pytest.raises(CircuitError):
        check_equivalence(c, np.eye(2))


# --- correction search and the frozen tables --------------------------------


def cnot_circuit() -> Circuit:
    return Circuit((Qubit(0, "data", 0), Qubit(1, "data", 2)), (Instruction(Op.CNOT, (0, 1)),), 0)


def cnot_matrix() -> np.ndarray:
    m = np.zeros((4, 4))
    for i in range(4):
        m[i ^ 2 if i & 1 else i, i] = 1
    return m


def gadget(variant: str, expand: bool) -> Circuit:
    c = cnot_circuit()
    c = apply_rule(c, find_sites(c, RuleName(variant))[0])
    if expand:
        for rule in (RuleName.XXC, RuleName.ZZC):
            c = apply_rule(c, find_sites(c, rule)[0])
    return c


@pytest.mark.parametrize("variant", ["LS1", "LS2"])
@pytest.mark.parametrize("expand", [False, True], ids=["native", "expanded"])
def test_derived_tables_close_over_frozen_ones(variant, expand):
    c = gadget(variant, expand)
    bare = c.with_instructions(c.body())
    derived = derive_corrections(bare, cnot_matrix())
    frozen = CorrectionTable.from_circuit(c)
    assert derived == frozen
    installed = install_corrections(bare, derived)
    assert check_equivalence(installed, cnot_matrix()).equivalent


def test_ls1_table_shape():
    c = gadget("LS1", False)
    table = derive_corrections(c.with_instructions(c.body()), cnot_matrix())
    assert ONE not in table.entries
    for b in table.entries.values():
        assert len(b.x) + len(b.z) == 1 and not b.rotate


def test_rot_table_needs_the_rotation():
    c = decompose("Z", 0.3)
    bare = c.with_instructions(c.body())
    rot = next(i for i in c.corrections() if i.op is Op.CORR_RZ2THETA)
    table = derive_corrections(bare, target_exponential("Z", 0.3), rotation=rot)
    t = c.ids_with_role("theta")[0]
    parity = next(i.cbit for i in c.body() if i.op is Op.MEAS_ZZ and t in i.qubits)
    assert table.byproduct(parity).rotate
    assert check_equivalence(install_corrections(bare, table, rot), target_exponential("Z", 0.3)).equivalent
    with pytest.raises(CorrectionSearchFailed):
        derive_corrections(bare, target_exponential("Z", 0.3))


def test_corrupted_table_is_caught():
    c = decompose("ZZ", 0.3)
    table = CorrectionTable.from_circuit(c)
    k = min(k for k, b in table.entries.items() if k != ONE and (b.x or b.z))
    b = table.entries[k]
    wrong = dict(table.entries)
    # exchange the X and Z parts of one byproduct
    wrong[k] = Byproduct(b.z, b.x, b.rotate)
    rot = next(i for i in c.corrections() if i.op is Op.CORR_RZ2THETA)
    bad = install_corrections(c.with_instructions(c.body()), CorrectionTable(wrong), rot)
    assert not check_equivalence(bad, target_exponential("ZZ", 0.3)).equivalent


# --- backends ---------------------------------------------------------------


def test_backend_name():
    assert backend_name() in ("numba", "numpy")


def test_numpy_backend_agrees():
    code = (
        "from pauliforge.verify import check_equivalence, target_exponential, backend_name\n"
        "from pauliforge.decompose import decompose\n"
        "print(backend_name())\n"
        "for p, t in [('XZYZ', 0.3), ('ZZ', -0.3), ('YIX', 1.234)]:\n"
        "    v = check_equivalence(decompose(p, 0.3 if p != 'YIX' else t), target_exponential(p, t))\n"
        "    print(v.equivalent, v.branches)\n"
    )
    env = dict(os.environ, PAULIFORGE_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split("\n")
    assert out[0] == "numpy"
    here = [
        check_equivalence(decompose(p, 0.3 if p != "YIX" else t), target_exponential(p, t))
        for p, t in [("XZYZ", 0.3), ("ZZ", -0.3), ("YIX", 1.234)]
    ]
    assert out[1:4] == [f"{v.equivalent} {v.branches}" for v in here]
    assert out[1:4] == [f"True {here[0].branches}", f"False {here[1].branches}", f"True {here[2].branches}"]


def test_branch_operator_for_fixed_outcomes():
    c = decompose("ZZ", 0.3)
    zeros = {k: 0 for k in c.measured_cbits()}
    p, u = branch_operator(c, zeros)
    assert 0 < p <= 1
    assert phase_deviation(u, target_exponential("ZZ", 0.3)) < 1e-9
