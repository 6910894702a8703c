from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliforge.circuit import (
    Circuit,
    CircuitError,
    Instruction,
    Op,
    Qubit,
    check_lnn,
    compute_depth,
)
from pauliforge.decompose import decompose


def line(n: int, roles=None) -> tuple[Qubit, ...]:
    roles = roles or ["data"] * n
    return tuple(Qubit(k, r, k) for k, r in enumerate(roles))


def test_instruction_arity_and_cbits():
    with pytest.raises(CircuitError):
        Instruction(Op.MEAS_XX, (0,), cbit=0)
    with pytest.raises(CircuitError):
        Instruction(Op.MEAS_ZZ, (1, 1), cbit=0)
    with pytest.raises(CircuitError):
        Instruction(Op.MEAS_X, (0,))
    with pytest.raises(CircuitError):
        Instruction(Op.CNOT, (0, 1), cbit=3)
    with pytest.raises(CircuitError):
        Instruction(Op.PAULI_EXP, (0, 1), angle=0.1, pauli="Z")
    with pytest.raises(CircuitError):
        Instruction(Op.PREP_THETA, (0,))


def test_circuit_roster_and_single_assignment():
    with pytest.raises(CircuitError):
        Circuit(line(2), (Instruction(Op.CNOT, (0, 2)),), 0)
    with pytest.raises(CircuitError):
        Circuit(line(2), (Instruction(Op.MEAS_ZZ, (0, 1), cbit=0), Instruction(Op.MEAS_XX, (0, 1), cbit=0)), 1)
    with pytest.raises(CircuitError):
        Circuit((Qubit(0, "data", 0), Qubit(1, "data", 0)), (), 0)
    with pytest.raises(CircuitError):
        Circuit((Qubit(0, "helper", 0),), (), 0)
    with pytest.raises(CircuitError):
        Circuit(line(1), (Instruction(Op.CORR_PAULI, (0,), pauli="X", cond=frozenset({2})),), 1)


def test_depth_examples():
    assert compute_depth(Circuit(line(4), (), 0)).total_layers == 0
    c = Circuit(line(4), (Instruction(Op.MEAS_XX, (0, 1), cbit=0), Instruction(Op.MEAS_XX, (2, 3), cbit=1)), 2)
    rep = compute_depth(c)
    assert (rep.total_layers, rep.two_body_layers) == (1, 1)
    assert compute_depth(decompose("ZZZZ", 0.3)).two_body_layers == 3


def test_corrections_do_not_count_as_layers():
    c = Circuit(
        line(2),
        (Instruction(Op.MEAS_ZZ, (0, 1), cbit=0), Instruction(Op.CORR_PAULI, (0,), pauli="X", cond=frozenset({0}))),
        1,
    )
    assert compute_depth(c).total_layers == 1


def test_lnn_examples():
    ok = Circuit(line(5), (Instruction(Op.CNOT, (3, 4)),), 0)
    assert check_lnn(ok) == []
    bad = Circuit(line(3), (Instruction(Op.MEAS_ZZ, (0, 2), cbit=0),), 1)
    report = check_lnn(bad)
    assert len(report) == 1 and "MeasZZ" in report[0]
    assert check_lnn(decompose("ZXYIZY", 0.3)) == []


ops = st.sampled_from(["c1", "cx", "zz", "xx", "mx"])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(ops, st.integers(0, 3), st.integers(0, 3)), max_size=12), st.tuples(ops, st.integers(0, 3), st.integers(0, 3)))
def test_depth_is_monotone(prefix, extra):
    def build(items):
        out, cb = [], 0
        for kind, a, b in items:
            if kind in ("cx", "zz", "xx") and a == b:
                b = (a + 1) % 4
            if kind == "c1":
                out.append(Instruction(Op.CLIFFORD1Q, (a,), clifford=4))
            elif kind == "cx":
                out.append(Instruction(Op.CNOT, (a, b)))
            elif kind == "zz":
                out.append(Instruction(Op.MEAS_ZZ, (a, b), cbit=cb)); cb += 1
            elif kind == "xx":
                out.append(Instruction(Op.MEAS_XX, (a, b), cbit=cb)); cb += 1
            else:
                out.append(Instruction(Op.OVAL_X, (a,), cbit=cb)); cb += 1
        return Circuit(line(4), tuple(out), cb)

    before = compute_depth(build(prefix))
    after = compute_depth(build(prefix + [extra]))
    assert after.total_layers >= before.total_layers
    assert after.two_body_layers <= after.total_layers


@pytest.mark.parametrize("p, theta", [("ZZZZ", math.pi / 8), ("XIYZ", 0.3), ("Y", math.pi / 2), ("ZZ", 1.234)])
def test_json_round_trip_is_lossless(p, theta):
    c = decompose(p, theta)
    text = c.to_json()
    back = Circuit.from_json(text)
    assert back == c
    assert back.to_json() == text


def test_angles_serialize_with_17_digits():
    c = decompose("Z", 0.1)
    text = c.to_json()
    data = json.loads(text)
    angles = [ins["angle"] for ins in data["instructions"] if "angle" in ins]
    assert angles and all(a in (0.1, 0.2) for a in angles)
    assert format(0.1, ".17g") in text


def test_next_and_prev_on():
    c = Circuit(
        line(3),
        (Instruction(Op.CNOT, (0, 1)), Instruction(Op.CLIFFORD1Q, (2,), clifford=1), Instruction(Op.CNOT, (1, 2))),
        0,
    )
    assert c.next_on(1, 1) == 2
    assert c.next_on(0, 1) is None
    assert c.prev_on(2, 2) == 2
    assert c.prev_on(2, 0) is None


def test_with_qubit_rejects_taken_position():
    c = Circuit(line(2), (), 0)
    c2, q = c.with_qubit("ancilla")
    assert q == 2 and c2.role(q) == "ancilla"
    with pytest.raises(CircuitError):
        c.with_qubit("ancilla", 1)
