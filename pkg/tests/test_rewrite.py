from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliforge.circuit import TWO_BODY, Circuit, Instruction, Op, Qubit, compute_depth
from pauliforge.decompose import rewrite_trace
from pauliforge.pauli import pauli_matrix
from pauliforge.rewrite import (
    RewriteError,
    RewriteSite,
    RuleName,
    apply_rule,
    expand_oval,
    find_sites,
    first_site,
    rewrite_with_map,
)
from pauliforge.verify import branch_operator, check_equivalence, compare_circuits, enumerate_branches, phase_deviation
from pauliforge.verify import target_exponential

from instances import ALL_RULES, make_instance


def data_line(n: int, spacing: int = 2) -> tuple[Qubit, ...]:
    return tuple(Qubit(k, "data", spacing * k) for k in range(n))


def circuit(n: int, ops, cbits: int = 0, extra=()) -> Circuit:
    return Circuit(data_line(n) + tuple(extra), tuple(ops), cbits)


def cnot_matrix(n: int, ctrl: int, targ: int) -> np.ndarray:
    dim = 1 << n
    m = np.zeros((dim, dim))
    for i in range(dim):
        j = i ^ (1 << targ) if i >> ctrl & 1 else i
        m[j, i] = 1
    return m


def unitary(c: Circuit) -> np.ndarray:
    p, op = branch_operator(c, {})
    assert abs(p - 1) < 1e-12
    return op


# --- ROT --------------------------------------------------------------------


def test_rot_on_single_z():
    theta = math.pi / 8
    c = circuit(1, [Instruction(Op.PAULI_EXP, (0,), angle=theta, pauli="Z")])
    out = apply_rule(c, find_sites(c, RuleName.ROT)[0])
    t = out.ids_with_role("theta")[0]
    body = out.body()
    assert body[0] == Instruction(Op.PREP_THETA, (t,), angle=theta)
    assert body[1].op is Op.MEAS_ZZ and set(body[1].qubits) == {0, t}
    assert body[2].op is Op.MEAS_X and body[2].qubits == (t,)
    target = target_exponential("Z", theta)
    for br in enumerate_branches(out):
        assert phase_deviation(br.operator, target) < 1e-12
        fired = any("CorrRz2Theta" in label for label in br.corrections)
        assert fired == bool(br.outcomes[body[1].cbit])


def test_rot_rejects_clifford_angle():
    c = circuit(1, [Instruction(Op.PAULI_EXP, (0,), angle=math.pi / 2, pauli="Z")])
    assert find_sites(c, RuleName.ROT) == []
    with pytest.raises(RewriteError):
        apply_rule(c, RewriteSite(RuleName.ROT, (0, 1), {}, (0,)))


# --- PG ---------------------------------------------------------------------


def test_pg_on_zz_gives_cnot_pair():
    theta = 0.37
    c = circuit(2, [Instruction(Op.PAULI_EXP, (0, 1), angle=theta, pauli="ZZ")])
    out = apply_rule(c, find_sites(c, RuleName.PG)[0])
    ops = [i.op for i in out.body()]
    assert ops == [Op.CNOT, Op.RZ, Op.CNOT]
    assert phase_deviation(unitary(out), target_exponential("ZZ", theta)) < 1e-12


def test_pg_on_four_qubits_adds_two_instructions():
    c = circuit(4, [Instruction(Op.PAULI_EXP, (0, 1, 2, 3), angle=0.2, pauli="ZZZZ")])
    out = apply_rule(c, find_sites(c, RuleName.PG)[0])
    assert len(out.instructions) == len(c.instructions) + 2
    node = next(i for i in out.body() if i.op is Op.PAULI_EXP)
    assert node.qubits == (1, 2, 3)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_pg_to_the_end_is_the_cnot_ladder(n):
    theta = 0.61
    c = circuit(n, [Instruction(Op.PAULI_EXP, tuple(range(n)), angle=theta, pauli="Z" * n)])
    while (site := first_site(c, RuleName.PG)) is not None:
        c = apply_rule(c, site)
    assert all(i.op in (Op.CNOT, Op.RZ) for i in c.body())
    assert sum(i.op is Op.CNOT for i in c.body()) == 2 * (n - 1)
    assert phase_deviation(unitary(c), target_exponential("Z" * n, theta)) < 1e-12


def test_pg_needs_z_form():
    c = circuit(2, [Instruction(Op.PAULI_EXP, (0, 1), angle=0.2, pauli="XZ")])
    assert find_sites(c, RuleName.PG) == []


# --- LS ---------------------------------------------------------------------


@pytest.mark.parametrize("variant", ["LS1", "LS2"])
@pytest.mark.parametrize("ctrl, targ", [(0, 1), (1, 0)])
def test_ls_implements_cnot_on_every_branch(variant, ctrl, targ):
    c = circuit(2, [Instruction(Op.CNOT, (ctrl, targ))])
    out = apply_rule(c, find_sites(c, RuleName(variant))[0])
    verdict = check_equivalence(out, cnot_matrix(2, ctrl, targ))
    assert verdict.equivalent and verdict.branches == 8
    probs = [br.probability for br in enumerate_branches(out)]
    assert np.allclose(probs, 1 / 8)
    assert compute_depth(out).lnn_violations == ()


def test_ls_orderings():
    c = circuit(2, [Instruction(Op.CNOT, (0, 1))])
    ls1 = [i.op for i in apply_rule(c, find_sites(c, RuleName.LS1)[0]).body()]
    ls2 = [i.op for i in apply_rule(c, find_sites(c, RuleName.LS2)[0]).body()]
    assert ls1 == [Op.PREP_Z, Op.MEAS_XX, Op.MEAS_ZZ, Op.MEAS_X]
    assert ls2 == [Op.PREP_X, Op.MEAS_ZZ, Op.MEAS_XX, Op.MEAS_Z]


def test_decomposer_uses_ls1_then_ls2():
    rules = [s.rule.value for s in rewrite_trace("ZZZ", 0.3)]
    assert rules[1:3] == ["LS1", "LS2"]


# --- MR ---------------------------------------------------------------------


def ancilla_circuit(ops, n: int = 1, cbits: int = 4) -> Circuit:
    return circuit(n, ops, cbits, extra=(Qubit(n, "ancilla", 2 * n + 1),))


@pytest.mark.parametrize("basis", ["X", "Z"])
def test_mr_merges_into_oval(basis):
    prep = Op.PREP_X if basis == "X" else Op.PREP_Z
    meas = Op.MEAS_X if basis == "X" else Op.MEAS_Z
    a = 1
    c = ancilla_circuit([
        Instruction(prep, (a,)), Instruction(Op.CNOT, (a, 0) if basis == "X" else (0, a)),
        Instruction(meas, (a,), cbit=0), Instruction(prep, (a,)),
        Instruction(Op.CNOT, (a, 0) if basis == "X" else (0, a)), Instruction(meas, (a,), cbit=1),
    ])
    sites = find_sites(c, RuleName.MR)
    assert len(sites) == 1
    out, cmap = rewrite_with_map(c, sites[0])
    assert out.body()[2].op is (Op.OVAL_X if basis == "X" else Op.OVAL_Z)
    assert compare_circuits(c, out, cmap).equivalent


def test_mr_basis_mismatch_does_not_match():
    c = ancilla_circuit([Instruction(Op.PREP_X, (1,)), Instruction(Op.MEAS_X, (1,), cbit=0), Instruction(Op.PREP_Z, (1,)), Instruction(Op.MEAS_Z, (1,), cbit=1)])
    assert find_sites(c, RuleName.MR) == []


def test_two_measure_reset_pairs_give_two_sites():
    ops = []
    for k in range(3):
        ops += [Instruction(Op.PREP_X, (1,)), Instruction(Op.CNOT, (1, 0)), Instruction(Op.MEAS_X, (1,), cbit=k)]
    c = ancilla_circuit(ops)
    assert len(find_sites(c, RuleName.MR)) == 2
    assert find_sites(circuit(1, [Instruction(Op.CLIFFORD1Q, (0,), clifford=4)]), RuleName.MR) == []


def test_trace_step_b_has_exactly_one_mr_site():
    steps = rewrite_trace("ZZZZ", 0.3)
    step_b = steps[2].circuit
    assert [s.rule.value for s in steps[:3]] == ["PG", "LS1", "LS2"]
    sites = find_sites(step_b, RuleName.MR)
    assert len(sites) == 1 and sites[0] == steps[3].site


def test_mr_then_expansion_is_identity():
    for p in ("ZZZ", "ZZZZ", "ZZZZZ"):
        steps = rewrite_trace(p, 0.3)
        for k, step in enumerate(steps):
            if step.rule is RuleName.MR:
                i, j = step.site.indices
                assert expand_oval(step.circuit, i, j) == steps[k - 1].circuit


# --- FUSE -------------------------------------------------------------------


def fuse_source(first: str) -> Circuit:
    """The CNOT pair of a peeled 3-qubit parity, rewritten up to the FUSE site."""
    # the middle parity has to commute with the operator being fused
    middle = Op.MEAS_ZZ if first == "LS1" else Op.MEAS_XX
    c = circuit(3, [
        Instruction(Op.CNOT, (0, 1)),
        Instruction(middle, (1, 2), cbit=0),
        Instruction(Op.CNOT, (0, 1)),
    ], 1)
    second = "LS2" if first == "LS1" else "LS1"
    c = apply_rule(c, find_sites(c, RuleName(first))[0])
    last = max(k for k, i in enumerate(c.instructions) if i.op is Op.CNOT)
    c = apply_rule(c, RewriteSite(RuleName(second), (last, last + 1), {}, (last,)))
    return apply_rule(c, find_sites(c, RuleName.MR)[0])


@pytest.mark.parametrize("first, parity", [("LS1", Op.MEAS_ZZ), ("LS2", Op.MEAS_XX)])
def test_fuse_both_forms(first, parity):
    c = fuse_source(first)
    sites = find_sites(c, RuleName.FUSE)
    assert len(sites) == 1
    i1, io, i2 = sites[0].indices
    assert c.instructions[i1].op is parity and c.instructions[i2].op is parity
    out, cmap = rewrite_with_map(c, sites[0])
    assert compare_circuits(c, out, cmap).equivalent
    two_body = lambda x: sum(i.op in TWO_BODY for i in x.instructions)
    assert two_body(out) == two_body(c) - 1
    assert compute_depth(out).total_layers <= compute_depth(c).total_layers


def test_fuse_blocked_by_noncommuting_middle():
    c = circuit(3, [Instruction(Op.CNOT, (0, 1)), Instruction(Op.MEAS_ZZ, (1, 2), cbit=0), Instruction(Op.CNOT, (0, 1))], 1)
    c = apply_rule(c, find_sites(c, RuleName.LS2)[0])
    last = max(k for k, i in enumerate(c.instructions) if i.op is Op.CNOT)
    c = apply_rule(c, RewriteSite(RuleName.LS1, (last, last + 1), {}, (last,)))
    c = apply_rule(c, find_sites(c, RuleName.MR)[0])
    assert find_sites(c, RuleName.FUSE) == []


def test_fuse_needs_conjugate_oval():
    a, b = 0, 1
    c = Circuit(data_line(1) + (Qubit(1, "ancilla", 1),), (
        Instruction(Op.PREP_X, (b,)),
        Instruction(Op.MEAS_ZZ, (a, b), cbit=0),
        Instruction(Op.OVAL_Z, (b,), cbit=1),
        Instruction(Op.MEAS_ZZ, (a, b), cbit=2),
        Instruction(Op.MEAS_X, (b,), cbit=3),
    ), 4)
    assert find_sites(c, RuleName.FUSE) == []
    ok = c.derive(c.instructions[:2] + (Instruction(Op.OVAL_X, (b,), cbit=1),) + c.instructions[3:])
    assert len(find_sites(ok, RuleName.FUSE)) == 1


# --- XXC / ZZC ----------------------------------------------------------------


@pytest.mark.parametrize("op, rule", [(Op.MEAS_ZZ, RuleName.ZZC), (Op.MEAS_XX, RuleName.XXC)])
def test_parity_expansion_matches_projective_definition(op, rule):
    c = circuit(2, [Instruction(op, (0, 1), cbit=0)], 1)
    out, cmap = rewrite_with_map(c, find_sites(c, rule)[0])
    assert [i.op for i in out.body()][1:3] == [Op.CNOT, Op.CNOT]
    assert compare_circuits(c, out, cmap).equivalent
    letter = "ZZ" if op is Op.MEAS_ZZ else "XX"
    proj = {k: (np.eye(4) + (-1) ** k * pauli_matrix(letter)) / 2 for k in (0, 1)}
    for br in enumerate_branches(out):
        want = proj[br.outcomes[0]]
        assert phase_deviation(br.operator * math.sqrt(br.probability) * 2, want * 2) < 1e-9


@pytest.mark.parametrize("prep, outcome", [([], 0), ([(1, 4)], 1)])
def test_zz_on_basis_states_is_deterministic(prep, outcome):
    # X on qubit 1 turns |00> into |01>
    from pauliforge.pauli import CLIFFORD_IDS

    ops = [Instruction(Op.CLIFFORD1Q, (1,), clifford=CLIFFORD_IDS["X"]) for _ in prep]
    qubits = (Qubit(0, "ancilla", 0), Qubit(1, "ancilla", 1), Qubit(2, "data", 2))
    c = Circuit(qubits, (
        Instruction(Op.PREP_Z, (0,)), Instruction(Op.PREP_Z, (1,)), *ops,
        Instruction(Op.MEAS_ZZ, (0, 1), cbit=0),
        Instruction(Op.MEAS_Z, (0,), cbit=1), Instruction(Op.MEAS_Z, (1,), cbit=2),
    ), 3)
    branches = enumerate_branches(c)
    assert len(branches) == 1 and branches[0].outcomes[0] == outcome


# --- REM --------------------------------------------------------------------


@pytest.mark.parametrize("rule", [RuleName.REMZ, RuleName.REMX])
def test_rem_is_identity_on_survivor(rule):
    if rule is RuleName.REMZ:
        ops = [Instruction(Op.PREP_Z, (1,)), Instruction(Op.CNOT, (1, 0)), Instruction(Op.MEAS_Z, (1,), cbit=0)]
    else:
        ops = [Instruction(Op.PREP_X, (1,)), Instruction(Op.CNOT, (0, 1)), Instruction(Op.MEAS_X, (1,), cbit=0)]
    c = ancilla_circuit(ops, cbits=1)
    assert check_equivalence(c, np.eye(2)).equivalent
    out, cmap = rewrite_with_map(c, find_sites(c, rule)[0])
    assert out.body() == ()
    assert cmap == {0: frozenset()}
    assert compare_circuits(c, out, cmap).equivalent


def test_rem_orientation_matters():
    c = ancilla_circuit([Instruction(Op.PREP_Z, (1,)), Instruction(Op.CNOT, (0, 1)), Instruction(Op.MEAS_Z, (1,), cbit=0)], cbits=1)
    assert find_sites(c, RuleName.REMZ) == []
    c = ancilla_circuit([Instruction(Op.PREP_X, (1,)), Instruction(Op.CNOT, (1, 0)), Instruction(Op.MEAS_X, (1,), cbit=0)], cbits=1)
    assert find_sites(c, RuleName.REMX) == []


# --- CNOT commutation -------------------------------------------------------


@pytest.mark.parametrize(
    "pair, expect",
    [
        (((0, 1), (0, 2)), [(0, 2), (0, 1)]),
        (((0, 1), (2, 1)), [(2, 1), (0, 1)]),
        (((0, 1), (0, 1)), []),
        (((0, 1), (1, 2)), [(1, 2), (0, 2), (0, 1)]),
        (((0, 1), (2, 0)), [(2, 0), (2, 1), (0, 1)]),
    ],
)
def test_cnot_commutation(pair, expect):
    c = circuit(3, [Instruction(Op.CNOT, q) for q in pair])
    out = apply_rule(c, find_sites(c, RuleName.CNOT_COMM)[0])
    assert [i.qubits for i in out.body()] == expect
    assert np.allclose(unitary(out), unitary(c))


def test_swap_cycle_is_not_a_site():
    c = circuit(2, [Instruction(Op.CNOT, (0, 1)), Instruction(Op.CNOT, (1, 0))])
    assert find_sites(c, RuleName.CNOT_COMM) == []


# --- discovery --------------------------------------------------------------


def test_sites_do_not_overlap_and_earlier_wins():
    ops = [Instruction(Op.CNOT, (0, 1)), Instruction(Op.CNOT, (0, 1)), Instruction(Op.CNOT, (0, 1))]
    sites = find_sites(circuit(2, ops), RuleName.CNOT_COMM)
    assert [s.indices for s in sites] == [(0, 1)]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(ALL_RULES), st.integers(0, 10_000))
def test_found_sites_apply_and_stay_valid(rule, seed):
    inst = make_instance(rule, seed)
    for site in find_sites(inst.circuit, rule):
        out = apply_rule(inst.circuit, site)
        validated = out.validated()
        cbits = [i.cbit for i in validated.instructions if i.cbit is not None]
        assert len(cbits) == len(set(cbits))
