"""Acceptance criteria, one check each.

Under pytest every criterion is a test and a one-line PASS/FAIL summary is
printed at the end of the session (see conftest.py).  Run as a script to get
the same lines without pytest:

    python3 tests/test_acceptance.py
"""

from __future__ import annotations

import functools
import itertools
import math
import os
import random
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from instances import ALL_RULES, MAX_QUBITS, make_instance  # noqa: E402
from pauliforge.circuit import Op, compute_depth  # noqa: E402
from pauliforge.decompose import decompose, rewrite_trace  # noqa: E402
from pauliforge.frame import ONE, Byproduct, CorrectionTable  # noqa: E402
from pauliforge.pauli import Angle, pauli_matrix  # noqa: E402
from pauliforge.rewrite import rewrite_with_map  # noqa: E402
from pauliforge.verify import (  # noqa: E402
    branch_operator,
    check_equivalence,
    compare_circuits,
    install_corrections,
    target_exponential,
)
from pauliforge.verify.tableau import tableau_run  # noqa: E402

ANGLES = ("pi/2", "pi/4", "pi/8", "0.3", "1.234")
TOL = 1e-9
MAX_N = 200

# criterion number -> (passed, detail); filled as checks run
RESULTS: dict[int, tuple[bool, str]] = {}


def _record(number: int, check) -> tuple[bool, str]:
    start = time.perf_counter()
    try:
        ok, detail = check()
    except Exception as exc:  # a crash is a failed criterion, not a skipped one
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    RESULTS[number] = (ok, f"{detail} [{time.perf_counter() - start:.1f}s]")
    return RESULTS[number]


def _random_word(rng: random.Random, n: int) -> str:
    while True:
        w = "".join(rng.choice("IXYZ") for _ in range(n))
        if set(w) != {"I"}:
            return w


def _all_words(n: int):
    for w in itertools.product("IXYZ", repeat=n):
        if set(w) != {"I"}:
            yield "".join(w)


def check_exhaustive_small() -> tuple[bool, str]:
    cases = [(w, t) for n in (1, 2, 3) for w in _all_words(n) for t in ANGLES]
    rng = random.Random(2024)
    for n in (4, 5):
        # 50 random strings per size; angles assigned in turn so each gets 10
        cases += [(_random_word(rng, n), ANGLES[k % len(ANGLES)]) for k in range(50)]
    failures = []
    for word, token in cases:
        theta = Angle.parse(token)
        v = check_equivalence(decompose(word, theta), target_exponential(word, theta))
        if not v.equivalent or v.worst_deviation > TOL:
            failures.append(f"{word}@{token}:{v.status}")
    return not failures, f"{len(cases) - len(failures)}/{len(cases)} cases equivalent" + (
        f"; first failures {failures[:3]}" if failures else "")


@functools.cache
def _sweep() -> dict[int, tuple[int, int, int, int]]:
    """n -> (two-body layers, interaction ancillas, theta ancillas, LNN violations)."""
    rng = random.Random(7)
    out = {}
    for n in range(1, MAX_N + 1):
        word = "".join(rng.choice("XYZ") for _ in range(n))
        rep = compute_depth(decompose(word, 0.3))
        out[n] = (rep.two_body_layers, rep.max_ancillas, rep.theta_ancillas, len(rep.lnn_violations))
    return out


def check_two_body_layers() -> tuple[bool, str]:
    layers = {n: row[0] for n, row in _sweep().items() if n >= 2}
    bad = {n: d for n, d in layers.items() if d != 3}
    return not bad, f"two-body layers for n=2..{MAX_N}: {sorted(set(layers.values()))}" + (
        f"; off at {sorted(bad)[:5]}" if bad else "")


def check_ancilla_budget() -> tuple[bool, str]:
    bad = [n for n, (_, anc, th, _) in _sweep().items() if anc > n + 1 or th != 1]
    # Clifford angles need no theta ancilla at all
    clifford = compute_depth(decompose("XYZ", math.pi / 2)).theta_ancillas
    worst = max(anc - n for n, (_, anc, _, _) in _sweep().items())
    ok = not bad and clifford == 0
    return ok, f"max(ancillas - n) = {worst}, one theta ancilla per non-Clifford case, {clifford} at pi/2" + (
        f"; over budget at {bad[:5]}" if bad else "")


def check_lnn() -> tuple[bool, str]:
    bad = [n for n, row in _sweep().items() if row[3]]
    return not bad, f"n=1..{MAX_N}: {len(bad)} circuits with LNN violations"


def check_rule_oracle() -> tuple[bool, str]:
    failures = []
    worst = 0.0
    count = 0
    for rule in ALL_RULES:
        for seed in range(100):
            inst = make_instance(rule, seed)
            if len(inst.circuit.qubits) > MAX_QUBITS:
                failures.append(f"{rule.value}#{seed}:too large")
                continue
            after, cbit_map = rewrite_with_map(inst.circuit, inst.site)
            v = compare_circuits(inst.circuit, after, cbit_map)
            count += 1
            worst = max(worst, v.worst_deviation)
            if not v.equivalent or v.worst_deviation > TOL:
                failures.append(f"{rule.value}#{seed}")
    return not failures, f"{count - len(failures)}/{len(ALL_RULES) * 100} instances over {len(ALL_RULES)} rules, worst deviation {worst:.1e}" + (
        f"; failures {failures[:5]}" if failures else "")


def check_zzzz_trace() -> tuple[bool, str]:
    theta = 0.3
    steps = rewrite_trace("ZZZZ", theta)
    rules = [s.rule.value for s in steps]
    head = [r[:2] if r.startswith("LS") else r for r in rules[:5]]
    target = target_exponential("ZZZZ", theta)
    bad = [k for k, s in enumerate(steps) if not check_equivalence(s.circuit, target).equivalent]
    final = steps[-1].circuit == decompose("ZZZZ", theta)
    ok = head == ["PG", "LS", "LS", "MR", "FUSE"] and not bad and final
    return ok, f"rules {' '.join(rules[:5])} ..., {len(steps) - len(bad)}/{len(steps)} steps equivalent, final == decompose: {final}"


def _action_matches(word: str, seed: int) -> bool:
    c = decompose(word, math.pi / 2)
    tab = tableau_run(c, seed=seed, reference=True)
    _, u = branch_operator(c, tab.outcomes)
    n = len(word)
    for (q, letter), (sign, image) in tab.conjugation_action(c.data_qubits).items():
        g = ["I"] * n
        g[c.data_qubits.index(q)] = letter
        want = u @ pauli_matrix("".join(g)) @ u.conj().T
        if np.abs(want - sign * pauli_matrix(image)).max() > TOL:
            return False
    return True


def check_tableau() -> tuple[bool, str]:
    rng = random.Random(11)
    words = [w for n in (1, 2, 3) for w in _all_words(n)]
    words += [_random_word(rng, n) for n in (4, 5) for _ in range(20)]
    bad = [w for k, w in enumerate(words) if not _action_matches(w, k)]
    big = decompose("".join(rng.choice("XYZ") for _ in range(50)), math.pi / 2)
    start = time.perf_counter()
    tableau_run(big, seed=0, reference=True).conjugation_action(big.data_qubits)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 1.0
    return ok, f"{len(words) - len(bad)}/{len(words)} actions match dense, n=50 in {elapsed:.3f}s" + (
        f"; mismatches {bad[:3]}" if bad else "")


def _corrupt(c) -> object:
    table = CorrectionTable.from_circuit(c)
    k = min(k for k, b in table.entries.items() if k != ONE and (b.x or b.z))
    b = table.entries[k]
    entries = dict(table.entries)
    entries[k] = Byproduct(b.z, b.x, b.rotate)
    rot = next((i for i in c.corrections() if i.op is Op.CORR_RZ2THETA), None)
    return install_corrections(c.with_instructions(c.body()), CorrectionTable(entries), rot)


def check_negative_controls() -> tuple[bool, str]:
    cases = [("ZZ", 0.3), ("XZYZ", 0.3), ("YIX", 1.234), ("ZZZ", math.pi / 8), ("XY", math.pi / 4)]
    caught_sign = sum(not check_equivalence(decompose(p, t), target_exponential(p, -t)).equivalent for p, t in cases)
    caught_table = sum(not check_equivalence(_corrupt(decompose(p, t)), target_exponential(p, t)).equivalent for p, t in cases)
    ok = caught_sign == caught_table == len(cases)
    return ok, f"sign-flipped theta rejected {caught_sign}/{len(cases)}, corrupted table rejected {caught_table}/{len(cases)}"


CRITERIA = {
    1: ("exhaustive n<=3 and random n=4,5 equivalence", check_exhaustive_small),
    2: ("exactly 3 two-body layers for n=2..200", check_two_body_layers),
    3: ("ancillas <= n+1 plus one theta ancilla", check_ancilla_budget),
    4: ("LNN-clean for n<=200", check_lnn),
    5: ("every rule preserves behavior on 100 random instances", check_rule_oracle),
    6: ("ZZZZ trace shape and per-step equivalence", check_zzzz_trace),
    7: ("tableau conjugation matches dense at pi/2, n=50 under 1s", check_tableau),
    8: ("negative controls are rejected", check_negative_controls),
}


def summary_lines() -> list[str]:
    lines = []
    for number, (title, _) in CRITERIA.items():
        if number in RESULTS:
            ok, detail = RESULTS[number]
            lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        else:
            lines.append(f"criterion {number}: NOT RUN  {title}")
    return lines


def test_criterion_1_exhaustive_equivalence():
    ok, detail = _record(1, check_exhaustive_small)
    assert ok, detail


def test_criterion_2_two_body_layers():
    ok, detail = _record(2, check_two_body_layers)
    assert ok, detail


def test_criterion_3_ancilla_budget():
    ok, detail = _record(3, check_ancilla_budget)
    assert ok, detail


def test_criterion_4_lnn():
    ok, detail = _record(4, check_lnn)
    assert ok, detail


def test_criterion_5_rule_oracle():
    ok, detail = _record(5, check_rule_oracle)
    assert ok, detail


def test_criterion_6_zzzz_trace():
    ok, detail = _record(6, check_zzzz_trace)
    assert ok, detail


def test_criterion_7_tableau():
    ok, detail = _record(7, check_tableau)
    assert ok, detail


def test_criterion_8_negative_controls():
    ok, detail = _record(8, check_negative_controls)
    assert ok, detail


if __name__ == "__main__":
    for number, (_, check) in CRITERIA.items():
        _record(number, check)
        print(summary_lines()[number - 1], flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
