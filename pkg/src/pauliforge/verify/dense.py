"""Dense branch-enumeration oracle.

Every measurement outcome string is simulated; each branch's operator on
the data register is corrected with the circuit's own correction block and
compared to a target up to global phase.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..circuit import Circuit, CircuitError, Instruction, Op
from ..frame import ONE, Byproduct, CorrectionTable, install_corrections
from ..pauli import Angle, PauliString, parse_pauli, pauli_matrix
from . import kernels
from .program import LimitExceeded, Program, check_limits, compile_program, data_limit, initial_vector

TOL = 1e-9
PRUNE = 1e-14


def _as_pauli(p) -> PauliString:
    return p if isinstance(p, PauliString) else parse_pauli(str(p))


def _as_angle(theta) -> Angle:
    return theta if isinstance(theta, Angle) else Angle.of(float(theta))


def target_exponential(p, theta) -> np.ndarray:
    """``exp(i*theta*P) = cos(theta) I + i sin(theta) P``."""
    p = _as_pauli(p)
    theta = _as_angle(theta)
    if len(p) > data_limit():
        raise LimitExceeded(f"{len(p)} qubits exceed the dense operator limit {data_limit()}")
    m = pauli_matrix(p.letters)
    return math.cos(theta.value) * np.eye(len(m), dtype=complex) + 1j * math.sin(theta.value) * m


@dataclass
class BranchReport:
    outcomes: dict[int, int]
    probability: float
    operator: np.ndarray
    corrections: list[str] = field(default_factory=list)

    @property
    def bits(self) -> str:
        return "".join(str(self.outcomes[k]) for k in sorted(self.outcomes))


@dataclass
class Verdict:
    status: str
    branches: int = 0
    worst_deviation: float = 0.0
    failing_branch: str | None = None
    total_probability: float = 0.0
    message: str = ""

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"

    def __bool__(self) -> bool:
        return self.equivalent

    def to_dict(self) -> dict:
        out = {
            "equivalent": self.equivalent,
            "branches": self.branches,
            "worst_deviation": self.worst_deviation,
        }
        if self.failing_branch is not None:
            out["failing_branch"] = self.failing_branch
        if self.status == "unverifiable":
            out["status"] = "unverifiable at desk scale"
            out["reason"] = self.message
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _bitstring(c: Circuit, outcomes: np.ndarray) -> str:
    return "".join(str(int(outcomes[k])) for k in c.measured_cbits())


def _prepare(c: Circuit) -> Program:
    check_limits(c)
    prog = compile_program(c)
    check_limits(c, prog)
    return prog


def check_equivalence(c: Circuit, target: np.ndarray, tol: float = TOL) -> Verdict:
    """Branch-wise equivalence of ``c`` (with its corrections) to ``target``."""
    try:
        prog = _prepare(c)
    except LimitExceeded as exc:
        return Verdict("unverifiable", message=str(exc))
    n = prog.n
    if target.shape != (1 << n, 1 << n):
        raise ValueError(f"target must be {1 << n}x{1 << n} for {n} data qubits")
    if prog.live_out != tuple(c.data_qubits):
        raise CircuitError("ancillas are still live at the end of the circuit")
    flat = np.ascontiguousarray(target, dtype=np.complex128).reshape(-1)
    branches, worst, total_p, failed, fail_out, _ = kernels.run_check(prog, flat, tol, PRUNE * (1 << n))
    return Verdict(
        "inequivalent" if failed else "equivalent",
        branches=int(branches),
        worst_deviation=float(worst),
        failing_branch=_bitstring(c, fail_out) if failed else None,
        total_probability=float(total_p),
    )


def _leaf_matrix(prog: Program, v: np.ndarray) -> np.ndarray:
    return v.reshape(1 << (prog.final_nb - prog.n), 1 << prog.n)


def enumerate_branches(c: Circuit, corrected: bool = True) -> list[BranchReport]:
    """All nonzero-probability branches with their normalized operators.

    The operator maps the data register (columns) to the qubits still live
    at the end (rows, data first, then surviving ancillas).
    """
    prog = _prepare(c)
    n = prog.n
    v0 = initial_vector(n, 1 << (2 * n))
    measured = c.measured_cbits()
    out = []
    for outcomes, v in kernels.np_branches(prog, v0, PRUNE * (1 << n)):
        fired: list[int] = []
        if corrected:
            v, fired = kernels.np_corrections(prog, v, outcomes)
        p = float(np.vdot(v, v).real) / (1 << n)
        body = c.correction_start()
        labels = [c.instructions[body + k - prog.body_len].label() for k in fired]
        out.append(BranchReport({k: int(outcomes[k]) for k in measured}, p, _leaf_matrix(prog, v) / math.sqrt(p), labels))
    return out


def branch_operator(c: Circuit, outcomes: dict[int, int], corrected: bool = True) -> tuple[float, np.ndarray] | None:
    """Probability and normalized operator for one outcome assignment, or None if impossible."""
    prog = _prepare(c)
    n = prog.n
    v0 = initial_vector(n, 1 << (2 * n))
    for outs, v in kernels.np_branches(prog, v0, PRUNE * (1 << n), fixed=outcomes):
        if corrected:
            v, _ = kernels.np_corrections(prog, v, outs)
        p = float(np.vdot(v, v).real) / (1 << n)
        return p, _leaf_matrix(prog, v) / math.sqrt(p)
    return None


def phase_deviation(u: np.ndarray, target: np.ndarray) -> float:
    """``min_phi ||u - e^{i phi} target||`` with phi fitted on the top entry of ``u``."""
    flat = u.reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    t = target.reshape(-1)[k]
    if abs(t) < 1e-300:
        return float(np.linalg.norm(u - target))
    r = flat[k] / t
    return float(np.linalg.norm(u - (r / abs(r)) * target))


def _live_order(c: Circuit) -> tuple[int, ...]:
    return compile_program(c).live_out


def compare_circuits(before: Circuit, after: Circuit, cbit_map: dict[int, frozenset[int]] | None = None, tol: float = TOL) -> Verdict:
    """Branch correspondence between two circuits on the same data register.

    Every branch of ``after`` must match, up to phase and normalization, the
    branch of ``before`` whose outcomes are read through ``cbit_map``
    (before-cbit -> parity set of after-cbits; unmapped cbits map to
    themselves).  The two corrected channels must also coincide.
    """
    cbit_map = cbit_map or {}
    if before.data_qubits != after.data_qubits:
        raise ValueError("circuits act on different data registers")
    live_b, live_a = _live_order(before), _live_order(after)
    if set(live_b) != set(live_a):
        return Verdict("inequivalent", message=f"live qubits differ: {live_b} vs {live_a}")
    perm = [live_b.index(q) for q in live_a]
    n = before.num_data
    worst = 0.0
    failing = None
    after_branches = enumerate_branches(after)
    before_branches = {tuple(sorted(b.outcomes.items())): b for b in enumerate_branches(before)}
    for br in after_branches:
        want = {}
        for k in before.measured_cbits():
            src = cbit_map.get(k, frozenset({k}))
            bit = 0
            for j in src:
                bit ^= 1 if j == ONE else br.outcomes.get(j, 0)
            want[k] = bit
        ref = before_branches.get(tuple(sorted(want.items())))
        if ref is None:
            return Verdict("inequivalent", branches=len(after_branches), failing_branch=br.bits,
                           message="after-branch has no counterpart")
        op_b = _permute_rows(ref.operator, live_b, perm, n)
        dev = phase_deviation(br.operator, op_b)
        if dev > worst:
            worst = dev
            if dev > tol and failing is None:
                failing = br.bits
    ch_b = _channel(before_branches.values(), live_b, perm, n)
    ch_a = _channel(after_branches, live_a, list(range(len(live_a))), n)
    ch_dev = float(np.linalg.norm(ch_b - ch_a))
    ok = failing is None and ch_dev <= tol * max(1.0, np.linalg.norm(ch_a))
    return Verdict(
        "equivalent" if ok else "inequivalent",
        branches=len(after_branches),
        worst_deviation=max(worst, ch_dev),
        failing_branch=failing,
        total_probability=sum(b.probability for b in after_branches),
    )


def _permute_rows(op: np.ndarray, live: tuple[int, ...], perm: list[int], n: int) -> np.ndarray:
    """Reorder the output qubits of ``op`` (little-endian over ``live``) as ``perm``."""
    k = len(live)
    if perm == list(range(k)):
        return op
    t = op.reshape([2] * k + [op.shape[1]])
    # axis 0 of the reshape is the most significant qubit
    axes = [k - 1 - perm[k - 1 - a] for a in range(k)] + [k]
    return t.transpose(axes).reshape(op.shape)


def _channel(branches, live, perm, n) -> np.ndarray:
    """Choi matrix of the corrected channel, summed over branches."""
    dim = (1 << len(live)) * (1 << n)
    rows = [_permute_rows(br.operator, live, perm, n).reshape(-1) * math.sqrt(br.probability) for br in branches]
    if not rows:
        return np.zeros((dim, dim), dtype=complex)
    v = np.array(rows)
    return v.T @ v.conj()


# --- correction search ------------------------------------------------------


class CorrectionSearchFailed(RuntimeError):
    def __init__(self, message: str, worst_branch: str | None = None):
        super().__init__(message)
        self.worst_branch = worst_branch


def _pauli_on(c: Circuit, letters: dict[int, str]) -> np.ndarray:
    n = c.num_data
    word = ["I"] * n
    for q, a in letters.items():
        word[c.data_qubits.index(q)] = a
    return pauli_matrix("".join(word))


def derive_corrections(c: Circuit, target: np.ndarray, rotation: Instruction | None = None, tol: float = 1e-9) -> CorrectionTable:
    """Find per-cbit Pauli byproducts (and the repair rotation) that fix every branch.

    ``c`` is taken without its correction block.  For each branch, the data
    register's Pauli group (times the optional ``rotation`` template) is
    searched for ``C`` with ``C U_branch ~ target``; the per-branch answers
    must then factor as a GF(2)-linear function of the outcome bits.
    """
    if c.num_data > 4:
        raise ValueError("exhaustive correction search is limited to 4 data qubits")
    bare = c.with_instructions(c.body())
    data = c.data_qubits
    paulis = [dict(zip(data, w)) for w in itertools.product("IXYZ", repeat=len(data))]
    mats = [_pauli_on(c, p) for p in paulis]
    rot = None
    if rotation is not None:
        rot = _pauli_on(c, {}) * math.cos(rotation.angle) + 1j * math.sin(rotation.angle) * _pauli_on(
            c, dict(zip(rotation.qubits, rotation.pauli))
        )
    rows = []
    for br in enumerate_branches(bare):
        if br.operator.shape[0] != target.shape[0]:
            raise CircuitError("ancillas are still live at the end of the circuit")
        found = None
        best = math.inf
        for use_rot in ([False, True] if rot is not None else [False]):
            for p, m in zip(paulis, mats):
                u = m @ br.operator
                if use_rot:
                    u = rot @ u
                dev = phase_deviation(u, target)
                best = min(best, dev)
                if dev <= tol:
                    found = (p, use_rot)
                    break
            if found:
                break
        if found is None:
            raise CorrectionSearchFailed(f"no Pauli correction for branch {br.bits} (best {best:.3g})", br.bits)
        rows.append((br.outcomes, found))
    return _factorize(rows, data)


def _factorize(rows, data) -> CorrectionTable:
    """Solve ``correction(outcomes) = const XOR sum_k outcome_k * byproduct_k`` over GF(2)."""
    cbits = sorted({k for outs, _ in rows for k in outs})
    nvar = len(cbits) + 1
    nfeat = 2 * len(data) + 1

    def features(p: dict[int, str], rot: bool) -> list[int]:
        f = []
        for q in data:
            a = p.get(q, "I")
            f += [int(a in "XY"), int(a in "ZY")]
        return f + [int(rot)]

    eqs = [([1] + [outs[k] for k in cbits], features(p, r)) for outs, (p, r) in rows]
    # Gaussian elimination on the augmented system, one feature column at a time
    a = np.array([e[0] for e in eqs], dtype=np.uint8)
    b = np.array([e[1] for e in eqs], dtype=np.uint8)
    sol = np.zeros((nvar, nfeat), dtype=np.uint8)
    a = a.copy()
    b = b.copy()
    pivots = []
    r = 0
    for col in range(nvar):
        piv = next((i for i in range(r, len(a)) if a[i, col]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        b[[r, piv]] = b[[piv, r]]
        for i in range(len(a)):
            if i != r and a[i, col]:
                a[i] ^= a[r]
                b[i] ^= b[r]
        pivots.append(col)
        r += 1
    if np.any(b[r:]):
        raise CorrectionSearchFailed("per-branch corrections do not factor into per-outcome byproducts")
    for i, col in enumerate(pivots):
        sol[col] = b[i]
    entries = {}
    for v in range(nvar):
        f = sol[v]
        x = frozenset(q for j, q in enumerate(data) if f[2 * j])
        z = frozenset(q for j, q in enumerate(data) if f[2 * j + 1])
        bp = Byproduct(x, z, bool(f[-1]))
        if not bp.is_identity:
            entries[ONE if v == 0 else cbits[v - 1]] = bp
    return CorrectionTable(entries)


__all__ = [
    "BranchReport",
    "CorrectionSearchFailed",
    "Verdict",
    "branch_operator",
    "check_equivalence",
    "compare_circuits",
    "derive_corrections",
    "enumerate_branches",
    "install_corrections",
    "phase_deviation",
    "target_exponential",
]
