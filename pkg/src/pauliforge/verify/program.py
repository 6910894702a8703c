"""Lowering of a circuit to flat arrays for the dense branch simulator.

The simulated vector is a Choi-style state: the low ``n`` bits index a
reference copy of the data register (the operator's input), the bits above
index the live qubits (the operator's output).  Data qubits occupy the first
live bits in roster order; an ancilla gets the top bit when prepared and
its bit is removed again when it is measured out.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..circuit import DESTRUCTIVE, PREPS, Circuit, CircuitError, Instruction, Op
from ..frame import ONE
from ..pauli import CLIFFORD_MATRICES

K_MEAS, K_U1, K_CNOT, K_PEXP, K_PREP, K_PAULI = range(6)
REMOVE_NONE, REMOVE_Z, REMOVE_X = 0, 1, 2

DEFAULT_LIVE_LIMIT = 12
DEFAULT_DATA_LIMIT = 10


class LimitExceeded(RuntimeError):
    """The circuit is too large for dense simulation."""


def live_limit() -> int:
    text = os.environ.get("PAULIFORGE_DENSE_LIMIT")
    if text:
        value = int(text)
        if value < 1:
            raise ValueError("PAULIFORGE_DENSE_LIMIT must be >= 1")
        return value
    return DEFAULT_LIVE_LIMIT


def data_limit() -> int:
    return min(DEFAULT_DATA_LIMIT, live_limit())


_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass
class Program:
    n: int
    kind: np.ndarray
    xm: np.ndarray
    zm: np.ndarray
    ny: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    cbit: np.ndarray
    remove: np.ndarray
    angle: np.ndarray
    mat: np.ndarray
    nb: np.ndarray
    cond_ptr: np.ndarray
    cond_len: np.ndarray
    cond_const: np.ndarray
    cond_idx: np.ndarray
    body_len: int
    pauli_run: int
    meas_ops: np.ndarray
    final_nb: int
    max_nb: int
    num_cbits: int
    live_out: tuple[int, ...]
    max_live: int

    @property
    def num_measurements(self) -> int:
        return len(self.meas_ops)


def _masks(bits: dict[int, int], letters: dict[int, str]) -> tuple[int, int, int]:
    x = z = ny = 0
    for q, letter in letters.items():
        bx, bz = _LETTER_BITS[letter]
        if bx:
            x |= 1 << bits[q]
        if bz:
            z |= 1 << bits[q]
        if letter == "Y":
            ny += 1
    return x, z, ny


def _prep_amplitudes(ins: Instruction) -> np.ndarray:
    if ins.op is Op.PREP_Z:
        return np.array([[1, 0], [0, 0]], dtype=complex)
    s = 1 / math.sqrt(2)
    if ins.op is Op.PREP_X:
        return np.array([[s, 0], [s, 0]], dtype=complex)
    # exp(i*theta*Z)|+>
    t = ins.angle
    return np.array([[s * np.exp(1j * t), 0], [s * np.exp(-1j * t), 0]], dtype=complex)


def simulation_order(c: Circuit) -> Circuit:
    """Reorder the body to keep few ancillas live at once.

    Only instructions on disjoint qubits are swapped, so every operator and
    every outcome distribution is unchanged.  Non-preparations run as soon
    as they are ready; a preparation is delayed until the earliest waiting
    instruction needs it.
    """
    start = c.correction_start()
    body = c.instructions[:start]
    queues: dict[int, list[int]] = {}
    for k, ins in enumerate(body):
        for q in ins.qubits:
            queues.setdefault(q, []).append(k)
    heads = {q: 0 for q in queues}
    done = [False] * len(body)
    order: list[int] = []

    def ready(k: int) -> bool:
        return all(queues[q][heads[q]] == k for q in body[k].qubits)

    def run(k: int):
        done[k] = True
        order.append(k)
        for q in body[k].qubits:
            heads[q] += 1

    while len(order) < len(body):
        live_ready = [k for k in range(len(body)) if not done[k] and body[k].op not in PREPS and ready(k)]
        if live_ready:
            # measuring a qubit out first keeps the state narrow
            out = [k for k in live_ready if body[k].op in DESTRUCTIVE]
            run((out or live_ready)[0])
            continue
        # the earliest blocked instruction decides which preparation goes next
        for k in range(len(body)):
            if done[k] or body[k].op in PREPS:
                continue
            need = [queues[q][heads[q]] for q in body[k].qubits]
            cand = [j for j in need if body[j].op in PREPS and ready(j)]
            if cand:
                run(cand[0])
                break
        else:
            leftover = [k for k in range(len(body)) if not done[k]]
            if not all(body[k].op in PREPS for k in leftover):  # pragma: no cover
                raise CircuitError("cannot order instructions")
            for k in leftover:
                run(k)
    return c.with_instructions([body[k] for k in order] + list(c.instructions[start:]))


def compile_program(c: Circuit, reorder: bool = True) -> Program:
    if reorder:
        c = simulation_order(c)
    data = c.data_qubits
    n = len(data)
    live = list(data)
    rows: list[dict] = []
    conds: list[int] = []
    start = c.correction_start()
    max_live = len(live)

    def bits() -> dict[int, int]:
        return {q: n + k for k, q in enumerate(live)}

    def row(kind, **kw):
        r = dict(kind=kind, xm=0, zm=0, ny=0, b0=0, b1=0, cbit=-1, remove=REMOVE_NONE, angle=0.0,
                 mat=np.eye(2, dtype=complex), nb=n + len(live), ptr=0, clen=0, const=0)
        r.update(kw)
        rows.append(r)

    for k, ins in enumerate(c.instructions):
        if k < start and ins.cond is not None:
            raise CircuitError("conditional instructions must sit in the trailing correction block")
        if k >= start:
            continue
        for q in ins.qubits:
            if ins.op in (Op.PREP_Z, Op.PREP_X, Op.PREP_THETA):
                if q in live:
                    raise CircuitError(f"{ins.label()} prepares a live qubit")
            elif q not in live:
                raise CircuitError(f"{ins.label()} acts on unprepared qubit {q}")
        b = bits()
        op = ins.op
        if op in (Op.PREP_Z, Op.PREP_X, Op.PREP_THETA):
            row(K_PREP, mat=_prep_amplitudes(ins))
            live.append(ins.qubits[0])
            max_live = max(max_live, len(live))
        elif op is Op.CLIFFORD1Q:
            row(K_U1, b0=b[ins.qubits[0]], mat=CLIFFORD_MATRICES[ins.clifford].astype(complex))
        elif op is Op.RZ:
            h = ins.angle / 2
            row(K_U1, b0=b[ins.qubits[0]], mat=np.diag([np.exp(-1j * h), np.exp(1j * h)]))
        elif op is Op.CNOT:
            row(K_CNOT, b0=b[ins.qubits[0]], b1=b[ins.qubits[1]])
        elif op is Op.PAULI_EXP:
            x, z, ny = _masks(b, dict(zip(ins.qubits, ins.pauli)))
            row(K_PEXP, xm=x, zm=z, ny=ny, angle=ins.angle)
        elif ins.is_measurement:
            x, z, ny = _masks(b, ins.measured_pauli())
            remove = REMOVE_NONE
            q = ins.qubits[0]
            if op in DESTRUCTIVE and c.role(q) != "data":
                remove = REMOVE_Z if op is Op.MEAS_Z else REMOVE_X
            row(K_MEAS, xm=x, zm=z, ny=ny, cbit=ins.cbit, remove=remove, b0=b[q])
            if remove:
                live.remove(q)
        else:
            raise CircuitError(f"cannot simulate {op.value}")
    body_len = len(rows)
    b = bits()
    for ins in c.instructions[start:]:
        for q in ins.qubits:
            if q not in live:
                raise CircuitError(f"{ins.label()} corrects a qubit that is not live")
        cond = ins.cond
        const = 1 if cond is None else int(ONE in cond)
        members = [] if cond is None else sorted(k for k in cond if k != ONE)
        letters = dict(zip(ins.qubits, ins.pauli))
        x, z, ny = _masks(b, letters)
        ptr = len(conds)
        conds.extend(members)
        if ins.op is Op.CORR_PAULI:
            row(K_PAULI, xm=x, zm=z, ny=ny, ptr=ptr, clen=len(members), const=const)
        else:
            row(K_PEXP, xm=x, zm=z, ny=ny, angle=ins.angle, ptr=ptr, clen=len(members), const=const)

    def col(key, dtype):
        return np.array([r[key] for r in rows], dtype=dtype)

    nb_final = n + len(live)
    return Program(
        n=n,
        kind=col("kind", np.int64),
        xm=col("xm", np.int64),
        zm=col("zm", np.int64),
        ny=col("ny", np.int64),
        b0=col("b0", np.int64),
        b1=col("b1", np.int64),
        cbit=col("cbit", np.int64),
        remove=col("remove", np.int64),
        angle=col("angle", np.float64),
        mat=np.array([r["mat"] for r in rows], dtype=np.complex128).reshape(len(rows), 2, 2),
        nb=col("nb", np.int64),
        cond_ptr=col("ptr", np.int64),
        cond_len=col("clen", np.int64),
        cond_const=col("const", np.int64),
        cond_idx=np.array(conds, dtype=np.int64),
        body_len=body_len,
        pauli_run=_pauli_run(rows, body_len),
        meas_ops=np.array([k for k in range(body_len) if rows[k]["kind"] == K_MEAS], dtype=np.int64),
        final_nb=nb_final,
        max_nb=n + max_live,
        num_cbits=c.num_cbits,
        live_out=tuple(live),
        max_live=max_live,
    )


def _pauli_run(rows: list[dict], body_len: int) -> int:
    k = body_len
    while k < len(rows) and rows[k]["kind"] == K_PAULI:
        k += 1
    return k


def check_limits(c: Circuit, prog: Program | None = None) -> None:
    n = c.num_data
    if n > data_limit():
        raise LimitExceeded(f"{n} data qubits exceed the dense operator limit {data_limit()}")
    if prog is not None and prog.max_live > live_limit():
        raise LimitExceeded(f"{prog.max_live} live qubits exceed the dense limit {live_limit()}")


def initial_vector(n: int, size: int) -> np.ndarray:
    v = np.zeros(size, dtype=np.complex128)
    idx = np.arange(1 << n)
    v[idx | (idx << n)] = 1.0
    return v
