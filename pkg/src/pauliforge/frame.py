"""Pauli-frame bookkeeping.

Measurement-based gadgets implement their target only up to a Pauli
byproduct that depends on the outcomes.  Rewrites record each byproduct at
the point where it arises and *push* it to the trailing correction block:
Cliffords conjugate it, measurements it anticommutes with get their
recorded outcome reinterpreted (every later condition that reads that bit
is XORed with the byproduct's own condition), and destructive measurements
drop the component on the measured qubit.

Conditions are parity sets of classical bits; the member ``ONE`` (-1) is
the constant 1, and ``None`` means unconditional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circuit import DESTRUCTIVE, PREPS, Circuit, CircuitError, Instruction, Op
from .pauli import CLIFFORD_ACTION, PAULI_MATRICES, classify_angle, AngleKind

ONE = -1

# --- frozen byproduct tables ------------------------------------------------
# Entries: measurement role -> Paulis (letter, operand role) toggled when the
# measurement reads 1.  Derived with verify.derive_corrections on the bare
# gadgets and checked against it in the test suite.

LS_BYPRODUCTS: dict[str, dict[str, tuple[tuple[str, str], ...]]] = {
    # PrepZ(a); MeasXX(a,t) -> xx; MeasZZ(c,a) -> zz; MeasX(a) -> meas
    "LS1": {"xx": (("Z", "control"),), "zz": (("X", "target"),), "meas": (("Z", "control"),)},
    # PrepX(a); MeasZZ(c,a) -> zz; MeasXX(a,t) -> xx; MeasZ(a) -> meas
    "LS2": {"zz": (("X", "target"),), "xx": (("Z", "control"),), "meas": (("X", "target"),)},
}

# ROT: the joint (P x Z_theta) parity selects the 2*theta repair rotation,
# the X readout of the theta ancilla leaves P itself as byproduct.
ROT_BYPRODUCTS = {"parity": "rotate", "meas": "pauli"}

# MeasB;PrepB -> OvalB leaves the eigenstate of the outcome: flip with the
# conjugate Pauli.
MR_BYPRODUCT = {"X": "Z", "Z": "X"}


class FrameError(ValueError):
    """A byproduct cannot be pushed through an instruction as a Pauli."""


# --- Pauli arithmetic -------------------------------------------------------

_XZ = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_FROM_XZ = {v: k for k, v in _XZ.items()}


def mul_letters(a: str, b: str) -> str:
    xa, za = _XZ[a]
    xb, zb = _XZ[b]
    return _FROM_XZ[(xa ^ xb, za ^ zb)]


def letters_anticommute(a: str, b: str) -> bool:
    return a != "I" and b != "I" and a != b


def anticommutes(p: dict[int, str], q: dict[int, str]) -> bool:
    n = sum(1 for k, a in p.items() if letters_anticommute(a, q.get(k, "I")))
    return n % 2 == 1


@lru_cache(maxsize=None)
def _cnot_table() -> dict[tuple[str, str], tuple[int, str, str]]:
    # little-endian: control is bit 0, target bit 1
    cnot = np.zeros((4, 4), dtype=complex)
    for b in range(4):
        c, t = b & 1, (b >> 1) & 1
        cnot[c | ((t ^ c) << 1), b] = 1
    table = {}
    for lc in "IXYZ":
        for lt in "IXYZ":
            m = np.kron(PAULI_MATRICES[lt], PAULI_MATRICES[lc])
            out = cnot @ m @ cnot.conj().T
            for nc in "IXYZ":
                for nt in "IXYZ":
                    ref = np.kron(PAULI_MATRICES[nt], PAULI_MATRICES[nc])
                    for sign in (1, -1):
                        if np.allclose(out, sign * ref):
                            table[(lc, lt)] = (sign, nc, nt)
    return table


def _clean(p: dict[int, str]) -> dict[int, str]:
    return {q: a for q, a in p.items() if a != "I"}


def conjugate(p: dict[int, str], ins: Instruction) -> tuple[int, dict[int, str]]:
    """Heisenberg-push a signed Pauli forward through a unitary Clifford.

    Returns ``(sign, p')`` with ``U p U^dagger = sign * p'``.
    """
    p = dict(p)
    sign = 1
    if ins.op is Op.CLIFFORD1Q:
        q = ins.qubits[0]
        if q in p:
            s, letter = CLIFFORD_ACTION[ins.clifford][p[q]]
            sign *= s
            p[q] = letter
    elif ins.op is Op.CNOT:
        c, t = ins.qubits
        s, nc, nt = _cnot_table()[(p.get(c, "I"), p.get(t, "I"))]
        sign *= s
        p[c], p[t] = nc, nt
    elif ins.op is Op.RZ:
        if p.get(ins.qubits[0], "I") in "XY":
            raise FrameError(f"Pauli byproduct does not commute with {ins.label()}")
    elif ins.op is Op.PAULI_EXP:
        node = dict(zip(ins.qubits, ins.pauli))
        if anticommutes(p, node):
            if classify_angle(ins.angle) is not AngleKind.CLIFFORD:
                raise FrameError(f"byproduct anticommutes with non-Clifford {ins.label()}")
            sign = -sign
    else:
        raise FrameError(f"cannot conjugate through {ins.op.value}")
    return sign, _clean(p)


def parity_xor(a: frozenset[int], b: frozenset[int]) -> frozenset[int]:
    return frozenset(a) ^ frozenset(b)


def _as_set(cond: frozenset[int] | None) -> frozenset[int]:
    return frozenset({ONE}) if cond is None else frozenset(cond)


def _as_cond(s: frozenset[int]) -> frozenset[int] | None:
    return None if s == frozenset({ONE}) else frozenset(s)


def evaluate_cond(cond: frozenset[int] | None, outcomes: dict[int, int]) -> int:
    if cond is None:
        return 1
    v = 0
    for k in cond:
        v ^= 1 if k == ONE else outcomes.get(k, 0)
    return v


# --- correction block -------------------------------------------------------


def _split_block(block: tuple[Instruction, ...]):
    """Leading run of CorrPauli (as per-qubit x/z parity sets) and the rest."""
    xs: dict[int, frozenset[int]] = {}
    zs: dict[int, frozenset[int]] = {}
    k = 0
    while k < len(block) and block[k].op is Op.CORR_PAULI:
        ins = block[k]
        q = ins.qubits[0]
        letter = ins.pauli
        cond = _as_set(ins.cond)
        if letter in "XY":
            xs[q] = xs[q] ^ cond if q in xs else cond
        if letter in "ZY":
            zs[q] = zs[q] ^ cond if q in zs else cond
        k += 1
    return xs, zs, list(block[k:])


def _emit_paulis(xs: dict[int, frozenset[int]], zs: dict[int, frozenset[int]], old=()) -> list[Instruction]:
    # instructions in ``old`` are reused when their condition is unchanged
    reuse = {(i.qubits[0], i.pauli, i.cond): i for i in old if i.op is Op.CORR_PAULI}
    out = []
    for q in sorted(set(xs) | set(zs)):
        for letter, table in (("X", xs), ("Z", zs)):
            cond = table.get(q, frozenset())
            if cond:
                cond = _as_cond(cond)
                ins = reuse.get((q, letter, cond))
                out.append(ins or Instruction(Op.CORR_PAULI, (q,), pauli=letter, cond=cond))
    return out


def canonical_corrections(c: Circuit) -> Circuit:
    start = c.correction_start()
    xs, zs, rest = _split_block(c.instructions[start:])
    return c.derive(c.instructions[:start] + tuple(_emit_paulis(xs, zs)) + tuple(rest))


def _substitute(cond: frozenset[int] | None, mapping: dict[int, frozenset[int]]) -> frozenset[int] | None:
    if cond is None:
        return None
    hits = cond & mapping.keys()
    if not hits:
        return cond
    acc = set(cond)
    for k in hits:
        acc.discard(k)
    for k in hits:
        acc.symmetric_difference_update(mapping[k])
    out = frozenset(acc)
    return _as_cond(out) if out else out


def substitute_cbits(c: Circuit, mapping: dict[int, frozenset[int]]) -> Circuit:
    """Rewrite every condition with ``cbit -> parity set`` (empty set means 0)."""
    if not mapping:
        return c
    keys = mapping.keys()
    ins = [
        i if i.cond is None or i.cond.isdisjoint(keys)
        else Instruction(i.op, i.qubits, i.cbit, i.angle, _substitute(i.cond, mapping), i.pauli, i.clifford)
        for i in c.instructions
    ]
    return c.derive(ins)


def _walk(c: Circuit, index: int, pauli: dict[int, str], rotation: bool):
    """Propagate ``pauli`` from before instruction ``index`` to the body's end."""
    start = c.correction_start()
    if index > start:
        raise FrameError("byproducts must arise before the correction block")
    cur = _clean(pauli)
    sign = 1
    flipped: list[int] = []
    for k in range(index, start):
        ins = c.instructions[k]
        if not any(q in cur for q in ins.qubits):
            continue
        if ins.op in PREPS:
            raise FrameError(f"byproduct acts on qubit {ins.qubits[0]} before its preparation")
        if ins.is_measurement:
            if anticommutes(cur, ins.measured_pauli()):
                if rotation:
                    raise FrameError(f"rotation does not commute with {ins.label()}")
                flipped.append(ins.cbit)
            if ins.op in DESTRUCTIVE:
                if rotation:
                    raise FrameError(f"rotation acts on measured-out qubit {ins.qubits[0]}")
                cur.pop(ins.qubits[0], None)
            continue
        s, cur = conjugate(cur, ins)
        sign *= s
    return sign, cur, flipped, start


def push_byproduct(
    c: Circuit,
    index: int,
    pauli: dict[int, str],
    cond: frozenset[int] | None,
    flips: dict[int, frozenset[int]] | None = None,
) -> Circuit:
    """Account for a conditional Pauli that acts just before instruction ``index``.

    When ``flips`` is given, every reinterpreted cbit ``k`` is recorded
    there as the parity set its old meaning now reads as.
    """
    cond_set = _as_set(cond)
    if not cond_set or not _clean(pauli):
        return c
    _, cur, flipped, start = _walk(c, index, pauli, rotation=False)
    c = substitute_cbits(c, {k: parity_xor(frozenset({k}), cond_set) for k in flipped})
    if flips is not None:
        for k in flipped:
            flips[k] = parity_xor(flips.get(k, frozenset({k})), cond_set)
    xs, zs, rest = _split_block(c.instructions[start:])
    for q, letter in cur.items():
        if letter in "XY":
            xs[q] = parity_xor(xs.get(q, frozenset()), cond_set)
        if letter in "ZY":
            zs[q] = parity_xor(zs.get(q, frozenset()), cond_set)
    block = c.instructions[start:]
    return c.derive(c.instructions[:start] + tuple(_emit_paulis(xs, zs, block)) + tuple(rest))


def push_rotation(c: Circuit, index: int, pauli: dict[int, str], angle: float, cond: frozenset[int] | None) -> Circuit:
    """Append the conditional repair rotation ``exp(i*angle*P)``, conjugated to the end."""
    sign, cur, _, start = _walk(c, index, pauli, rotation=True)
    qubits = tuple(sorted(cur))
    ins = Instruction(
        Op.CORR_RZ2THETA,
        qubits,
        angle=sign * angle,
        pauli="".join(cur[q] for q in qubits),
        cond=cond,
    )
    # The repair undoes something that happened in the body, so it has to act
    # before the corrections already queued.  It may follow the leading Pauli
    # run only where it commutes with every entry of that run.
    block = c.instructions[start:]
    _, _, rest = _split_block(block)
    lead = len(block) - len(rest)
    if any(anticommutes(cur, dict(zip(p.qubits, p.pauli))) for p in block[:lead]):
        lead = 0
    at = start + lead
    return c.derive(c.instructions[:at] + (ins,) + c.instructions[at:])


# --- frame and tables -------------------------------------------------------


@dataclass(frozen=True)
class Byproduct:
    x: frozenset[int] = frozenset()
    z: frozenset[int] = frozenset()
    rotate: bool = False

    def __xor__(self, other: Byproduct) -> Byproduct:
        return Byproduct(self.x ^ other.x, self.z ^ other.z, self.rotate != other.rotate)

    @property
    def is_identity(self) -> bool:
        return not self.x and not self.z and not self.rotate


@dataclass(frozen=True)
class CorrectionTable:
    """Per-cbit byproducts: outcome 1 on cbit ``k`` toggles ``entries[k]``.

    ``entries[ONE]`` holds the outcome-independent part.
    """

    entries: dict[int, Byproduct] = field(default_factory=dict)

    def byproduct(self, cbit: int) -> Byproduct:
        return self.entries.get(cbit, Byproduct())

    def for_outcomes(self, outcomes: dict[int, int]) -> Byproduct:
        acc = self.byproduct(ONE)
        for k, v in outcomes.items():
            if v:
                acc = acc ^ self.byproduct(k)
        return acc

    @classmethod
    def from_circuit(cls, c: Circuit) -> CorrectionTable:
        entries: dict[int, Byproduct] = {}

        def add(k: int, b: Byproduct):
            entries[k] = entries.get(k, Byproduct()) ^ b

        for ins in c.corrections():
            conds = _as_set(ins.cond)
            if ins.op is Op.CORR_PAULI:
                q = ins.qubits[0]
                b = Byproduct(
                    frozenset({q}) if ins.pauli in "XY" else frozenset(),
                    frozenset({q}) if ins.pauli in "ZY" else frozenset(),
                )
            else:
                b = Byproduct(rotate=True)
            for k in conds:
                add(k, b)
        return cls({k: v for k, v in entries.items() if not v.is_identity})


def install_corrections(c: Circuit, table: CorrectionTable, rotation: Instruction | None = None) -> Circuit:
    """Replace the correction block of ``c`` with the one encoded by ``table``.

    ``rotation`` is a template CorrRz2Theta whose condition gets filled in.
    """
    xs: dict[int, frozenset[int]] = {}
    zs: dict[int, frozenset[int]] = {}
    rot: frozenset[int] = frozenset()
    for k, b in table.entries.items():
        for q in b.x:
            xs[q] = xs.get(q, frozenset()) ^ {k}
        for q in b.z:
            zs[q] = zs.get(q, frozenset()) ^ {k}
        if b.rotate:
            rot = rot ^ {k}
    block = _emit_paulis(xs, zs)
    if rot:
        if rotation is None:
            raise CircuitError("table asks for a repair rotation but no template was given")
        block.append(Instruction(Op.CORR_RZ2THETA, rotation.qubits, angle=rotation.angle, pauli=rotation.pauli, cond=_as_cond(rot)))
    return c.with_instructions(c.body() + tuple(block))


@dataclass(frozen=True)
class PauliFrame:
    x: tuple[int, ...]
    z: tuple[int, ...]
    pending_2theta: bool = False

    @classmethod
    def empty(cls, num_qubits: int) -> PauliFrame:
        return cls((0,) * num_qubits, (0,) * num_qubits)

    def apply(self, b: Byproduct) -> PauliFrame:
        x = list(self.x)
        z = list(self.z)
        for q in b.x:
            x[q] ^= 1
        for q in b.z:
            z[q] ^= 1
        return PauliFrame(tuple(x), tuple(z), self.pending_2theta != b.rotate)


def frame_update(frame: PauliFrame, instr: Instruction, outcome: int, table: CorrectionTable) -> PauliFrame:
    """Fold the byproduct of one measurement outcome into ``frame``."""
    if not instr.is_measurement:
        raise CircuitError(f"frame_update needs a measurement, got {instr.op.value}")
    if outcome not in (0, 1):
        raise ValueError("outcome must be a bit")
    if outcome == 0:
        return frame
    return frame.apply(table.byproduct(instr.cbit))
