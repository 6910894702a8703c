"""Circuit intermediate representation.

A circuit is an immutable roster of qubits (each with a role and a position
on a line) plus an ordered instruction list.  Measurement results go into
single-assignment classical bits; corrections are conditioned on the parity
(XOR) of a set of classical bits.
"""

from __future__ import annotations

import bisect
import enum
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

from .pauli import CLIFFORD_ACTION, clifford_name


class Op(str, enum.Enum):
    PREP_Z = "PrepZ"
    PREP_X = "PrepX"
    PREP_THETA = "PrepTheta"
    CLIFFORD1Q = "Clifford1Q"
    RZ = "Rz"
    CNOT = "CNOT"
    MEAS_X = "MeasX"
    MEAS_Z = "MeasZ"
    MEAS_XX = "MeasXX"
    MEAS_ZZ = "MeasZZ"
    OVAL_X = "OvalX"
    OVAL_Z = "OvalZ"
    CORR_PAULI = "CorrPauli"
    CORR_RZ2THETA = "CorrRz2Theta"
    # rewrite-time nodes; the decomposer never emits them in its final output
    PAULI_EXP = "PauliExp"
    MEAS_PAULI = "MeasPauli"


PREPS = frozenset({Op.PREP_Z, Op.PREP_X, Op.PREP_THETA})
MEASUREMENTS = frozenset(
    {Op.MEAS_X, Op.MEAS_Z, Op.MEAS_XX, Op.MEAS_ZZ, Op.OVAL_X, Op.OVAL_Z, Op.MEAS_PAULI}
)
DESTRUCTIVE = frozenset({Op.MEAS_X, Op.MEAS_Z})
TWO_BODY = frozenset({Op.MEAS_XX, Op.MEAS_ZZ})
CORRECTIONS = frozenset({Op.CORR_PAULI, Op.CORR_RZ2THETA})

_ARITY = {
    Op.PREP_Z: 1, Op.PREP_X: 1, Op.PREP_THETA: 1, Op.CLIFFORD1Q: 1, Op.RZ: 1,
    Op.CNOT: 2, Op.MEAS_X: 1, Op.MEAS_Z: 1, Op.MEAS_XX: 2, Op.MEAS_ZZ: 2,
    Op.OVAL_X: 1, Op.OVAL_Z: 1, Op.CORR_PAULI: 1,
}

ROLES = ("data", "ancilla", "theta")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    op: Op
    qubits: tuple[int, ...]
    cbit: int | None = None
    angle: float | None = None
    cond: frozenset[int] | None = None
    pauli: str | None = None
    clifford: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "op", Op(self.op))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.cond is not None:
            object.__setattr__(self, "cond", frozenset(self.cond))
        arity = _ARITY.get(self.op)
        if arity is not None and len(self.qubits) != arity:
            raise CircuitError(f"{self.op.value} takes {arity} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.op.value} has repeated operands {self.qubits}")
        if not self.qubits:
            raise CircuitError(f"{self.op.value} needs operands")
        if (self.op in MEASUREMENTS) != (self.cbit is not None):
            raise CircuitError(f"{self.op.value}: measurements and only measurements own a cbit")
        if self.op in (Op.PAULI_EXP, Op.MEAS_PAULI, Op.CORR_RZ2THETA, Op.CORR_PAULI):
            if self.pauli is None or len(self.pauli) != len(self.qubits):
                raise CircuitError(f"{self.op.value} needs one Pauli letter per operand")
        if self.op is Op.CLIFFORD1Q and self.clifford is None:
            raise CircuitError("Clifford1Q needs a clifford id")
        if self.op in (Op.PREP_THETA, Op.RZ, Op.PAULI_EXP, Op.CORR_RZ2THETA) and self.angle is None:
            raise CircuitError(f"{self.op.value} needs an angle")

    @property
    def is_measurement(self) -> bool:
        return self.op in MEASUREMENTS

    @property
    def is_correction(self) -> bool:
        return self.op in CORRECTIONS

    def measured_pauli(self) -> dict[int, str]:
        """Pauli operator observed by a measurement instruction, by qubit."""
        op = self.op
        if op in (Op.MEAS_X, Op.OVAL_X, Op.MEAS_XX):
            return {q: "X" for q in self.qubits}
        if op in (Op.MEAS_Z, Op.OVAL_Z, Op.MEAS_ZZ):
            return {q: "Z" for q in self.qubits}
        if op is Op.MEAS_PAULI:
            return dict(zip(self.qubits, self.pauli))
        raise CircuitError(f"{op.value} is not a measurement")

    def label(self) -> str:
        args = ",".join(str(q) for q in self.qubits)
        extra = ""
        if self.op is Op.CLIFFORD1Q:
            extra = f"[{clifford_name(self.clifford)}]"
        elif self.pauli is not None:
            extra = f"[{self.pauli}]"
        if self.angle is not None:
            extra += f"({self.angle:.6g})"
        tail = ""
        if self.cbit is not None:
            tail = f" -> c{self.cbit}"
        if self.cond is not None:
            tail = " if " + ("^".join("1" if k < 0 else f"c{k}" for k in sorted(self.cond)) or "0")
        return f"{self.op.value}{extra}({args}){tail}"


@dataclass(frozen=True)
class Qubit:
    id: int
    role: str
    pos: int


@dataclass(frozen=True)
class Circuit:
    qubits: tuple[Qubit, ...] = ()
    instructions: tuple[Instruction, ...] = ()
    num_cbits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "instructions", tuple(self.instructions))
        for k, q in enumerate(self.qubits):
            if q.id != k:
                raise CircuitError("qubit ids must be 0..N-1 in roster order")
            if q.role not in ROLES:
                raise CircuitError(f"unknown role {q.role!r}")
        positions = [q.pos for q in self.qubits]
        if len(set(positions)) != len(positions):
            raise CircuitError("two qubits share a linear position")
        seen: set[int] = set()
        n = len(self.qubits)
        for ins in self.instructions:
            if min(ins.qubits) < 0 or max(ins.qubits) >= n:
                raise CircuitError(f"{ins.label()} uses unknown qubit")
            if ins.cbit is not None:
                if not 0 <= ins.cbit < self.num_cbits:
                    raise CircuitError(f"{ins.label()} writes unallocated cbit")
                if ins.cbit in seen:
                    raise CircuitError(f"cbit c{ins.cbit} assigned twice")
                seen.add(ins.cbit)
            if ins.cond and (min(ins.cond) < -1 or max(ins.cond) >= self.num_cbits):
                raise CircuitError(f"{ins.label()} reads unallocated cbit")

    # --- roster helpers ---------------------------------------------------

    def role(self, q: int) -> str:
        return self.qubits[q].role

    def ids_with_role(self, role: str) -> list[int]:
        return [q.id for q in self.qubits if q.role == role]

    @property
    def data_qubits(self) -> list[int]:
        return self.ids_with_role("data")

    @property
    def num_data(self) -> int:
        return len(self.data_qubits)

    def qubit_at(self, pos: int) -> int | None:
        for q in self.qubits:
            if q.pos == pos:
                return q.id
        return None

    def with_qubit(self, role: str, pos: int | None = None) -> tuple[Circuit, int]:
        if pos is None:
            pos = max((q.pos for q in self.qubits), default=-1) + 1
        if any(q.pos == pos for q in self.qubits):
            raise CircuitError(f"position {pos} is taken")
        new = Qubit(len(self.qubits), role, pos)
        return _unchecked(self.qubits + (new,), self.instructions, self.num_cbits), new.id

    def with_cbits(self, count: int) -> tuple[Circuit, list[int]]:
        ids = list(range(self.num_cbits, self.num_cbits + count))
        return _unchecked(self.qubits, self.instructions, self.num_cbits + count), ids

    def with_instructions(self, instructions: Iterable[Instruction]) -> Circuit:
        return replace(self, instructions=tuple(instructions))

    def derive(self, instructions: Iterable[Instruction]) -> Circuit:
        """Like :meth:`with_instructions` but skips validation.

        For internal rewrites whose results are validated once at the end.
        """
        return _unchecked(self.qubits, tuple(instructions), self.num_cbits)

    def validated(self) -> Circuit:
        return Circuit(self.qubits, self.instructions, self.num_cbits)

    # --- instruction helpers ---------------------------------------------

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def correction_start(self) -> int:
        """Index of the trailing correction block (``len`` if there is none)."""
        k = len(self.instructions)
        while k > 0 and self.instructions[k - 1].is_correction:
            k -= 1
        return k

    def body(self) -> tuple[Instruction, ...]:
        return self.instructions[: self.correction_start()]

    def corrections(self) -> tuple[Instruction, ...]:
        return self.instructions[self.correction_start():]

    def _positions(self, q: int) -> list[int]:
        index = self.__dict__.get("_qindex")
        if index is None:
            index = {}
            for k, ins in enumerate(self.instructions):
                for u in ins.qubits:
                    index.setdefault(u, []).append(k)
            object.__setattr__(self, "_qindex", index)
        return index.get(q, [])

    def next_on(self, q: int, start: int) -> int | None:
        """First instruction at or after ``start`` that touches ``q``."""
        pos = self._positions(q)
        k = bisect.bisect_left(pos, start)
        return pos[k] if k < len(pos) else None

    def prev_on(self, q: int, start: int) -> int | None:
        """Last instruction at or before ``start`` that touches ``q``."""
        pos = self._positions(q)
        k = bisect.bisect_right(pos, start)
        return pos[k - 1] if k else None

    def measured_cbits(self) -> list[int]:
        return [ins.cbit for ins in self.instructions if ins.cbit is not None]

    def summary(self) -> str:
        return "\n".join(f"{k:4d}  {ins.label()}" for k, ins in enumerate(self.instructions))

    # --- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "qubits": [{"id": q.id, "role": q.role, "pos": q.pos} for q in self.qubits],
            "cbits": self.num_cbits,
            "instructions": [_instruction_to_dict(ins) for ins in self.instructions],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return dumps_with_angles(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> Circuit:
        qubits = tuple(Qubit(int(q["id"]), q["role"], int(q["pos"])) for q in data["qubits"])
        instructions = tuple(_instruction_from_dict(d) for d in data["instructions"])
        return cls(qubits, instructions, int(data["cbits"]))

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        return cls.from_dict(json.loads(text))


def _instruction_to_dict(ins: Instruction) -> dict:
    out: dict = {"op": ins.op.value, "qubits": list(ins.qubits)}
    if ins.cbit is not None:
        out["cbit"] = ins.cbit
    if ins.angle is not None:
        out["angle"] = _AngleLiteral(ins.angle)
    if ins.cond is not None:
        out["cond"] = sorted(ins.cond)
    if ins.pauli is not None:
        out["pauli"] = ins.pauli
    if ins.clifford is not None:
        out["clifford"] = ins.clifford
    return out


def _instruction_from_dict(d: dict) -> Instruction:
    return Instruction(
        op=Op(d["op"]),
        qubits=tuple(d["qubits"]),
        cbit=d.get("cbit"),
        angle=None if d.get("angle") is None else float(d["angle"]),
        cond=None if d.get("cond") is None else frozenset(d["cond"]),
        pauli=d.get("pauli"),
        clifford=d.get("clifford"),
    )


class _AngleLiteral(float):
    pass


def _unchecked(qubits, instructions, num_cbits) -> Circuit:
    new = object.__new__(Circuit)
    object.__setattr__(new, "qubits", qubits)
    object.__setattr__(new, "instructions", instructions)
    object.__setattr__(new, "num_cbits", num_cbits)
    return new


def dumps_with_angles(obj, indent: int | None = 2) -> str:
    """``json.dumps`` that writes angle values with 17 significant digits."""
    literals: list[float] = []

    def swap(node):
        if isinstance(node, _AngleLiteral):
            literals.append(float(node))
            return f"@@angle{len(literals) - 1}@@"
        if isinstance(node, dict):
            return {k: swap(v) for k, v in node.items()}
        if isinstance(node, list):
            return [swap(v) for v in node]
        return node

    text = json.dumps(swap(obj), indent=indent)
    for k, value in enumerate(literals):
        text = text.replace(f'"@@angle{k}@@"', format(value, ".17g"))
    return text


# --- analysis -------------------------------------------------------------


@dataclass(frozen=True)
class DepthReport:
    total_layers: int
    two_body_layers: int
    max_ancillas: int
    theta_ancillas: int
    lnn_violations: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "total_layers": self.total_layers,
            "two_body_layers": self.two_body_layers,
            "max_ancillas": self.max_ancillas,
            "theta_ancillas": self.theta_ancillas,
            "lnn_violations": list(self.lnn_violations),
        }


def layers(c: Circuit) -> list[list[int]]:
    """ASAP layering of the non-correction instructions (indices per layer)."""
    ready = [0] * len(c.qubits)
    out: list[list[int]] = []
    for k, ins in enumerate(c.instructions):
        if ins.is_correction:
            continue
        layer = max(ready[q] for q in ins.qubits)
        if layer == len(out):
            out.append([])
        out[layer].append(k)
        for q in ins.qubits:
            ready[q] = layer + 1
    return out


def compute_depth(c: Circuit) -> DepthReport:
    lay = layers(c)
    two_body = sum(1 for layer in lay if any(c.instructions[k].op in TWO_BODY for k in layer))
    return DepthReport(
        total_layers=len(lay),
        two_body_layers=two_body,
        max_ancillas=len(c.ids_with_role("ancilla")),
        theta_ancillas=len(c.ids_with_role("theta")),
        lnn_violations=tuple(check_lnn(c)),
    )


def check_lnn(c: Circuit) -> list[str]:
    """Multi-qubit instructions whose operands are not nearest neighbours.

    Corrections are classical frame updates and are not checked.
    """
    bad = []
    for k, ins in enumerate(c.instructions):
        if ins.is_correction or len(ins.qubits) < 2:
            continue
        pos = sorted(c.qubits[q].pos for q in ins.qubits)
        if len(pos) > 2 or pos[1] - pos[0] != 1:
            bad.append(f"#{k} {ins.label()} at positions {pos}")
    return bad


def clifford_commutes(cid: int, letter: str) -> bool:
    return CLIFFORD_ACTION[cid][letter][1] == letter
