"""Local rewrite rules over circuits.

Every rule is a pure ``Circuit -> Circuit`` function applied at a
:class:`RewriteSite` found by :func:`find_sites`.  Rules that introduce
measurement-based gadgets record their Pauli byproducts in the trailing
correction block through :mod:`pauliforge.frame`.

Two intermediate node kinds carry the not-yet-lowered parts of the
computation: ``PauliExp`` (a Pauli exponential) and ``MeasPauli`` (a
multi-qubit Pauli measurement).  Nodes that reach two qubits are lowered on
the spot to the native alphabet (see :func:`lower_node`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator

from .circuit import DESTRUCTIVE, Circuit, Instruction, Op
from .frame import (
    LS_BYPRODUCTS,
    MR_BYPRODUCT,
    FrameError,
    conjugate,
    push_byproduct,
    push_rotation,
    substitute_cbits,
)
from .pauli import CLIFFORD_IDS, Angle, AngleKind, classify_angle


class RuleName(str, enum.Enum):
    ROT = "ROT"
    PG = "PG"
    LS1 = "LS1"
    LS2 = "LS2"
    MR = "MR"
    FUSE = "FUSE"
    XXC = "XXC"
    ZZC = "ZZC"
    REMX = "REMX"
    REMZ = "REMZ"
    CNOT_COMM = "CNOT_COMM"


class RewriteError(ValueError):
    """The site does not match the rule's pattern."""


@dataclass(frozen=True)
class RewriteSite:
    rule: RuleName
    span: tuple[int, int]
    binding: dict[str, int] = field(default_factory=dict, hash=False, compare=True)
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rule", RuleName(self.rule))
        if len(set(self.binding.values())) != len(self.binding):
            raise ValueError("site binding must be injective")

    def to_dict(self) -> dict:
        return {
            "rule": self.rule.value,
            "span": list(self.span),
            "binding": dict(self.binding),
            "indices": list(self.indices),
        }


def _site(rule: RuleName, indices, binding) -> RewriteSite:
    indices = tuple(indices)
    return RewriteSite(rule, (min(indices), max(indices) + 1), dict(binding), indices)


# --- helpers ----------------------------------------------------------------


def _replace(c: Circuit, removed: set[int], inserts: dict[int, list[Instruction]]) -> Circuit:
    """Drop ``removed`` indices and insert lists before the given indices."""
    out: list[Instruction] = []
    for k, ins in enumerate(c.instructions):
        out.extend(inserts.get(k, ()))
        if k not in removed:
            out.append(ins)
    out.extend(inserts.get(len(c.instructions), ()))
    return c.derive(out)


def _is_z_form(letters: str) -> bool:
    return set(letters) <= {"Z"}


def lower_node(ins: Instruction) -> list[Instruction]:
    """Native form of a node that has shrunk far enough, else the node itself."""
    if ins.op is Op.MEAS_PAULI and len(ins.qubits) == 2:
        if ins.pauli == "ZZ":
            return [Instruction(Op.MEAS_ZZ, ins.qubits, cbit=ins.cbit)]
        if ins.pauli == "XX":
            return [Instruction(Op.MEAS_XX, ins.qubits, cbit=ins.cbit)]
    if ins.op is Op.PAULI_EXP and _is_z_form(ins.pauli):
        kind = classify_angle(ins.angle)
        if kind is AngleKind.CLIFFORD and len(ins.qubits) <= 2:
            # exp(i*pi/2*P) = i*P
            return [Instruction(Op.CLIFFORD1Q, (q,), clifford=CLIFFORD_IDS["Z"]) for q in ins.qubits]
        if len(ins.qubits) == 1:
            # exp(i*theta*Z) = Rz(-2*theta)
            return [Instruction(Op.RZ, ins.qubits, angle=-2.0 * ins.angle)]
    return [ins]


def _free_at(c: Circuit, q: int, idx: int) -> bool:
    """``q`` holds no live state at ``idx`` and is unused afterwards."""
    if c.role(q) == "data":
        return False
    body_end = c.correction_start()
    for k in range(idx, body_end):
        if q in c.instructions[k].qubits:
            return False
    prev = c.prev_on(q, idx - 1)
    return prev is None or c.instructions[prev].op in DESTRUCTIVE


def _ancilla_between(c: Circuit, idx: int, a: int, b: int) -> tuple[Circuit, int]:
    """Recycle a free ancilla between ``a`` and ``b`` on the line, or allocate one."""
    lo, hi = sorted((c.qubits[a].pos, c.qubits[b].pos))
    mid = (lo + hi) / 2
    between = [q for q in c.ids_with_role("ancilla") if lo < c.qubits[q].pos < hi]
    for q in sorted(between, key=lambda q: (abs(c.qubits[q].pos - mid), c.qubits[q].pos)):
        if _free_at(c, q, idx):
            return c, q
    taken = {q.pos for q in c.qubits}
    open_slots = [p for p in range(lo + 1, hi) if p not in taken]
    if open_slots:
        pos = min(open_slots, key=lambda p: (abs(p - mid), p))
        return c.with_qubit("ancilla", pos)
    for q in c.ids_with_role("ancilla"):
        if _free_at(c, q, idx):
            return c, q
    return c.with_qubit("ancilla")


def _any_free_ancilla(c: Circuit, idx: int) -> tuple[Circuit, int]:
    for q in c.ids_with_role("ancilla"):
        if _free_at(c, q, idx):
            return c, q
    return c.with_qubit("ancilla")


def _check(cond: bool, message: str):
    if not cond:
        raise RewriteError(message)


def _at(c: Circuit, site: RewriteSite, k: int) -> Instruction:
    _check(0 <= site.indices[k] < len(c.instructions), "site index out of range")
    return c.instructions[site.indices[k]]


# --- ROT --------------------------------------------------------------------


def apply_rot(c: Circuit, site: RewriteSite, flips: dict[int, frozenset[int]] | None = None) -> Circuit:
    """Teleport the rotation of a ``PauliExp`` node through a |theta> ancilla.

    The node's string gains a ``Z`` on the new ancilla and becomes a parity
    measurement; the ancilla is then read out in the X basis.
    """
    idx = site.indices[0]
    node = _at(c, site, 0)
    _check(node.op is Op.PAULI_EXP, "ROT needs a PauliExp node")
    theta = Angle.of(node.angle)
    _check(theta.kind is not AngleKind.CLIFFORD, "ROT is not used for Clifford angles")
    last = node.qubits[-1]
    pos = c.qubits[last].pos + 1
    c, t = c.with_qubit("theta", pos if c.qubit_at(pos) is None else None)
    c, (m, s) = c.with_cbits(2)
    meas = Instruction(Op.MEAS_PAULI, node.qubits + (t,), cbit=m, pauli=node.pauli + "Z")
    gadget = [
        Instruction(Op.PREP_THETA, (t,), angle=theta.value),
        *lower_node(meas),
        Instruction(Op.MEAS_X, (t,), cbit=s),
    ]
    c = _replace(c, {idx}, {idx: gadget})
    after = idx + len(gadget)
    support = dict(zip(node.qubits, node.pauli))
    # X readout: the byproduct is P itself
    c = push_byproduct(c, after, support, frozenset({s}), flips)
    # parity outcome 1 teleports exp(-i*theta*P): repair with exp(2i*theta*P)
    return push_rotation(c, after, support, theta.corrective, frozenset({m}))


# --- PG ---------------------------------------------------------------------


def apply_pg(c: Circuit, site: RewriteSite) -> Circuit:
    """Peel the first qubit off a Z-form node with a CNOT pair."""
    idx = site.indices[0]
    node = _at(c, site, 0)
    _check(node.op in (Op.PAULI_EXP, Op.MEAS_PAULI), "PG needs a PauliExp or MeasPauli node")
    _check(len(node.qubits) >= 2, "PG needs a node over at least two qubits")
    _check(_is_z_form(node.pauli), "PG needs a Z-form node")
    q0, q1 = node.qubits[0], node.qubits[1]
    inner = Instruction(node.op, node.qubits[1:], cbit=node.cbit, angle=node.angle, pauli=node.pauli[1:])
    cx = Instruction(Op.CNOT, (q0, q1))
    return _replace(c, {idx}, {idx: [cx, *lower_node(inner), cx]})


# --- LS ---------------------------------------------------------------------


def apply_ls(
    c: Circuit,
    site: RewriteSite,
    variant: RuleName | str | None = None,
    flips: dict[int, frozenset[int]] | None = None,
) -> Circuit:
    """Replace a CNOT by an ancilla, one XX and one ZZ parity measurement."""
    variant = RuleName(variant or site.rule)
    _check(variant in (RuleName.LS1, RuleName.LS2), "LS variant must be LS1 or LS2")
    idx = site.indices[0]
    cx = _at(c, site, 0)
    _check(cx.op is Op.CNOT, "LS needs a CNOT")
    ctrl, targ = cx.qubits
    c, a = _ancilla_between(c, idx, ctrl, targ)
    c, (xx, zz, m) = c.with_cbits(3)
    if variant is RuleName.LS1:
        gadget = [
            Instruction(Op.PREP_Z, (a,)),
            Instruction(Op.MEAS_XX, (a, targ), cbit=xx),
            Instruction(Op.MEAS_ZZ, (ctrl, a), cbit=zz),
            Instruction(Op.MEAS_X, (a,), cbit=m),
        ]
    else:
        gadget = [
            Instruction(Op.PREP_X, (a,)),
            Instruction(Op.MEAS_ZZ, (ctrl, a), cbit=zz),
            Instruction(Op.MEAS_XX, (a, targ), cbit=xx),
            Instruction(Op.MEAS_Z, (a,), cbit=m),
        ]
    c = _replace(c, {idx}, {idx: gadget})
    after = idx + len(gadget)
    roles = {"control": ctrl, "target": targ}
    cbits = {"xx": xx, "zz": zz, "meas": m}
    for key, effects in LS_BYPRODUCTS[variant.value].items():
        for letter, role in effects:
            c = push_byproduct(c, after, {roles[role]: letter}, frozenset({cbits[key]}), flips)
    return c


# --- MR ---------------------------------------------------------------------

_MEAS_PREP = {Op.MEAS_X: (Op.PREP_X, Op.OVAL_X, "X"), Op.MEAS_Z: (Op.PREP_Z, Op.OVAL_Z, "Z")}


def apply_mr(c: Circuit, site: RewriteSite, flips: dict[int, frozenset[int]] | None = None) -> Circuit:
    """Merge a measurement and the same-basis re-preparation into an oval."""
    i, j = site.indices
    meas, prep = _at(c, site, 0), _at(c, site, 1)
    _check(meas.op in _MEAS_PREP, "MR needs a MeasX or MeasZ")
    prep_op, oval_op, basis = _MEAS_PREP[meas.op]
    _check(prep.op is prep_op, f"basis mismatch: {meas.op.value} then {prep.op.value}")
    q = meas.qubits[0]
    _check(prep.qubits == (q,), "MR needs the same qubit")
    _check(c.next_on(q, i + 1) == j, "MR needs the qubit idle between measurement and reset")
    _check(c.role(q) != "data", "MR acts on ancillas")
    c = _replace(c, {i, j}, {i: [Instruction(oval_op, (q,), cbit=meas.cbit)]})
    return push_byproduct(c, i + 1, {q: MR_BYPRODUCT[basis]}, frozenset({meas.cbit}), flips)


_OVAL_SPLIT = {Op.OVAL_X: (Op.MEAS_X, Op.PREP_X, "X"), Op.OVAL_Z: (Op.MEAS_Z, Op.PREP_Z, "Z")}


def expand_oval(c: Circuit, index: int, prep_before: int | None = None) -> Circuit:
    """Inverse of MR: split an oval back into measurement and re-preparation.

    The preparation goes just before instruction ``prep_before`` (default:
    right after the measurement); nothing in between may touch the qubit.
    The byproduct MR recorded is pushed a second time, which cancels it.
    """
    oval = c.instructions[index]
    _check(oval.op in _OVAL_SPLIT, "expansion needs an OvalX or OvalZ")
    meas_op, prep_op, basis = _OVAL_SPLIT[oval.op]
    q = oval.qubits[0]
    at = index + 1 if prep_before is None else prep_before
    _check(index < at <= c.correction_start(), "preparation must follow the oval inside the body")
    nxt = c.next_on(q, index + 1)
    _check(nxt is None or nxt >= at, "the qubit is used before the preparation point")
    c = _replace(c, {index}, {index: [Instruction(meas_op, (q,), cbit=oval.cbit)], at: [Instruction(prep_op, (q,))]})
    return push_byproduct(c, at + 1, {q: MR_BYPRODUCT[basis]}, frozenset({oval.cbit}))


# --- FUSE -------------------------------------------------------------------

_FUSE_FORMS = {Op.MEAS_ZZ: (Op.OVAL_X, "Z"), Op.MEAS_XX: (Op.OVAL_Z, "X")}


def _commutes_with(ins: Instruction, q: int, letter: str) -> bool:
    if ins.is_measurement:
        other = ins.measured_pauli().get(q, "I")
        return other in ("I", letter)
    if ins.is_correction:
        return True
    try:
        sign, image = conjugate({q: letter}, ins)
    except FrameError:
        return False
    return sign == 1 and image == {q: letter}


def _fuse_match(c: Circuit, i1: int) -> RewriteSite | None:
    first = c.instructions[i1]
    if first.op not in _FUSE_FORMS:
        return None
    oval_op, letter = _FUSE_FORMS[first.op]
    for b in first.qubits:
        a = first.qubits[0] if first.qubits[1] == b else first.qubits[1]
        io = c.next_on(b, i1 + 1)
        if io is None or c.instructions[io].op is not oval_op:
            continue
        i2 = c.next_on(b, io + 1)
        if i2 is None:
            continue
        second = c.instructions[i2]
        if second.op is not first.op or set(second.qubits) != {a, b}:
            continue
        if c.next_on(a, i1 + 1) != i2 and not all(
            _commutes_with(c.instructions[k], a, letter)
            for k in range(i1 + 1, i2)
            if a in c.instructions[k].qubits
        ):
            continue
        return _site(RuleName.FUSE, (i1, io, i2), {"a": a, "b": b})
    return None


def apply_fuse(c: Circuit, site: RewriteSite) -> Circuit:
    """Absorb an oval sandwiched between two identical parity measurements.

    ``ZZ(a,b) . OvalX(b) . ZZ(a,b)`` becomes the first ``ZZ(a,b)`` (dual:
    XX with OvalZ).  The second parity repeats the first and the oval
    outcome is dropped, so conditions read ``r2 := r1`` and ``s := 0``.
    """
    i1 = site.indices[0]
    match = _fuse_match(c, i1)
    _check(match is not None and match.indices == site.indices, "FUSE pattern not matched")
    _, io, i2 = site.indices
    sub = fuse_substitution(c, site)
    c = _replace(c, {io, i2}, {})
    return substitute_cbits(c, sub)


def fuse_substitution(c: Circuit, site: RewriteSite) -> dict[int, frozenset[int]]:
    i1, io, i2 = site.indices
    return {
        c.instructions[i2].cbit: frozenset({c.instructions[i1].cbit}),
        c.instructions[io].cbit: frozenset(),
    }


# --- XXC / ZZC --------------------------------------------------------------


def expand_parity(c: Circuit, site: RewriteSite) -> Circuit:
    """Replace a two-body parity measurement by CNOTs onto a fresh ancilla."""
    idx = site.indices[0]
    ins = _at(c, site, 0)
    _check(ins.op in (Op.MEAS_XX, Op.MEAS_ZZ), "expansion needs MeasXX or MeasZZ")
    q1, q2 = ins.qubits
    c, a = _any_free_ancilla(c, idx)
    if ins.op is Op.MEAS_ZZ:
        gadget = [
            Instruction(Op.PREP_Z, (a,)),
            Instruction(Op.CNOT, (q1, a)),
            Instruction(Op.CNOT, (q2, a)),
            Instruction(Op.MEAS_Z, (a,), cbit=ins.cbit),
        ]
    else:
        gadget = [
            Instruction(Op.PREP_X, (a,)),
            Instruction(Op.CNOT, (a, q1)),
            Instruction(Op.CNOT, (a, q2)),
            Instruction(Op.MEAS_X, (a,), cbit=ins.cbit),
        ]
    return _replace(c, {idx}, {idx: gadget})


# --- REM --------------------------------------------------------------------

# prep, required CNOT orientation (ancilla is control?), measurement
_REM_FORMS = {
    RuleName.REMZ: (Op.PREP_Z, True, Op.MEAS_Z),
    RuleName.REMX: (Op.PREP_X, False, Op.MEAS_X),
}


def _rem_match(c: Circuit, i: int, which: RuleName) -> RewriteSite | None:
    prep_op, anc_controls, meas_op = _REM_FORMS[which]
    prep = c.instructions[i]
    if prep.op is not prep_op:
        return None
    a = prep.qubits[0]
    j = c.next_on(a, i + 1)
    if j is None or c.instructions[j].op is not Op.CNOT:
        return None
    ctrl, targ = c.instructions[j].qubits
    if (ctrl == a) != anc_controls:
        return None
    k = c.next_on(a, j + 1)
    if k is None or c.instructions[k].op is not meas_op:
        return None
    other = targ if anc_controls else ctrl
    return _site(which, (i, j, k), {"ancilla": a, "qubit": other})


def apply_rem(c: Circuit, site: RewriteSite, which: RuleName | str | None = None) -> Circuit:
    """Delete an ancilla whose CNOT coupling acts trivially.

    REMZ: ``PrepZ(a); CNOT(a->q); MeasZ(a)``.  REMX: ``PrepX(a); CNOT(q->a);
    MeasX(a)``.  The readout is deterministically 0.
    """
    which = RuleName(which or site.rule)
    _check(which in _REM_FORMS, "REM variant must be REMX or REMZ")
    match = _rem_match(c, site.indices[0], which)
    _check(match is not None and match.indices == site.indices, f"{which.value} pattern not matched")
    sub = rem_substitution(c, site)
    return substitute_cbits(_replace(c, set(site.indices), {}), sub)


def rem_substitution(c: Circuit, site: RewriteSite) -> dict[int, frozenset[int]]:
    return {c.instructions[site.indices[2]].cbit: frozenset()}


# --- CNOT commutation -------------------------------------------------------


def _cnot_pair(c: Circuit, i: int) -> RewriteSite | None:
    first = c.instructions[i]
    if first.op is not Op.CNOT:
        return None
    qs = set(first.qubits)
    for j in range(i + 1, c.correction_start()):
        ins = c.instructions[j]
        if not qs & set(ins.qubits):
            continue
        if ins.op is not Op.CNOT:
            return None
        (a, b), (x, y) = first.qubits, ins.qubits
        if (a, b) == (y, x):
            return None
        # the second CNOT may bring a third qubit that was used in between
        extra = set(ins.qubits) - qs
        if extra and any(extra & set(c.instructions[k].qubits) for k in range(i + 1, j)):
            return None
        binding: dict[str, int] = {}
        for name, q in zip("abcd", dict.fromkeys((a, b, x, y))):
            binding[name] = q
        return _site(RuleName.CNOT_COMM, (i, j), binding)
    return None


def commute_cnots(c: Circuit, site: RewriteSite) -> Circuit:
    """Reorder two CNOTs that share a qubit.

    Identical CNOTs cancel; shared-control or shared-target pairs swap; a
    target feeding a control swaps with the implied third CNOT.
    """
    i, j = site.indices
    c1, c2 = _at(c, site, 0), _at(c, site, 1)
    _check(c1.op is Op.CNOT and c2.op is Op.CNOT, "CNOT_COMM needs two CNOTs")
    (a, b), (x, y) = c1.qubits, c2.qubits
    union = {a, b, x, y}
    _check(len(union) < 4, "disjoint CNOTs commute trivially")
    _check(
        all(not union & set(c.instructions[k].qubits) for k in range(i + 1, j)),
        "an intervening instruction touches the pair",
    )

    def cx(u, v):
        return Instruction(Op.CNOT, (u, v))

    if (a, b) == (x, y):
        new: list[Instruction] = []
    elif a == x or b == y:
        new = [c2, c1]
    elif b == x:
        # a->b then b->y  ==  b->y, a->y, a->b
        new = [cx(b, y), cx(a, y), cx(a, b)]
    elif a == y:
        # a->b then x->a  ==  x->a, x->b, a->b
        new = [cx(x, a), cx(x, b), cx(a, b)]
    else:
        raise RewriteError("CNOT pair forms a swap-like cycle; no local rule")
    return _replace(c, {i, j}, {i: new})


# --- discovery and dispatch -------------------------------------------------


def _candidates(c: Circuit, rule: RuleName) -> Iterator[RewriteSite]:
    body = c.correction_start()
    for i in range(body):
        ins = c.instructions[i]
        if rule is RuleName.ROT:
            if ins.op is Op.PAULI_EXP and classify_angle(ins.angle) is not AngleKind.CLIFFORD:
                yield _site(rule, (i,), {f"q{k}": q for k, q in enumerate(ins.qubits)})
        elif rule is RuleName.PG:
            if ins.op in (Op.PAULI_EXP, Op.MEAS_PAULI) and len(ins.qubits) >= 2 and _is_z_form(ins.pauli):
                yield _site(rule, (i,), {"control": ins.qubits[0], "target": ins.qubits[1]})
        elif rule in (RuleName.LS1, RuleName.LS2):
            if ins.op is Op.CNOT:
                yield _site(rule, (i,), {"control": ins.qubits[0], "target": ins.qubits[1]})
        elif rule is RuleName.MR:
            if ins.op in _MEAS_PREP and c.role(ins.qubits[0]) != "data":
                q = ins.qubits[0]
                j = c.next_on(q, i + 1)
                if j is not None and j < body and c.instructions[j].op is _MEAS_PREP[ins.op][0]:
                    yield _site(rule, (i, j), {"q": q})
        elif rule is RuleName.FUSE:
            m = _fuse_match(c, i)
            if m is not None:
                yield m
        elif rule is RuleName.XXC:
            if ins.op is Op.MEAS_XX:
                yield _site(rule, (i,), {"q1": ins.qubits[0], "q2": ins.qubits[1]})
        elif rule is RuleName.ZZC:
            if ins.op is Op.MEAS_ZZ:
                yield _site(rule, (i,), {"q1": ins.qubits[0], "q2": ins.qubits[1]})
        elif rule in (RuleName.REMX, RuleName.REMZ):
            m = _rem_match(c, i, rule)
            if m is not None:
                yield m
        elif rule is RuleName.CNOT_COMM:
            m = _cnot_pair(c, i)
            if m is not None:
                yield m


def find_sites(c: Circuit, rule: RuleName | str) -> list[RewriteSite]:
    """Non-overlapping matches in instruction order; earlier matches win."""
    rule = RuleName(rule)
    taken: set[int] = set()
    out = []
    for s in _candidates(c, rule):
        if taken.isdisjoint(s.indices):
            out.append(s)
            taken.update(s.indices)
    return out


def first_site(c: Circuit, rule: RuleName | str) -> RewriteSite | None:
    """The earliest match, which :func:`find_sites` would always include."""
    return next(_candidates(c, RuleName(rule)), None)


def apply_rule(c: Circuit, site: RewriteSite, flips: dict[int, frozenset[int]] | None = None) -> Circuit:
    """Apply ``site``; rules that push byproducts record reinterpreted cbits in ``flips``."""
    rule = site.rule
    if rule is RuleName.ROT:
        return apply_rot(c, site, flips)
    if rule is RuleName.PG:
        return apply_pg(c, site)
    if rule in (RuleName.LS1, RuleName.LS2):
        return apply_ls(c, site, rule, flips)
    if rule is RuleName.MR:
        return apply_mr(c, site, flips)
    if rule is RuleName.FUSE:
        return apply_fuse(c, site)
    if rule in (RuleName.XXC, RuleName.ZZC):
        return expand_parity(c, site)
    if rule in (RuleName.REMX, RuleName.REMZ):
        return apply_rem(c, site, rule)
    return commute_cnots(c, site)


def rewrite_with_map(c: Circuit, site: RewriteSite) -> tuple[Circuit, dict[int, frozenset[int]]]:
    """The rewritten circuit and how the outcomes of ``c`` read in its cbits.

    A cbit maps to the parity set of new cbits that carries its old value
    (empty means constant 0); unlisted cbits keep their meaning.  Entries
    come from deleted measurements (FUSE, REM) and from measurements a
    pushed byproduct anticommutes with (ROT, LS, MR).
    """
    flips: dict[int, frozenset[int]] = {}
    after = apply_rule(c, site, flips)
    if site.rule is RuleName.FUSE:
        return after, fuse_substitution(c, site)
    if site.rule in (RuleName.REMX, RuleName.REMZ):
        return after, rem_substitution(c, site)
    return after, flips


def cbit_substitution(c: Circuit, site: RewriteSite) -> dict[int, frozenset[int]]:
    """The outcome map of :func:`rewrite_with_map` alone."""
    return rewrite_with_map(c, site)[1]
