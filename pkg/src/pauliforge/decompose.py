"""Lowering of a Pauli exponential to constant-depth parity measurements.

:func:`decompose` rewrites ``exp(i*theta*P)`` step by step: conjugate ``P``
to Z form, teleport a generic rotation through a |theta> ancilla, then peel
one qubit at a time off the remaining multi-qubit node with a CNOT pair,
turn both CNOTs into parity measurements through a shared ancilla, merge
the ancilla's measure/reset and fuse the repeated parity away.

:func:`build_schedule` constructs the resulting layered circuit directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit, Instruction, Op, Qubit, compute_depth
from .frame import canonical_corrections
from .pauli import (
    CLIFFORD_IDS,
    CLIFFORD_INVERSE,
    Angle,
    AngleKind,
    PauliString,
    conjugate_to_z_form,
    parse_pauli,
)
from .rewrite import RewriteSite, RuleName, apply_rule, find_sites, first_site, lower_node


def _as_pauli(p) -> PauliString:
    return p if isinstance(p, PauliString) else parse_pauli(str(p))


def _as_angle(theta) -> Angle:
    return theta if isinstance(theta, Angle) else Angle.of(float(theta))


def layout_positions(p: PauliString) -> list[int]:
    """Line positions of the data qubits.

    Support qubits sit on even positions ``0, 2, ..``; the odd positions
    between them are the interaction ancillas, the theta ancilla follows the
    last support qubit and idle data qubits come after it.
    """
    support = p.support
    k = len(support)
    pos = {}
    for j, q in enumerate(support):
        pos[q] = 2 * j
    nxt = 2 * k if k else 0
    for q in range(len(p)):
        if q not in pos:
            pos[q] = nxt
            nxt += 1
    return [pos[q] for q in range(len(p))]


def initial_circuit(p, theta) -> Circuit:
    """``C^dagger``, the Z-form node (after ROT for non-Clifford angles), then ``C``."""
    p = _as_pauli(p)
    theta = _as_angle(theta)
    layer, pz = conjugate_to_z_form(p)
    qubits = tuple(Qubit(q, "data", pos) for q, pos in enumerate(layout_positions(p)))
    c = Circuit(qubits, (), 0)
    support = p.support
    if not support:
        return c
    pre = [Instruction(Op.CLIFFORD1Q, (q,), clifford=CLIFFORD_INVERSE[layer.ids[q]]) for q in support if layer.ids[q]]
    post = [Instruction(Op.CLIFFORD1Q, (q,), clifford=layer.ids[q]) for q in support if layer.ids[q]]
    node = Instruction(Op.PAULI_EXP, support, angle=theta.value, pauli="Z" * len(support))
    if theta.kind is AngleKind.CLIFFORD:
        c = c.with_instructions(pre + lower_node(node) + post)
        return c
    c = c.with_instructions(pre + [node] + post)
    return apply_rule(c, find_sites(c, RuleName.ROT)[0])


@dataclass(frozen=True)
class TraceStep:
    rule: RuleName
    site: RewriteSite
    circuit: Circuit

    def to_dict(self) -> dict:
        return {"rule": self.rule.value, "site": self.site.to_dict(), "circuit": self.circuit.to_dict()}


def _largest_node(c: Circuit) -> int | None:
    best = None
    for k, ins in enumerate(c.body()):
        if ins.op in (Op.PAULI_EXP, Op.MEAS_PAULI) and len(ins.qubits) >= 3:
            if best is None or len(ins.qubits) > len(c.instructions[best].qubits):
                best = k
    return best


def _step(c: Circuit, rule: RuleName, steps: list[TraceStep], site: RewriteSite | None = None) -> Circuit:
    if site is None:
        site = first_site(c, rule)
        if site is None:
            raise RuntimeError(f"no {rule.value} site in\n{c.summary()}")
    c = apply_rule(c, site)
    steps.append(TraceStep(rule, site, c))
    return c


def rewrite_trace(p, theta) -> list[TraceStep]:
    """Every rule application from :func:`initial_circuit` to the final circuit."""
    c = initial_circuit(p, theta)
    steps: list[TraceStep] = []
    limit = len(_as_pauli(p))
    for _ in range(limit + 1):
        k = _largest_node(c)
        if k is None:
            break
        node = c.instructions[k]
        pg = RewriteSite(RuleName.PG, (k, k + 1), {"control": node.qubits[0], "target": node.qubits[1]}, (k,))
        c = _step(c, RuleName.PG, steps, pg)
        c = _step(c, RuleName.LS1, steps)
        c = _step(c, RuleName.LS2, steps)
        c = _step(c, RuleName.MR, steps)
        c = _step(c, RuleName.FUSE, steps)
    else:  # pragma: no cover - the node shrinks every iteration
        raise RuntimeError("rewrite loop did not terminate")
    return steps


def decompose(p, theta) -> Circuit:
    """Constant-depth measurement-based circuit for ``exp(i*theta*P)``."""
    steps = rewrite_trace(p, theta)
    c = steps[-1].circuit if steps else initial_circuit(p, theta)
    return canonical_corrections(c).validated()


# --- direct schedule ----------------------------------------------------------


@dataclass(frozen=True)
class Round:
    name: str
    instructions: tuple[Instruction, ...]

    @property
    def is_two_body(self) -> bool:
        return self.name in ("xx", "zz")


@dataclass(frozen=True)
class Schedule:
    """Layered circuit: prep, XX, ZZ, XX, measure, then corrections."""

    n: int
    theta: Angle
    qubits: tuple[Qubit, ...]
    rounds: tuple[Round, ...]
    num_cbits: int
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def ancillas(self) -> int:
        return sum(1 for q in self.qubits if q.role == "ancilla")

    @property
    def has_theta(self) -> bool:
        return any(q.role == "theta" for q in self.qubits)

    @property
    def two_body_rounds(self) -> int:
        return sum(1 for r in self.rounds if r.is_two_body)

    @property
    def layout(self) -> dict[int, int]:
        return {q.id: q.pos for q in self.qubits}

    def to_circuit(self) -> Circuit:
        body = [ins for r in self.rounds for ins in r.instructions]
        return Circuit(self.qubits, tuple(body), self.num_cbits)

    def check_disjoint(self) -> bool:
        for r in self.rounds:
            if r.name == "correct":
                continue
            seen: set[int] = set()
            for ins in r.instructions:
                if seen & set(ins.qubits):
                    return False
                seen.update(ins.qubits)
        return True


def build_schedule(n: int, theta) -> Schedule:
    """Closed-form constant-depth circuit for ``exp(i*theta*Z^n)``.

    Data qubit ``d_i`` sits at position ``2i`` and ancilla ``a_i`` at
    ``2i+1``.  For generic angles the theta ancilla takes position ``2n-1``
    and meets ``d_{n-1}`` in the ZZ round; for Clifford angles ``d_{n-1}``
    gets a Z gate in that round instead.
    """
    if n < 1:
        raise ValueError("schedule needs n >= 1")
    theta = _as_angle(theta)
    clifford = theta.kind is AngleKind.CLIFFORD
    slots = n - 1
    qubits = [Qubit(i, "data", 2 * i) for i in range(n)]
    qubits += [Qubit(n + i, "ancilla", 2 * i + 1) for i in range(slots)]
    t = None
    if not clifford:
        t = 2 * n - 1
        qubits.append(Qubit(t, "theta", 2 * n - 1))
    anc = [n + i for i in range(slots)]
    counter = iter(range(10 * n + 10))

    def take() -> int:
        return next(counter)

    prep = [Instruction(Op.PREP_Z, (a,)) for a in anc]
    if t is not None:
        prep.append(Instruction(Op.PREP_THETA, (t,), angle=theta.value))
    x1 = [take() for _ in anc]
    xx1 = [Instruction(Op.MEAS_XX, (a, i + 1), cbit=x1[i]) for i, a in enumerate(anc)]
    z = [take() for _ in anc]
    zz = [Instruction(Op.MEAS_ZZ, (i, a), cbit=z[i]) for i, a in enumerate(anc)]
    m_theta = s_theta = None
    if t is not None:
        m_theta = take()
        zz.append(Instruction(Op.MEAS_ZZ, (n - 1, t), cbit=m_theta))
    else:
        zz.append(Instruction(Op.CLIFFORD1Q, (n - 1,), clifford=CLIFFORD_IDS["Z"]))
    x2 = [take() for _ in anc]
    xx2 = [Instruction(Op.MEAS_XX, (a, i + 1), cbit=x2[i]) for i, a in enumerate(anc)]
    m = [take() for _ in anc]
    meas = [Instruction(Op.MEAS_Z, (a,), cbit=m[i]) for i, a in enumerate(anc)]
    if t is not None:
        s_theta = take()
        meas.append(Instruction(Op.MEAS_X, (t,), cbit=s_theta))
    corr: list[Instruction] = []
    for j in range(n):
        if j >= 1:
            corr.append(Instruction(Op.CORR_PAULI, (j,), pauli="X", cond=frozenset({m[j - 1]})))
        zc = set()
        for i in range(j, slots):
            zc ^= {x1[i], x2[i]}
        if s_theta is not None:
            zc ^= {s_theta}
        if zc:
            corr.append(Instruction(Op.CORR_PAULI, (j,), pauli="Z", cond=frozenset(zc)))
    if t is not None:
        corr.append(
            Instruction(
                Op.CORR_RZ2THETA,
                tuple(range(n)),
                angle=theta.corrective,
                pauli="Z" * n,
                cond=frozenset({m_theta, *z}),
            )
        )
    rounds = (
        Round("prep", tuple(prep)),
        Round("xx", tuple(xx1)),
        Round("zz", tuple(zz)),
        Round("xx", tuple(xx2)),
        Round("measure", tuple(meas)),
        Round("correct", tuple(corr)),
    )
    used = next(counter)
    return Schedule(n, theta, tuple(qubits), rounds, used)


def embed(c: Circuit, support: tuple[int, ...], p: PauliString) -> Circuit:
    """Place a circuit over ``len(support)`` data qubits onto the support of ``p``."""
    n = len(p)
    positions = layout_positions(p)
    mapping = {j: q for j, q in enumerate(support)}
    extra = [q for q in c.qubits if q.role != "data"]
    for k, q in enumerate(extra):
        mapping[q.id] = n + k
    qubits = [Qubit(q, "data", positions[q]) for q in range(n)]
    qubits += [Qubit(n + k, q.role, q.pos) for k, q in enumerate(extra)]

    def remap(ins: Instruction) -> Instruction:
        return Instruction(ins.op, tuple(mapping[q] for q in ins.qubits), ins.cbit, ins.angle, ins.cond, ins.pauli, ins.clifford)

    return Circuit(tuple(qubits), tuple(remap(i) for i in c.instructions), c.num_cbits)


@dataclass
class CrossCheck:
    status: str
    schedule: object = None
    decomposed: object = None
    structural: dict = field(default_factory=dict)
    message: str = ""

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"

    def to_dict(self) -> dict:
        out = {"status": self.status, "structural": self.structural}
        if self.schedule is not None:
            out["schedule"] = self.schedule.to_dict()
        if self.decomposed is not None:
            out["decomposed"] = self.decomposed.to_dict()
        if self.message:
            out["message"] = self.message
        return out


def cross_check(p, theta) -> CrossCheck:
    """Check that :func:`decompose` and :func:`build_schedule` implement the same operator.

    The reference is the schedule's corrected all-zero-outcome branch; both
    circuits must match it on every branch.
    """
    from .verify import branch_operator, check_equivalence
    from .verify.program import LimitExceeded, data_limit

    p = _as_pauli(p)
    theta = _as_angle(theta)
    if not p.is_z_form:
        raise ValueError("cross_check needs a Z-form Pauli string")
    support = p.support
    dec = decompose(p, theta)
    if not support:
        return CrossCheck("equivalent", structural={"empty": True})
    sched = build_schedule(len(support), theta)
    sc = embed(sched.to_circuit(), support, p)
    d_dec, d_sc = compute_depth(dec), compute_depth(sc)
    structural = {
        "schedule_two_body_rounds": sched.two_body_rounds,
        "schedule_two_body_layers": d_sc.two_body_layers,
        "decomposed_two_body_layers": d_dec.two_body_layers,
        "schedule_lnn_clean": not d_sc.lnn_violations,
        "decomposed_lnn_clean": not d_dec.lnn_violations,
        "rounds_disjoint": sched.check_disjoint(),
    }
    if len(p) > data_limit():
        return CrossCheck("unverifiable", structural=structural,
                          message=f"{len(p)} data qubits exceed the dense limit {data_limit()}")
    try:
        first = branch_operator(sc, {k: 0 for k in sc.measured_cbits()})
    except LimitExceeded as exc:
        return CrossCheck("unverifiable", structural=structural, message=str(exc))
    _, ref = first
    v_s = check_equivalence(sc, ref)
    v_d = check_equivalence(dec, ref)
    if "unverifiable" in (v_s.status, v_d.status):
        status = "unverifiable"
    else:
        status = "equivalent" if v_s.equivalent and v_d.equivalent else "inequivalent"
    return CrossCheck(status, v_s, v_d, structural)
