"""Text and SVG renderings of layered schedules and rewrite traces."""

from __future__ import annotations

from html import escape

from .circuit import Instruction, Op
from .pauli import clifford_name
from .decompose import Schedule, TraceStep

CELL = 4

_GLYPH = {
    Op.PREP_Z: "|0>",
    Op.PREP_X: "|+>",
    Op.PREP_THETA: "|t>",
    Op.MEAS_Z: "Mz",
    Op.MEAS_X: "Mx",
    Op.OVAL_Z: "Oz",
    Op.OVAL_X: "Ox",
    Op.RZ: "Rz",
    Op.CORR_PAULI: "c",
    Op.CORR_RZ2THETA: "cR",
}

_ROLE = {"data": "d", "ancilla": "a", "theta": "t"}


def _cells(s: Schedule, ins: Instruction) -> dict[int, str]:
    pos = s.layout
    if ins.op in (Op.MEAS_XX, Op.MEAS_ZZ):
        letter = "X" if ins.op is Op.MEAS_XX else "Z"
        a, b = sorted(pos[q] for q in ins.qubits)
        # the left end carries a link drawn up to the right end
        return {a: letter + "-" * (CELL - 1), b: letter}
    if ins.op is Op.CLIFFORD1Q:
        return {pos[ins.qubits[0]]: clifford_name(ins.clifford)}
    if ins.op is Op.CORR_PAULI:
        return {pos[q]: ins.pauli[k].lower() for k, q in enumerate(ins.qubits)}
    if ins.op is Op.CORR_RZ2THETA:
        return {pos[q]: "r" for q in ins.qubits}
    return {pos[q]: _GLYPH.get(ins.op, "?") for q in ins.qubits}


def _grid(s: Schedule) -> list[tuple[str, list[str], list[tuple[int, int]]]]:
    width = max(q.pos for q in s.qubits) + 1
    rows = []
    for r in s.rounds:
        line = ["."] * width
        links = []
        for ins in r.instructions:
            for p, glyph in _cells(s, ins).items():
                # several corrections on one position stack up
                line[p] = glyph if line[p] in (".", glyph) else line[p] + glyph
            if ins.op in (Op.MEAS_XX, Op.MEAS_ZZ):
                a, b = sorted(s.layout[q] for q in ins.qubits)
                links.append((a, b))
        rows.append((r.name, line, links))
    return rows


def schedule_text(s: Schedule) -> str:
    """One line per round, one fixed-width column per linear position."""
    by_pos = sorted(s.qubits, key=lambda q: q.pos)
    label = max(len(r.name) for r in s.rounds) + 2 if s.rounds else 8
    head = " " * label + "".join(f"{_ROLE[q.role]}{q.id}".ljust(CELL) for q in by_pos)
    out = [f"schedule n={s.n} theta={s.theta.value:.17g} two-body rounds={s.two_body_rounds}", head.rstrip()]
    for name, line, _ in _grid(s):
        out.append((name.ljust(label) + "".join(g.ljust(CELL) for g in line)).rstrip())
    return "\n".join(out) + "\n"


def schedule_svg(s: Schedule, cell: int = 28) -> str:
    """Static SVG grid: rounds as rows, linear positions as columns."""
    by_pos = sorted(s.qubits, key=lambda q: q.pos)
    rows = _grid(s)
    left = 70
    top = 36
    w = left + cell * len(by_pos) + 10
    h = top + cell * len(rows) + 10
    fill = {"data": "#dde8f7", "ancilla": "#f4e3c9", "theta": "#e6d3f2"}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="monospace" font-size="10">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    for q in by_pos:
        x = left + q.pos * cell
        parts.append(f'<rect class="col {q.role}" x="{x}" y="{top}" width="{cell}" height="{cell * len(rows)}" fill="{fill[q.role]}" opacity="0.5"/>')
        parts.append(f'<text x="{x + cell / 2}" y="{top - 8}" text-anchor="middle">{_ROLE[q.role]}{q.id}</text>')
    for i, (name, line, links) in enumerate(rows):
        y = top + i * cell
        parts.append(f'<text x="4" y="{y + cell / 2 + 3}">{escape(name)}</text>')
        for a, b in links:
            parts.append(
                f'<line x1="{left + a * cell + cell / 2}" y1="{y + cell / 2}" x2="{left + b * cell + cell / 2}" '
                f'y2="{y + cell / 2}" stroke="black" stroke-width="2"/>'
            )
        for p, glyph in enumerate(line):
            if glyph == ".":
                continue
            cx = left + p * cell + cell / 2
            parts.append(f'<circle cx="{cx}" cy="{y + cell / 2}" r="{cell * 0.4}" fill="white" stroke="black"/>')
            parts.append(f'<text x="{cx}" y="{y + cell / 2 + 3}" text-anchor="middle">{escape(glyph.rstrip("-"))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def trace_text(steps: list[TraceStep]) -> str:
    out = []
    for k, step in enumerate(steps):
        site = step.site
        out.append(f"step {k}: {step.rule.value} at {list(site.indices)}")
        out.extend("    " + line for line in step.circuit.summary().splitlines())
    return "\n".join(out) + ("\n" if out else "")
