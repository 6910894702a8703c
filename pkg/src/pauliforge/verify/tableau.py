"""Stabilizer tableau simulation for Clifford circuits.

Rows ``0..k-1`` are destabilizers and rows ``k..2k-1`` stabilizers.  A row is
a Pauli letter per column stored as bits ``(x, z)`` with ``(1, 1)`` meaning
``Y`` itself, plus a sign bit.  All row updates are vectorized over rows.

Passing ``reference=True`` to :func:`tableau_run` entangles every data qubit
with an extra reference column, so the final state is the Choi state of the
branch operator.  :meth:`Tableau.conjugation_action` reads off the images of
the data-qubit ``X`` and ``Z`` generators from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..circuit import Circuit, Instruction, Op
from ..frame import evaluate_cond
from ..pauli import CLIFFORD_ACTION, CLIFFORD_IDS

_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_QUARTER = math.pi / 4


class TableauError(ValueError):
    """Non-Clifford instruction or an impossible fixed outcome."""


def _quarter_turns(angle: float, what: str) -> int:
    k = round(angle / _QUARTER)
    if abs(angle - k * _QUARTER) > 1e-9:
        raise TableauError(f"{what} angle {angle!r} is not a multiple of pi/4")
    return k % 8


def _g(x1, z1, x2, z2):
    """Power of i picked up by the product of single-qubit letters (x1,z1)(x2,z2)."""
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    return np.where(
        x1 & z1,
        z2 - x2,
        np.where(x1 & ~z1 & 1, z2 * (2 * x2 - 1), np.where(z1 & ~x1 & 1, x2 * (1 - 2 * z2), 0)),
    )


def _one_qubit_tables():
    # for each Clifford id: new x, new z and sign flip, indexed by x + 2z
    nx = np.zeros((24, 4), dtype=np.uint8)
    nz = np.zeros((24, 4), dtype=np.uint8)
    flip = np.zeros((24, 4), dtype=np.uint8)
    for cid, action in enumerate(CLIFFORD_ACTION):
        for letter, (bx, bz) in _BITS.items():
            sign, image = action[letter]
            ix, iz = _BITS[image]
            nx[cid, bx + 2 * bz] = ix
            nz[cid, bx + 2 * bz] = iz
            flip[cid, bx + 2 * bz] = sign < 0
    return nx, nz, flip


_NX, _NZ, _FLIP = _one_qubit_tables()
_S = CLIFFORD_IDS["S"]
_H = CLIFFORD_IDS["H"]
_X = CLIFFORD_IDS["X"]


@dataclass
class Tableau:
    x: np.ndarray
    z: np.ndarray
    r: np.ndarray
    columns: tuple = ()
    outcomes: dict[int, int] = field(default_factory=dict)

    @classmethod
    def zero_state(cls, columns) -> Tableau:
        k = len(columns)
        eye = np.eye(k, dtype=np.uint8)
        zero = np.zeros((k, k), dtype=np.uint8)
        return cls(
            x=np.vstack([eye, zero]),
            z=np.vstack([zero, eye]),
            r=np.zeros(2 * k, dtype=np.uint8),
            columns=tuple(columns),
        )

    @property
    def k(self) -> int:
        return self.x.shape[1]

    def col(self, label) -> int:
        return self.columns.index(label)

    # --- gates --------------------------------------------------------------

    def clifford1q(self, q: int, cid: int) -> None:
        idx = self.x[:, q] + 2 * self.z[:, q]
        self.r ^= _FLIP[cid][idx]
        self.x[:, q] = _NX[cid][idx]
        self.z[:, q] = _NZ[cid][idx]

    def cnot(self, a: int, b: int) -> None:
        xa, za, xb, zb = self.x[:, a], self.z[:, a], self.x[:, b], self.z[:, b]
        self.r ^= xa & zb & (xb ^ za ^ 1)
        self.x[:, b] = xb ^ xa
        self.z[:, a] = za ^ zb

    def _anticommuting(self, px: np.ndarray, pz: np.ndarray) -> np.ndarray:
        return ((self.x.astype(np.int64) @ pz + self.z.astype(np.int64) @ px) & 1).astype(bool)

    def pauli(self, px: np.ndarray, pz: np.ndarray) -> None:
        self.r ^= self._anticommuting(px, pz).astype(np.uint8)

    def pauli_exp(self, px: np.ndarray, pz: np.ndarray, turns: int) -> None:
        """Conjugate by exp(i * turns * pi/4 * P)."""
        turns %= 4
        if turns == 0:
            return
        anti = self._anticommuting(px, pz)
        if turns == 2:
            self.r ^= anti.astype(np.uint8)
            return
        # Q -> +-i P Q on anticommuting rows
        rows = np.nonzero(anti)[0]
        e = 2 * self.r[rows].astype(np.int64) + _g(px[None, :], pz[None, :], self.x[rows], self.z[rows]).sum(axis=1)
        e += 1 if turns == 1 else 3
        self.r[rows] = ((e % 4) // 2).astype(np.uint8)
        self.x[rows] ^= px.astype(np.uint8)
        self.z[rows] ^= pz.astype(np.uint8)

    def _rowsum(self, targets: np.ndarray, src: int) -> None:
        """rows[targets] := rows[src] * rows[targets]."""
        if len(targets) == 0:
            return
        e = (
            2 * self.r[targets].astype(np.int64)
            + 2 * int(self.r[src])
            + _g(self.x[src][None, :], self.z[src][None, :], self.x[targets], self.z[targets]).sum(axis=1)
        )
        self.r[targets] = ((e % 4) // 2).astype(np.uint8)
        self.x[targets] ^= self.x[src]
        self.z[targets] ^= self.z[src]

    def _product_sign(self, rows) -> tuple[int, np.ndarray, np.ndarray]:
        k = self.k
        x = np.zeros(k, dtype=np.uint8)
        z = np.zeros(k, dtype=np.uint8)
        e = 0
        for j in rows:
            e += 2 * int(self.r[j]) + int(_g(x, z, self.x[j], self.z[j]).sum())
            x ^= self.x[j]
            z ^= self.z[j]
        if e % 2:
            raise AssertionError("stabilizer product with imaginary phase")
        return (e % 4) // 2, x, z

    def measure(self, px: np.ndarray, pz: np.ndarray, outcome: int | None, rng) -> int:
        """Measure the Pauli (px, pz); ``outcome`` fixes the result if given."""
        k = self.k
        anti = self._anticommuting(px, pz)
        hits = np.nonzero(anti[k:])[0]
        if len(hits):
            p = k + int(hits[0])
            others = np.nonzero(anti)[0]
            others = others[others != p]
            self._rowsum(others, p)
            self.x[p - k] = self.x[p]
            self.z[p - k] = self.z[p]
            self.r[p - k] = self.r[p]
            s = int(rng.integers(2)) if outcome is None else int(outcome)
            self.x[p] = px
            self.z[p] = pz
            self.r[p] = s
            return s
        sign, x, z = self._product_sign(k + np.nonzero(anti[:k])[0])
        if not (np.array_equal(x, px) and np.array_equal(z, pz)):
            raise AssertionError("deterministic measurement is not in the stabilizer group")
        if outcome is not None and int(outcome) != sign:
            raise TableauError(f"outcome {outcome} has zero probability")
        return sign

    def reset(self, q: int, rng) -> None:
        px, pz = self._single(q, "Z")
        if self.measure(px, pz, None, rng):
            self.clifford1q(q, _X)

    def _single(self, q: int, letter: str) -> tuple[np.ndarray, np.ndarray]:
        px = np.zeros(self.k, dtype=np.uint8)
        pz = np.zeros(self.k, dtype=np.uint8)
        px[q], pz[q] = _BITS[letter]
        return px, pz

    # --- inspection ---------------------------------------------------------

    def _row_text(self, j: int) -> str:
        letters = "".join(_LETTER[(int(a), int(b))] for a, b in zip(self.x[j], self.z[j]))
        return ("-" if self.r[j] else "+") + letters

    def stabilizers(self) -> list[str]:
        return [self._row_text(j) for j in range(self.k, 2 * self.k)]

    def destabilizers(self) -> list[str]:
        return [self._row_text(j) for j in range(self.k)]

    def validate(self) -> None:
        """Raise AssertionError unless the symplectic structure is intact."""
        k = self.k
        x = self.x.astype(np.int64)
        z = self.z.astype(np.int64)
        form = (x @ z.T + z @ x.T) & 1
        want = np.zeros((2 * k, 2 * k), dtype=np.int64)
        want[:k, k:] = np.eye(k, dtype=np.int64)
        want[k:, :k] = np.eye(k, dtype=np.int64)
        if not np.array_equal(form, want):
            raise AssertionError("stabilizer rows fail the commutation pattern")
        if _gf2_rank(np.hstack([self.x, self.z])) != 2 * k:
            raise AssertionError("tableau is not full rank")

    def expectation(self, letters: dict) -> int:
        """+1 / -1 if the Pauli (column label -> letter) is a stabilizer up to sign, else 0."""
        px = np.zeros(self.k, dtype=np.uint8)
        pz = np.zeros(self.k, dtype=np.uint8)
        for label, a in letters.items():
            px[self.col(label)], pz[self.col(label)] = _BITS[a]
        anti = self._anticommuting(px, pz)
        if anti[self.k:].any():
            return 0
        sign, _, _ = self._product_sign(self.k + np.nonzero(anti[: self.k])[0])
        return -1 if sign else 1

    def find_element(self, fixed: dict, free) -> tuple[int, dict] | None:
        """Stabilizer-group element with the letters ``fixed`` on some columns,
        anything on the columns ``free`` and identity everywhere else.

        Returns ``(sign, letters on free columns)`` or None if none exists.
        """
        k = self.k
        free_cols = {self.col(f) for f in free}
        cons = [c for c in range(k) if c not in free_cols]
        a = np.hstack([self.x[k:][:, cons], self.z[k:][:, cons]]).astype(np.uint8)
        want = np.zeros(2 * len(cons), dtype=np.uint8)
        for label, letter in fixed.items():
            j = cons.index(self.col(label))
            want[j], want[len(cons) + j] = _BITS[letter]
        pick = _gf2_solve(a.T, want)
        if pick is None:
            return None
        sign, x, z = self._product_sign(k + np.nonzero(pick)[0])
        out = {self.columns[c]: _LETTER[(int(x[c]), int(z[c]))] for c in sorted(free_cols)}
        return sign, out

    def conjugation_action(self, data) -> dict[tuple, tuple[int, str]]:
        """Images of X_q and Z_q for each data qubit under the branch operator.

        Needs a run with ``reference=True``.  Keys are ``(q, "X" | "Z")``, values
        ``(sign, word)`` with one letter per data qubit in the given order.
        """
        data = list(data)
        out = {}
        for q in data:
            for letter in "XZ":
                found = self.find_element({("ref", q): letter}, data)
                if found is None:
                    raise AssertionError(f"no stabilizer carries {letter} on the reference of {q}")
                sign, letters = found
                out[(q, letter)] = (-1 if sign else 1, "".join(letters[d] for d in data))
        return out


def _gf2_rank(m: np.ndarray) -> int:
    m = m.copy().astype(np.uint8)
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = np.nonzero(m[rank:, c])[0]
        if len(piv) == 0:
            continue
        p = rank + int(piv[0])
        m[[rank, p]] = m[[p, rank]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != rank]
        m[hit] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution of a @ y = b over GF(2), or None."""
    rows, cols = a.shape
    aug = np.hstack([a, b[:, None]]).astype(np.uint8)
    pivots = []
    r = 0
    for c in range(cols):
        piv = np.nonzero(aug[r:, c])[0]
        if len(piv) == 0:
            continue
        p = r + int(piv[0])
        aug[[r, p]] = aug[[p, r]]
        hit = np.nonzero(aug[:, c])[0]
        hit = hit[hit != r]
        aug[hit] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if aug[r:, -1].any():
        return None
    y = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        y[c] = aug[i, -1]
    return y


def _pauli_bits(tab: Tableau, letters: dict[int, str]) -> tuple[np.ndarray, np.ndarray]:
    px = np.zeros(tab.k, dtype=np.uint8)
    pz = np.zeros(tab.k, dtype=np.uint8)
    for q, a in letters.items():
        px[q], pz[q] = _BITS[a]
    return px, pz


def tableau_run(
    c: Circuit,
    outcomes: dict[int, int] | str | None = None,
    seed: int | None = None,
    reference: bool = False,
) -> Tableau:
    """Run a Clifford circuit on a stabilizer tableau.

    ``outcomes`` fixes measurement results by cbit (a dict, or a bit string
    indexed by cbit); missing ones are sampled.  Every qubit starts in |0>;
    with ``reference`` each data qubit starts maximally entangled with a
    reference column labelled ``("ref", q)``.
    """
    if isinstance(outcomes, str):
        outcomes = {k: int(b) for k, b in enumerate(outcomes)}
    fixed = dict(outcomes or {})
    rng = np.random.default_rng(seed)
    columns: list = [q.id for q in c.qubits]
    data = c.data_qubits
    if reference:
        columns += [("ref", q) for q in data]
    tab = Tableau.zero_state(columns)
    if reference:
        for q in data:
            ref = tab.col(("ref", q))
            tab.clifford1q(ref, _H)
            tab.cnot(ref, q)
    touched = set(data)
    record: dict[int, int] = {}
    for ins in c.instructions:
        if ins.cond is not None and not evaluate_cond(ins.cond, record):
            continue
        _step(tab, ins, fixed, record, touched, rng)
    tab.outcomes = record
    return tab


def _step(tab: Tableau, ins: Instruction, fixed, record, touched, rng) -> None:
    op = ins.op
    qs = ins.qubits
    if op in (Op.PREP_Z, Op.PREP_X, Op.PREP_THETA):
        q = qs[0]
        if q in touched:
            tab.reset(q, rng)
        touched.add(q)
        if op is not Op.PREP_Z:
            tab.clifford1q(q, _H)
        if op is Op.PREP_THETA:
            # exp(i theta Z)|+> is proportional to S^(-4 theta / pi)|+>
            turns = _quarter_turns(ins.angle, "PrepTheta")
            for _ in range((-turns) % 4):
                tab.clifford1q(q, _S)
        return
    touched.update(qs)
    if op is Op.CLIFFORD1Q:
        tab.clifford1q(qs[0], ins.clifford)
    elif op is Op.RZ:
        # Rz(phi) is proportional to S^(phi / (pi/2))
        turns = _quarter_turns(ins.angle, "Rz")
        if turns % 2:
            raise TableauError(f"Rz angle {ins.angle!r} is not a multiple of pi/2")
        for _ in range((turns // 2) % 4):
            tab.clifford1q(qs[0], _S)
    elif op is Op.CNOT:
        tab.cnot(qs[0], qs[1])
    elif op in (Op.PAULI_EXP, Op.CORR_RZ2THETA):
        px, pz = _pauli_bits(tab, dict(zip(qs, ins.pauli)))
        tab.pauli_exp(px, pz, _quarter_turns(ins.angle, op.value))
    elif op is Op.CORR_PAULI:
        px, pz = _pauli_bits(tab, dict(zip(qs, ins.pauli)))
        tab.pauli(px, pz)
    elif ins.is_measurement:
        px, pz = _pauli_bits(tab, ins.measured_pauli())
        s = tab.measure(px, pz, fixed.get(ins.cbit), rng)
        record[ins.cbit] = s
    else:  # pragma: no cover - every Op is handled above
        raise TableauError(f"cannot run {op.value}")
