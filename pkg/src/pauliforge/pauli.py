"""Pauli strings, rotation angles and the single-qubit Clifford group.

Dense matrices in this package are little-endian: qubit ``k`` of an
``n``-qubit operator is bit ``k`` of the row/column index, so the matrix of
``P = P_0 P_1 ... P_{n-1}`` is ``kron(P_{n-1}, ..., P_0)``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

LETTERS = "IXYZ"

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S2 = np.array([[1, 0], [0, 1j]], dtype=complex)

PAULI_MATRICES = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}

ANGLE_TOL = 1e-12


class PauliParseError(ValueError):
    """Raised for malformed Pauli text; ``position`` is 1-based."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        if not self.letters:
            raise PauliParseError("empty Pauli string", 1)
        for i, ch in enumerate(self.letters):
            if ch not in LETTERS:
                raise PauliParseError(f"invalid letter {ch!r} at position {i + 1}", i + 1)

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, k: int) -> str:
        return self.letters[k]

    def __str__(self) -> str:
        return self.letters

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.letters) if ch != "I")

    @property
    def is_z_form(self) -> bool:
        return set(self.letters) <= {"I", "Z"}

    def matrix(self) -> np.ndarray:
        return pauli_matrix(self.letters)


def parse_pauli(text: str) -> PauliString:
    """Parse a case-insensitive word over ``IXYZ``."""
    if text is None or len(text) == 0:
        raise PauliParseError("empty Pauli string", 1)
    upper = text.upper()
    for i, ch in enumerate(upper):
        if ch not in LETTERS:
            raise PauliParseError(f"invalid letter {text[i]!r} at position {i + 1}", i + 1)
    return PauliString(upper)


def pauli_matrix(letters: str) -> np.ndarray:
    mats = [PAULI_MATRICES[ch] for ch in reversed(letters)]
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


class AngleKind(str, enum.Enum):
    CLIFFORD = "clifford"
    T_LIKE = "t-like"
    GENERIC = "generic"


def _near_multiple(value: float, step: float) -> bool:
    k = round(value / step)
    return abs(value - k * step) <= ANGLE_TOL


def classify_angle(value: float) -> AngleKind:
    # exp(i*theta*P) is a Pauli (up to phase) iff theta = pi/2 mod pi
    v = math.fmod(value, 2 * math.pi)
    if _near_multiple(v - math.pi / 2, math.pi):
        return AngleKind.CLIFFORD
    if _near_multiple(v, math.pi / 8) and not _near_multiple(v, math.pi / 2):
        return AngleKind.T_LIKE
    return AngleKind.GENERIC


_SYMBOLIC = {
    "pi/2": (math.pi / 2, AngleKind.CLIFFORD),
    "pi/4": (math.pi / 4, AngleKind.T_LIKE),
    "pi/8": (math.pi / 8, AngleKind.T_LIKE),
    "-pi/2": (-math.pi / 2, AngleKind.CLIFFORD),
    "-pi/4": (-math.pi / 4, AngleKind.T_LIKE),
    "-pi/8": (-math.pi / 8, AngleKind.T_LIKE),
}


@dataclass(frozen=True)
class Angle:
    value: float
    kind: AngleKind

    @classmethod
    def of(cls, value: float) -> Angle:
        return cls(float(value), classify_angle(float(value)))

    @classmethod
    def parse(cls, text: str) -> Angle:
        """Accept a float in radians or one of the tokens ``pi/2``, ``pi/4``, ``pi/8``."""
        token = text.strip().lower().replace(" ", "")
        if token in _SYMBOLIC:
            value, kind = _SYMBOLIC[token]
            return cls(value, kind)
        try:
            return cls.of(float(token))
        except ValueError:
            raise ValueError(f"cannot parse angle {text!r}") from None

    @property
    def corrective(self) -> float:
        """Angle of the rotation that repairs a sign-flipped teleported rotation."""
        return 2.0 * self.value

    def __neg__(self) -> Angle:
        return Angle(-self.value, self.kind)


# --- single-qubit Clifford group -------------------------------------------

# Signed Pauli images: (sign, letter). The 24 Cliffords are enumerated by the
# image of X (in _X_ORDER) then the image of Z (in _Z_ORDER); id 0 is identity.
_X_ORDER = [(1, "X"), (-1, "X"), (1, "Y"), (-1, "Y"), (1, "Z"), (-1, "Z")]
_Z_ORDER = [(1, "Z"), (-1, "Z"), (1, "X"), (-1, "X"), (1, "Y"), (-1, "Y")]


def _image(m: np.ndarray, p: np.ndarray) -> tuple[int, str]:
    out = m @ p @ m.conj().T
    for letter in "XYZ":
        for sign in (1, -1):
            if np.allclose(out, sign * PAULI_MATRICES[letter]):
                return sign, letter
    raise AssertionError("not a Clifford")


def _canonical_phase(m: np.ndarray) -> np.ndarray:
    flat = m.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    return m * (abs(flat[k]) / flat[k])


def _enumerate_cliffords() -> list[np.ndarray]:
    found: dict[tuple, np.ndarray] = {}
    frontier = [I2]
    while frontier:
        nxt = []
        for m in frontier:
            key = (_image(m, X2), _image(m, Z2))
            if key in found:
                continue
            found[key] = _canonical_phase(m)
            nxt.extend([H2 @ m, S2 @ m])
        frontier = nxt
    ordered = []
    for xi, zi in itertools.product(_X_ORDER, _Z_ORDER):
        if (xi, zi) in found:
            ordered.append(found[(xi, zi)])
    assert len(ordered) == 24
    return ordered


CLIFFORD_MATRICES: tuple[np.ndarray, ...] = tuple(_enumerate_cliffords())

# CLIFFORD_ACTION[c][letter] = (sign, letter') with C P C^dagger = sign * P'
CLIFFORD_ACTION: tuple[dict[str, tuple[int, str]], ...] = tuple(
    {"I": (1, "I"), **{p: _image(m, PAULI_MATRICES[p]) for p in "XYZ"}} for m in CLIFFORD_MATRICES
)


def _find_clifford(m: np.ndarray) -> int:
    key = (_image(m, X2), _image(m, Z2))
    for cid in range(24):
        act = CLIFFORD_ACTION[cid]
        if (act["X"], act["Z"]) == key:
            return cid
    raise AssertionError("unreachable")


CLIFFORD_INVERSE: tuple[int, ...] = tuple(_find_clifford(m.conj().T) for m in CLIFFORD_MATRICES)

CLIFFORD_IDS = {
    "I": 0,
    "X": _find_clifford(X2),
    "Y": _find_clifford(Y2),
    "Z": _find_clifford(Z2),
    "H": _find_clifford(H2),
    "S": _find_clifford(S2),
    "Sdg": _find_clifford(S2.conj().T),
    "SH": _find_clifford(S2 @ H2),
}
CLIFFORD_NAMES = {cid: name for name, cid in CLIFFORD_IDS.items()}


def clifford_compose(first: int, second: int) -> int:
    """Id of the Clifford that applies ``first`` then ``second``."""
    return _find_clifford(CLIFFORD_MATRICES[second] @ CLIFFORD_MATRICES[first])


def clifford_name(cid: int) -> str:
    return CLIFFORD_NAMES.get(cid, f"C{cid}")


@dataclass(frozen=True)
class CliffordLayer:
    """One single-qubit Clifford id per data qubit."""

    ids: tuple[int, ...]

    def __post_init__(self):
        if any(not 0 <= c < 24 for c in self.ids):
            raise ValueError("Clifford ids must lie in 0..23")

    def __len__(self) -> int:
        return len(self.ids)

    def inverse(self) -> CliffordLayer:
        return CliffordLayer(tuple(CLIFFORD_INVERSE[c] for c in self.ids))

    def then(self, other: CliffordLayer) -> CliffordLayer:
        return CliffordLayer(tuple(clifford_compose(a, b) for a, b in zip(self.ids, other.ids)))

    @property
    def is_identity(self) -> bool:
        return all(c == 0 for c in self.ids)

    def matrix(self) -> np.ndarray:
        mats = [CLIFFORD_MATRICES[c] for c in reversed(self.ids)]
        return reduce(np.kron, mats, np.eye(1, dtype=complex))


# C Z C^dagger = +letter for these choices
_Z_TO = {"I": "I", "Z": "I", "X": "H", "Y": "SH"}


def conjugate_to_z_form(p: PauliString) -> tuple[CliffordLayer, PauliString]:
    """Return ``(C, Pz)`` with ``C Pz C^dagger == P`` and ``Pz`` over ``{I, Z}``."""
    layer = CliffordLayer(tuple(CLIFFORD_IDS[_Z_TO[ch]] for ch in p.letters))
    pz = PauliString("".join("I" if ch == "I" else "Z" for ch in p.letters))
    return layer, pz
