"""Exact algebra over N-qubit Pauli words and real-coefficient Pauli sums.

Words are stored in symplectic form: two bit vectors (packed into Python
integers) so that the word is the product over qubits of X^x Z^z, times
the phase i^{|x & z|} that turns XZ into Y. Bit q of the integers
corresponds to qubit q, and character q of a label like "XIZY".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Tuple

_PHASES = (1, 1j, -1, -1j)
_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


class DimensionError(ValueError):
    """Raised when operands act on different qubit counts."""


@dataclass(frozen=True, order=True)
class PauliWord:
    """A single N-qubit Pauli word in symplectic (z, x) form."""

    n_qubits: int
    z: int
    x: int

    def __post_init__(self):
        mask = (1 << self.n_qubits) - 1
        if self.z & ~mask or self.x & ~mask:
            raise ValueError("bit vectors exceed the qubit count")

    @classmethod
    def from_label(cls, label: str) -> "PauliWord":
        x = z = 0
        for q, ch in enumerate(label):
            try:
                xb, zb = _CHAR_TO_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r}") from None
            x |= xb << q
            z |= zb << q
        return cls(len(label), z, x)

    def label(self) -> str:
        return "".join(
            _BITS_TO_CHAR[((self.x >> q) & 1, (self.z >> q) & 1)]
            for q in range(self.n_qubits)
        )

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def weight(self) -> int:
        return (self.x | self.z).bit_count()


def _check_dims(a, b):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def pauli_product(p: PauliWord, q: PauliWord) -> Tuple[complex, PauliWord]:
    """Return (phase, word) with p * q = phase * word as operators."""
    _check_dims(p, q)
    x = p.x ^ q.x
    z = p.z ^ q.z
    # i-power bookkeeping: each word carries i^{|x&z|}; commuting the Z part
    # of p past the X part of q contributes (-1)^{|p.z & q.x|}.
    k = (p.x & p.z).bit_count() + (q.x & q.z).bit_count() - (x & z).bit_count()
    k += 2 * (p.z & q.x).bit_count()
    return _PHASES[k % 4], PauliWord(p.n_qubits, z, x)


def commutes(p: PauliWord, q: PauliWord) -> bool:
    """Symplectic-form commutation test; False means the pair anticommutes."""
    _check_dims(p, q)
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) % 2 == 0


class PauliSum:
    """Real-coefficient sum of Pauli words on a fixed qubit count.

    Hermiticity of every target operator forces real coefficients, so
    construction rejects anything with an imaginary part above tolerance.
    Instances are immutable; all algebra returns new sums.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Dict[PauliWord, float] | None = None,
                 imag_tol: float = 1e-12):
        self.n_qubits = n_qubits
        clean: Dict[PauliWord, float] = {}
        for word, coef in (terms or {}).items():
            if word.n_qubits != n_qubits:
                raise DimensionError("term qubit count mismatch")
            if isinstance(coef, complex):
                if abs(coef.imag) > imag_tol:
                    raise ValueError(f"imaginary coefficient {coef} on {word.label()}")
                coef = coef.real
            if coef != 0.0:
                clean[word] = float(coef)
        self._terms = clean

    @classmethod
    def from_terms(cls, labelled: Dict[str, float]) -> "PauliSum":
        words = {PauliWord.from_label(lbl): c for lbl, c in labelled.items()}
        if not words:
            raise ValueError("cannot infer qubit count from empty term map")
        n = next(iter(words)).n_qubits
        return cls(n, words)

    def items(self) -> Iterator[Tuple[PauliWord, float]]:
        return iter(self._terms.items())

    def sorted_items(self):
        """Terms in canonical (z, x) order; deterministic across runs."""
        return sorted(self._terms.items(), key=lambda kv: (kv[0].z, kv[0].x))

    def coefficient(self, word: PauliWord) -> float:
        return self._terms.get(word, 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliSum)
                and self.n_qubits == other.n_qubits
                and self._terms == other._terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        _check_dims(self, other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0.0) + c
        return PauliSum(self.n_qubits, out)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.n_qubits, {w: factor * c for w, c in self._terms.items()})

    def cleaned(self, tol: float = 1e-14) -> "PauliSum":
        return PauliSum(self.n_qubits, {w: c for w, c in self._terms.items() if abs(c) > tol})

    @property
    def identity_coefficient(self) -> float:
        return self._terms.get(PauliWord(self.n_qubits, 0, 0), 0.0)

    def without_identity(self) -> "PauliSum":
        ident = PauliWord(self.n_qubits, 0, 0)
        return PauliSum(self.n_qubits, {w: c for w, c in self._terms.items() if w != ident})

    def coefficient_l1(self) -> float:
        return sum(abs(c) for c in self._terms.values())

    def __repr__(self) -> str:
        inner = " + ".join(f"{c:g}*{w.label()}" for w, c in list(self.sorted_items())[:4])
        more = "" if len(self) <= 4 else f" + ... ({len(self)} terms)"
        return f"PauliSum({inner}{more})"


def symmetric_product(a: PauliSum, b: PauliSum) -> PauliSum:
    """Exact (ab + ba) / 2; always Hermitian with real coefficients."""
    _check_dims(a, b)
    acc: Dict[PauliWord, complex] = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            phase, w = pauli_product(wa, wb)
            # anticommuting pairs contribute equal and opposite parts in the
            # two orders and cancel; commuting pairs double up.
            if commutes(wa, wb):
                acc[w] = acc.get(w, 0.0) + ca * cb * phase
    return PauliSum(a.n_qubits, acc)


def normalized_trace_inner(a: PauliSum, b: PauliSum) -> float:
    """(1/d) Tr[a^dagger b]; the Pauli basis is orthonormal under it."""
    _check_dims(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    return sum(c * large.coefficient(w) for w, c in small.items())


def identity_sum(n_qubits: int, coefficient: float = 1.0) -> PauliSum:
    return PauliSum(n_qubits, {PauliWord(n_qubits, 0, 0): coefficient})


def serialize(h: PauliSum) -> str:
    """One term per line: `<coefficient> <word label>`; bit-exact round trip."""
    lines = [f"{c!r} {w.label()}" for w, c in h.sorted_items()]
    return "\n".join(lines) + ("\n" if lines else "")


def deserialize(text: str, n_qubits: int | None = None) -> PauliSum:
    terms: Dict[PauliWord, float] = {}
    n = n_qubits
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            coef_str, label = line.split()
            coef = float(coef_str)
        except ValueError:
            raise ValueError(f"malformed term on line {lineno}: {raw!r}") from None
        word = PauliWord.from_label(label)
        if n is None:
            n = word.n_qubits
        if word.n_qubits != n:
            raise DimensionError(f"line {lineno}: expected {n} qubits")
        terms[word] = terms.get(word, 0.0) + coef
    if n is None:
        raise ValueError("empty serialization and no qubit count given")
    return PauliSum(n, terms)
