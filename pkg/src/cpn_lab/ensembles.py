"""Coherent-state codeword ensembles: PPM, multi-pulse PPM and binary codes.

A codeword is a product of single-slot coherent states. Each slot holds
vacuum, ``|+alpha>`` or ``|-alpha>``. OOK-like ensembles (PPM, MPPM, OOK
coded) use vacuum and ``+alpha``; BPSK coded ensembles use ``-alpha`` and
``+alpha``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Amplitude",
    "SlotSymbol",
    "Family",
    "SignalEnsemble",
    "make_mppm",
    "make_ppm",
    "make_coded",
    "hamming_7_4_codewords",
    "read_codeword_file",
]

PRIOR_TOL = 1e-12


@dataclass(frozen=True)
class Amplitude:
    """Real coherent amplitude ``alpha >= 0``; ``n_bar = alpha**2``."""

    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"amplitude must be finite and >= 0, got {self.alpha!r}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def from_n_bar(cls, n_bar: float) -> "Amplitude":
        if not math.isfinite(n_bar) or n_bar < 0:
            raise ValueError(f"mean photon number must be finite and >= 0, got {n_bar!r}")
        return cls(math.sqrt(n_bar))

    @property
    def n_bar(self) -> float:
        return self.alpha * self.alpha


class SlotSymbol(enum.Enum):
    """State of one time slot; the value is the sign multiplying alpha."""

    VACUUM = 0
    PLUS_ALPHA = 1
    MINUS_ALPHA = -1

    def amplitude(self, amplitude: Amplitude) -> float:
        return self.value * amplitude.alpha


class Family(str, enum.Enum):
    OOK = "ook"
    BPSK = "bpsk"

    @property
    def symbols(self) -> tuple[SlotSymbol, SlotSymbol]:
        """Symbols for bit 0 and bit 1."""
        if self is Family.OOK:
            return (SlotSymbol.VACUUM, SlotSymbol.PLUS_ALPHA)
        return (SlotSymbol.MINUS_ALPHA, SlotSymbol.PLUS_ALPHA)


@dataclass(frozen=True)
class SignalEnsemble:
    """N distinct codewords of M slots with prior probabilities."""

    m_slots: int
    codewords: tuple[tuple[SlotSymbol, ...], ...]
    priors: tuple[float, ...]
    amplitude: Amplitude
    family: Family

    def __post_init__(self):
        if self.m_slots < 1:
            raise ValueError("m_slots must be positive")
        if len(self.codewords) == 0:
            raise ValueError("ensemble needs at least one codeword")
        if len(self.priors) != len(self.codewords):
            raise ValueError(
                f"{len(self.priors)} priors given for {len(self.codewords)} codewords"
            )
        allowed = set(self.family.symbols)
        for word in self.codewords:
            if len(word) != self.m_slots:
                raise ValueError(
                    f"codeword length {len(word)} does not match m_slots={self.m_slots}"
                )
            bad = set(word) - allowed
            if bad:
                names = ", ".join(sorted(s.name for s in bad))
                raise ValueError(f"symbols {names} not allowed in {self.family.value} ensemble")
        if len(set(self.codewords)) != len(self.codewords):
            raise ValueError("codewords must be distinct")
        _check_priors(self.priors)

    @property
    def n_codewords(self) -> int:
        return len(self.codewords)

    @property
    def n_bar(self) -> float:
        return self.amplitude.n_bar

    def prior_array(self) -> np.ndarray:
        return np.asarray(self.priors, dtype=float)

    def amplitudes(self) -> np.ndarray:
        """Real slot amplitudes, shape ``(N, M)``."""
        signs = np.array([[s.value for s in word] for word in self.codewords], dtype=float)
        return signs * self.amplitude.alpha

    def bits(self) -> list[str]:
        one = self.family.symbols[1]
        return ["".join("1" if s is one else "0" for s in word) for word in self.codewords]

    def with_amplitude(self, amplitude: Amplitude) -> "SignalEnsemble":
        return SignalEnsemble(self.m_slots, self.codewords, self.priors, amplitude, self.family)

    def with_n_bar(self, n_bar: float) -> "SignalEnsemble":
        return self.with_amplitude(Amplitude.from_n_bar(n_bar))

    def permute_slots(self, perm: Sequence[int]) -> "SignalEnsemble":
        """Reorder the slots of every codeword: new slot k is old slot ``perm[k]``."""
        if sorted(perm) != list(range(self.m_slots)):
            raise ValueError(f"not a permutation of {self.m_slots} slots: {perm!r}")
        words = tuple(tuple(word[p] for p in perm) for word in self.codewords)
        return SignalEnsemble(self.m_slots, words, self.priors, self.amplitude, self.family)


def _check_priors(priors: Sequence[float]) -> None:
    if any(not math.isfinite(p) or p < 0 for p in priors):
        raise ValueError("priors must be finite and nonnegative")
    total = math.fsum(priors)
    if abs(total - 1.0) > PRIOR_TOL:
        raise ValueError(f"priors sum to {total!r}, expected 1")


def make_mppm(m_slots: int, l_pulses: int, amplitude: Amplitude) -> SignalEnsemble:
    """All ``C(M, L)`` placements of L pulses in M slots, equiprobable.

    Ordering follows ``itertools.combinations`` over pulse positions, so
    for M=4, L=2 the words are 1100, 1010, 1001, 0110, 0101, 0011.
    """
    if m_slots < 1:
        raise ValueError(f"m_slots must be >= 1, got {m_slots}")
    if not 1 <= l_pulses <= m_slots:
        raise ValueError(f"l_pulses must be in [1, {m_slots}], got {l_pulses}")
    words = []
    for positions in itertools.combinations(range(m_slots), l_pulses):
        word = [SlotSymbol.VACUUM] * m_slots
        for p in positions:
            word[p] = SlotSymbol.PLUS_ALPHA
        words.append(tuple(word))
    n = len(words)
    return SignalEnsemble(m_slots, tuple(words), (1.0 / n,) * n, amplitude, Family.OOK)


def make_ppm(m_slots: int, amplitude: Amplitude) -> SignalEnsemble:
    return make_mppm(m_slots, 1, amplitude)


def make_coded(
    codeword_bits: Sequence[str],
    family: Family | str,
    amplitude: Amplitude,
    priors: Sequence[float] | None = None,
) -> SignalEnsemble:
    """Map binary strings to coherent codewords (bit 1 -> ``+alpha``)."""
    family = Family(family)
    bits = [str(b).strip() for b in codeword_bits]
    if not bits:
        raise ValueError("no codewords given")
    m = len(bits[0])
    for b in bits:
        if len(b) != m:
            raise ValueError(f"codeword {b!r} has length {len(b)}, expected {m}")
        if set(b) - {"0", "1"}:
            raise ValueError(f"codeword {b!r} is not a binary string")
    if len(set(bits)) != len(bits):
        raise ValueError("duplicate codewords")
    zero, one = family.symbols
    words = tuple(tuple(one if c == "1" else zero for c in b) for b in bits)
    if priors is None:
        priors = (1.0 / len(words),) * len(words)
    return SignalEnsemble(m, words, tuple(float(p) for p in priors), amplitude, family)


# systematic generator G = [I4 | P]
_HAMMING_PARITY = ((1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1))


def hamming_7_4_codewords() -> list[str]:
    """The 16 codewords of the systematic (7, 4) Hamming code, message order."""
    words = []
    for msg in itertools.product((0, 1), repeat=4):
        parity = [sum(m * row[j] for m, row in zip(msg, _HAMMING_PARITY)) % 2 for j in range(3)]
        words.append("".join(map(str, (*msg, *parity))))
    return words


def read_codeword_file(path: str | Path) -> list[str]:
    """Read one binary string per line; ``#`` starts a comment."""
    return parse_codeword_lines(Path(path).read_text().splitlines())


def parse_codeword_lines(lines: Iterable[str]) -> list[str]:
    words = []
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if set(text) - {"0", "1"}:
            raise ValueError(f"line {lineno}: {text!r} is not a binary string")
        words.append(text)
    return words
