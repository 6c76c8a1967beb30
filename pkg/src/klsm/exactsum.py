"""Exact finite sums of roots of unity.

An ExactExponentialSum stores, for a modulus Q, how many times each root
e(k/Q) occurs.  Kloosterman-type sums are held losslessly in this form,
so symmetry identities can be tested as exact multiset equalities rather
than floating-point comparisons.  MultiplierValue is the one-term
special case (a single root of unity), used for multiplier systems.
"""

from __future__ import annotations

import cmath
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: merge_modulus refuses to embed into anything larger than this
DEFAULT_MODULUS_CAP = 24 * 10**6


class ModulusOverflow(ValueError):
    """lcm of moduli exceeds the configured cap."""


@dataclass(frozen=True)
class MultiplierValue:
    """A root of unity e(exponent/modulus) with modulus in {4, 8, 24}."""

    modulus: int
    exponent: int

    def __post_init__(self):
        object.__setattr__(self, "exponent", self.exponent % self.modulus)

    @property
    def value(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.exponent / self.modulus)

    def conjugate(self) -> "MultiplierValue":
        return MultiplierValue(self.modulus, -self.exponent)

    def __mul__(self, other: "MultiplierValue") -> "MultiplierValue":
        q = math.lcm(self.modulus, other.modulus)
        return MultiplierValue(
            q, self.exponent * (q // self.modulus) + other.exponent * (q // other.modulus)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiplierValue):
            return NotImplemented
        q = math.lcm(self.modulus, other.modulus)
        return self.exponent * (q // self.modulus) == other.exponent * (q // other.modulus)

    def __hash__(self):
        # hash via the reduced fraction exponent/modulus
        g = math.gcd(self.exponent, self.modulus)
        return hash((self.exponent // g if g else 0, self.modulus // g if g else self.modulus))


@lru_cache(maxsize=64)
def _root_table(Q: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(Q) / Q)


class ExactExponentialSum:
    """Multiset of Q-th roots of unity with integer multiplicities.

    Instances are immutable once constructed; all mutating-style
    operations return fresh objects.
    """

    __slots__ = ("modulus", "multiplicities")

    def __init__(self, modulus: int, multiplicities=None):
        if modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {modulus}")
        self.modulus = int(modulus)
        if multiplicities is None:
            m = np.zeros(modulus, dtype=np.int64)
        else:
            m = np.asarray(multiplicities, dtype=np.int64)
            if m.shape != (modulus,):
                raise ValueError("multiplicity array must have length Q")
            m = m.copy()
        m.setflags(write=False)
        self.multiplicities = m

    @classmethod
    def from_exponents(cls, modulus: int, exponents) -> "ExactExponentialSum":
        """Sum of e(k/Q) over the (repeatable) exponent list."""
        ks = np.asarray(exponents, dtype=np.int64) % modulus
        return cls(modulus, np.bincount(ks, minlength=modulus).astype(np.int64))

    def add_term(self, k: int, count: int = 1) -> "ExactExponentialSum":
        m = self.multiplicities.copy()
        m[k % self.modulus] += count
        return ExactExponentialSum(self.modulus, m)

    def conjugate(self) -> "ExactExponentialSum":
        m = self.multiplicities
        return ExactExponentialSum(self.modulus, np.concatenate((m[:1], m[:0:-1])))

    def evaluate(self) -> complex:
        return complex(np.dot(self.multiplicities, _root_table(self.modulus)))

    def rescale(self, new_modulus: int) -> "ExactExponentialSum":
        """Embed into modulus Q' with Q | Q'; the value is unchanged."""
        if new_modulus % self.modulus:
            raise ValueError(f"{self.modulus} does not divide {new_modulus}")
        step = new_modulus // self.modulus
        m = np.zeros(new_modulus, dtype=np.int64)
        m[::step] = self.multiplicities
        return ExactExponentialSum(new_modulus, m)

    def __add__(self, other: "ExactExponentialSum") -> "ExactExponentialSum":
        a, b = merge_modulus(self, other)
        return ExactExponentialSum(a.modulus, a.multiplicities + b.multiplicities)

    def __sub__(self, other: "ExactExponentialSum") -> "ExactExponentialSum":
        a, b = merge_modulus(self, other)
        return ExactExponentialSum(a.modulus, a.multiplicities - b.multiplicities)

    def __eq__(self, other) -> bool:
        # exact multiset equality after reduction to a common modulus;
        # cyclotomic relations are deliberately NOT applied
        if not isinstance(other, ExactExponentialSum):
            return NotImplemented
        a, b = merge_modulus(self, other)
        return bool(np.array_equal(a.multiplicities, b.multiplicities))

    def __hash__(self):
        return hash((self.modulus, self.multiplicities.tobytes()))

    def is_zero_multiset(self) -> bool:
        return not self.multiplicities.any()

    def __repr__(self):
        nz = int(np.count_nonzero(self.multiplicities))
        return f"ExactExponentialSum(Q={self.modulus}, nonzero={nz})"

    # --- serialization: (Q, run-length-encoded multiplicities) ---------

    def to_bytes(self) -> bytes:
        """Little-endian (Q: u64, nruns: u64, runs of (value: i64, len: u64))."""
        runs: list[tuple[int, int]] = []
        m = self.multiplicities
        i = 0
        n = len(m)
        while i < n:
            j = i
            while j < n and m[j] == m[i]:
                j += 1
            runs.append((int(m[i]), j - i))
            i = j
        out = [struct.pack("<QQ", self.modulus, len(runs))]
        for v, ln in runs:
            out.append(struct.pack("<qQ", v, ln))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ExactExponentialSum":
        q, nruns = struct.unpack_from("<QQ", blob, 0)
        m = np.empty(q, dtype=np.int64)
        off = 16
        pos = 0
        for _ in range(nruns):
            v, ln = struct.unpack_from("<qQ", blob, off)
            off += 16
            m[pos : pos + ln] = v
            pos += ln
        if pos != q:
            raise ValueError("corrupt run-length data")
        return cls(q, m)


def add_term(s: ExactExponentialSum, k: int, count: int = 1) -> ExactExponentialSum:
    return s.add_term(k, count)


def conjugate(s: ExactExponentialSum) -> ExactExponentialSum:
    return s.conjugate()


def evaluate(s: ExactExponentialSum) -> complex:
    return s.evaluate()


def merge_modulus(
    s1: ExactExponentialSum,
    s2: ExactExponentialSum,
    cap: int = DEFAULT_MODULUS_CAP,
) -> tuple[ExactExponentialSum, ExactExponentialSum]:
    """Rewrite both sums over lcm(Q1, Q2); values are unchanged."""
    q = math.lcm(s1.modulus, s2.modulus)
    if q > cap:
        raise ModulusOverflow(f"lcm modulus {q} exceeds cap {cap}")
    a = s1 if s1.modulus == q else s1.rescale(q)
    b = s2 if s2.modulus == q else s2.rescale(q)
    return a, b


def is_numerically_zero(s: ExactExponentialSum, threshold: float = 1e-9) -> tuple[bool, bool]:
    """(multiset zero, numerically zero); disagreement means a cyclotomic
    relation collapsed the value without collapsing the multiset."""
    exact = s.is_zero_multiset()
    numeric = abs(s.evaluate()) <= threshold
    return exact, numeric
