"""Truncated Laurent series over Q with explicit precision bookkeeping.

A series stores its coefficients from exponent ``start`` upward and the
exponent ``prec`` below which every coefficient is known; the true series
agrees with the stored one modulo q^prec.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exact import _qdiv, to_rat


class Series:
    __slots__ = ("start", "coeffs", "prec")

    def __init__(self, coeffs: Sequence, start: int = 0, prec: int | None = None):
        cs = [to_rat(c) for c in coeffs]
        if prec is None:
            prec = start + len(cs)
        # keep only coefficients below the precision, strip leading zeros
        cs = cs[: max(0, prec - start)]
        while cs and cs[0] == 0:
            cs.pop(0)
            start += 1
        if not cs:
            start = prec
        self.start = start
        self.coeffs = cs
        self.prec = prec

    @classmethod
    def from_qexp(cls, coeffs: Sequence[int], precision: int) -> "Series":
        """Coefficients of q^1 .. q^(len) known modulo q^precision."""
        return cls(list(coeffs), 1, precision)

    @classmethod
    def constant(cls, c, prec: int) -> "Series":
        return cls([c], 0, prec)

    @property
    def valuation(self) -> int:
        """Exponent of the first nonzero coefficient; equals ``prec`` when nothing nonzero is known."""
        return self.start

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes."""
        return not self.coeffs

    def __getitem__(self, n: int):
        if n >= self.prec:
            raise IndexError(f"coefficient q^{n} unknown (precision {self.prec})")
        i = n - self.start
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def nonzero_terms(self) -> list[tuple[int, object]]:
        return [(self.start + i, c) for i, c in enumerate(self.coeffs) if c != 0]

    def __repr__(self):
        terms = " + ".join(f"{c}*q^{e}" for e, c in self.nonzero_terms()[:6])
        return f"Series({terms or '0'} + O(q^{self.prec}))"

    def __add__(self, other):
        if not isinstance(other, Series):
            other = Series.constant(other, self.prec)
        prec = min(self.prec, other.prec)
        lo = min(self.start, other.start)
        if lo >= prec:
            return Series([], prec, prec)
        out = [0] * (prec - lo)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                e = s.start + i
                if e < prec:
                    out[e - lo] += c
        return Series(out, lo, prec)

    __radd__ = __add__

    def __neg__(self):
        return Series([-c for c in self.coeffs], self.start, self.prec)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Series) else -to_rat(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Series":
        c = to_rat(c)
        if c == 0:
            return Series([], self.prec, self.prec)
        return Series([c * a for a in self.coeffs], self.start, self.prec)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return self.scale(other)
        # a = a_known + O(q^pa) with valuation va, similarly b
        prec = min(self.prec + other.start, other.prec + self.start)
        lo = self.start + other.start
        if lo >= prec:
            return Series([], prec, prec)
        out = [0] * (prec - lo)
        n = prec - lo
        for i, a in enumerate(self.coeffs):
            if i >= n:
                break
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs[: n - i]):
                out[i + j] += a * b
        return Series(out, lo, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Series":
        if k < 0:
            return self.inverse() ** (-k)
        result = Series([1], 0, 10**9)
        for _ in range(k):
            result = result * self
        return result

    def inverse(self) -> "Series":
        if not self.coeffs:
            raise ZeroDivisionError("series has no known nonzero coefficient")
        v = self.start
        a0 = self.coeffs[0]
        # u = self / (a0 q^v) = 1 + ... known modulo q^(prec - v)
        n = self.prec - v
        u = [_qdiv(c, a0) for c in self.coeffs[:n]]
        inv = [0] * n
        inv[0] = 1
        for k in range(1, n):
            s = 0
            for j in range(1, min(k, len(u) - 1) + 1):
                s += u[j] * inv[k - j]
            inv[k] = -s
        # 1/self = q^-v / a0 * inv, known modulo q^(n - v)
        return Series([_qdiv(c, a0) for c in inv], -v, n - v)

    def __truediv__(self, other):
        if not isinstance(other, Series):
            return self.scale(Fraction(1) / to_rat(other))
        return self * other.inverse()

    def derivative_q(self) -> "Series":
        """q d/dq, which keeps integrality and valuation."""
        return Series([(self.start + i) * c for i, c in enumerate(self.coeffs)], self.start, self.prec)


def linear_combination(vec: Sequence, series: Sequence[Series]) -> Series:
    acc = None
    for c, s in zip(vec, series):
        if c == 0:
            continue
        t = s.scale(c)
        acc = t if acc is None else acc + t
    if acc is None:
        prec = min(s.prec for s in series)
        return Series([], prec, prec)
    return acc


def eval_multipoly(poly, series: Sequence[Series]) -> Series:
    """Substitute series for the variables of a MultiPoly over Q."""
    powers: dict = {}
    acc = None
    for e, c in poly.terms.items():
        t = None
        for i, k in enumerate(e):
            if not k:
                continue
            key = (i, k)
            if key not in powers:
                powers[key] = series[i] ** k
            t = powers[key] if t is None else t * powers[key]
        if t is None:
            prec = min(s.prec for s in series)
            t = Series.constant(1, prec)
        t = t.scale(c)
        acc = t if acc is None else acc + t
    return acc
