"""Exact arithmetic: rationals, prime fields, univariate and sparse multivariate polynomials.

Rationals are :class:`fractions.Fraction`; a rational with denominator 1 is kept
as a plain ``int`` because big-int arithmetic is much cheaper than Fraction
arithmetic.  Every polynomial carries its coefficient domain: ``p=None`` means
the rationals, an integer ``p`` means the prime field F_p.  Values are
immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd, isqrt, lcm
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateInputError, DomainMismatchError, NotPIntegralError

Rat = Fraction


def to_rat(c):
    """Normalise an int/Fraction/str/(num, den) pair into the canonical rational representation."""
    if isinstance(c, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(c, int):
        return c
    if isinstance(c, tuple):
        c = Fraction(*c)
    elif not isinstance(c, Fraction):
        c = Fraction(c)
    return c.numerator if c.denominator == 1 else c


def _qdiv(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r == 0:
            return q
    return to_rat(Fraction(a) / b)


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def primes_in(lo: int, hi: int) -> list[int]:
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


def reduce_rat(c, p: int) -> int:
    """Image of a rational number in F_p."""
    if isinstance(c, int):
        return c % p
    if c.denominator % p == 0:
        raise NotPIntegralError(p, c)
    return c.numerator * pow(c.denominator, -1, p) % p


@dataclass(frozen=True)
class PrimeField:
    """F_p; primality is checked once here."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def __call__(self, value) -> "PrimeFieldElem":
        return PrimeFieldElem(reduce_rat(to_rat(value), self.p), self.p)

    def __iter__(self):
        return (PrimeFieldElem(r, self.p) for r in range(self.p))

    def __len__(self):
        return self.p


@dataclass(frozen=True)
class PrimeFieldElem:
    residue: int
    p: int

    def __post_init__(self):
        if not 0 <= self.residue < self.p:
            object.__setattr__(self, "residue", self.residue % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, PrimeFieldElem):
            if other.p != self.p:
                raise DomainMismatchError(f"F_{self.p} versus F_{other.p}")
            return other.residue
        return reduce_rat(to_rat(other), self.p)

    def __add__(self, other):
        return PrimeFieldElem((self.residue + self._coerce(other)) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return PrimeFieldElem((self.residue - self._coerce(other)) % self.p, self.p)

    def __rsub__(self, other):
        return PrimeFieldElem((self._coerce(other) - self.residue) % self.p, self.p)

    def __mul__(self, other):
        return PrimeFieldElem(self.residue * self._coerce(other) % self.p, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeFieldElem(-self.residue % self.p, self.p)

    def inverse(self) -> "PrimeFieldElem":
        if self.residue == 0:
            raise ZeroDivisionError("0 has no inverse")
        return PrimeFieldElem(pow(self.residue, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * PrimeFieldElem(self._coerce(other), self.p).inverse()

    def __pow__(self, n: int):
        return PrimeFieldElem(pow(self.residue, n, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, PrimeFieldElem):
            return self.p == other.p and self.residue == other.residue
        if isinstance(other, (int, Fraction)):
            return self.residue == reduce_rat(to_rat(other), self.p)
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.p))

    def __int__(self):
        return self.residue

    def __repr__(self):
        return f"{self.residue} (mod {self.p})"


def _domain(a, b):
    if a.p != b.p:
        raise DomainMismatchError(f"coefficient domains differ: {a.p} vs {b.p}")
    return a.p


# ---------------------------------------------------------------------------
# univariate


class UniPoly:
    """Dense univariate polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs", "p", "var")

    def __init__(self, coeffs: Iterable = (), p: int | None = None, var: str = "x"):
        if p is None:
            cs = [to_rat(c) for c in coeffs]
        else:
            cs = [reduce_rat(to_rat(c), p) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "var", var)

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    @classmethod
    def _raw(cls, coeffs: list, p, var="x") -> "UniPoly":
        # trusted constructor: coefficients already normalised
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        obj = object.__new__(cls)
        object.__setattr__(obj, "coeffs", tuple(coeffs))
        object.__setattr__(obj, "p", p)
        object.__setattr__(obj, "var", var)
        return obj

    @classmethod
    def x(cls, p: int | None = None, var: str = "x") -> "UniPoly":
        return cls._raw([0, 1], p, var)

    @classmethod
    def constant(cls, c, p: int | None = None, var: str = "x") -> "UniPoly":
        return cls([c], p, var)

    # basic queries
    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else 0

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.p == other.p and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == UniPoly([other], self.p, self.var)
        return NotImplemented

    def __hash__(self):
        return hash((self.coeffs, self.p))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mon = "" if i == 0 else (self.var if i == 1 else f"{self.var}^{i}")
            parts.append(f"{c}" if not mon else (mon if c == 1 else f"{c}*{mon}"))
        s = " + ".join(parts)
        return s if self.p is None else f"{s} (mod {self.p})"

    # ring operations
    def _coerce(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            _domain(self, other)
            return other
        return UniPoly([other], self.p, self.var)

    def _norm(self, c):
        return c % self.p if self.p is not None else c

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = self._norm(out[i] + c)
        if self.p is None:
            out = [to_rat(c) if isinstance(c, Fraction) else c for c in out]
        return UniPoly._raw(out, self.p, self.var)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly._raw([self._norm(-c) for c in self.coeffs], self.p, self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            c = to_rat(other) if self.p is None else reduce_rat(to_rat(other), self.p)
            return UniPoly._raw([self._norm(c * a) for a in self.coeffs] if c else [], self.p, self.var)
        _domain(self, other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly._raw([], self.p, self.var)
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca == 0:
                continue
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        if self.p is not None:
            out = [c % self.p for c in out]
        else:
            out = [to_rat(c) if isinstance(c, Fraction) else c for c in out]
        return UniPoly._raw(out, self.p, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = UniPoly([1], self.p, self.var)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _inv(self, c):
        if self.p is None:
            return _qdiv(1, c)
        return pow(c, -1, self.p)

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        """Euclidean division over the coefficient field."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        if len(r) - 1 < db:
            return UniPoly._raw([], self.p, self.var), self
        q = [0] * (len(r) - db)
        lb = other.lc
        inv = self._inv(lb)
        bc = other.coeffs
        for k in range(len(r) - 1 - db, -1, -1):
            c = r[k + db]
            if c == 0:
                continue
            if self.p is None:
                f = _qdiv(c, lb) if inv is None else to_rat(c * inv)
            else:
                f = c * inv % self.p
            q[k] = f
            for j in range(db + 1):
                r[k + j] = self._norm(r[k + j] - f * bc[j])
        if self.p is None:
            r = [to_rat(c) if isinstance(c, Fraction) else c for c in r[:db]]
        else:
            r = r[:db]
        return UniPoly._raw(q, self.p, self.var), UniPoly._raw(r, self.p, self.var)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exquo(self, other) -> "UniPoly":
        """Exact quotient; raises if the division leaves a remainder."""
        if not isinstance(other, UniPoly):
            if self.p is None:
                return UniPoly._raw([_qdiv(c, other) for c in self.coeffs], None, self.var)
            inv = pow(reduce_rat(to_rat(other), self.p), -1, self.p)
            return UniPoly._raw([c * inv % self.p for c in self.coeffs], self.p, self.var)
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError("inexact polynomial division")
        return q

    def divides(self, other: "UniPoly") -> bool:
        return not (other % self)

    # calculus / evaluation
    def derivative(self) -> "UniPoly":
        return UniPoly._raw([self._norm(i * c) for i, c in enumerate(self.coeffs) if i], self.p, self.var)

    def __call__(self, value):
        acc = 0
        if self.p is None:
            for c in reversed(self.coeffs):
                acc = acc * value + c
            return to_rat(acc) if isinstance(acc, Fraction) else acc
        v = value if isinstance(value, int) else reduce_rat(to_rat(value), self.p)
        for c in reversed(self.coeffs):
            acc = (acc * v + c) % self.p
        return acc

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self.exquo(self.lc)

    def content(self) -> Fraction | int:
        """Positive rational c with self/c a primitive integer polynomial."""
        if self.p is not None:
            raise DomainMismatchError("content is defined over Q only")
        if not self.coeffs:
            return 0
        den = lcm(*(Fraction(c).denominator for c in self.coeffs))
        num = 0
        for c in self.coeffs:
            num = gcd(num, int(c * den))
        return to_rat(Fraction(num, den))

    def primitive(self) -> "UniPoly":
        """Primitive integer polynomial with positive leading coefficient."""
        if self.is_zero():
            return self
        c = self.content()
        if self.lc < 0:
            c = -c
        return UniPoly._raw([int(x / c) if isinstance(x, Fraction) or isinstance(c, Fraction) else x // c
                             for x in self.coeffs], None, self.var)

    def reduce_mod(self, p: int) -> "UniPoly":
        return reduce_mod_p(self, p)

    def to_list(self) -> list:
        return list(self.coeffs)


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd; gcd(0, 0) = 0."""
    p = _domain(a, b)
    if a.is_zero() and b.is_zero():
        return a
    if p is None:
        return _gcd_q(a, b)
    while b:
        a, b = b, a % b
    return a.monic()


def _prim_int(coeffs: Sequence) -> list[int]:
    den = lcm(*(Fraction(c).denominator for c in coeffs))
    ints = [int(c * den) for c in coeffs]
    g = 0
    for c in ints:
        g = gcd(g, c)
    return [c // g for c in ints]


def _int_prem(a: list[int], b: list[int]) -> list[int]:
    # pseudo-remainder of integer coefficient lists (lowest degree first)
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(r) - 1 >= db and r:
        c = r[-1]
        shift = len(r) - 1 - db
        r = [x * lb for x in r]
        for j in range(db + 1):
            r[shift + j] -= c * b[j]
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return r


def _gcd_q(a: UniPoly, b: UniPoly) -> UniPoly:
    # primitive PRS over Z keeps coefficient growth in check for the large
    # discriminants met in practice
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    x, y = _prim_int(a.coeffs), _prim_int(b.coeffs)
    if len(x) < len(y):
        x, y = y, x
    while y:
        r = _int_prem(x, y)
        if not r:
            break
        x, y = y, _prim_int(r)
        if len(y) == 1:
            return UniPoly([1], None, a.var)
    return UniPoly(y, None, a.var).monic()


def squarefree_part(f: UniPoly) -> UniPoly:
    """f / gcd(f, f'), made monic."""
    if f.is_zero():
        raise DegenerateInputError("squarefree part of the zero polynomial")
    if f.p is not None and f.degree >= f.p:
        raise DegenerateInputError(f"degree {f.degree} too large for characteristic {f.p}")
    return f.exquo(poly_gcd(f, f.derivative())).monic()


def is_squarefree(f: UniPoly) -> bool:
    return poly_gcd(f, f.derivative()).degree == 0


def roots_mod_p(f: UniPoly, p: int | None = None) -> set[int]:
    """All roots in F_p by exhaustive evaluation."""
    if p is None:
        p = f.p
    if p is None:
        raise DomainMismatchError("roots_mod_p needs a prime")
    if f.p is None:
        f = reduce_mod_p(f, p)
    elif f.p != p:
        raise DomainMismatchError(f"polynomial over F_{f.p}, asked for F_{p}")
    if f.is_zero():
        raise DegenerateInputError("zero polynomial has every element as a root")
    return {a for a in range(p) if f(a) == 0}


def _hensel_lift_root(g: list[int], r: int, p: int, k: int) -> int:
    # g monic integer coefficients, r a simple root mod p; returns the root mod p^k
    def ev(cs, x, m):
        acc = 0
        for c in reversed(cs):
            acc = (acc * x + c) % m
        return acc

    dg = [i * c for i, c in enumerate(g)][1:]
    m = p
    while m < p ** k:
        m2 = min(m * m, p ** k)
        inv = pow(ev(dg, r, m), -1, m)
        r = (r - ev(g, r, m2) * inv) % m2
        m = m2
    return r


def rational_roots(f: UniPoly) -> set:
    """Every rational root of f, each confirmed by exact evaluation.

    Candidates are integer roots of the monic transform a^(n-1) f(z/a) of the
    primitive squarefree part, located p-adically and lifted past the Cauchy
    bound.
    """
    if f.p is not None:
        raise DomainMismatchError("rational_roots works over Q")
    if f.is_zero():
        raise DegenerateInputError("zero polynomial")
    roots = set()
    cs = list(f.coeffs)
    if cs[0] == 0:
        roots.add(0)
        while cs and cs[0] == 0:
            cs.pop(0)
    if len(cs) <= 1:
        return roots
    s = squarefree_part(UniPoly(cs))
    s_int = _prim_int(s.coeffs)
    n = len(s_int) - 1
    a = s_int[-1]
    g = [s_int[i] * a ** (n - 1 - i) for i in range(n)] + [1]
    bound = 1 + max(abs(c) for c in g)
    # a prime where g stays squarefree makes every root simple
    p = 3
    while True:
        if is_prime(p):
            gp = UniPoly(g, p)
            if poly_gcd(gp, gp.derivative()).degree == 0:
                break
        p += 2
    k = 1
    while p ** k <= 2 * bound:
        k += 1
    s_poly = UniPoly(s_int)
    for r in range(p):
        if UniPoly(g, p)(r) != 0:
            continue
        z = _hensel_lift_root(g, r, p, k)
        if z > p ** k // 2:
            z -= p ** k
        x = _qdiv(z, a)
        if s_poly(x) == 0:
            roots.add(x)
    return roots


# ---------------------------------------------------------------------------
# resultants over Q[x]


def _exquo_poly_list(A: list[UniPoly], d: UniPoly) -> list[UniPoly]:
    return [c.exquo(d) for c in A]


def _prem_list(A: list[UniPoly], B: list[UniPoly]) -> list[UniPoly]:
    # pseudo-remainder of polynomials in y whose coefficients are UniPoly in x
    # multiplies by exactly lc(B)^(deg A - deg B + 1), as the subresultant
    # bookkeeping requires
    r = list(A)
    db = len(B) - 1
    lb = B[-1]
    steps = len(A) - len(B) + 1
    while len(r) - 1 >= db and r:
        c = r[-1]
        shift = len(r) - 1 - db
        r = [x * lb for x in r]
        steps -= 1
        for j in range(db + 1):
            r[shift + j] = r[shift + j] - c * B[j]
        r.pop()
        while r and r[-1].is_zero():
            r.pop()
    if steps and r:
        f = lb ** steps
        r = [x * f for x in r]
    return r


def subresultant_resultant(A: list[UniPoly], B: list[UniPoly]) -> UniPoly:
    """Res_y(A, B) for A, B given as y-coefficient lists (lowest first) over Q[x] or F_p[x].

    Subresultant pseudo-remainder sequence; every division is exact.
    """
    A = list(A)
    B = list(B)
    while A and A[-1].is_zero():
        A.pop()
    while B and B[-1].is_zero():
        B.pop()
    if not A or not B:
        raise DegenerateInputError("resultant with the zero polynomial")
    p, var = A[0].p, A[0].var
    one = UniPoly([1], p, var)
    s = 1
    if len(A) < len(B):
        A, B = B, A
        if (len(A) - 1) * (len(B) - 1) % 2:
            s = -1
    if len(B) == 1:
        return B[0] ** (len(A) - 1) * s
    g, h = one, one
    while True:
        da, db = len(A) - 1, len(B) - 1
        delta = da - db
        if da % 2 and db % 2:
            s = -s
        R = _prem_list(A, B)
        A = B
        if not R:
            return UniPoly([], p, var)
        B = _exquo_poly_list(R, g * h ** delta)
        g = A[-1]
        h = (g ** delta).exquo(h ** (delta - 1)) if delta > 1 else (g ** delta if delta == 1 else h)
        if len(B) == 1:
            da = len(A) - 1
            lb = B[0]
            if da == 1:
                return lb * s
            return (lb ** da).exquo(h ** (da - 1)) * s


def y_coefficients(Q: "MultiPoly", x: str = "x", y: str = "y") -> list[UniPoly]:
    """Q(x, y) as a list of x-polynomials indexed by the power of y."""
    ix, iy = Q.variables.index(x), Q.variables.index(y)
    dy = Q.degree_in(iy)
    buckets: list[dict[int, object]] = [dict() for _ in range(dy + 1)]
    for e, c in Q.terms.items():
        buckets[e[iy]][e[ix]] = c
    out = []
    for b in buckets:
        deg = max(b) if b else -1
        out.append(UniPoly([b.get(i, 0) for i in range(deg + 1)], Q.p, x))
    return out


def discriminant_y(Q: "MultiPoly", x: str = "x", y: str = "y") -> UniPoly:
    """(-1)^(d(d-1)/2) Res_y(Q, dQ/dy) / lc_y(Q) as a polynomial in x."""
    cs = y_coefficients(Q, x, y)
    d = len(cs) - 1
    if d < 1:
        raise DegenerateInputError("discriminant of a polynomial of degree 0 in y")
    dcs = [cs[i] * i for i in range(1, d + 1)]
    res = subresultant_resultant(cs, dcs)
    disc = res.exquo(cs[-1])
    return -disc if (d * (d - 1) // 2) % 2 else disc


# ---------------------------------------------------------------------------
# multivariate


class MultiPoly:
    """Sparse multivariate polynomial: exponent tuple -> nonzero coefficient."""

    __slots__ = ("terms", "variables", "p")

    def __init__(self, terms: Mapping[tuple, object], variables: Sequence[str], p: int | None = None):
        variables = tuple(variables)
        clean = {}
        for e, c in terms.items():
            e = tuple(int(k) for k in e)
            if len(e) != len(variables):
                raise ValueError(f"exponent {e} does not match variables {variables}")
            if min(e, default=0) < 0:
                raise ValueError("negative exponent")
            c = to_rat(c) if p is None else reduce_rat(to_rat(c), p)
            if c != 0:
                clean[e] = c
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    @classmethod
    def _raw(cls, terms: dict, variables: tuple, p):
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "variables", variables)
        object.__setattr__(obj, "p", p)
        return obj

    @classmethod
    def var(cls, name: str, variables: Sequence[str], p: int | None = None) -> "MultiPoly":
        variables = tuple(variables)
        e = tuple(1 if v == name else 0 for v in variables)
        return cls({e: 1}, variables, p)

    @classmethod
    def constant(cls, c, variables: Sequence[str], p: int | None = None) -> "MultiPoly":
        return cls({(0,) * len(variables): c}, variables, p)

    @classmethod
    def linear_form(cls, coeffs: Sequence, variables: Sequence[str], p: int | None = None) -> "MultiPoly":
        n = len(variables)
        return cls({tuple(int(i == j) for j in range(n)): c for i, c in enumerate(coeffs)}, variables, p)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.p == other.p and self.variables == other.variables and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.variables, self.p))

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mon = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            parts.append(str(c) if not mon else (mon if c == 1 else f"{c}*{mon}"))
        s = " + ".join(parts)
        return s if self.p is None else f"{s} (mod {self.p})"

    def _check(self, other: "MultiPoly"):
        _domain(self, other)
        if self.variables != other.variables:
            raise DomainMismatchError(f"variables differ: {self.variables} vs {other.variables}")

    def _lift(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.constant(other, self.variables, self.p)

    def _norm(self, c):
        if self.p is not None:
            return c % self.p
        return to_rat(c) if isinstance(c, Fraction) else c

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = self._norm(out.get(e, 0) + c)
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MultiPoly._raw(out, self.variables, self.p)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw({e: self._norm(-c) for e, c in self.terms.items()}, self.variables, self.p)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = to_rat(other) if self.p is None else reduce_rat(to_rat(other), self.p)
            if c == 0:
                return MultiPoly._raw({}, self.variables, self.p)
            return MultiPoly._raw({e: self._norm(v * c) for e, v in self.terms.items()}, self.variables, self.p)
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        out = {e: self._norm(c) for e, c in out.items()}
        return MultiPoly._raw({e: c for e, c in out.items() if c != 0}, self.variables, self.p)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = MultiPoly.constant(1, self.variables, self.p)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int | str) -> int:
        if isinstance(i, str):
            i = self.variables.index(i)
        return max((e[i] for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def __call__(self, values: Sequence):
        """Evaluate at a point (ints/Fractions, or residues when over F_p)."""
        if len(values) != self.nvars:
            raise ValueError("wrong number of values")
        acc = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t = t * v ** k
            acc += t
        if self.p is not None:
            return acc % self.p
        return to_rat(acc) if isinstance(acc, Fraction) else acc

    def substitute(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Replace variable i by images[i] (all in a common ring)."""
        if len(images) != self.nvars:
            raise ValueError("wrong number of images")
        target = images[0]
        result = MultiPoly._raw({}, target.variables, target.p)
        cache: dict = {}
        for e, c in self.terms.items():
            t = MultiPoly.constant(c, target.variables, target.p)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in cache:
                        cache[key] = images[i] ** k
                    t = t * cache[key]
            result = result + t
        return result

    def derivative(self, i: int | str) -> "MultiPoly":
        if isinstance(i, str):
            i = self.variables.index(i)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = self._norm(c * e[i])
        return MultiPoly._raw({e: c for e, c in out.items() if c}, self.variables, self.p)

    def coefficient_list(self) -> list:
        """Terms as [numerator, denominator, exponents] sorted by exponent (fixture format)."""
        out = []
        for e in sorted(self.terms, reverse=True):
            c = Fraction(self.terms[e])
            out.append([c.numerator, c.denominator, list(e)])
        return out

    @classmethod
    def from_coefficient_list(cls, data, variables, p=None) -> "MultiPoly":
        terms: dict = {}
        for num, den, e in data:
            e = tuple(e)
            if e in terms:
                raise ValueError(f"duplicate exponent {e}")
            terms[e] = Fraction(num, den)
        return cls(terms, variables, p)

    def denominators(self) -> int:
        if self.p is not None:
            return 1
        return lcm(*(Fraction(c).denominator for c in self.terms.values())) if self.terms else 1


def reduce_mod_p(f, p: int):
    """Coefficient-wise reduction of a Q-polynomial into F_p."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if isinstance(f, UniPoly):
        if f.p is not None:
            if f.p == p:
                return f
            raise DomainMismatchError("already over a different prime field")
        return UniPoly._raw([reduce_rat(c, p) for c in f.coeffs], p, f.var)
    if isinstance(f, MultiPoly):
        if f.p is not None:
            if f.p == p:
                return f
            raise DomainMismatchError("already over a different prime field")
        out = {}
        for e, c in f.terms.items():
            r = reduce_rat(c, p)
            if r:
                out[e] = r
        return MultiPoly._raw(out, f.variables, p)
    if isinstance(f, (int, Fraction)):
        return reduce_rat(to_rat(f), p)
    raise TypeError(f"cannot reduce {type(f).__name__}")


def sylvester_matrix(A: Sequence, B: Sequence) -> list[list]:
    """Sylvester matrix of two coefficient lists (lowest degree first)."""
    m, n = len(A) - 1, len(B) - 1
    size = m + n
    rows = []
    a_hi = list(reversed(A))
    b_hi = list(reversed(B))
    for i in range(n):
        rows.append([0] * i + a_hi + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + b_hi + [0] * (size - n - 1 - i))
    return rows


def det_fraction(M: list[list]) -> Fraction | int:
    """Determinant over Q by Gaussian elimination."""
    M = [[Fraction(c) for c in row] for row in M]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        inv = 1 / M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] * inv
            if f:
                for c in range(col, n):
                    M[r][c] -= f * M[col][c]
    return to_rat(det)


def lagrange_interpolate(xs: Sequence[int], ys: Sequence, var: str = "x") -> UniPoly:
    """The unique polynomial of degree < len(xs) through the given points (over Q)."""
    n = len(xs)
    # Newton divided differences
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    result = UniPoly([coef[-1]], None, var)
    X = UniPoly.x(None, var)
    for i in range(n - 2, -1, -1):
        result = result * (X - xs[i]) + coef[i]
    return result


def all_exponents(nvars: int, degree: int):
    """Exponent tuples of the given total degree."""
    for e in product(range(degree + 1), repeat=nvars):
        if sum(e) == degree:
            yield e


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank of an integer matrix over F_p."""
    M = [[c % p for c in r] for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        for i in range(rank + 1, len(M)):
            if M[i][c]:
                f = M[i][c] * inv % p
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank
