"""Finite-field point enumeration, bounded-height rational point search and CM-point evaluation."""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, isqrt
from typing import Sequence

import numpy as np

from .errors import BadPrimeError, InvalidDiscriminantError, NoHeegnerFormError, NonConvergentError
from .exact import is_prime, rank_mod_p, reduce_mod_p, reduce_rat
from .genus import check_discriminant
from .modeldb import CanonicalModel, KnownPoint

# ---------------------------------------------------------------------------
# vectorised polynomial evaluation mod p


def _compile(poly, p: int) -> list[tuple[int, tuple[int, ...]]]:
    return [(reduce_rat(c, p), e) for e, c in poly.terms.items() if reduce_rat(c, p)]


def _eval_mod(terms, cols: Sequence, p: int):
    """Evaluate compiled terms at columns (numpy arrays or ints); values reduced mod p."""
    acc = 0
    powers: dict = {}
    for c, e in terms:
        t = c
        for i, k in enumerate(e):
            if k:
                key = (i, k)
                if key not in powers:
                    powers[key] = cols[i] ** k % p if k > 1 else cols[i]
                t = t * powers[key]
        acc = (acc + t) % p
    return acc


# ---------------------------------------------------------------------------
# F_p points


@dataclass(frozen=True)
class FpPointSet:
    p: int
    points: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.points)

    def __contains__(self, pt):
        return tuple(pt) in set(self.points)


def _chunks(g: int, p: int):
    # (lead, first free value) partitions of the normalized points of P^(g-1)(F_p)
    for lead in range(g):
        free = g - 1 - lead
        if free == 0:
            yield lead, None
        else:
            for t in range(p):
                yield lead, t


def _enumerate_chunk(args) -> list[tuple[int, ...]]:
    compiled, g, p, lead, t = args
    if t is None:
        pt = tuple([0] * lead + [1])
        return [pt] if all(_eval_mod(c, pt, p) == 0 for c in compiled) else []
    rest = g - lead - 2
    if rest > 0:
        grid = np.indices((p,) * rest, dtype=np.int64).reshape(rest, -1)
        n = grid.shape[1]
    else:
        grid = np.zeros((0, 1), dtype=np.int64)
        n = 1
    cols = [np.zeros(n, dtype=np.int64)] * lead + [np.ones(n, dtype=np.int64), np.full(n, t, dtype=np.int64)]
    cols += [grid[i] for i in range(rest)]
    # early exit: each equation only sees the survivors of the previous ones
    for c in compiled:
        vals = _eval_mod(c, cols, p)
        keep = np.nonzero(vals == 0)[0] if isinstance(vals, np.ndarray) else (np.arange(n) if vals == 0 else np.array([], dtype=np.int64))
        cols = [col[keep] for col in cols]
        n = len(keep)
        if n == 0:
            return []
    return [tuple(int(v) for v in row) for row in np.stack(cols, axis=1)]


def enumerate_fp_points(model: CanonicalModel, p: int, jobs: int = 1) -> FpPointSet:
    """All points of the canonical model over F_p, first nonzero coordinate normalized to 1."""
    if not is_prime(p):
        raise BadPrimeError(f"{p} is not prime")
    if model.level % p == 0:
        raise BadPrimeError(f"{p} divides the level {model.level}")
    g = model.genus
    # cheapest equation first: quadrics before cubics, fewer terms first
    eqs = sorted(model.equations, key=lambda e: (e.total_degree(), len(e)))
    compiled = [_compile(e, p) for e in eqs]
    tasks = [(compiled, g, p, lead, t) for lead, t in _chunks(g, p)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_enumerate_chunk, tasks))
    else:
        parts = [_enumerate_chunk(task) for task in tasks]
    return FpPointSet(p, tuple(sorted(pt for part in parts for pt in part)))


def singular_points(model: CanonicalModel, p: int, points=None) -> list[tuple[int, ...]]:
    """F_p points where the Jacobian of the reduced equations has rank below g - 2."""
    eqs = model.equations_mod(p)
    jac = [[e.derivative(i) for i in range(model.genus)] for e in eqs]
    pts = points if points is not None else enumerate_fp_points(model, p).points
    return [P for P in pts if rank_mod_p([[d(P) for d in row] for row in jac], p) < model.genus - 2]


def is_good_prime(model: CanonicalModel, p: int) -> bool:
    """p does not divide N, the equations are p-integral, and the reduction is smooth at its F_p points."""
    if not is_prime(p) or model.level % p == 0:
        return False
    if any(isinstance(c, Fraction) and c.denominator % p == 0 for e in model.equations for c in e.terms.values()):
        return False
    return not singular_points(model, p)


# ---------------------------------------------------------------------------
# rational points of bounded height


def _sieve_primes(model: CanonicalModel, count: int = 2, max_table: int = 2_500_000) -> list[int]:
    """Small good primes whose cone table over F_p^g stays below max_table entries."""
    out = []
    p = 5
    while len(out) < count and p ** model.genus <= max_table:
        integral = all(not isinstance(c, Fraction) or c.denominator % p
                       for e in model.equations for c in e.terms.values())
        if is_prime(p) and model.level % p and integral:
            out.append(p)
        p += 2
    return out


def _cone_table(model: CanonicalModel, p: int) -> np.ndarray:
    """Boolean table over all of F_p^g: True where every equation vanishes."""
    g = model.genus
    grid = np.indices((p,) * g, dtype=np.int64).reshape(g, -1)
    ok = np.ones(grid.shape[1], dtype=bool)
    for e in model.equations:
        ok &= _eval_mod(_compile(e, p), list(grid), p) == 0
    return ok


def search_rational_points(model: CanonicalModel, H: int, sieve_primes: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Primitive integer points with max |coordinate| <= H (first nonzero coordinate positive)."""
    if H < 1:
        raise ValueError("height bound must be at least 1")
    g = model.genus
    primes = list(sieve_primes) if sieve_primes is not None else _sieve_primes(model)
    tables = [(p, _cone_table(model, p), p ** np.arange(g - 1, -1, -1, dtype=np.int64)) for p in primes]
    side = 2 * H + 1
    found = []
    for lead in range(g):
        rest = g - lead - 1
        for a in range(1, H + 1):
            if rest:
                grid = np.indices((side,) * rest, dtype=np.int64).reshape(rest, -1) - H
            else:
                grid = np.zeros((0, 1), dtype=np.int64)
            n = grid.shape[1]
            cols = np.concatenate([np.zeros((lead, n), dtype=np.int64), np.full((1, n), a, dtype=np.int64), grid])
            for p, table, weights in tables:
                idx = (cols % p * weights[:, None]).sum(axis=0)
                cols = cols[:, table[idx]]
                if cols.shape[1] == 0:
                    break
            for vec in cols.T:
                pt = tuple(int(v) for v in vec)
                if reduce(gcd, pt) != 1:
                    continue
                if all(e(pt) == 0 for e in model.equations):
                    found.append(pt)
    return sorted(found, key=lambda v: (max(map(abs, v)), v))


def normalize_integral(coords: Sequence) -> tuple[int, ...]:
    """Primitive integer representative with first nonzero coordinate positive."""
    fr = [Fraction(c) for c in coords]
    den = math.lcm(*(c.denominator for c in fr))
    ints = [int(c * den) for c in fr]
    g = reduce(gcd, ints)
    if g == 0:
        raise ValueError("zero vector")
    ints = [c // g for c in ints]
    first = next(c for c in ints if c)
    return tuple(-c for c in ints) if first < 0 else tuple(ints)


# ---------------------------------------------------------------------------
# CM points


@dataclass(frozen=True)
class HeegnerForm:
    a: int
    b: int
    c: int
    N: int

    def __post_init__(self):
        if self.a <= 0 or self.a % self.N:
            raise NoHeegnerFormError(f"a = {self.a} is not a positive multiple of {self.N}")

    @property
    def D(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def tau(self) -> complex:
        return complex(-self.b, math.sqrt(-self.D)) / (2 * self.a)

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)


def heegner_form(N: int, D: int, max_k: int = 200) -> HeegnerForm:
    """Primitive form (a, b, c) of discriminant D with N | a and a as small as possible."""
    check_discriminant(D)
    for k in range(1, max_k + 1):
        a = N * k
        for b in range(0, a + 1):
            if (b * b - D) % (4 * a) == 0:
                c = (b * b - D) // (4 * a)
                if gcd(gcd(a, b), c) == 1:
                    return HeegnerForm(a, b, c, N)
    raise NoHeegnerFormError(f"no Heegner form of discriminant {D} for level {N}")


@dataclass(frozen=True)
class CmEvaluation:
    D: int
    form: HeegnerForm
    q_abs: float
    approx_coords: tuple[complex, ...]
    ratios: tuple[complex, ...]
    reconstructed: tuple[int, ...] | None
    matched_point: KnownPoint | None
    residual: float | None
    used_derivative_fallback: bool


def _eval_series(coeffs: Sequence[int], q: complex, derivative: bool) -> complex:
    if derivative:
        return sum(n * c * q ** (n - 1) for n, c in enumerate(coeffs, start=1))
    return sum(c * q ** n for n, c in enumerate(coeffs, start=1))


def _ratios(vals: Sequence[complex]) -> tuple[complex, ...]:
    big = max(range(len(vals)), key=lambda i: abs(vals[i]))
    return tuple(v / vals[big] for v in vals)


def evaluate_cm_point(model: CanonicalModel, D: int, terms: int = 19, convergence_threshold: float = 0.85,
                      vanish_threshold: float = 1e-4, max_denominator: int = 100,
                      stability_tol: float = 1e-3) -> CmEvaluation:
    """Numerically evaluate the truncated q-expansions at the Heegner point of discriminant D.

    Besides the |q| guard, the normalized ratios from the first terms - 2
    coefficients must agree with the full ones to within stability_tol;
    otherwise the tail is not negligible and NonConvergentError is raised.
    """
    try:
        form = heegner_form(model.level, D)
    except InvalidDiscriminantError as exc:
        raise NoHeegnerFormError(str(exc)) from exc
    q = form.q
    if abs(q) > convergence_threshold:
        # the omitted tail is of size about |q|^(terms+1) / (1 - |q|) relative to the leading terms
        raise NonConvergentError(
            f"|q| = {abs(q):.4f} exceeds {convergence_threshold} for D = {D} at level {model.level}")
    terms = min(terms, len(next(iter(model.qexp.values()))))
    coeffs = [model.qexp[v][:terms] for v in model.variables]
    vals = [_eval_series(c, q, False) for c in coeffs]
    scale = max(abs(v) for v in vals)
    used_fallback = False
    # every coordinate vanishing (relative to the series size at |q|) means the point is a common zero
    reference = max(sum(abs(c) * abs(q) ** n for n, c in enumerate(cs, 1)) for cs in coeffs)
    if scale < vanish_threshold * max(reference, 1.0):
        vals = [_eval_series(c, q, True) for c in coeffs]
        scale = max(abs(v) for v in vals)
        used_fallback = True
    ratios = _ratios(vals)
    shorter = _ratios([_eval_series(c[:terms - 2], q, used_fallback) for c in coeffs])
    drift = max(abs(a - b) for a, b in zip(ratios, shorter))
    if drift > stability_tol:
        raise NonConvergentError(
            f"partial sums still move by {drift:.3g} at |q| = {abs(q):.4f} (D = {D}, level {model.level})")
    rats = [Fraction(r.real).limit_denominator(max_denominator) for r in ratios]
    rec = normalize_integral(rats) if any(rats) else None
    matched = None
    residual = None
    if rec is not None:
        for kp in model.known_points:
            if normalize_integral(kp.coords) == rec:
                matched = kp
                break
        residual = max(abs(r - float(x)) for r, x in zip(ratios, rats))
    return CmEvaluation(D, form, abs(q), tuple(vals), ratios, rec, matched, residual, used_fallback)
