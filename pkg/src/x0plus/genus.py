"""Class numbers, fixed-point counts of the Fricke involution, and genera of X0(N) and X0+(N)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil, gcd, isqrt, log, pi, sqrt

import numpy as np

from .errors import InternalInconsistencyError, InvalidDiscriminantError, OutOfDomainError
from .exact import is_prime

# ν(N) for the levels below the range of the fixed-point theorem; g0(N) = 0 there,
# and ν = 2 is the value that makes g0+(N) = 0 (the quotient of a genus-0 curve)
SMALL_NU = {2: 2, 3: 2, 4: 2}

# 1 is excluded from the tables (w_1 is the identity)
MIN_LEVEL = 2


@dataclass(frozen=True)
class GenusRecord:
    N: int
    g0: int
    nu: int
    g0plus: int

    def __post_init__(self):
        if 2 * self.g0 - 2 != 2 * (2 * self.g0plus - 2) + self.nu:
            raise InternalInconsistencyError(f"genus identity fails for N={self.N}")


def check_discriminant(D: int) -> None:
    if not isinstance(D, int) or D >= 0 or D % 4 not in (0, 1):
        raise InvalidDiscriminantError(f"{D} is not a negative discriminant")


def class_number(D: int) -> int:
    """Number of primitive reduced forms (a, b, c) of discriminant D."""
    check_discriminant(D)
    h = 0
    bmax = isqrt(-D // 3)
    for b in range(D % 2, bmax + 1, 2):
        m = (b * b - D) // 4
        a = max(b, 1)
        while a * a <= m:
            if m % a == 0:
                c = m // a
                if gcd(gcd(a, b), c) == 1:
                    # (a, ±b, c) are distinct reduced forms unless b = 0, b = a or a = c
                    h += 1 if (b == 0 or b == a or a == c) else 2
            a += 1
    return h


def class_number_by_ac(D: int) -> int:
    """Independent count iterating over (a, c) first; used as a cross-check."""
    check_discriminant(D)
    h = 0
    amax = isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if gcd(gcd(a, abs(b)), c) == 1:
                h += 1
    return h


def class_numbers_upto(X: int) -> np.ndarray:
    """Array h with h[n] = class_number(-n) for every discriminant -n with n <= X (0 elsewhere)."""
    h = np.zeros(X + 1, dtype=np.int64)
    amax = isqrt(X // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            cmin = a
            cmax = (X + b * b) // (4 * a)
            if cmax < cmin:
                continue
            c = np.arange(cmin, cmax + 1, dtype=np.int64)
            if b < 0:
                c = c[c > a]
            ok = np.gcd(np.gcd(a, abs(b)), c) == 1
            n = 4 * a * c[ok] - b * b
            np.add.at(h, n, 1)
    return h


def class_number_upper_bound(D: int) -> float:
    check_discriminant(D)
    return sqrt(-D) / pi * (log(4 * abs(D)) + 2)


def _nu_from(N: int, h) -> int:
    if N % 4 == 3:
        return int(h(4 * N)) + int(h(N))
    return int(h(4 * N))


def nu(N: int) -> int:
    """Fixed points of the Fricke involution on X0(N), N >= 5."""
    if N < 5:
        raise OutOfDomainError("the fixed-point formula needs N >= 5")
    return _nu_from(N, lambda n: class_number(-n))


def _factor(N: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= N:
        while N % d == 0:
            out[d] = out.get(d, 0) + 1
            N //= d
        d += 1
    if N > 1:
        out[N] = out.get(N, 0) + 1
    return out


def _euler_phi(n: int) -> int:
    r = n
    for p in _factor(n):
        r = r // p * (p - 1)
    return r


@lru_cache(maxsize=None)
def genus_X0(N: int) -> int:
    if N < 1:
        raise OutOfDomainError("level must be positive")
    fac = _factor(N)
    mu = N
    for p in fac:
        mu = mu * (p + 1) // p
    if N % 4 == 0:
        nu2 = 0
    else:
        nu2 = 1
        for p in fac:
            if p == 2:
                continue
            nu2 *= 2 if p % 4 == 1 else 0
    if N % 9 == 0:
        nu3 = 0
    else:
        nu3 = 1
        for p in fac:
            if p == 3:
                continue
            nu3 *= 2 if p % 3 == 1 else 0
    cusps = sum(_euler_phi(gcd(d, N // d)) for d in range(1, N + 1) if N % d == 0)
    twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps
    if twelve_g % 12:
        raise InternalInconsistencyError(f"non-integral genus for N={N}")
    return twelve_g // 12


def _plus_from(N: int, g0: int, v: int) -> int:
    num = 2 * g0 - 2 - v + 4
    if num % 4 or num < 0:
        raise InternalInconsistencyError(f"g0+({N}) would be {num}/4")
    return num // 4


def genus_record(N: int, h=None) -> GenusRecord:
    if N < MIN_LEVEL:
        raise OutOfDomainError("level must be at least 2")
    g0 = genus_X0(N)
    if N < 5:
        v = SMALL_NU[N]
    else:
        v = nu(N) if h is None else _nu_from(N, h)
    return GenusRecord(N, g0, v, _plus_from(N, g0, v))


def genus_X0_plus(N: int) -> int:
    if N < 5:
        raise OutOfDomainError("the fixed-point formula needs N >= 5")
    return genus_record(N).g0plus


def genus_lower_bound(N: int) -> float:
    return (N - 5 * sqrt(N) + 4) / 24 - sqrt(N) / pi * (log(16 * N) + 2)


def level_cutoff(max_genus: int) -> int:
    """Scan limit: the last N with genus_lower_bound(N) <= max_genus, rounded up to a multiple of 100.

    The bound is increasing once N passes a few hundred, so the first crossing
    above max_genus past that point is final.
    """
    N = 400
    while genus_lower_bound(N + 1) <= max_genus + 1e-6:
        N += 1
    return int(ceil(N / 100) * 100)


def enumerate_levels(max_genus: int, cutoff: int | None = None) -> dict[str, dict[int, list[int]]]:
    """All N >= 2 with g0+(N) <= max_genus, keyed "prime"/"composite" then by genus."""
    if max_genus < 0:
        raise OutOfDomainError("max_genus must be non-negative")
    if cutoff is None:
        cutoff = level_cutoff(max_genus)
    table = class_numbers_upto(4 * cutoff)
    out: dict[str, dict[int, list[int]]] = {
        "prime": {g: [] for g in range(max_genus + 1)},
        "composite": {g: [] for g in range(max_genus + 1)},
    }
    for N in range(MIN_LEVEL, cutoff + 1):
        rec = genus_record(N, h=lambda n: table[n])
        if rec.g0plus <= max_genus:
            out["prime" if is_prime(N) else "composite"][rec.g0plus].append(N)
    return out


# Expected output of enumerate_levels(6), transcribed from the published tables.
PRIME_TABLE = {
    0: [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 41, 47, 59, 71],
    1: [37, 43, 53, 61, 79, 83, 89, 101, 131],
    2: [67, 73, 103, 107, 167, 191],
    3: [97, 109, 113, 127, 139, 149, 151, 179, 239],
    4: [137, 173, 199, 251, 311],
    5: [157, 181, 227, 263],
    6: [163, 197, 211, 223, 269, 271, 359],
}
COMPOSITE_TABLE = {
    0: [4, 6, 8, 9, 10, 12, 14, 15, 16, 18, 20, 21, 24, 25, 26, 27, 32, 35, 36, 39, 49, 50],
    1: [22, 28, 30, 33, 34, 38, 40, 44, 45, 48, 51, 54, 55, 56, 63, 64, 65, 75, 81, 95, 119],
    2: [42, 46, 52, 57, 62, 68, 69, 72, 74, 77, 80, 87, 91, 98, 111, 121, 125, 143],
    3: [58, 60, 66, 76, 85, 86, 96, 99, 100, 104, 128, 169],
    4: [70, 82, 84, 88, 90, 92, 93, 94, 108, 115, 116, 117, 129, 135, 147, 155, 159, 161, 215],
    5: [78, 105, 106, 110, 112, 122, 123, 133, 134, 144, 145, 146, 171, 175, 185, 209],
    6: [118, 124, 136, 141, 152, 153, 164, 183, 203, 221, 299],
}
