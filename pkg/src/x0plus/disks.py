"""Residue-disk analysis: the discriminant, its squarefree part, and coverage of F_p points by good disks."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .errors import DegenerateInputError, FetchError, InsufficientDataError, NotPIntegralError, ParseError
from .exact import MultiPoly, UniPoly, discriminant_y, is_prime, primes_in, rational_roots, reduce_mod_p, roots_mod_p, squarefree_part
from .modeldb import CanonicalModel, fetch_newform_orbits, hecke_generation_check
from .planemap import MapResult, eval_patch, plane_x_value

GOOD, BAD_ROOT, BAD_INFINITE, UNDEFINED = "Good", "BadRoot", "BadInfinite", "Undefined"


@dataclass(frozen=True)
class DiskData:
    delta: UniPoly
    r: UniPoly


def disk_data(Q: MultiPoly) -> DiskData:
    if Q.degree_in("y") < 2:
        raise DegenerateInputError("plane model must have degree at least 2 in y")
    delta = discriminant_y(Q)
    return DiskData(delta, squarefree_part(delta))


@lru_cache(maxsize=64)
def _disk_data_cached(Q: MultiPoly) -> DiskData:
    return disk_data(Q)


def linear_factor_screen(Q: MultiPoly) -> bool:
    """True iff r(x) has no rational root."""
    return not rational_roots(_disk_data_cached(Q).r)


def good_reduction_screen(model: CanonicalModel, Q: MultiPoly, p: int) -> bool:
    """Checkable proxy for good reduction of the plane model at p (see the README)."""
    if not is_prime(p) or p < 5 or model.level % p == 0:
        return False
    try:
        reduce_mod_p(Q, p)
        dp = reduce_mod_p(_disk_data_cached(Q).delta, p)
    except NotPIntegralError:
        return False
    return not dp.is_zero() and dp.degree == _disk_data_cached(Q).delta.degree


def classify_x(r_mod_p: UniPoly, x) -> str:
    """Classification of a plane x-value (residue, or None for infinity)."""
    if x is None:
        return BAD_INFINITE
    return BAD_ROOT if r_mod_p(x) == 0 else GOOD


def classify_point(Q: MultiPoly, p: int, plane_pt: MapResult) -> str:
    if not plane_pt.defined:
        return UNDEFINED
    if plane_pt.point.infinite:
        return BAD_INFINITE
    return classify_x(reduce_mod_p(_disk_data_cached(Q).r, p), plane_pt.point.x)


@dataclass(frozen=True)
class CoverageRow:
    point: tuple[int, ...]
    classes: tuple[str, ...]  # one per patch
    resolved: tuple[bool, ...]  # True where an undefined image was classified through x1/x2

    @property
    def good(self) -> bool:
        return GOOD in self.classes


@dataclass(frozen=True)
class CoverageReport:
    level: int
    p: int
    patches: tuple[int, ...]
    rows: tuple[CoverageRow, ...]
    strict: bool = False
    strict_violations: tuple[str, ...] = field(default=())

    @property
    def uncovered(self) -> list[tuple[int, ...]]:
        return [r.point for r in self.rows if not r.good]

    @property
    def covered(self) -> bool:
        return not self.uncovered and not (self.strict and self.strict_violations)


def coverage_check(model: CanonicalModel, patches: Sequence[int] | None = None, p: int | None = None,
                   strict: bool = False, resolve_undefined: bool = True, points=None) -> CoverageReport:
    """Classify every F_p point of the canonical model through each patch.

    Points where the patch map degenerates are classified through the value
    of x1/x2 there (the disk criterion only involves the x-coordinate) unless
    resolve_undefined is False, in which case they stay Undefined.
    """
    from .points import enumerate_fp_points

    patches = tuple(range(len(model.patches))) if patches is None else tuple(patches)
    p = p or model.patches[patches[0]].prime
    for i in patches:
        Q = model.plane_model(i).Q
        if not good_reduction_screen(model, Q, p):
            raise DegenerateInputError(f"patch {i} of level {model.level} fails the reduction screen at p = {p}")
        reduce_mod_p(model.patches[i].q0, p)  # raises if Q0 is not p-integral
    rbar = {i: reduce_mod_p(_disk_data_cached(model.plane_model(i).Q).r, p) for i in patches}
    pts = points if points is not None else enumerate_fp_points(model, p).points
    rows = []
    for P in pts:
        classes, resolved = [], []
        for i in patches:
            res = eval_patch(model, i, P, p, check=False)
            c = classify_point(model.plane_model(i).Q, p, res)
            done = False
            if c == UNDEFINED and resolve_undefined:
                try:
                    c = classify_x(rbar[i], plane_x_value(model, i, P, p))
                    done = True
                except LookupError:
                    pass
            classes.append(c)
            resolved.append(done)
        rows.append(CoverageRow(tuple(P), tuple(classes), tuple(resolved)))
    violations = []
    if strict:
        for i in patches:
            if roots_mod_p(rbar[i]):
                violations.append(f"patch {i}: r mod {p} has roots")
            if any(r.classes[patches.index(i)] == BAD_INFINITE for r in rows):
                violations.append(f"patch {i}: F_{p} point with x at infinity")
    return CoverageReport(model.level, p, patches, tuple(rows), strict, tuple(violations))


def bad_x_values(Q: MultiPoly, p: int) -> set[int]:
    """x-values mod p over which the reduced model has a repeated y-root (zeros of disc mod p)."""
    return roots_mod_p(discriminant_y(reduce_mod_p(Q, p)))


@dataclass(frozen=True)
class PrimeCandidate:
    p: int
    covered: bool
    hecke_advisory: str  # "yes", "no" or "unknown"


def find_primes(model: CanonicalModel, patches: Sequence[int] | None = None, p_min: int = 5, p_max: int = 31,
                offline: bool = True) -> list[PrimeCandidate]:
    patches = tuple(range(len(model.patches))) if patches is None else tuple(patches)
    out = []
    for p in primes_in(max(p_min, 5), p_max):
        if not all(good_reduction_screen(model, model.plane_model(i).Q, p) for i in patches):
            continue
        try:
            rep = coverage_check(model, patches, p)
        except (DegenerateInputError, NotPIntegralError):
            continue
        try:
            recs = fetch_newform_orbits(model.level, offline=offline)
            advisory = "yes" if hecke_generation_check(model.level, p, recs, model.genus) else "no"
        except (FetchError, ParseError, InsufficientDataError):
            advisory = "unknown"
        out.append(PrimeCandidate(p, rep.covered, advisory))
    return out
