"""Patch maps from the canonical model to plane models monic in y."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateInputError, NotOnCurveError
from .exact import MultiPoly, UniPoly, reduce_mod_p, reduce_rat, to_rat
from .modeldb import CanonicalModel, PatchSpec, SeriesCheck, series_check
from .series import Series, linear_combination

REASONS = ("x1x2zero", "y1y2zero", "x2y2zero")


@dataclass(frozen=True)
class PlanePoint:
    """Affine point (x, y) of the chart z = 1, or a point [x : y : 0] at infinity.

    Coordinates are exact rationals, or residues when ``p`` is set.  For points
    at infinity the pair is the image of the plane map before the monicizing
    substitution, normalized so that its first nonzero entry is 1.
    """

    x: object
    y: object
    infinite: bool = False
    p: int | None = None

    def as_tuple(self):
        return (self.x, self.y, 0 if self.infinite else 1)


@dataclass(frozen=True)
class MapResult:
    point: PlanePoint | None = None
    reason: str | None = None

    def __post_init__(self):
        if (self.point is None) == (self.reason is None):
            raise ValueError("a map result is either a point or an undefined reason")
        if self.reason is not None and self.reason not in REASONS:
            raise ValueError(f"unknown reason {self.reason!r}")

    @property
    def defined(self) -> bool:
        return self.point is not None


def _patch(model: CanonicalModel, patch) -> PatchSpec:
    return model.patches[patch] if isinstance(patch, int) else patch


def _dot(form: Sequence, pt: Sequence, p: int | None):
    if p is None:
        return to_rat(sum(Fraction(c) * v for c, v in zip(form, pt)))
    return sum(reduce_rat(c, p) * v for c, v in zip(form, pt)) % p


def _normalize_pair(a, b, p: int | None):
    if a != 0:
        return (1, b * pow(a, -1, p) % p) if p else (1, to_rat(Fraction(b) / a))
    return (0, 1)


def eval_patch(model: CanonicalModel, patch, P: Sequence, p: int | None = None, check: bool = True) -> MapResult:
    """Image of a point of the canonical model (over Q, or over F_p when p is given)."""
    spec = _patch(model, patch)
    if p is not None:
        P = [reduce_rat(to_rat(c), p) for c in P]
    if check:
        eqs = model.equations_mod(p) if p is not None else model.equations
        if any(e(P) != 0 for e in eqs):
            raise NotOnCurveError(f"{list(P)} is not on X0+({model.level})" + (f" mod {p}" if p else ""))
    x1, x2, y1, y2 = (_dot(f, P, p) for f in spec.forms())
    if x1 == 0 and x2 == 0:
        return MapResult(reason="x1x2zero")
    if y1 == 0 and y2 == 0:
        return MapResult(reason="y1y2zero")
    A, B, C = x1 * y2, x2 * y1, x2 * y2
    if p is not None:
        A, B, C = A % p, B % p, C % p
    if A == 0 and B == 0 and C == 0:
        return MapResult(reason="x2y2zero")
    if spec.post_automorphism is not None:
        M = spec.post_automorphism
        A, B, C = (M[i][0] * A + M[i][1] * B + M[i][2] * C for i in range(3))
        if p is not None:
            A, B, C = A % p, B % p, C % p
    if C == 0:
        a, b = _normalize_pair(A, B, p)
        return MapResult(point=PlanePoint(a, b, True, p))
    if p is None:
        x = to_rat(Fraction(A) / C)
        y = to_rat(spec.q0(x) * Fraction(B) / C)
    else:
        inv = pow(C, -1, p)
        x = A * inv % p
        y = reduce_mod_p(spec.q0, p)(x) * B * inv % p
    return MapResult(point=PlanePoint(x, y, False, p))


def monicize(F: MultiPoly, y: str = "y") -> tuple[MultiPoly, UniPoly]:
    """Turn sum Q_i(x, z) y^(d-i) into the monic equation in Y = Q_0 y on the chart z = 1.

    Returns the monic polynomial (variables x, y with y standing for Y) and Q_0(x, 1).
    """
    names = F.variables
    iy = names.index(y)
    ix = next(i for i, v in enumerate(names) if v != y)
    d = F.degree_in(iy)
    if d < 0:
        raise DegenerateInputError("zero polynomial")
    # coefficients Q_i(x, 1) as univariate polynomials in x
    parts: list[dict[int, object]] = [dict() for _ in range(d + 1)]
    for e, c in F.terms.items():
        i = d - e[iy]
        parts[i][e[ix]] = parts[i].get(e[ix], 0) + c
    Qs = [UniPoly([part.get(k, 0) for k in range(max(part, default=-1) + 1)]) for part in parts]
    Q0 = Qs[0]
    if Q0.is_zero():
        raise DegenerateInputError("leading coefficient Q_0 vanishes")
    lc = Q0.lc
    Qs = [q.exquo(lc) for q in Qs]
    Q0 = Qs[0]
    terms: dict = {(0, d): 1}
    power = UniPoly([1])
    for i in range(1, d + 1):
        coeff = Qs[i] * power
        for k, c in enumerate(coeff.coeffs):
            if c != 0:
                terms[(k, d - i)] = terms.get((k, d - i), 0) + c
        power = power * Q0
    return MultiPoly(terms, ("x", "y")), Q0


def homogenize(Q: MultiPoly) -> MultiPoly:
    D = Q.total_degree()
    return MultiPoly({(e[0], e[1], D - sum(e)): c for e, c in Q.terms.items()}, ("x", "y", "z"))


def patch_series(model: CanonicalModel, patch) -> tuple[Series, Series, Series]:
    """Series of the three plane coordinates, after the optional automorphism and the substitution Y = Q0 y.

    Everything is kept projective so no series is ever inverted; this avoids
    the precision loss that Laurent division would cause.
    """
    spec = _patch(model, patch)
    S = model.series()
    x1, x2, y1, y2 = (linear_combination(f, S) for f in spec.forms())
    A, B, C = x1 * y2, x2 * y1, x2 * y2
    if spec.post_automorphism is not None:
        M = spec.post_automorphism
        A, B, C = (A.scale(M[i][0]) + B.scale(M[i][1]) + C.scale(M[i][2]) for i in range(3))
    m = spec.q0.degree
    if m == 0:
        return A, B, C
    one = Series([1], 0, 10**9)
    q0h = None
    for i, c in enumerate(spec.q0.coeffs):
        if c == 0:
            continue
        t = (A ** i) * (C ** (m - i)) if m else one
        t = t.scale(c)
        q0h = t if q0h is None else q0h + t
    return A * C ** m, q0h * B, C ** (m + 1)


def verify_plane_model_series(model: CanonicalModel, patch, Q: MultiPoly | None = None) -> SeriesCheck:
    """Substitute the patch series into the homogenized plane model; status pass, fail or inconclusive."""
    idx = patch if isinstance(patch, int) else model.patches.index(patch)
    if Q is None:
        Q = model.plane_model(idx).Q
    X, Y, Z = patch_series(model, idx)
    return series_check(idx, homogenize(Q), [X, Y, Z])


@dataclass(frozen=True)
class FpPlaneCheck:
    p: int
    patch_index: int
    checked: int
    infinite: int
    undefined: int
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_plane_model_fp(model: CanonicalModel, patch: int, p: int | None = None, points=None) -> FpPlaneCheck:
    """Q(phi(P)) = 0 for every F_p point P whose image is a finite plane point."""
    from .points import enumerate_fp_points

    spec = model.patches[patch]
    p = p or spec.prime
    pts = points if points is not None else enumerate_fp_points(model, p).points
    Qp = reduce_mod_p(model.plane_model(patch).Q, p)
    checked = inf = undef = 0
    failures = []
    for P in pts:
        res = eval_patch(model, spec, P, p, check=False)
        if not res.defined:
            undef += 1
        elif res.point.infinite:
            inf += 1
        else:
            checked += 1
            if Qp((res.point.x, res.point.y)) != 0:
                failures.append(P)
    return FpPlaneCheck(p, patch, checked, inf, undef, tuple(failures))


def undefined_reasons(model: CanonicalModel, patch, P: Sequence, p: int | None = None) -> list[str]:
    """Every degeneracy condition that holds at P (a point can satisfy several)."""
    spec = _patch(model, patch)
    if p is not None:
        P = [reduce_rat(to_rat(c), p) for c in P]
    x1, x2, y1, y2 = (_dot(f, P, p) for f in spec.forms())
    out = []
    if x1 == 0 and x2 == 0:
        out.append("x1x2zero")
    if y1 == 0 and y2 == 0:
        out.append("y1y2zero")
    if x2 == 0 and y2 == 0:
        out.append("x2y2zero")
    return out


def undefined_locus_points(model: CanonicalModel, patch, p: int | None = None, H: int | None = None) -> list[tuple[tuple, tuple[str, ...]]]:
    """Points where phi' degenerates: over F_p exhaustively, over Q up to height H."""
    from .points import enumerate_fp_points, search_rational_points

    if p is not None:
        pts = enumerate_fp_points(model, p).points
    elif H is not None:
        pts = search_rational_points(model, H)
    else:
        raise ValueError("give a prime p or a height bound H")
    out = []
    for P in pts:
        reasons = undefined_reasons(model, patch, P, p)
        if reasons:
            out.append((tuple(P), tuple(reasons)))
    return out


def candidate_plane_models(model: CanonicalModel, patch, dx: int, deg_x: int) -> list[MultiPoly]:
    """Kernel of the monomial-coefficient matrix on the patch series (best effort).

    Monomials x^i y^j with j <= dx and i <= deg_x are evaluated on the
    projective patch series; every vector in the kernel of the resulting
    coefficient matrix is returned.  With only 19 known coefficients the
    kernel may be larger than the true relation, so each candidate still has
    to pass the verifiers.
    """
    A, B, C = patch_series(model, patch)
    D = dx + deg_x
    monos = [(i, j) for j in range(dx + 1) for i in range(deg_x + 1)]
    cols = [(A ** i) * (B ** j) * (C ** (D - i - j)) for i, j in monos]
    prec = min(c.prec for c in cols)
    lo = min(c.valuation for c in cols)
    rows = [[Fraction(c[n]) for c in cols] for n in range(lo, prec)]
    basis = _nullspace(rows, len(monos))
    return [MultiPoly({m: v for m, v in zip(monos, vec) if v}, ("x", "y")) for vec in basis]


def _nullspace(rows: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    M = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for i, c in enumerate(pivots):
            vec[c] = -M[i][f]
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# the x-coordinate at points where phi' degenerates


def _monomials(n: int, d: int) -> list[tuple[int, ...]]:
    if n == 1:
        return [(d,)]
    return [(k,) + rest for k in range(d, -1, -1) for rest in _monomials(n - 1, d - k)]


def _kernel_mod_p(rows: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    M = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] % p), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [v * inv % p for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] % p:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [0] * ncols
        vec[f] = 1
        for i, c in enumerate(pivots):
            vec[c] = -M[i][f] % p
        basis.append(vec)
    return basis


def tau_x_value(model: CanonicalModel, patch, P: Sequence, p: int, max_degree: int = 3):
    """Value of the function x1/x2 at an F_p point, as a residue or None for infinity.

    Where x1 and x2 both vanish, forms u, v of degree d with x1*u = x2*v on the
    curve are found by linear algebra mod p; then x1/x2 = v/u and the value is
    read off at P.  Raises LookupError when no degree up to max_degree works.
    """
    spec = _patch(model, patch)
    P = [reduce_rat(to_rat(c), p) for c in P]
    a, b = _dot(spec.x1, P, p), _dot(spec.x2, P, p)
    if a or b:
        return a * pow(b, -1, p) % p if b else None
    g = model.genus
    lin1 = {tuple(int(i == j) for j in range(g)): reduce_rat(to_rat(c), p) for i, c in enumerate(spec.x1)}
    lin2 = {tuple(int(i == j) for j in range(g)): reduce_rat(to_rat(c), p) for i, c in enumerate(spec.x2)}
    eqs = [{e: c for e, c in reduce_mod_p(q, p).terms.items()} for q in model.equations]
    for d in range(1, max_degree + 1):
        mons_d = _monomials(g, d)
        target = {m: i for i, m in enumerate(_monomials(g, d + 1))}
        cols: list[dict] = []
        # x1 * u
        for m in mons_d:
            cols.append({tuple(x + y for x, y in zip(m, e)): c for e, c in lin1.items() if c})
        # - x2 * v
        for m in mons_d:
            cols.append({tuple(x + y for x, y in zip(m, e)): -c % p for e, c in lin2.items() if c})
        # ideal elements of degree d + 1
        for q in eqs:
            dq = sum(next(iter(q)))
            if dq > d + 1:
                continue
            for m in _monomials(g, d + 1 - dq):
                col: dict = {}
                for e, c in q.items():
                    k = tuple(x + y for x, y in zip(m, e))
                    col[k] = (col.get(k, 0) + c) % p
                cols.append(col)
        rows = [[0] * len(cols) for _ in target]
        for j, col in enumerate(cols):
            for k, c in col.items():
                rows[target[k]][j] = (rows[target[k]][j] + c) % p
        values = set()
        nd = len(mons_d)
        for vec in _kernel_mod_p(rows, len(cols), p):
            u = sum(vec[i] * _mono_eval(mons_d[i], P, p) for i in range(nd)) % p
            v = sum(vec[nd + i] * _mono_eval(mons_d[i], P, p) for i in range(nd)) % p
            if u or v:
                values.add(v * pow(u, -1, p) % p if u else None)
        if len(values) == 1:
            return values.pop()
        if len(values) > 1:
            raise LookupError(f"x1/x2 is not well defined at {P} (singular reduction?)")
    raise LookupError(f"could not resolve x1/x2 at {P} with forms of degree <= {max_degree}")


def _mono_eval(m: tuple, P: Sequence, p: int) -> int:
    r = 1
    for v, k in zip(P, m):
        if k:
            r = r * pow(v, k, p) % p
    return r


def plane_x_value(model: CanonicalModel, patch, P: Sequence, p: int):
    """x-coordinate of the plane image of P (residue, or None for infinity), using tau_x_value.

    With a post automorphism the plane x-coordinate must depend on x1/x2 only,
    which holds when the matrix rows for the first and last coordinates ignore
    the middle coordinate.
    """
    spec = _patch(model, patch)
    t = tau_x_value(model, spec, P, p)
    M = spec.post_automorphism
    if M is None:
        return t
    if M[0][1] % p or M[2][1] % p:
        raise LookupError("plane x-coordinate depends on y under this automorphism")
    num = (M[0][0] * t + M[0][2]) % p if t is not None else M[0][0] % p
    den = (M[2][0] * t + M[2][2]) % p if t is not None else M[2][0] % p
    if den == 0:
        return None
    return num * pow(den, -1, p) % p
