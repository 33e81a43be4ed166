"""Fixture format, loading and validation of the canonical models, and the newform-data client."""
from __future__ import annotations

import json
import os
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    FetchError,
    FixtureNotFoundError,
    InsufficientDataError,
    InvariantError,
    ParseError,
    SchemaError,
)
from .exact import MultiPoly, UniPoly, reduce_rat, to_rat
from .series import Series, eval_multipoly

SCHEMA_VERSION = 1
LEVELS = (137, 173, 199, 251, 311, 157, 181, 227, 263, 163, 197, 211, 223, 269, 271, 359)
REQUIRED_FIELDS = ("level", "genus", "variables", "equations", "qexp", "precision",
                   "known_points", "patches", "plane_models")
NEWFORM_URL_ENV = "X0PLUS_NEWFORM_URL"
CACHE_ENV = "X0PLUS_CACHE_DIR"


@dataclass(frozen=True)
class KnownPoint:
    label: str  # "cusp", "CM" or "exceptional"
    coords: tuple[int, ...]
    D: int | None = None

    def __post_init__(self):
        if self.label not in ("cusp", "CM", "exceptional"):
            raise SchemaError(f"unknown point label {self.label!r}")
        if not any(self.coords):
            raise SchemaError("point with all coordinates zero")
        g = 0
        for c in self.coords:
            g = gcd(g, c)
        if g != 1:
            raise SchemaError(f"point {list(self.coords)} is not primitive")
        if (self.label == "CM") != (self.D is not None):
            raise SchemaError("a discriminant is given exactly for CM points")

    @property
    def name(self) -> str:
        return f"D={self.D}" if self.label == "CM" else self.label

    def to_json(self) -> dict:
        out: dict = {"label": self.label}
        if self.D is not None:
            out["D"] = self.D
        out["coords"] = list(self.coords)
        return out


@dataclass(frozen=True)
class PatchSpec:
    x1: tuple
    x2: tuple
    y1: tuple
    y2: tuple
    dx: int
    dy: int
    d_inf: int
    prime: int
    q0: UniPoly = field(default_factory=lambda: UniPoly([1]))
    post_automorphism: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        for a, b, name in ((self.x1, self.x2, "x"), (self.y1, self.y2, "y")):
            if _proportional(a, b):
                raise InvariantError(f"{name}1 and {name}2 are proportional")
        if self.q0.is_zero() or self.q0.lc != 1:
            raise InvariantError("q0 must be monic")
        if self.post_automorphism is not None:
            M = self.post_automorphism
            if len(M) != 3 or any(len(r) != 3 for r in M):
                raise SchemaError("post_automorphism must be 3x3")

    def forms(self) -> tuple[tuple, tuple, tuple, tuple]:
        return self.x1, self.x2, self.y1, self.y2

    def to_json(self) -> dict:
        out = {k: [[Fraction(c).numerator, Fraction(c).denominator] for c in getattr(self, k)]
               for k in ("x1", "x2", "y1", "y2")}
        out.update(dx=self.dx, dy=self.dy, d_inf=self.d_inf, prime=self.prime)
        out["q0"] = [[Fraction(c).numerator, Fraction(c).denominator] for c in self.q0.coeffs]
        if self.post_automorphism is not None:
            out["post_automorphism"] = [list(r) for r in self.post_automorphism]
        return out


def _proportional(a: Sequence, b: Sequence) -> bool:
    return all(a[i] * b[j] == a[j] * b[i] for i in range(len(a)) for j in range(len(a)))


@dataclass(frozen=True)
class PlaneModelRecord:
    Q: MultiPoly  # in (x, y), monic in y
    patch_index: int

    @property
    def dx(self) -> int:
        return self.Q.degree_in("y")


@dataclass(frozen=True)
class NewformOrbitRecord:
    level: int
    label: str
    dimension: int
    ap_minpoly_degree: dict

    def __post_init__(self):
        if self.dimension < 1:
            raise ParseError(f"orbit {self.label}: dimension must be positive")
        for p, d in self.ap_minpoly_degree.items():
            if not 1 <= d <= self.dimension:
                raise ParseError(f"orbit {self.label}: degree {d} at p={p} exceeds dimension")


@dataclass(frozen=True)
class CanonicalModel:
    level: int
    genus: int
    variables: tuple[str, ...]
    equations: tuple[MultiPoly, ...]
    qexp: dict
    precision: int
    known_points: tuple[KnownPoint, ...]
    patches: tuple[PatchSpec, ...] = ()
    plane_models: tuple[PlaneModelRecord, ...] = ()
    extra: dict = field(default_factory=dict)

    def series(self) -> list[Series]:
        return [Series.from_qexp(self.qexp[v], self.precision) for v in self.variables]

    def plane_model(self, patch_index: int) -> PlaneModelRecord:
        for pm in self.plane_models:
            if pm.patch_index == patch_index:
                return pm
        raise LookupError(f"no plane model for patch {patch_index}")

    def table_prime(self) -> int:
        return self.patches[0].prime

    def equations_mod(self, p: int) -> list[MultiPoly]:
        from .exact import reduce_mod_p

        return [reduce_mod_p(e, p) for e in self.equations]


# ---------------------------------------------------------------------------
# loading


def fixture_dir() -> Path:
    return Path(str(resources.files("x0plus") / "fixtures"))


def fixture_path(level: int) -> Path:
    return fixture_dir() / f"{level}.json"


def _rat_vec(data, what: str) -> tuple:
    try:
        return tuple(to_rat(Fraction(int(n), int(d))) for n, d in data)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{what}: bad rational vector {data!r}") from exc


def _poly(data, variables, what: str) -> MultiPoly:
    try:
        return MultiPoly.from_coefficient_list(data, variables)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def model_from_dict(doc: dict, validate: bool = True) -> CanonicalModel:
    if not isinstance(doc, dict):
        raise SchemaError("fixture root must be an object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {doc.get('schema')!r}")
    missing = [k for k in REQUIRED_FIELDS if k not in doc]
    if missing:
        raise SchemaError(f"missing fields: {missing}")
    level, genus = doc["level"], doc["genus"]
    variables = tuple(doc["variables"])
    if not isinstance(level, int) or not isinstance(genus, int):
        raise SchemaError("level and genus must be integers")
    if len(variables) != genus:
        raise InvariantError(f"{len(variables)} variables for genus {genus}")
    equations = tuple(_poly(e, variables, f"equation {i}") for i, e in enumerate(doc["equations"]))
    for i, e in enumerate(equations):
        if not e.is_homogeneous() or e.total_degree() not in (2, 3):
            raise InvariantError(f"equation {i} is not a homogeneous quadric or cubic")
    qexp = doc["qexp"]
    if set(qexp) != set(variables):
        raise SchemaError("q-expansions do not match the variables")
    precision = doc["precision"]
    for v in variables:
        if len(qexp[v]) < precision - 1 or not all(isinstance(c, int) for c in qexp[v]):
            raise InvariantError(f"q-expansion of {v} needs {precision - 1} integer coefficients")
    qexp = {v: tuple(qexp[v]) for v in variables}
    points = []
    for i, pt in enumerate(doc["known_points"]):
        try:
            kp = KnownPoint(pt["label"], tuple(pt["coords"]), pt.get("D"))
        except KeyError as exc:
            raise SchemaError(f"known point {i}: missing {exc}") from exc
        if len(kp.coords) != genus:
            raise SchemaError(f"known point {i} has {len(kp.coords)} coordinates")
        points.append(kp)
    patches = []
    for i, pa in enumerate(doc["patches"]):
        try:
            forms = [_rat_vec(pa[k], f"patch {i} {k}") for k in ("x1", "x2", "y1", "y2")]
            auto = pa.get("post_automorphism")
            patches.append(PatchSpec(
                *forms, dx=pa["dx"], dy=pa["dy"], d_inf=pa["d_inf"], prime=pa["prime"],
                q0=UniPoly(_rat_vec(pa.get("q0", [[1, 1]]), f"patch {i} q0")),
                post_automorphism=tuple(tuple(r) for r in auto) if auto is not None else None,
            ))
        except KeyError as exc:
            raise SchemaError(f"patch {i}: missing {exc}") from exc
        if any(len(f) != genus for f in forms):
            raise SchemaError(f"patch {i}: linear form of wrong length")
    planes = []
    for i, pl in enumerate(doc["plane_models"]):
        Q = _poly(pl["Q"], ("x", "y"), f"plane model {i}")
        idx = pl["patch"]
        if not 0 <= idx < len(patches):
            raise SchemaError(f"plane model {i} refers to missing patch {idx}")
        d = Q.degree_in("y")
        if Q.terms.get((0, d)) != 1 or any(e[1] == d for e in Q.terms if e != (0, d)):
            raise InvariantError(f"plane model {i} is not monic in y")
        if d != patches[idx].dx:
            raise InvariantError(f"plane model {i}: deg_y = {d} but dx = {patches[idx].dx}")
        planes.append(PlaneModelRecord(Q, idx))
    extra = {k: v for k, v in doc.items() if k not in REQUIRED_FIELDS and k != "schema"}
    model = CanonicalModel(level, genus, variables, equations, qexp, precision, tuple(points),
                           tuple(patches), tuple(planes), extra)
    if validate:
        rep = verify_known_points(model)
        if not rep.passed:
            bad = [(r.point_index, r.failing_equations) for r in rep.rows if not r.passed]
            raise InvariantError(f"level {level}: known points off the curve (point, equations): {bad}")
    return model


def load_model(source: int | str | os.PathLike, validate: bool = True) -> CanonicalModel:
    """Load a fixture by level number or by path."""
    path = fixture_path(source) if isinstance(source, int) else Path(source)
    if not path.exists():
        raise FixtureNotFoundError(f"no fixture at {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc, validate)


def model_to_dict(model: CanonicalModel) -> dict:
    doc = {
        "schema": SCHEMA_VERSION,
        "level": model.level,
        "genus": model.genus,
        "variables": list(model.variables),
        "equations": [e.coefficient_list() for e in model.equations],
        "precision": model.precision,
        "qexp": {v: list(model.qexp[v]) for v in model.variables},
        "known_points": [p.to_json() for p in model.known_points],
        "patches": [p.to_json() for p in model.patches],
        "plane_models": [{"patch": pm.patch_index, "Q": pm.Q.coefficient_list()} for pm in model.plane_models],
    }
    doc.update(model.extra)
    return doc


def dump_model(model: CanonicalModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class PointCheck:
    point_index: int
    point: KnownPoint
    failing_equations: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.failing_equations


@dataclass(frozen=True)
class KnownPointReport:
    level: int
    rows: tuple[PointCheck, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def verify_known_points(model: CanonicalModel, points: Iterable[KnownPoint] | None = None) -> KnownPointReport:
    pts = model.known_points if points is None else tuple(points)
    rows = []
    for i, pt in enumerate(pts):
        bad = tuple(j for j, e in enumerate(model.equations) if e(pt.coords) != 0)
        rows.append(PointCheck(i, pt, bad))
    return KnownPointReport(model.level, tuple(rows))


@dataclass(frozen=True)
class SeriesCheck:
    """Result of substituting truncated series into a polynomial.

    ``verified_through`` is the exponent below which all coefficients are known;
    ``checked`` counts the coefficients that were actually compared with zero.
    """

    index: int
    verified_through: int
    checked: int
    first_nonzero: int | None

    @property
    def status(self) -> str:
        if self.first_nonzero is not None:
            return "fail"
        return "pass" if self.checked > 0 else "inconclusive"


@dataclass(frozen=True)
class QexpReport:
    level: int
    rows: tuple[SeriesCheck, ...]

    @property
    def status(self) -> str:
        statuses = {r.status for r in self.rows}
        if "fail" in statuses:
            return "fail"
        return "inconclusive" if "inconclusive" in statuses else "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def series_check(index: int, poly: MultiPoly, series: Sequence[Series]) -> SeriesCheck:
    r = eval_multipoly(poly, series)
    # smallest exponent any monomial can contribute: below it nothing is really tested
    floor = min(sum(k * s.valuation for k, s in zip(e, series)) for e in poly.terms)
    nz = r.nonzero_terms()
    return SeriesCheck(index, r.prec, r.prec - floor, nz[0][0] if nz else None)


def verify_qexp(model: CanonicalModel) -> QexpReport:
    S = model.series()
    return QexpReport(model.level, tuple(series_check(i, e, S) for i, e in enumerate(model.equations)))


# ---------------------------------------------------------------------------
# Galbraith's model of level 157


@dataclass(frozen=True)
class GalbraithReport:
    known_point_failures: tuple[tuple[int, int], ...]  # (point index, equation index)
    fp_failures: dict  # p -> list of (point, equation index)
    primes: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.known_point_failures and not any(self.fp_failures.values())


def galbraith_equations(model: CanonicalModel, typo: bool = False) -> list[MultiPoly]:
    """Galbraith's equations pulled back to the model's variables through the stored linear map."""
    data = model.extra.get("galbraith")
    if data is None:
        raise InsufficientDataError(f"level {model.level} has no Galbraith data")
    gvars = data["variables"]
    images = [MultiPoly.linear_form(_rat_vec(row, "substitution"), model.variables) for row in data["substitution"]]
    eqs = data["typo_equations" if typo else "equations"]
    return [_poly(e, gvars, "galbraith").substitute(images) for e in eqs]


def galbraith_157_crosscheck(model: CanonicalModel | None = None, typo: bool = False,
                             primes: Sequence[int] = (5, 11, 13),
                             equations: Sequence[MultiPoly] | None = None) -> GalbraithReport:
    """Check that the pulled-back equations vanish on the model's known points and F_p points."""
    from .points import enumerate_fp_points

    if model is None:
        model = load_model(157)
    eqs = list(equations) if equations is not None else galbraith_equations(model, typo)
    kp_fail = tuple((i, j) for i, pt in enumerate(model.known_points)
                    for j, e in enumerate(eqs) if e(pt.coords) != 0)
    fp_fail: dict = {}
    for p in primes:
        from .exact import reduce_mod_p

        red = [reduce_mod_p(e, p) for e in eqs]
        pts = enumerate_fp_points(model, p).points
        fp_fail[p] = [(pt, j) for pt in pts for j, e in enumerate(red) if e(pt) != 0]
    return GalbraithReport(kp_fail, fp_fail, tuple(primes))


# ---------------------------------------------------------------------------
# newform data


def _parse_orbits(level: int, text: str) -> list[NewformOrbitRecord]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"level {level}: response is not JSON ({exc})") from exc
    if not isinstance(data, list):
        raise ParseError(f"level {level}: expected a JSON array")
    out = []
    for item in data:
        try:
            degs = {int(p): int(d) for p, d in item["ap_minpoly_degree"].items()}
            out.append(NewformOrbitRecord(level, str(item["label"]), int(item["dimension"]), degs))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"level {level}: malformed orbit record {item!r}") from exc
    return out


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "x0plus" / "newforms"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fetch_newform_orbits(level: int, endpoint_url: str | None = None, cache_dir=None,
                         offline: bool = False, timeout: float = 10.0) -> list[NewformOrbitRecord]:
    """Newform orbit data for a level: cache first, then the bundled fixture (offline) or the network."""
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cached = cache / f"{level}.json"
    if cached.exists():
        return _parse_orbits(level, cached.read_text())
    if offline:
        bundled = fixture_dir() / "newforms" / f"{level}.json"
        if bundled.exists():
            return _parse_orbits(level, bundled.read_text())
        raise FetchError(f"level {level}: offline and no cached newform data")
    base = endpoint_url or os.environ.get(NEWFORM_URL_ENV)
    if not base:
        raise FetchError(f"no endpoint configured (set {NEWFORM_URL_ENV})")
    url = f"{base.rstrip('/')}/newforms/{level}"
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            text = resp.read().decode()
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise FetchError(f"GET {url} failed: {exc}") from exc
    records = _parse_orbits(level, text)
    _write_atomic(cached, text)
    return records


def hecke_generation_check(level: int, p: int, records: Sequence[NewformOrbitRecord],
                           genus: int | None = None) -> bool:
    """True iff the orbits fill the genus and a_p generates each coefficient field."""
    recs = [r for r in records if r.level == level]
    if not recs:
        raise InsufficientDataError(f"no orbit records for level {level}")
    if genus is None:
        genus = load_model(level, validate=False).genus if level in LEVELS else None
    if genus is None:
        raise InsufficientDataError(f"genus of level {level} unknown")
    for r in recs:
        if p not in r.ap_minpoly_degree:
            raise InsufficientDataError(f"orbit {r.label} has no data at p={p}")
    if sum(r.dimension for r in recs) != genus:
        return False
    return all(r.ap_minpoly_degree[p] == r.dimension for r in recs)


def reduce_point(coords: Sequence, p: int) -> tuple[int, ...] | None:
    """Normalized F_p image of a projective rational point (None when it reduces to 0)."""
    vals = [reduce_rat(to_rat(c), p) for c in coords]
    for v in vals:
        if v:
            inv = pow(v, -1, p)
            return tuple(x * inv % p for x in vals)
    return None
