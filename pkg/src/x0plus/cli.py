"""Command-line entry point: ``x0plus genus|verify|verify-all|disks|points``.

Exit codes: 0 when every executed check passed, 1 when a check failed or was
inconclusive, 2 for usage and I/O errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata

from . import disks, genus, modeldb, planemap, points
from .errors import FetchError, InsufficientDataError, ParseError, X0PlusError

PASS, FAIL, INCONCLUSIVE, UNCHECKED = "pass", "fail", "inconclusive", "unchecked"


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


@dataclass
class RunReport:
    command: str
    parameters: dict
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)
    elapsed: float = 0.0

    def add(self, name: str, status: str, detail=None) -> None:
        self.checks.append({"name": name, "status": status, "detail": detail})

    @property
    def status(self) -> str:
        statuses = {c["status"] for c in self.checks}
        if FAIL in statuses:
            return FAIL
        if INCONCLUSIVE in statuses:
            return INCONCLUSIVE
        if statuses and statuses <= {UNCHECKED}:
            return UNCHECKED
        return PASS

    def exit_code(self) -> int:
        return 0 if self.status in (PASS, UNCHECKED) else 1

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "status": self.status,
            "checks": self.checks,
            "data": self.data,
            "timing_seconds": round(self.elapsed, 3),
            "artifact_version": _version(),
            "fixture_schema": modeldb.SCHEMA_VERSION,
        }

    def finish(self) -> "RunReport":
        self.elapsed = time.perf_counter() - self.started
        return self


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


# ---------------------------------------------------------------------------
# commands


def cmd_genus(max_genus: int, check: bool = False) -> RunReport:
    rep = RunReport("genus", {"max": max_genus, "check": check})
    table = genus.enumerate_levels(max_genus)
    rep.data = {"cutoff": genus.level_cutoff(max_genus),
                "prime": {str(g): v for g, v in table["prime"].items()},
                "composite": {str(g): v for g, v in table["composite"].items()}}
    if not check:
        rep.add("tables", UNCHECKED, "no comparison requested")
    elif max_genus > 6:
        rep.add("tables", UNCHECKED, "no embedded expectation beyond genus 6")
    else:
        for kind, expected in (("prime", genus.PRIME_TABLE), ("composite", genus.COMPOSITE_TABLE)):
            for g in range(max_genus + 1):
                got = table[kind][g]
                rep.add(f"{kind} genus {g}", _status(got == expected[g]),
                        None if got == expected[g] else {"expected": expected[g], "got": got})
    return rep.finish()


def _hecke_advisory(rep: RunReport, model: modeldb.CanonicalModel, offline: bool, prefix: str) -> None:
    # advisory only: missing newform data leaves the check unchecked rather than failed
    p = model.table_prime()
    try:
        recs = modeldb.fetch_newform_orbits(model.level, offline=offline)
        ok = modeldb.hecke_generation_check(model.level, p, recs, model.genus)
    except (FetchError, ParseError, InsufficientDataError) as exc:
        rep.add(prefix + f"Hecke generation at p={p}", UNCHECKED, str(exc))
        return
    rep.add(prefix + f"Hecke generation at p={p}", _status(ok), [r.label for r in recs])


def _verify_into(rep: RunReport, model: modeldb.CanonicalModel, prefix: str = "",
                 offline: bool = False, jobs: int = 1) -> None:
    kp = modeldb.verify_known_points(model)
    rep.add(prefix + "known points", _status(kp.passed),
            [{"point": list(r.point.coords), "equations": list(r.failing_equations)} for r in kp.rows if not r.passed] or None)
    qx = modeldb.verify_qexp(model)
    rep.add(prefix + "q-expansions", qx.status,
            [{"equation": r.index, "through": r.verified_through, "checked": r.checked,
              "first_nonzero": r.first_nonzero} for r in qx.rows])
    pts = points.enumerate_fp_points(model, model.table_prime(), jobs=jobs).points
    for i, spec in enumerate(model.patches):
        pm = model.plane_model(i)
        tag = f"{prefix}patch {i + 1}"
        rep.add(f"{tag} dx metadata", _status(pm.dx == spec.dx), {"deg_y": pm.dx, "dx": spec.dx})
        roots = disks.rational_roots(disks.disk_data(pm.Q).r)
        rep.add(f"{tag} no linear factor of r", _status(not roots),
                sorted(str(r) for r in roots) or None)
        s = planemap.verify_plane_model_series(model, i)
        rep.add(f"{tag} plane model series", s.status,
                {"through": s.verified_through, "checked": s.checked, "first_nonzero": s.first_nonzero})
        f = planemap.verify_plane_model_fp(model, i, spec.prime, pts)
        rep.add(f"{tag} plane model over F_{spec.prime}", _status(f.passed),
                {"checked": f.checked, "failures": [list(P) for P in f.failures]})
    cov = disks.coverage_check(model, None, model.table_prime(), points=pts)
    rep.add(prefix + f"coverage at p={cov.p}", _status(cov.covered),
            {"patches": len(cov.patches), "uncovered": [list(P) for P in cov.uncovered]})
    _hecke_advisory(rep, model, offline, prefix)


def cmd_verify(level: int, offline: bool = False, jobs: int = 1) -> RunReport:
    rep = RunReport("verify", {"level": level, "offline": offline})
    _verify_into(rep, modeldb.load_model(level), offline=offline, jobs=jobs)
    return rep.finish()


def cmd_verify_all(levels=modeldb.LEVELS, offline: bool = False, jobs: int = 1) -> RunReport:
    rep = RunReport("verify-all", {"levels": list(levels), "offline": offline})
    matrix = {}
    for N in levels:
        try:
            model = modeldb.load_model(N)
        except X0PlusError as exc:
            rep.add(f"{N}: load", FAIL, str(exc))
            matrix[N] = FAIL
            continue
        sub = RunReport("verify", {"level": N})
        _verify_into(sub, model, offline=offline, jobs=jobs)
        for c in sub.checks:
            rep.add(f"{N}: {c['name']}", c["status"], c["detail"])
        matrix[N] = sub.status
    rep.data = {"matrix": {str(k): v for k, v in matrix.items()}}
    return rep.finish()


def cmd_disks(level: int, prime: int | None, patches, strict: bool = False) -> RunReport:
    model = modeldb.load_model(level)
    idx = [i - 1 for i in patches] if patches else list(range(len(model.patches)))
    for i in idx:
        if not 0 <= i < len(model.patches):
            raise ValueError(f"level {level} has no patch {i + 1}")
    p = prime or model.patches[idx[0]].prime
    rep = RunReport("disks", {"level": level, "prime": p, "patches": [i + 1 for i in idx], "strict": strict})
    cov = disks.coverage_check(model, idx, p, strict=strict)
    rep.data = {
        "rows": [{"point": list(r.point), "classes": list(r.classes)} for r in cov.rows],
        "uncovered": [list(P) for P in cov.uncovered],
        "strict_violations": list(cov.strict_violations),
    }
    rep.add("covered", _status(cov.covered))
    return rep.finish()


def cmd_points_fp(level: int, prime: int, jobs: int = 1) -> RunReport:
    model = modeldb.load_model(level)
    rep = RunReport("points fp", {"level": level, "prime": prime, "jobs": jobs})
    s = points.enumerate_fp_points(model, prime, jobs=jobs)
    bound = 2 * model.genus * prime ** 0.5
    rep.data = {"count": len(s), "points": [list(P) for P in s.points]}
    rep.add("Weil bound", _status(abs(len(s) - prime - 1) <= bound), {"count": len(s), "bound": bound})
    return rep.finish()


def cmd_points_search(level: int, height: int) -> RunReport:
    model = modeldb.load_model(level)
    rep = RunReport("points search", {"level": level, "height": height})
    found = points.search_rational_points(model, height)
    known = {points.normalize_integral(k.coords) for k in model.known_points
             if max(map(abs, k.coords)) <= height}
    rep.data = {"points": [list(P) for P in found]}
    rep.add("known points recovered", _status(known <= set(found)), sorted(list(P) for P in known - set(found)) or None)
    extras = sorted(set(found) - {points.normalize_integral(k.coords) for k in model.known_points})
    rep.add("no unknown points", _status(not extras), [list(P) for P in extras] or None)
    return rep.finish()


def cmd_points_cm(level: int, disc: int) -> RunReport:
    model = modeldb.load_model(level)
    rep = RunReport("points cm", {"level": level, "disc": disc})
    ev = points.evaluate_cm_point(model, disc)
    rep.data = {
        "form": [ev.form.a, ev.form.b, ev.form.c], "q_abs": ev.q_abs,
        "ratios": [[z.real, z.imag] for z in ev.ratios],
        "reconstructed": list(ev.reconstructed) if ev.reconstructed else None,
        "residual": ev.residual, "used_derivative_fallback": ev.used_derivative_fallback,
    }
    rep.add("matched known point", PASS if ev.matched_point else INCONCLUSIVE,
            list(ev.matched_point.coords) if ev.matched_point else None)
    return rep.finish()


# ---------------------------------------------------------------------------
# argument parsing and output


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="x0plus", description="Verification pipeline for X0+(N) of prime level, genus 4 to 6.")
    ap.add_argument("--json", action="store_true", help="print the run report as JSON")
    ap.add_argument("--offline", action="store_true", help="never touch the network for newform data")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for F_p enumeration")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("genus", help="levels with g0+(N) <= max")
    g.add_argument("--max", type=int, default=6, dest="max_genus")
    g.add_argument("--check", action="store_true", help="compare with the published tables")

    v = sub.add_parser("verify", help="run every check for one level")
    v.add_argument("level", type=int)
    sub.add_parser("verify-all", help="run verify for all 16 levels")

    d = sub.add_parser("disks", help="residue-disk coverage report")
    d.add_argument("--level", type=int, required=True)
    d.add_argument("--prime", type=int)
    d.add_argument("--patch", type=int, action="append", help="patch number (1-based); repeatable")
    d.add_argument("--strict", action="store_true", help="also forbid roots of r mod p and points at infinity")

    p = sub.add_parser("points", help="point enumeration and search")
    psub = p.add_subparsers(dest="mode", required=True)
    pf = psub.add_parser("fp")
    pf.add_argument("--level", type=int, required=True)
    pf.add_argument("--prime", type=int, required=True)
    ps = psub.add_parser("search")
    ps.add_argument("--level", type=int, required=True)
    ps.add_argument("--height", type=int, required=True)
    pc = psub.add_parser("cm")
    pc.add_argument("--level", type=int, required=True)
    pc.add_argument("--disc", type=int, required=True)
    return ap


def _dispatch(args) -> RunReport:
    if args.command == "genus":
        return cmd_genus(args.max_genus, args.check)
    if args.command == "verify":
        return cmd_verify(args.level, args.offline, args.jobs)
    if args.command == "verify-all":
        return cmd_verify_all(offline=args.offline, jobs=args.jobs)
    if args.command == "disks":
        return cmd_disks(args.level, args.prime, args.patch, args.strict)
    if args.mode == "fp":
        return cmd_points_fp(args.level, args.prime, args.jobs)
    if args.mode == "search":
        return cmd_points_search(args.level, args.height)
    return cmd_points_cm(args.level, args.disc)


def _print_text(rep: RunReport) -> None:
    d = rep.data
    if rep.command == "genus":
        for kind in ("prime", "composite"):
            print(f"{kind} levels")
            for g, levels in d[kind].items():
                print(f"  {g} | {', '.join(map(str, levels))}")
    elif rep.command == "disks":
        print(f"level {rep.parameters['level']}, p = {rep.parameters['prime']}, patches {rep.parameters['patches']}")
        for row in d["rows"]:
            print(f"  {row['point']}  {' '.join(row['classes'])}")
    elif rep.command.startswith("points"):
        for key in ("count", "points", "form", "reconstructed", "residual", "used_derivative_fallback"):
            if key in d:
                print(f"{key}: {d[key]}")
    for c in rep.checks:
        print(f"[{c['status']:>12}] {c['name']}")
    print(f"overall: {rep.status} ({rep.elapsed:.2f}s)")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        rep = _dispatch(args)
    except (X0PlusError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (OSError, ValueError)) and not isinstance(exc, ArithmeticError) else 1
    if args.json:
        print(json.dumps(rep.to_json(), indent=1))
    else:
        _print_text(rep)
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
