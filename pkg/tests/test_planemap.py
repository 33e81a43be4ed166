from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from x0plus.errors import DegenerateInputError, NotOnCurveError
from x0plus.exact import MultiPoly, UniPoly, reduce_mod_p, reduce_rat
from x0plus.modeldb import LEVELS
from x0plus.planemap import (REASONS, eval_patch, monicize, undefined_locus_points, undefined_reasons,
                             verify_plane_model_fp, verify_plane_model_series)

from conftest import all_patches, fp_points, model

V = ("x", "y")


def test_cusp_of_137_is_undefined():
    res = eval_patch(model(137), 0, (1, 0, 0, 0))
    assert not res.defined and res.reason == "x1x2zero"


def test_cm_point_of_137():
    m = model(137)
    res = eval_patch(m, 0, (2, -1, -2, 1))
    assert res.defined and not res.point.infinite
    assert res.point.x == Fraction(-1, 2)
    assert m.plane_model(0).Q((res.point.x, res.point.y)) == 0


def test_point_off_curve():
    with pytest.raises(NotOnCurveError):
        eval_patch(model(137), 0, (1, 2, 3, 4))


def test_monicize_examples():
    F = MultiPoly({(1, 2): 1, (0, 1): 1, (0, 0): 1}, V)
    Q, Q0 = monicize(F)
    assert Q == MultiPoly({(0, 2): 1, (0, 1): 1, (1, 0): 1}, V)
    assert Q0 == UniPoly([0, 1])
    G = MultiPoly({(0, 3): 1, (2, 1): 3, (1, 0): -1}, V)
    assert monicize(G) == (G, UniPoly([1]))
    with pytest.raises(DegenerateInputError):
        monicize(MultiPoly({}, V))


def _check_monic_identity(F):
    Q, Q0 = monicize(F)
    d = F.degree_in("y")
    assert Q.terms[(0, d)] == 1 and all(e[1] < d for e in Q.terms if e != (0, d))
    x, y = MultiPoly.var("x", V), MultiPoly.var("y", V)
    q0 = MultiPoly({(k, 0): c for k, c in enumerate(Q0.coeffs) if c}, V)
    # monicize divides through by the leading coefficient of Q0 first
    lead = next(c for e, c in sorted(F.terms.items(), key=lambda t: (-t[0][1], -t[0][0])) if e[1] == d)
    Fn = F * MultiPoly.constant(Fraction(1) / Fraction(lead), V)
    assert Q.substitute([x, q0 * y]) == Fn * q0 ** (d - 1)


def test_monicize_bidegree_3_3():
    # Q0 = x^2 + 1 leading a cubic in y with coefficients of degree up to 3 in x
    F = MultiPoly({(2, 3): 1, (0, 3): 1, (3, 2): 2, (1, 2): -1, (0, 1): 5, (2, 1): 1, (3, 0): -7, (0, 0): 1}, V)
    Q, Q0 = monicize(F)
    assert Q0 == UniPoly([1, 0, 1])
    _check_monic_identity(F)


coef = st.integers(-5, 5)


@st.composite
def bidegree(draw):
    d = draw(st.integers(2, 4))
    terms = {}
    for j in range(d + 1):
        for i in range(draw(st.integers(0, 3)) + 1):
            terms[(i, j)] = draw(coef)
    terms[(draw(st.integers(0, 2)), d)] = draw(st.integers(1, 4))
    return MultiPoly(terms, V)


@settings(max_examples=50, deadline=None)
@given(bidegree())
def test_monicize_identity_property(F):
    if F.degree_in("y") < 2:
        return
    _check_monic_identity(F)


@pytest.mark.parametrize("level,patch", all_patches())
def test_plane_model_series(level, patch):
    s = verify_plane_model_series(model(level), patch)
    assert s.status == "pass" and s.checked > 0


def test_perturbed_plane_model_detected():
    m = model(137)
    Q = m.plane_model(0).Q
    t = dict(Q.terms)
    t[(1, 1)] = t.get((1, 1), 0) + 1
    assert verify_plane_model_series(m, 0, MultiPoly(t, V)).status == "fail"
    assert verify_plane_model_series(model(271), 0).status == "pass"


@pytest.mark.parametrize("level", [137, 173, 157, 263, 197, 211])
def test_plane_model_over_fp(level):
    m = model(level)
    for i, spec in enumerate(m.patches):
        chk = verify_plane_model_fp(m, i, spec.prime, fp_points(level, spec.prime))
        assert chk.passed and chk.checked > 0


@pytest.mark.parametrize("level", LEVELS)
def test_reduction_commutes_with_map(level):
    m = model(level)
    compared = 0
    for i, spec in enumerate(m.patches):
        p = spec.prime
        for kp in m.known_points:
            over_q = eval_patch(m, i, kp.coords)
            over_p = eval_patch(m, i, kp.coords, p)
            if not (over_q.defined and over_p.defined):
                continue
            a, b = over_q.point, over_p.point
            if a.infinite or b.infinite:
                continue
            if any(Fraction(c).denominator % p == 0 for c in (a.x, a.y)):
                continue
            assert (reduce_rat(a.x, p), reduce_rat(a.y, p)) == (b.x, b.y)
            compared += 1
    assert compared > 0


@pytest.mark.parametrize("level", [137, 181, 211, 359])
def test_degenerate_points_never_map(level):
    m = model(level)
    p = m.table_prime()
    for i in range(len(m.patches)):
        for P in fp_points(level, p):
            res = eval_patch(m, i, P, p, check=False)
            reasons = undefined_reasons(m, i, P, p)
            assert res.defined == (not reasons)
            if not res.defined:
                assert res.reason in REASONS and res.reason == reasons[0]


def test_undefined_locus_137_mod_5_frozen():
    got = undefined_locus_points(model(137), 0, p=5)
    assert got == [
        ((1, 0, 0, 0), ("x1x2zero",)),
        ((1, 0, 2, 0), ("y1y2zero",)),
        ((1, 1, 4, 0), ("y1y2zero",)),
        ((1, 4, 0, 0), ("x1x2zero", "y1y2zero", "x2y2zero")),
    ]


def test_undefined_locus_137_over_q():
    got = dict(undefined_locus_points(model(137), 0, H=20))
    assert "x1x2zero" in got[(1, 0, 0, 0)]
    assert set(got[(1, -1, 0, 0)]) == {"x1x2zero", "y1y2zero", "x2y2zero"}
    assert got[(1, 1, -1, 0)] == ("y1y2zero",)
    assert got[(2, 0, -1, 0)] == ("y1y2zero",)


def test_empty_x1x2_component_when_forms_have_no_common_zero():
    # some fixture patch has x1 = x2 = 0 only off the F_p points of the curve
    found = False
    for level in (137, 157, 163):
        m = model(level)
        p = m.table_prime()
        locus = undefined_locus_points(m, 0, p=p)
        if not any("x1x2zero" in r for _, r in locus):
            spec = m.patches[0]
            x1, x2 = (reduce_mod_p(MultiPoly.linear_form(f, m.variables), p) for f in spec.forms()[:2])
            assert all(x1(P) or x2(P) for P in fp_points(level, p))
            found = True
    assert found


def test_211_patch_2_known_point_images():
    m = model(211)
    images = {}
    for kp in m.known_points:
        res = eval_patch(m, 1, kp.coords)
        images[kp.name] = res.reason if not res.defined else (res.point.x, res.point.y, res.point.infinite)
    assert images == {
        "cusp": (-1, 1, False), "D=-3": (Fraction(-1, 2), 0, False), "D=-7": (1, -2, False),
        "D=-8": (1, -3, True), "D=-12": (1, 0, True), "D=-27": (-2, 3, False), "D=-28": (-1, 2, False),
        # x2 = y2 = X - Y - Z vanishes here; the formula for phi' is degenerate
        "D=-67": "x2y2zero",
    }
