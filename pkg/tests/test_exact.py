from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from x0plus.errors import DegenerateInputError, DomainMismatchError, NotPIntegralError
from x0plus.exact import (MultiPoly, UniPoly, discriminant_y, is_squarefree, poly_gcd, rational_roots,
                          reduce_mod_p, roots_mod_p, squarefree_part)
from x0plus.disks import disk_data

from conftest import model

X = UniPoly([0, 1])


def xy(terms):
    return MultiPoly(terms, ("x", "y"))


small = st.integers(-6, 6)
fracs = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 4))


@st.composite
def unipolys(draw, elems=small, max_deg=5, p=None):
    cs = draw(st.lists(elems, min_size=1, max_size=max_deg + 1))
    return UniPoly(cs, p=p)


@st.composite
def nonzero_unipolys(draw, **kw):
    f = draw(unipolys(**kw))
    return f if not f.is_zero() else UniPoly([1], p=kw.get("p"))


# -- examples ----------------------------------------------------------------

def test_gcd_examples():
    assert poly_gcd(X ** 2 - 1, X - 1) == X - 1
    f = UniPoly([2, 4, 6])
    assert poly_gcd(f, UniPoly([])) == f.monic()


def test_gcd_mixed_domains():
    with pytest.raises(DomainMismatchError):
        poly_gcd(X, UniPoly([0, 1], p=5))


def test_discriminant_examples():
    assert discriminant_y(xy({(0, 2): 1, (1, 0): -1})) == 4 * X
    assert discriminant_y(xy({(0, 2): 1, (0, 1): 1, (1, 0): 1})) == 1 - 4 * X
    with pytest.raises(DegenerateInputError):
        discriminant_y(xy({(1, 0): 1}))


def test_squarefree_examples():
    assert squarefree_part(X ** 2 * (X + 1)) == X * (X + 1)
    assert squarefree_part(X ** 3) == X
    assert squarefree_part((X - 1) ** 3 * (X ** 2 + 1)) == (X - 1) * (X ** 2 + 1)
    with pytest.raises(DegenerateInputError):
        squarefree_part(UniPoly([]))


def test_reduce_examples():
    assert reduce_mod_p(UniPoly([3, Fraction(1, 2)]), 5) == UniPoly([3, 3], p=5)
    Q = model(173).plane_model(0).Q
    assert reduce_mod_p(Q, 5).p == 5
    with pytest.raises(NotPIntegralError):
        reduce_mod_p(Q, 2)


def test_rational_roots_examples():
    assert rational_roots(UniPoly([1, -3, 2])) == {1, Fraction(1, 2)}
    assert rational_roots(X ** 2 + 1) == set()
    assert rational_roots(disk_data(model(137).plane_model(0).Q).r) == set()


def test_roots_mod_p_examples():
    assert roots_mod_p(UniPoly([-1, 0, 1], p=5)) == {1, 4}
    assert roots_mod_p(UniPoly([-2, 0, 1], p=5)) == set()
    with pytest.raises(DegenerateInputError):
        roots_mod_p(UniPoly([], p=5))


# -- frozen regression values ----------------------------------------------

def test_gcd_of_137_discriminant_frozen():
    d = disk_data(model(137).plane_model(0).Q).delta
    g = poly_gcd(d, d.derivative())
    assert g == UniPoly([Fraction(-1, 21), Fraction(-1, 14), Fraction(9, 14), 1])
    # the repeated factor is exactly the leading coefficient polynomial of the pre-monic model
    assert g == model(137).patches[0].q0


def test_disk_degrees_frozen():
    d137 = disk_data(model(137).plane_model(0).Q)
    assert (d137.delta.degree, d137.r.degree) == (18, 15)
    assert discriminant_y(model(311).plane_model(0).Q).degree == 48


def test_roots_263_mod_23_frozen():
    r = disk_data(model(263).plane_model(0).Q).r
    rbar = reduce_mod_p(r, 23)
    roots = roots_mod_p(rbar)
    assert roots == {1}
    assert all(rbar(a) == 0 for a in roots)


# -- oracles ------------------------------------------------------------------

def _bareiss_det(M):
    M = [[Fraction(v) for v in row] for row in M]
    n, sign, prev = len(M), 1, Fraction(1)
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k]), None)
            if swap is None:
                return Fraction(0)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
        prev = M[k][k]
    return sign * M[-1][-1]


def _disc_at(Q, x0):
    # discriminant of the univariate Q(x0, y) through the Sylvester matrix of (f, f')
    d = Q.degree_in("y")
    f = [Fraction(0)] * (d + 1)  # highest first
    for (i, j), c in Q.terms.items():
        f[d - j] += Fraction(c) * Fraction(x0) ** i
    df = [(d - k) * f[k] for k in range(d)]
    n = 2 * d - 1
    rows = [[0] * k + f + [0] * (n - d - 1 - k) for k in range(d - 1)]
    rows += [[0] * k + df + [0] * (n - d - k) for k in range(d)]
    res = _bareiss_det(rows)
    return (-1) ** (d * (d - 1) // 2) * res / f[0]


def _interpolate(xs, ys):
    out = UniPoly([])
    for i, xi in enumerate(xs):
        term = UniPoly([ys[i]])
        for j, xj in enumerate(xs):
            if j != i:
                term = term * UniPoly([Fraction(-xj, xi - xj), Fraction(1, xi - xj)])
        out = out + term
    return out


@pytest.mark.parametrize("level", [311, 137])
def test_discriminant_matches_sylvester_oracle(level):
    Q = model(level).plane_model(0).Q
    bound = 2 * (Q.degree_in("y") - 1) * Q.degree_in("x")
    xs = list(range(-(bound // 2), bound - bound // 2 + 1))
    oracle = _interpolate(xs, [_disc_at(Q, x) for x in xs])
    assert oracle == discriminant_y(Q)


def test_rational_roots_float_oracle():
    # the numpy roots of r are all far from rationals of small height
    for level in (137, 157, 263):
        r = disk_data(model(level).plane_model(0).Q).r
        roots = np.roots([float(c) for c in reversed(r.to_list())])
        real = roots[np.abs(roots.imag) < 1e-7].real
        for x in real:
            q = Fraction(float(x)).limit_denominator(50)
            if abs(float(q) - x) < 1e-6:
                assert r(q) != 0


# -- properties ---------------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(nonzero_unipolys(elems=fracs), nonzero_unipolys(elems=fracs))
def test_gcd_divides_over_q(a, b):
    g = poly_gcd(a, b)
    assert (a % g).is_zero() and (b % g).is_zero()


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([5, 7, 31]).flatmap(
    lambda p: st.tuples(st.just(p), nonzero_unipolys(p=p), nonzero_unipolys(p=p))))
def test_gcd_divides_over_fp(args):
    p, a, b = args
    g = poly_gcd(a, b)
    assert (a % g).is_zero() and (b % g).is_zero()


@settings(max_examples=60, deadline=None)
@given(nonzero_unipolys(), nonzero_unipolys(max_deg=3))
def test_squarefree_part_properties(f, h):
    f = f * h * h
    s = squarefree_part(f)
    assert (f % s).is_zero()
    assert is_squarefree(s)
    assert poly_gcd(s, s.derivative()).degree == 0


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.lists(fracs, max_size=5), st.lists(fracs, max_size=5))
def test_reduction_is_a_ring_homomorphism(p, a, b):
    a = [c for c in a if c.denominator % p]
    b = [c for c in b if c.denominator % p]
    f, g = UniPoly(a), UniPoly(b)
    assert reduce_mod_p(f + g, p) == reduce_mod_p(f, p) + reduce_mod_p(g, p)
    assert reduce_mod_p(f * g, p) == reduce_mod_p(f, p) * reduce_mod_p(g, p)


@st.composite
def bivariate(draw):
    d = draw(st.integers(2, 4))
    terms = {(0, d): 1}
    for _ in range(draw(st.integers(1, 6))):
        terms[(draw(st.integers(0, 3)), draw(st.integers(0, d - 1)))] = draw(small)
    return xy(terms)


@settings(max_examples=60, deadline=None)
@given(bivariate(), st.sampled_from([5, 7, 11]))
def test_discriminant_commutes_with_reduction(Q, p):
    assert reduce_mod_p(discriminant_y(Q), p) == discriminant_y(reduce_mod_p(Q, p))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.builds(Fraction, st.integers(-12, 12), st.integers(1, 6)), min_size=0, max_size=3),
       nonzero_unipolys(max_deg=3))
def test_rational_roots_exact_and_complete(roots, h):
    f = h
    for r in roots:
        f = f * UniPoly([-r, 1])
    found = rational_roots(f)
    assert set(roots) <= found
    assert all(f(r) == 0 for r in found)
    for num in range(-50, 51):
        for den in range(1, 51, 7):
            q = Fraction(num, den)
            if q not in found:
                assert f(q) != 0
