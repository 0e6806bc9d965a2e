"""Exact bracket algebra on trigonometric fields."""
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from bracketflow.trig_fields import TrigPoly, bracket, evaluate, sample

SIN1, COS1 = TrigPoly.sine(1), TrigPoly.cosine(1)
SIN2, COS2 = TrigPoly.sine(2), TrigPoly.cosine(2)
SIN3, COS3 = TrigPoly.sine(3), TrigPoly.cosine(3)

fractions = st.fractions(min_value=-2, max_value=2, max_denominator=4)


def trig_polys(max_modes=4):
    return st.builds(
        TrigPoly.from_coeffs,
        fractions,
        st.lists(fractions, max_size=max_modes),
        st.lists(fractions, max_size=max_modes),
    )


def to_sympy(p: TrigPoly, th):
    expr = sp.Rational(p.c0)
    for n in range(1, p.max_mode + 1):
        a, b = p.mode(n)
        expr += sp.Rational(a) * sp.cos(n * th) + sp.Rational(b) * sp.sin(n * th)
    return expr


# ---- pinned examples ----

def test_bracket_sin_cos_is_rotation():
    assert bracket(SIN1, COS1) == TrigPoly.constant(1)


def test_bracket_self_is_zero():
    v = TrigPoly.from_coeffs("1/3", ["1/2", "-2"], ["0", "5/7"])
    assert bracket(v, v).is_zero()


def test_bracket_cos1_cos2_expansion():
    # frozen from the symbolic product-to-sum oracle below
    expected = TrigPoly.from_coeffs(0, [0, 0, 0], ["3/2", 0, "1/2"])
    assert bracket(COS1, COS2) == expected


def test_mode_ladder_identities():
    assert bracket(COS1, COS2) - bracket(SIN1, SIN2) == SIN3
    assert (bracket(SIN1, COS2) + bracket(COS1, SIN2)).scale(-1) == COS3
    assert (bracket(COS1, COS3) - bracket(SIN1, SIN3)).scale(Fraction(1, 2)) == TrigPoly.sine(4)


def test_evaluate_examples():
    assert evaluate(TrigPoly.constant(1), 2.1) == 1.0
    assert evaluate(SIN1, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    mixed = TrigPoly.from_coeffs(0, [0, 0, 0], ["3/2", 0, "1/2"])
    assert evaluate(mixed, math.pi / 6) == pytest.approx(1.25, abs=1e-12)


def test_sample_matches_evaluate():
    v = TrigPoly.from_coeffs("1/4", ["1", "-1/2"], ["1/3", "2"])
    thetas = np.linspace(0.0, 7.0, 23)
    vals = sample(v, thetas)
    for th, got in zip(thetas, vals):
        assert got == pytest.approx(evaluate(v, float(th)), abs=1e-14)


# ---- symbolic oracle ----

def test_bracket_against_symbolic_oracle():
    """Independent check: sympy builds v'w - w'v; the difference must
    vanish identically.  Zero is decided exactly by the tan-half-angle
    substitution, which turns a trig polynomial into a rational function
    whose numerator must be the zero polynomial."""
    rng = np.random.default_rng(7)
    th, t = sp.symbols("theta t")
    for _ in range(8):
        def rand_poly():
            c0 = Fraction(int(rng.integers(-2, 3)), int(rng.integers(1, 4)))
            cos = [Fraction(int(rng.integers(-2, 3)), int(rng.integers(1, 4))) for _ in range(3)]
            sin = [Fraction(int(rng.integers(-2, 3)), int(rng.integers(1, 4))) for _ in range(3)]
            return TrigPoly.from_coeffs(c0, cos, sin)
        v, w = rand_poly(), rand_poly()
        vx, wx = to_sympy(v, th), to_sympy(w, th)
        oracle = sp.diff(vx, th) * wx - sp.diff(wx, th) * vx
        mine = to_sympy(bracket(v, w), th)
        diff = sp.expand_trig(oracle - mine)
        half = diff.subs({sp.cos(th): (1 - t ** 2) / (1 + t ** 2),
                          sp.sin(th): 2 * t / (1 + t ** 2)})
        numerator, _ = sp.fraction(sp.cancel(sp.together(half)))
        assert sp.expand(numerator) == 0


# ---- algebra laws ----

@settings(max_examples=60, deadline=None)
@given(trig_polys(), trig_polys())
def test_antisymmetry(v, w):
    assert bracket(v, w) == bracket(w, v).scale(-1)


@settings(max_examples=60, deadline=None)
@given(trig_polys(2), trig_polys(2), trig_polys(2), fractions, fractions)
def test_bilinearity(u, v, w, a, b):
    left = bracket(u.scale(a) + v.scale(b), w)
    right = bracket(u, w).scale(a) + bracket(v, w).scale(b)
    assert left == right


@settings(max_examples=40, deadline=None)
@given(trig_polys(2), trig_polys(2), trig_polys(2))
def test_jacobi_identity(u, v, w):
    total = (bracket(u, bracket(v, w))
             + bracket(v, bracket(w, u))
             + bracket(w, bracket(u, v)))
    assert total.is_zero()


def test_complex_mode_law():
    """For pure modes the bracket follows the (m - n) coefficient rule.

    With i e^{i n t} = -sin(nt) + i cos(nt), the bracket of two such
    fields must equal (m - n) i e^{i (m+n) t}, checked on real and
    imaginary parts separately.
    """
    def parts(n):
        if n == 0:
            return TrigPoly.zero(), TrigPoly.constant(1)
        return TrigPoly.sine(n, -1), TrigPoly.cosine(n)

    for n in range(0, 5):
        for m in range(0, 5):
            vr, vi = parts(n)
            wr, wi = parts(m)
            got_re = bracket(vr, wr) - bracket(vi, wi)
            got_im = bracket(vr, wi) + bracket(vi, wr)
            k = m + n
            er, ei = parts(k)
            assert got_re == er.scale(m - n)
            assert got_im == ei.scale(m - n)


def test_bracket_max_mode_bound():
    v = TrigPoly.from_coeffs(1, [1, 1, 1], [1, 1, 1])
    w = TrigPoly.from_coeffs(1, [1, 1], [1, 1])
    assert bracket(v, w).effective_max_mode() <= v.max_mode + w.max_mode


def test_evaluate_bracket_matches_finite_differences():
    rng = np.random.default_rng(11)
    h = 1e-5
    for _ in range(10):
        v = TrigPoly.from_coeffs(
            Fraction(int(rng.integers(-2, 3)), 2),
            [Fraction(int(rng.integers(-2, 3)), 2) for _ in range(3)],
            [Fraction(int(rng.integers(-2, 3)), 2) for _ in range(3)])
        w = TrigPoly.from_coeffs(
            Fraction(int(rng.integers(-2, 3)), 2),
            [Fraction(int(rng.integers(-2, 3)), 2) for _ in range(3)],
            [Fraction(int(rng.integers(-2, 3)), 2) for _ in range(3)])
        theta = float(rng.uniform(0, 2 * math.pi))
        dv = (evaluate(v, theta + h) - evaluate(v, theta - h)) / (2 * h)
        dw = (evaluate(w, theta + h) - evaluate(w, theta - h)) / (2 * h)
        expected = dv * evaluate(w, theta) - dw * evaluate(v, theta)
        assert evaluate(bracket(v, w), theta) == pytest.approx(expected, abs=1e-6)


# ---- representation contracts ----

def test_equality_after_zero_extension():
    a = TrigPoly.from_coeffs(1, [1, 0, 0], [0, 0, 0])
    b = TrigPoly.from_coeffs(1, [1], [0])
    assert a == b
    assert hash(a) == hash(b)


def test_coefficient_arrays_same_length():
    with pytest.raises(ValueError):
        TrigPoly(Fraction(0), (Fraction(1),), ())


def test_coefficient_vector_layout():
    v = TrigPoly.from_coeffs("1/2", ["1"], ["2"])
    assert v.coefficient_vector(2) == [Fraction(1, 2), Fraction(1), Fraction(0),
                                       Fraction(2), Fraction(0)]
    with pytest.raises(ValueError):
        TrigPoly.cosine(3).coefficient_vector(2)


def test_json_round_trip():
    v = TrigPoly.from_coeffs("-3/7", ["1/2", "0"], ["0", "5"])
    assert TrigPoly.from_json_dict(v.to_json_dict()) == v
    assert v.to_json_dict()["c0"] == "-3/7"


def test_rejects_non_rational_coefficients():
    with pytest.raises(TypeError):
        TrigPoly.from_coeffs(0.5, [], [])
