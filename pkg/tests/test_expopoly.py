import numpy as np
import pytest

from maglab.errors import ArgumentError
from maglab.expopoly import (
    ExpoPoly,
    RadialOperatorSpec,
    decaying_basis,
    regular_basis_3d,
)


def test_spec_validation():
    with pytest.raises(ArgumentError):
        RadialOperatorSpec(4, 1.0)
    with pytest.raises(ArgumentError):
        RadialOperatorSpec(1, 1.0)
    assert RadialOperatorSpec(7, 1.0).power == 4


def test_term_arithmetic_and_canonicalization():
    p = ExpoPoly.term(1.0, coeff=2.0, power=1) + ExpoPoly.term(1.0, coeff=-2.0, power=1)
    assert p.is_zero()
    q = ExpoPoly.term(1.0, coeff=1.0, power=2) * 3.0
    assert q.terms == {(2, 0): 3.0}
    with pytest.raises(ArgumentError):
        ExpoPoly({(0, 2): 1.0}, 1.0)  # invalid mode


def test_immutability():
    p = ExpoPoly.decaying_exp(1.0)
    with pytest.raises(AttributeError):
        p.rate = 2.0


def test_differentiate_product_rule():
    # d/dr [r^2 e^{-Rr}] = 2 r e^{-Rr} - R r^2 e^{-Rr}
    R = 1.5
    p = ExpoPoly.decaying_exp(R, power=2)
    d = p.differentiate()
    assert d.terms[(1, -1)] == pytest.approx(2.0)
    assert d.terms[(2, -1)] == pytest.approx(-R)


def test_evaluate_against_closed_form():
    R = 0.7 + 0.2j
    p = ExpoPoly({(1, -1): 2.0, (0, 1): 0.5}, R)
    for r in (0.3, 1.0, 4.2):
        expected = 2.0 * r * np.exp(-R * r) + 0.5 * np.exp(R * r)
        assert complex(p(r)) == pytest.approx(expected, rel=1e-13)


def test_series_evaluation_near_origin():
    # sinh(Rr)/r is regular at 0; the exponential form would cancel badly
    R = 2.0
    p = ExpoPoly({(-1, 1): 0.5, (-1, -1): -0.5}, R)
    for r in (1e-6, 1e-4, 1e-3):
        assert float(p(r)) == pytest.approx(np.sinh(R * r) / r, rel=1e-12)


def test_evaluate_rejects_nonpositive_radius():
    p = ExpoPoly.decaying_exp(1.0)
    with pytest.raises(ArgumentError):
        p(0.0)


def test_decaying_basis_annihilated():
    # every basis element lies in ker (R^2 - Delta_n)^m
    for n in (3, 5, 7, 9):
        spec = RadialOperatorSpec(n, 1.3)
        for p in decaying_basis(spec):
            q = p
            scale = p.max_abs_coeff()
            for _ in range(spec.power):
                q = q.helmholtz_apply(spec)
                scale = max(scale, q.max_abs_coeff())
            # residual is round-off from the cancellations, so it is judged
            # against the largest intermediate coefficient
            assert q.max_abs_coeff() <= 1e-10 * max(1.0, scale)


def test_regular_basis_annihilated():
    spec = RadialOperatorSpec(3, 0.8 + 0.3j)
    for p in regular_basis_3d(2, spec.rate):
        q = p.helmholtz_apply(spec).helmholtz_apply(spec)
        assert q.is_zero(reference=p.max_abs_coeff())


def test_ladder_intertwines_helmholtz():
    # -(1/r) d/dr maps ker of the n-dimensional operator into the (n+2)-one:
    # H_{n+2} (Phi p) = Phi (H_n p) pointwise
    rng = np.random.default_rng(17)
    for _ in range(25):
        R = complex(rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0))
        r = rng.uniform(0.2, 4.0)
        n = int(rng.choice([3, 5, 7]))
        p = ExpoPoly({(int(rng.integers(0, 3)), -1): 1.0}, R)
        lhs = p.dimension_shift().helmholtz_apply(RadialOperatorSpec(n + 2, R))
        rhs = p.helmholtz_apply(RadialOperatorSpec(n, R)).dimension_shift()
        scale = max(1.0, abs(complex(lhs(r))))
        assert abs(complex(lhs(r)) - complex(rhs(r))) <= 1e-9 * scale


def test_derivative_matches_finite_difference():
    rng = np.random.default_rng(23)
    for _ in range(20):
        R = complex(rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5))
        p = ExpoPoly({(2, -1): 1.0, (0, 1): 0.3, (1, 0): -0.7}, R)
        r = rng.uniform(0.5, 3.0)
        h = 1e-6
        fd = (complex(p(r + h)) - complex(p(r - h))) / (2 * h)
        exact = complex(p.differentiate()(r))
        assert abs(fd - exact) <= 1e-8 * max(1.0, abs(exact))


def test_decaying_basis_values_decay():
    spec = RadialOperatorSpec(5, 2.0)
    for p in decaying_basis(spec):
        assert abs(complex(p(30.0))) < 1e-20
