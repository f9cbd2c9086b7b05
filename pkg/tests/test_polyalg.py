import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullscope.errors import (ConditioningError, DegenerateError,
                              DomainError, ParameterError,
                              ZeroPolynomialError)
from hullscope.polyalg import (BivariatePoly, UnivariatePoly, make_unit,
                               null_unit_vector, roots, slice_coefficients,
                               taylor_pullback)

from conftest import lp


def bp(rows):
    return BivariatePoly(np.asarray(rows, dtype=complex))


class TestMakeUnit:
    def test_divides_by_max(self):
        p = make_unit(bp([[0.0, 4.0], [2.0, 0.0]]))  # 2z + 4w
        assert p.coeffs[0, 1] == 1.0 and p.coeffs[1, 0] == 0.5

    def test_idempotent(self):
        p = make_unit(bp([[0.0, 4.0], [2.0, 0.0]]))
        q = make_unit(p)
        assert np.array_equal(p.coeffs, q.coeffs)

    def test_complex_divisor_gives_exact_one(self):
        p = make_unit(bp([[0.0, 0.0], [0.0, 3j]]))  # 3i zw
        assert p.coeffs[1, 1] == 1.0

    def test_zero_rejected(self):
        with pytest.raises(ZeroPolynomialError):
            make_unit(bp([[0.0]]))

    @given(st.lists(st.complex_numbers(max_magnitude=1e6, min_magnitude=0),
                    min_size=2, max_size=9).filter(lambda c: any(c)),
           st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
    @settings(max_examples=60, deadline=None)
    def test_scale_invariant_pattern(self, coeffs, scale):
        c = np.array(coeffs, dtype=complex).reshape(1, -1)
        a = make_unit(BivariatePoly(c))
        b = make_unit(BivariatePoly(scale * c))
        # coefficient-modulus pattern is exactly invariant
        assert np.allclose(np.abs(a.coeffs), np.abs(b.coeffs), rtol=1e-12)


class TestTaylorPullback:
    def test_order_one_row(self):
        sys = taylor_pullback(lp(1, [1.0]), lp(2, [1.0]), 0.0, 1, 1, 1)
        assert sys.matrix.shape == (1, 4)
        assert np.allclose(sys.matrix[0], [1, 0, 0, 0])

    def test_order_two_rows(self):
        sys = taylor_pullback(lp(1, [1.0]), lp(2, [1.0]), 0.0, 1, 1, 2)
        assert np.allclose(sys.matrix[0], [1, 0, 0, 0])
        assert np.allclose(sys.matrix[1], [0, 0, 1, 0])

    def test_pole_rejected_at_zero(self):
        with pytest.raises(DomainError):
            taylor_pullback(lp(-1, [1.0, 0.0, 1.0]), lp(1, [1.0]), 0.0, 2, 2, 3)

    def test_fourier_oracle_small_radius(self):
        # low orders at the naive radius 1e-3: discrete Fourier coefficients
        # of the composed function around zeta0
        rng = np.random.default_rng(3)
        f = lp(0, rng.normal(size=4) + 1j * rng.normal(size=4))
        g = lp(0, rng.normal(size=4) + 1j * rng.normal(size=4))
        zeta0, d, e, order = 0.3 + 0.1j, 1, 1, 4
        sys = taylor_pullback(f, g, zeta0, d, e, order)
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        got = sys.matrix @ c
        n, rho = 256, 1e-3
        th = np.exp(2j * np.pi * np.arange(n) / n)
        F = BivariatePoly(c.reshape(d + 1, e + 1))
        h = F(f(zeta0 + rho * th), g(zeta0 + rho * th))
        for nu in range(order):
            want = (h * th ** (-nu)).mean() / rho ** nu
            assert got[nu] == pytest.approx(want, rel=1e-6, abs=1e-9)

    def test_fourier_oracle_exact_dft(self):
        # the DFT of a polynomial of degree < n has no aliasing, so a radius
        # 0.25 circle recovers every Taylor coefficient to rounding
        rng = np.random.default_rng(4)
        f = lp(0, rng.normal(size=4) + 1j * rng.normal(size=4))
        g = lp(0, rng.normal(size=4) + 1j * rng.normal(size=4))
        zeta0, d, e, order = 0.3 + 0.1j, 2, 2, 8
        sys = taylor_pullback(f, g, zeta0, d, e, order)
        c = rng.normal(size=(d + 1) * (e + 1)) \
            + 1j * rng.normal(size=(d + 1) * (e + 1))
        got = sys.matrix @ c
        n, rho = 64, 0.25
        th = np.exp(2j * np.pi * np.arange(n) / n)
        F = BivariatePoly(c.reshape(d + 1, e + 1))
        h = F(f(zeta0 + rho * th), g(zeta0 + rho * th))
        for nu in range(order):
            want = (h * th ** (-nu)).mean() / rho ** nu
            assert got[nu] == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_order_precondition(self):
        with pytest.raises(ParameterError):
            taylor_pullback(lp(1, [1.0]), lp(2, [1.0]), 0.0, 1, 1, 0)


class TestNullUnitVector:
    def test_empty_system_gives_constant_one(self):
        sys = taylor_pullback(lp(1, [1.0]), lp(2, [1.0]), 0.0, 2, 1, 1)
        empty = type(sys)(np.zeros((0, 6), dtype=complex), 0.0, 0, 2, 1)
        F = null_unit_vector(empty)
        assert F.coeffs[0, 0] == 1.0 and np.abs(F.coeffs).sum() == 1.0

    def test_parabola_kernel(self):
        # w - z^2 certifies a kernel of the (d,e)=(2,1), lambda=2 system
        sys = taylor_pullback(lp(1, [1.0]), lp(2, [1.0]), 0.0, 2, 1, 2)
        F = null_unit_vector(sys)
        assert F.is_unit
        resid = np.abs(sys.matrix @ F.coeffs.ravel())
        assert resid.max() < 1e-10

    def test_three_conditions(self):
        sys = taylor_pullback(lp(1, [1.0]), lp(2, [1.0]), 0.0, 1, 1, 3)
        F = null_unit_vector(sys)
        assert np.abs(sys.matrix @ F.coeffs.ravel()).max() < 1e-10

    def test_dimension_count_law(self):
        rng = np.random.default_rng(11)
        for _ in range(12):
            d = int(rng.integers(1, 5))
            e = int(rng.integers(1, 5))
            lam = int(rng.integers(1, (d + 1) * (e + 1)))
            f = lp(1, rng.normal(size=3) + 1j * rng.normal(size=3))
            g = lp(1, rng.normal(size=3) + 1j * rng.normal(size=3))
            sys = taylor_pullback(f, g, 0.0, d, e, lam)
            F = null_unit_vector(sys)
            scale = np.linalg.norm(sys.matrix) + 1.0
            assert np.linalg.norm(sys.matrix @ F.coeffs.ravel()) <= 1e-8 * scale

    def test_saturated_system_rejected(self):
        sys = taylor_pullback(lp(1, [1.0]), lp(2, [1.0]), 0.0, 1, 1, 4)
        with pytest.raises(ParameterError):
            null_unit_vector(sys)

    def test_pullback_taylor_residual_on_curve(self, parabola):
        # null vector of lambda = de conditions: first de Taylor coefficients
        # of F(f, g) at zeta0 vanish, directly assertable
        f, g = parabola.components[0]
        d, e = 3, 2
        lam = d * e
        sys = taylor_pullback(f, g, 0.0, d, e, lam + 4)
        head = type(sys)(sys.matrix[:lam], sys.base_point, lam, d, e)
        F = null_unit_vector(head)
        full = sys.matrix @ F.coeffs.ravel()
        tail = np.abs(full[lam:]).max() + 1e-30
        assert np.abs(full[:lam]).max() <= 1e-8 * max(tail, 1.0)


class TestSliceCoefficients:
    def test_zw_plus_half(self):
        F = bp([[0.5, 0.0], [0.0, 1.0]])  # 0.5 + zw
        gs, j0 = slice_coefficients(F)
        assert j0 == 1
        assert gs[0].coeffs.tolist() == [0.5]
        assert gs[1].coeffs.tolist() == [0.0, 1.0]

    def test_least_index_wins(self):
        F = bp([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])  # z^2+w^2
        gs, j0 = slice_coefficients(F)
        assert j0 == 0

    def test_constant_slice(self):
        F = bp([[0.3, 1.0]])  # 0.3 + w
        gs, j0 = slice_coefficients(F)
        assert j0 == 1 and gs[1].coeffs.tolist() == [1.0]

    def test_requires_unit(self):
        with pytest.raises(ParameterError):
            slice_coefficients(bp([[0.5, 0.2]]))

    def test_reassembly_property(self):
        rng = np.random.default_rng(5)
        c = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        F = make_unit(BivariatePoly(c))
        gs, _ = slice_coefficients(F)
        z = rng.normal(size=1000) + 1j * rng.normal(size=1000)
        w = rng.normal(size=1000) + 1j * rng.normal(size=1000)
        total = sum(g(z) * w ** j for j, g in enumerate(gs))
        direct = F(z, w)
        denom = np.abs(direct) + np.abs(total) + 1e-30
        assert (np.abs(total - direct) / denom).max() < 1e-12


class TestRoots:
    def test_quadratic(self):
        r = sorted(roots(UnivariatePoly([-1.0, 0.0, 1.0])), key=lambda v: v.real)
        assert r[0] == pytest.approx(-1.0) and r[1] == pytest.approx(1.0)

    def test_triple_zero(self):
        r = roots(UnivariatePoly([0.0, 0.0, 0.0, 1.0]))
        assert len(r) == 3 and np.abs(r).max() < 1e-5

    def test_constant_rejected(self):
        with pytest.raises(DegenerateError):
            roots(UnivariatePoly([2.0]))

    def test_reconstruction_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            c = rng.normal(size=9) + 1j * rng.normal(size=9)
            p = UnivariatePoly(c)
            r = roots(p)
            lead = p.coeffs[-1]
            recon = lead * np.array(
                [np.prod(x - r) for x in [0.0, 1.0, -1.0, 1j]])
            direct = p(np.array([0.0, 1.0, -1.0, 1j]))
            assert np.allclose(recon, direct, rtol=1e-6, atol=1e-8)
