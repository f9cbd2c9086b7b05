import json

import numpy as np
import pytest

from hullscope.curve import (CurveC2, LaurentPoly, curve_from_dict,
                             curve_to_dict, eval_component, load_curve,
                             sample_boundary, simplicity_report,
                             sup_norm_on_curve, unit_circle)
from hullscope.errors import DomainError, ParameterError
from hullscope.polyalg import BivariatePoly

from conftest import lp


class TestLaurentPoly:
    def test_trims_to_canonical_form(self):
        p = LaurentPoly(-2, [0.0, 1.0, 0.0, 2.0, 0.0])
        assert p.min_degree == -1
        assert np.allclose(p.coeffs, [1.0, 0.0, 2.0])

    def test_zero_polynomial_is_canonical(self):
        p = LaurentPoly(5, [0.0, 0.0])
        assert p.is_zero and p.min_degree == 0 and len(p.coeffs) == 1

    def test_eval_monomials(self):
        assert lp(1, [1.0])(2.0 + 0j) == 2.0
        assert lp(2, [1.0])(1j) == pytest.approx(-1.0)

    def test_eval_laurent_cancellation(self):
        # f = zeta + 1/zeta at i: i + 1/i = 0
        f = lp(-1, [1.0, 0.0, 1.0])
        assert abs(f(np.exp(1j * np.pi / 2))) < 1e-15


class TestEvalComponent:
    def test_direct_substitution(self, parabola):
        z, w = eval_component(parabola, 1, 1j)
        assert z == 1j and w == pytest.approx(-1.0)

    def test_at_one(self, parabola):
        z, w = eval_component(parabola, 1, 1.0 + 0j)
        assert z == 1.0 and w == 1.0

    def test_laurent_point(self, laurent_curve):
        # f = zeta + 0.25/zeta at e^{i pi/2}: i + 0.25/i = 0.75i
        z, w = eval_component(laurent_curve, 1, np.exp(1j * np.pi / 2))
        assert z == pytest.approx(0.75j, abs=1e-15)
        assert w == pytest.approx(1j, abs=1e-15)

    def test_annulus_domain_enforced(self, parabola):
        with pytest.raises(DomainError):
            eval_component(parabola, 1, 3.0 + 0j)
        with pytest.raises(DomainError):
            eval_component(parabola, 1, 0.1 + 0j)

    def test_component_index_range(self, parabola):
        with pytest.raises(ParameterError):
            eval_component(parabola, 2, 1.0 + 0j)


class TestSampleBoundary:
    def test_circle_points(self, circle_axis):
        bs = sample_boundary(circle_axis, 8)
        assert np.allclose(bs.w, 0.0)
        # j=0 and j=2 give 1 and i exactly
        assert bs.z[0] == 1.0
        assert bs.z[2] == pytest.approx(1j, abs=1e-15)

    def test_parabola_small(self, parabola):
        bs = sample_boundary(parabola, 8)
        assert bs.z[0] == 1.0 and bs.w[0] == 1.0
        assert bs.z[4] == pytest.approx(-1.0, abs=1e-15)
        assert bs.w[4] == pytest.approx(1.0, abs=1e-15)

    def test_two_components_bookkeeping(self, two_component):
        bs = sample_boundary(two_component, 8)
        assert len(bs) == 16
        assert list(bs.component_index) == [1] * 8 + [2] * 8

    def test_agrees_with_eval_bit_for_bit(self, cubic):
        bs = sample_boundary(cubic, 64)
        z, w = eval_component(cubic, 1, bs.parameters[:64])
        assert np.array_equal(z, bs.z[:64])
        assert np.array_equal(w, bs.w[:64])

    def test_minimum_samples(self, parabola):
        with pytest.raises(ParameterError):
            sample_boundary(parabola, 4)

    def test_parameters_on_circle(self, two_component):
        bs = sample_boundary(two_component, 32)
        assert np.abs(np.abs(bs.parameters) - 1.0).max() < 1e-12


class TestSupNorm:
    def test_z_on_axis_circle(self, circle_axis):
        p = BivariatePoly([[0.0], [1.0]])  # z
        assert sup_norm_on_curve(p, circle_axis, 64) == pytest.approx(1.0)

    def test_w_on_parabola(self, parabola):
        p = BivariatePoly([[0.0, 1.0]])  # w
        assert sup_norm_on_curve(p, parabola, 64) == pytest.approx(1.0)

    def test_z_plus_w_dense_oracle(self, parabola):
        # dense-sampling oracle: max |zeta + zeta^2| over 1e5 circle points
        zeta = unit_circle(100_000)
        dense = np.abs(zeta + zeta ** 2).max()
        assert dense == pytest.approx(2.0, abs=1e-8)
        p = BivariatePoly([[0.0, 1.0], [1.0, 0.0]])  # z + w
        assert sup_norm_on_curve(p, parabola, 4096) == pytest.approx(2.0, rel=1e-6)

    def test_refinement_monotone(self, cubic):
        p = BivariatePoly([[0.3, 1.0], [1.0, 0.0], [0.2, 0.4]])
        vals = [sup_norm_on_curve(p, cubic, s) for s in (64, 128, 256, 512)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_sampling_rule_gap(self, cubic):
        # relative gap between S and 4S below 1e-6 once S >= 64*d*max(Df,Dg)
        p = BivariatePoly(np.array([[0.3, 1.0, 0.1], [1.0, 0.0, 0.0],
                                    [0.2, 0.4, 0.0]]))  # degree d=2 in each
        S = 64 * 2 * 3
        a = sup_norm_on_curve(p, cubic, S)
        b = sup_norm_on_curve(p, cubic, 4 * S)
        assert (b - a) / b < 1e-6


class TestSimplicity:
    def test_flags_figure_eight(self, figure_eight):
        with pytest.warns(UserWarning, match="not simple"):
            simple = simplicity_report(figure_eight, S=1024)
        assert simple == [False]

    def test_passes_parabola(self, parabola):
        assert simplicity_report(parabola, S=1024) == [True]

    def test_passes_two_component(self, two_component):
        assert simplicity_report(two_component, S=512) == [True, True]


class TestCurveInvariants:
    def test_rho_range(self):
        with pytest.raises(ParameterError):
            CurveC2(((lp(1, [1.0]), lp(0, [0.0])),), rho=1.2)

    def test_needs_component(self):
        with pytest.raises(ParameterError):
            CurveC2((), rho=0.5)


class TestCurveFiles:
    def test_round_trip(self, tmp_path, cubic):
        d = curve_to_dict(cubic)
        back = curve_from_dict(json.loads(json.dumps(d)))
        assert back.rho == cubic.rho
        assert back.components[0][1].coeffs.tolist() == \
            cubic.components[0][1].coeffs.tolist()

    def test_rejects_unknown_fields(self):
        doc = {"label": "x", "rho": 0.5, "components": [
            {"f": {"min_degree": 1, "coeffs": [[1, 0]]},
             "g": {"min_degree": 0, "coeffs": [[0, 0]]}}],
            "extra": 1}
        with pytest.raises(ParameterError, match="unknown fields"):
            curve_from_dict(doc)

    def test_rejects_unknown_poly_fields(self):
        doc = {"rho": 0.5, "components": [
            {"f": {"min_degree": 1, "coeffs": [[1, 0]], "typo": 2},
             "g": {"min_degree": 0, "coeffs": [[0, 0]]}}]}
        with pytest.raises(ParameterError, match="unknown fields"):
            curve_from_dict(doc)

    def test_default_rho(self):
        doc = {"components": [
            {"f": {"min_degree": 1, "coeffs": [[1, 0]]},
             "g": {"min_degree": 0, "coeffs": [[0, 0]]}}]}
        assert curve_from_dict(doc).rho == 0.5

    def test_load_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ParameterError, match="cannot parse"):
            load_curve(path)
