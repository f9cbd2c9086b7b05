import io
import math

import numpy as np
import pytest

from hullscope.errors import ParameterError
from hullscope.extremal import (SliceSpec, analyticity_probe, best_constant,
                                extremal_curve, extremal_value, hull_slice,
                                stability_probe, write_hull_csv)


class FakeFiber:
    def __init__(self, z, points):
        self.z = z
        self.points = points


class TestExtremalValue:
    def test_axis_outside(self, circle_axis):
        res = extremal_value(circle_axis, (2.0, 0.0), 4, K_dir=32)
        assert res.status == "bounded"
        assert res.value == pytest.approx(2.0, rel=1e-9)
        # witness attains the optimum at x: its real part is the LP optimum
        # exactly, its modulus at most the polygonal slack more
        val = res.witness(2.0, 0.0)
        assert val.real == pytest.approx(res.value ** 4, rel=1e-6)
        assert abs(val) <= res.value ** 4 / math.cos(math.pi / 32) * (1 + 1e-9)

    def test_axis_inside_is_one(self, circle_axis):
        res = extremal_value(circle_axis, (0.5, 0.0), 3)
        assert res.value == pytest.approx(1.0, rel=1e-9)

    def test_off_axis_unbounded(self, circle_axis):
        res = extremal_value(circle_axis, (0.0, 0.1), 2)
        assert res.status == "unbounded" and math.isinf(res.value)

    def test_graph_point_near_one(self, parabola):
        # x on the graph inside the disk; oracle: random unit polynomials
        res = extremal_value(parabola, (0.4, 0.16), 6)
        assert res.status == "bounded"
        assert res.value <= 1.0 + 1e-3
        rng = np.random.default_rng(0)
        zeta = np.exp(2j * np.pi * np.arange(2048) / 2048)
        best = 0.0
        for _ in range(200):
            c = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
            c[np.add.outer(np.arange(7), np.arange(7)) > 6] = 0
            c /= np.abs(c).max()
            from numpy.polynomial.polynomial import polyval2d
            num = abs(polyval2d(0.4, 0.16, c))
            den = np.abs(polyval2d(zeta, zeta ** 2, c)).max()
            best = max(best, num / den)
        assert best <= res.value * (1.0 + 1e-6)

    def test_enclosure_and_k_dir_shrink(self, circle_axis):
        widths = []
        for k in (8, 16, 32):
            res = extremal_value(circle_axis, (1.7, 0.0), 3, K_dir=k)
            lo, hi = res.enclosure
            assert lo <= hi
            assert lo == pytest.approx(hi * math.cos(math.pi / k) ** (1 / 3))
            widths.append(hi - lo)
        assert widths[0] > widths[1] > widths[2]

    def test_off_graph_cubic_unbounded(self, cubic):
        # (1.3, 0.4) violates the curve's degree-3 relation, so scaled
        # multiples of it drive the LP value past any bound
        res = extremal_value(cubic, (1.3, 0.4), 3)
        assert res.status == "unbounded"

    def test_degree_precondition(self, cubic):
        with pytest.raises(ParameterError):
            extremal_value(cubic, (1.0, 1.0), 0)


class TestBestConstant:
    def test_axis_formula(self, circle_axis):
        assert best_constant(circle_axis, (3.0, 0.0), 4) == \
            pytest.approx(3.0, rel=1e-6)
        assert best_constant(circle_axis, (0.2, 0.0), 4) == \
            pytest.approx(1.0, rel=1e-6)

    def test_on_curve_at_most_one(self, cubic):
        # points of the curve itself satisfy the inequality with M = 1; the
        # raw value carries the polygonal relaxation, the certified lower
        # end of the enclosure does not
        zeta = np.exp(2j * np.pi * 0.17)
        x = (zeta, zeta ** 3 + 0.2 * zeta)
        for res in extremal_curve(cubic, x, 4):
            assert res.status == "bounded"
            assert res.enclosure[0] <= 1.0 + 1e-6
            assert res.value <= 1.0 / math.cos(math.pi / 32) + 1e-3

    def test_monotone_in_d_max(self, cubic):
        x = (1.4, 1.1)
        values = [best_constant(cubic, x, d) for d in (2, 4, 6)]
        assert values[0] <= values[1] + 1e-12
        assert values[1] <= values[2] + 1e-12

    def test_degree_cap_consistency(self, circle_axis):
        # member at d_max implies member at every smaller degree: the
        # running max makes this structural; spot-check the per-degree curve
        rng = np.random.default_rng(1)
        for _ in range(100):
            z = complex(*rng.uniform(-2, 2, 2))
            res = extremal_curve(circle_axis, (z, 0.0), 3)
            vals = [r.value for r in res]
            m = max(vals)
            assert all(v <= m + 1e-12 for v in vals)


class TestHullSlice:
    def test_axis_disk_area(self, circle_axis):
        spec = SliceSpec("z", 0.0, (-2.0, 2.0), (-2.0, 2.0))
        hs = hull_slice(circle_axis, 1.5, spec, 64, d_max=2)
        cell = (4.0 / 63) ** 2
        area = hs.member.sum() * cell
        assert area == pytest.approx(math.pi * 1.5 ** 2, rel=0.05)

    def test_m_one_reduction(self, circle_axis):
        # M = 1 gives the polynomial-hull slice: the closed unit disk
        spec = SliceSpec("z", 0.0, (-2.0, 2.0), (-2.0, 2.0))
        hs = hull_slice(circle_axis, 1.0, spec, 32, d_max=2)
        cell = 4.0 / 31
        for iy, yv in enumerate(hs.ys):
            for ix, xv in enumerate(hs.xs):
                r = math.hypot(xv, yv)
                if r <= 1.0 - cell:
                    assert hs.member[iy, ix]
                elif r >= 1.0 + cell:
                    assert not hs.member[iy, ix]

    def test_w_slice_of_axis(self, circle_axis):
        # slice z = 0.5: only w near 0 belongs
        spec = SliceSpec("w", 0.5, (-1.0, 1.0), (-1.0, 1.0))
        hs = hull_slice(circle_axis, 2.0, spec, 32, d_max=2)
        ok = hs.member
        xs, ys = np.meshgrid(hs.xs, hs.ys)
        dist = np.hypot(xs, ys)
        assert ok[dist < 1e-9].all()
        assert not ok[dist > 0.2].any()

    def test_csv_format(self, circle_axis):
        # w-plane slice: every cell off w=0 is unbounded, exercising the
        # "inf" serialization
        spec = SliceSpec("w", 0.5, (-1.0, 1.0), (-1.0, 1.0))
        hs = hull_slice(circle_axis, 1.2, spec, 32, d_max=2)
        buf = io.StringIO()
        write_hull_csv(hs, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "x_re,x_im,value,member"
        assert len(lines) == 1 + 32 * 32
        assert any(",inf," in ln for ln in lines)

    def test_grid_precondition(self, circle_axis):
        spec = SliceSpec("z", 0.0, (-1.0, 1.0), (-1.0, 1.0))
        with pytest.raises(ParameterError):
            hull_slice(circle_axis, 1.2, spec, 16, d_max=2)


class TestStabilityProbe:
    def test_axis_unbounded_evidence(self, circle_axis):
        rep = stability_probe(circle_axis, 10, 3, seed=2,
                              scales=(1.0, 4.0, 16.0))
        assert rep.verdict == "evidence_unbounded"
        assert rep.sup_estimate == max(rep.best_constants)

    def test_graph_bounded_on_graph_points(self, parabola):
        pts = [(z, z * z) for z in (0.2, 0.4 + 0.1j, -0.5, 0.3j,
                                    0.6, -0.2 - 0.4j, 0.1, 0.5 + 0.2j,
                                    -0.6 + 0.1j, 0.45)]
        rep = stability_probe(parabola, 10, 3, candidates=pts)
        assert rep.verdict == "evidence_bounded"
        assert max(rep.best_constants) <= 2.0 + 1e-6

    def test_empty_inconclusive(self, parabola):
        rep = stability_probe(parabola, 10, 3,
                              candidates=[(5.0, 1.0), (6.0, 2.0)])
        assert rep.verdict == "inconclusive"


class TestAnalyticityProbe:
    @staticmethod
    def grid_fibers(fn, nx, ny, z0, h):
        out = []
        for iy in range(ny):
            for ix in range(nx):
                z = z0 + ix * h + 1j * iy * h
                out.append(FakeFiber(z, [(fn(z), 0.0)]))
        return out

    def test_holomorphic_branch(self):
        fibers = self.grid_fibers(lambda z: z * z, 9, 9, 0.1 - 0.2j, 0.05)
        rep = analyticity_probe(fibers, 9, 9)
        assert len(rep.branches) == 1
        assert rep.branches[0].max_residual <= 1e-3
        assert not rep.branches[0].flagged

    def test_antiholomorphic_detected(self):
        fibers = self.grid_fibers(np.conj, 9, 9, 0.1 - 0.2j, 0.05)
        rep = analyticity_probe(fibers, 9, 9)
        assert rep.branches[0].max_residual == pytest.approx(1.0, rel=1e-6)
        assert rep.branches[0].flagged

    def test_constant_branch_zero(self):
        fibers = self.grid_fibers(lambda z: 0.0, 7, 7, 0.0, 0.05)
        rep = analyticity_probe(fibers, 7, 7)
        assert rep.branches[0].max_residual == 0.0

    def test_two_branches(self):
        out = []
        for iy in range(7):
            for ix in range(7):
                z = 0.3 + ix * 0.05 + 1j * iy * 0.05
                out.append(FakeFiber(z, [(z * z, 0.0), (z * z + 2.0, 0.0)]))
        rep = analyticity_probe(out, 7, 7)
        assert len(rep.branches) == 2
        assert all(b.max_residual <= 1e-3 for b in rep.branches)
