"""Hull membership via discretized Chebyshev linear programs.

The degree-d extremal value at x is

    Lambda_d(x) = (max { |P(x)| : sup_curve |P| <= 1, deg P <= d })^(1/d),

discretized by sampling the curve at S circle points and replacing each
modulus constraint by K_dir half-plane constraints
Re(e^{i theta_k} P(t_j)) <= 1.  The polygonal relaxation is carried as a
certified enclosure [value * cos(pi/K_dir)^(1/d), value] rather than hidden.

Monomials are evaluated in scaled coordinates (z/z_scale, w/w_scale) with
the scales set to the maximum boundary modulus per coordinate; the extremal
value is exactly invariant under this reparameterization and conditioning
improves at high degree.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .curve import CurveC2, sample_boundary
from .errors import ParameterError
from .polyalg import BivariatePoly

__all__ = [
    "ExtremalResult",
    "SliceSpec",
    "HullSlice",
    "StabilityReport",
    "AnalyticityReport",
    "extremal_value",
    "extremal_curve",
    "best_constant",
    "hull_slice",
    "write_hull_csv",
    "stability_probe",
    "analyticity_probe",
    "CAP_DEFAULT",
    "UNBOUNDED_OPT",
    "MEMBER_TOL",
]

CAP_DEFAULT = 1e8       # coefficient box used to keep every LP bounded
UNBOUNDED_OPT = 1e7     # capped optimum at or above this is declared unbounded
MEMBER_TOL = 1e-6       # multiplicative tolerance on membership values


def basis_total(d: int):
    """(n, m) with n + m <= d, lexicographic n outer."""
    return [(n, m) for n in range(d + 1) for m in range(d + 1 - n)]


def basis_bidegree(d: int, e: int):
    """(n, m) with n <= d, m <= e, lexicographic n outer."""
    return [(n, m) for n in range(d + 1) for m in range(e + 1)]


def eval_monomials(z, w, exps, z_scale: float = 1.0, w_scale: float = 1.0):
    """Matrix of (z/z_scale)^n (w/w_scale)^m, one column per basis element."""
    z = np.atleast_1d(np.asarray(z, dtype=complex)) / z_scale
    w = np.atleast_1d(np.asarray(w, dtype=complex)) / w_scale
    dmax = max(n for n, _ in exps)
    emax = max(m for _, m in exps)
    zp = [np.ones_like(z)]
    for _ in range(dmax):
        zp.append(zp[-1] * z)
    wp = [np.ones_like(w)]
    for _ in range(emax):
        wp.append(wp[-1] * w)
    return np.stack([zp[n] * wp[m] for n, m in exps], axis=-1)


def _coordinate_scales(samples):
    zs = float(np.abs(samples.z).max())
    ws = float(np.abs(samples.w).max())
    return (zs if zs > 0 else 1.0), (ws if ws > 0 else 1.0)


@dataclass(frozen=True)
class LPStats:
    n_constraints: int
    n_variables: int
    k_dir: int


def solve_modulus_lp(phi_samples: np.ndarray, phi_x: np.ndarray,
                     k_dir: int, cap: float = CAP_DEFAULT):
    """max Re(c . phi_x) subject to the polygonalized modulus constraints.

    Returns (status, optimum, coeffs) with status in {"bounded", "unbounded",
    "infeasible_numerics"}.  Columns identically zero on the samples are
    exact rays: if such a column has a nonzero objective the problem is
    certified unbounded, otherwise the column is dropped.  The coefficient
    box +-cap keeps the solver's problem bounded; a capped optimum at or
    above UNBOUNDED_OPT is declared unbounded.
    """
    if k_dir < 8 or k_dir % 2:
        raise ParameterError(f"K_dir must be even and >= 8, got {k_dir}")
    nsamp, nvar = phi_samples.shape
    zero_col = np.all(phi_samples == 0, axis=0)
    ray = zero_col & (np.abs(phi_x) > 0)
    if np.any(ray):
        # an exact ray: the offending monomial itself is the certificate
        coeffs = np.zeros(nvar, dtype=complex)
        coeffs[int(np.argmax(ray))] = 1.0
        return "unbounded", math.inf, coeffs
    keep = ~zero_col
    phi = phi_samples[:, keep]
    obj = phi_x[keep]
    if phi.shape[1] == 0:
        return "bounded", 0.0, np.zeros(nvar, dtype=complex)
    thetas = np.exp(2j * np.pi * np.arange(k_dir) / k_dir)
    rows = (thetas[:, None, None] * phi[None, :, :]).reshape(k_dir * nsamp, -1)
    a_ub = np.concatenate([rows.real, -rows.imag], axis=1)
    c = -np.concatenate([obj.real, -obj.imag])
    b_ub = np.ones(a_ub.shape[0])
    def attempt(trial_cap):
        res = linprog(c, A_ub=a_ub, b_ub=b_ub,
                      bounds=(-trial_cap, trial_cap), method="highs")
        if res.status == 3:
            return "unbounded", math.inf, None
        if res.status != 0:
            return None
        opt = float(-res.fun)
        half = phi.shape[1]
        coeffs = np.zeros(nvar, dtype=complex)
        coeffs[keep] = res.x[:half] + 1j * res.x[half:]
        return "bounded", opt, coeffs

    out = attempt(cap)
    if out is None:
        # A huge box over a near-degenerate ray can defeat the solver, so
        # retry with two tighter boxes.  A cap-independent optimum (both
        # agree) is the true value; a cap-proportional one is riding a ray
        # and extrapolates past the unboundedness threshold.
        lo = attempt(cap * 1e-2)
        if lo is None:
            return "infeasible_numerics", math.nan, None
        if lo[0] == "unbounded" or lo[1] >= UNBOUNDED_OPT:
            return "unbounded", lo[1], lo[2]
        hi = attempt(cap * 1e-4)
        if hi is None or hi[0] == "unbounded":
            return "infeasible_numerics", math.nan, None
        if abs(lo[1] - hi[1]) <= 1e-6 * max(1.0, abs(lo[1])):
            out = lo
        elif lo[1] >= 50.0 * hi[1] and lo[1] * 1e2 >= UNBOUNDED_OPT:
            return "unbounded", lo[1] * 1e2, lo[2]
        else:
            return "infeasible_numerics", math.nan, None
    status, opt, coeffs = out
    if status == "bounded" and opt >= UNBOUNDED_OPT:
        return "unbounded", opt, coeffs
    return status, opt, coeffs


@dataclass(frozen=True)
class ExtremalResult:
    value: float                  # Lambda_d(x), +inf when unbounded
    status: str                   # bounded | unbounded | infeasible_numerics
    witness: BivariatePoly | None
    degree: int
    lp_stats: LPStats
    enclosure: tuple              # (value * cos(pi/K)^{1/d}, value)


def _witness_total(coeffs, exps, d, z_scale, w_scale):
    c = np.zeros((d + 1, d + 1), dtype=complex)
    for (n, m), v in zip(exps, coeffs):
        c[n, m] = v / (z_scale ** n * w_scale ** m)
    return BivariatePoly(c, "total")


def extremal_value(curve: CurveC2, x, d: int, S: int | None = None,
                   K_dir: int = 32, cap: float = CAP_DEFAULT,
                   samples=None) -> ExtremalResult:
    """Degree-d extremal value Lambda_d(x) for x = (z, w).

    S defaults to 64 * d * (max Laurent degree), the rule under which
    sampled sup norms are accurate to ~1e-6 relative.
    """
    if d < 1:
        raise ParameterError(f"degree must be >= 1, got {d}")
    if S is None:
        S = max(64, 64 * d * curve.max_laurent_degree)
    if S < 64:
        raise ParameterError(f"need S >= 64 boundary samples, got {S}")
    if samples is None:
        samples = sample_boundary(curve, S)
    zsc, wsc = _coordinate_scales(samples)
    exps = basis_total(d)
    phi = eval_monomials(samples.z, samples.w, exps, zsc, wsc)
    xz, xw = complex(x[0]), complex(x[1])
    phi_x = eval_monomials(xz, xw, exps, zsc, wsc)[0]
    status, opt, coeffs = solve_modulus_lp(phi, phi_x, K_dir, cap)
    stats = LPStats(phi.shape[0] * K_dir, 2 * phi.shape[1], K_dir)
    if status != "bounded":
        return ExtremalResult(math.inf if status == "unbounded" else math.nan,
                              status, None, d, stats, (math.inf, math.inf))
    value = opt ** (1.0 / d)
    lo = value * math.cos(math.pi / K_dir) ** (1.0 / d)
    witness = _witness_total(coeffs, exps, d, zsc, wsc)
    return ExtremalResult(value, "bounded", witness, d, stats, (lo, value))


def extremal_curve(curve: CurveC2, x, d_max: int, S: int | None = None,
                   K_dir: int = 32, cap: float = CAP_DEFAULT) -> list:
    """Lambda_d(x) for d = 1..d_max; lets callers judge saturation."""
    return [extremal_value(curve, x, d, S=S, K_dir=K_dir, cap=cap)
            for d in range(1, d_max + 1)]


def best_constant(curve: CurveC2, x, d_max: int, S: int | None = None,
                  K_dir: int = 32, cap: float = CAP_DEFAULT) -> float:
    """max over d <= d_max of Lambda_d(x); inf if any degree is unbounded."""
    if d_max < 2:
        raise ParameterError(f"d_max must be >= 2, got {d_max}")
    best = 0.0
    for d in range(1, d_max + 1):
        res = extremal_value(curve, x, d, S=S, K_dir=K_dir, cap=cap)
        if res.status == "unbounded":
            return math.inf
        if res.status != "bounded":
            return math.nan
        best = max(best, res.value)
    return best


# ---------------------------------------------------------------------------
# hull slices

@dataclass(frozen=True)
class SliceSpec:
    """Rectangle in one coordinate plane with the other coordinate fixed."""

    plane: str          # "z" | "w": the coordinate that varies
    fixed: complex
    re_range: tuple
    im_range: tuple

    def __post_init__(self):
        if self.plane not in ("z", "w"):
            raise ParameterError(f"plane must be 'z' or 'w', got {self.plane!r}")

    def point(self, v: complex):
        return (v, self.fixed) if self.plane == "z" else (self.fixed, v)


@dataclass(frozen=True)
class HullSlice:
    spec: SliceSpec
    M: float
    d_max: int
    xs: np.ndarray          # grid coordinates along re (length grid_n)
    ys: np.ndarray
    values: np.ndarray      # grid of best-constant estimates, row-major (y, x)
    member: np.ndarray
    envelope_violations: int


class WitnessCache:
    """Feasible LP witnesses reused as rejection certificates.

    Each entry stores a coefficient vector (scaled basis), its sampled sup
    on the curve, and its max coefficient modulus; |Q(x)|/sup is a certified
    lower bound for the LP value at any other point, so most non-member grid
    points skip their solve.
    """

    def __init__(self):
        self._by_key = {}

    def get(self, key):
        return self._by_key.setdefault(key, ([], [], []))

    def add(self, key, coeffs, sup):
        vecs, sups, norms = self.get(key)
        v = np.asarray(coeffs)
        vecs.append(v)
        sups.append(float(sup))
        norms.append(float(np.abs(v).max()))

    def lower_bound(self, key, phi_x, max_norm: float | None = None) -> float:
        """Best certified lower bound from the cache.

        Each certificate Q is rescaled by t = min(1/sup, max_norm/|Q|_inf),
        the largest multiple feasible for the constraint set, giving the
        bound t |Q(x)|.  An exact ray (sup identically zero on the samples)
        yields inf when no cap is in force.
        """
        vecs, sups, norms = self.get(key)
        bound = 0.0
        for v, s, nm in zip(list(vecs), list(sups), list(norms)):
            num = abs(np.dot(v, phi_x))
            if num == 0.0 or nm == 0.0:
                continue
            if s == 0.0:
                if max_norm is None:
                    return math.inf
                bound = max(bound, num * max_norm / nm)
                continue
            t = 1.0 / s
            if max_norm is not None:
                t = min(t, max_norm / nm)
            bound = max(bound, num * t)
        return bound


def hull_slice(curve: CurveC2, M: float, spec: SliceSpec, grid_n: int,
               d_max: int, S: int | None = None, K_dir: int = 16,
               cap: float = CAP_DEFAULT, envelope=None) -> HullSlice:
    """Grid of best-constant values with membership at level M.

    Values at member points are LP optima; a point rejected by a cached
    certificate records that certificate's (certified) lower bound instead
    of the full optimum, which does not change the membership verdict.
    The default envelope predicate |w|^2 <= |z|^2 + 1 is report-only.
    """
    if grid_n < 32:
        raise ParameterError(f"grid_n must be >= 32, got {grid_n}")
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    if S is None:
        S = max(64, 64 * d_max * curve.max_laurent_degree)
    samples = sample_boundary(curve, S)
    zsc, wsc = _coordinate_scales(samples)
    bases = {d: basis_total(d) for d in range(1, d_max + 1)}
    phis = {d: eval_monomials(samples.z, samples.w, bases[d], zsc, wsc)
            for d in range(1, d_max + 1)}
    cache = WitnessCache()
    xs = np.linspace(spec.re_range[0], spec.re_range[1], grid_n)
    ys = np.linspace(spec.im_range[0], spec.im_range[1], grid_n)
    values = np.empty((grid_n, grid_n))
    member = np.zeros((grid_n, grid_n), dtype=bool)
    thresh = M * (1.0 + MEMBER_TOL)
    if envelope is None:
        envelope = lambda z, w: abs(w) ** 2 <= abs(z) ** 2 + 1.0
    violations = 0
    for iy, yv in enumerate(ys):
        for ix, xv in enumerate(xs):
            pt = spec.point(complex(xv, yv))
            best = 0.0
            decided = False
            for d in range(1, d_max + 1):
                phi_x = eval_monomials(pt[0], pt[1], bases[d], zsc, wsc)[0]
                lb = cache.lower_bound(d, phi_x, max_norm=cap)
                if lb ** (1.0 / d) > thresh:
                    best = lb ** (1.0 / d)
                    decided = True
                    break
                status, opt, coeffs = solve_modulus_lp(
                    phis[d], phi_x, K_dir, cap)
                if status != "bounded":
                    best = math.inf
                    if coeffs is not None:
                        sup = np.abs(phis[d] @ coeffs).max()
                        cache.add(d, coeffs, sup)
                    decided = True
                    break
                val = opt ** (1.0 / d)
                best = max(best, val)
                if val > thresh:
                    sup = np.abs(phis[d] @ coeffs).max()
                    cache.add(d, coeffs, sup)
                    decided = True
                    break
            values[iy, ix] = best
            ok = (not decided) and best <= thresh
            member[iy, ix] = ok
            if ok and not envelope(*pt):
                violations += 1
    return HullSlice(spec, M, d_max, xs, ys, values, member, violations)


def write_hull_csv(hs: HullSlice, fh) -> None:
    """CSV rows (x_re, x_im, value, member); 17 significant digits; inf
    serialized as the string "inf"."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x_re", "x_im", "value", "member"])
    for iy in range(len(hs.ys)):
        for ix in range(len(hs.xs)):
            v = hs.values[iy, ix]
            writer.writerow([format(hs.xs[ix], ".17g"),
                             format(hs.ys[iy], ".17g"),
                             "inf" if math.isinf(v) else format(v, ".17g"),
                             str(bool(hs.member[iy, ix])).lower()])


# ---------------------------------------------------------------------------
# probes

@dataclass(frozen=True)
class StabilityReport:
    sample_points: list
    best_constants: list
    sup_estimate: float
    verdict: str  # evidence_bounded | evidence_unbounded | inconclusive


def stability_probe(curve: CurveC2, n_points: int, d_max: int, seed: int = 0,
                    scales=(1.0, 2.0, 4.0, 8.0, 16.0),
                    candidates=None) -> StabilityReport:
    """Best-constant growth along a refinement sequence of scan regions.

    Evidence only, never proof.  With explicit `candidates` (points known to
    lie on the computed hull) the probe evaluates exactly those; otherwise it
    samples seeded points in z-plane windows of growing extent at the
    w-value of the curve's base sample, keeping those with a finite
    constant (the hull samples).
    """
    if n_points < 10:
        raise ParameterError(f"n_points must be >= 10, got {n_points}")
    points, constants, stage_consts = [], [], []
    if candidates is not None:
        for pt in candidates:
            c = best_constant(curve, pt, d_max)
            if math.isfinite(c):
                points.append(pt)
                constants.append(c)
        stage_consts = [constants]
    else:
        rng = np.random.default_rng(seed)
        w_fixed = complex(curve.components[0][1](1.0 + 0j))
        for L in scales:
            stage = []
            zs = rng.uniform(-L, L, size=(n_points, 2))
            for re, im in zs:
                pt = (complex(re, im), w_fixed)
                c = best_constant(curve, pt, d_max)
                if math.isfinite(c):
                    points.append(pt)
                    stage.append(c)
            constants.extend(stage)
            stage_consts.append(stage)
    if not constants:
        return StabilityReport([], [], math.nan, "inconclusive")
    first = next((s for s in stage_consts if s), [])
    median0 = float(np.median(first))
    grow = max(constants) > 10.0 * median0
    return StabilityReport(points, constants, max(constants),
                           "evidence_unbounded" if grow else "evidence_bounded")


@dataclass(frozen=True)
class BranchReport:
    n_cells: int
    max_residual: float
    flagged: bool


@dataclass(frozen=True)
class AnalyticityReport:
    branches: list
    noise_floor: float
    tracking_failures: int


def analyticity_probe(fibers, nx: int, ny: int,
                      match_radius: float | None = None) -> AnalyticityReport:
    """Conjugate-derivative residual |dw/dz-bar| of traced fiber branches.

    `fibers` is a row-major list (length nx*ny) over a rectangular z-grid of
    objects with attributes .z and .points (list of (w, residual)).  Branches
    are matched by nearest-neighbor continuation; interior cells with all
    four neighbors present get a centered finite-difference residual.
    Branches exceeding 10x the grid-induced noise floor are flagged.
    """
    if len(fibers) != nx * ny:
        raise ParameterError(f"need nx*ny={nx * ny} fibers, got {len(fibers)}")
    zs = np.array([complex(f.z) for f in fibers]).reshape(ny, nx)
    hx = float(np.real(zs[0, 1] - zs[0, 0])) if nx > 1 else 0.0
    hy = float(np.imag(zs[1, 0] - zs[0, 0])) if ny > 1 else 0.0
    if hx <= 0 or hy <= 0:
        raise ParameterError("fibers must form a rectangular row-major grid")
    if match_radius is None:
        match_radius = 4.0 * max(hx, hy)
    pts = [[[complex(w) for w, _ in fibers[iy * nx + ix].points]
            for ix in range(nx)] for iy in range(ny)]
    branches = []
    failures = 0
    for iy in range(ny):
        for ix in range(nx):
            for w in pts[iy][ix]:
                placed = False
                for br in branches:
                    if not np.isnan(br[iy, ix]):
                        continue
                    ref = None
                    if ix > 0 and not np.isnan(br[iy, ix - 1]):
                        ref = br[iy, ix - 1]
                    elif iy > 0 and not np.isnan(br[iy - 1, ix]):
                        ref = br[iy - 1, ix]
                    if ref is not None and abs(w - ref) <= match_radius:
                        br[iy, ix] = w
                        placed = True
                        break
                if not placed:
                    # a branch born away from the first cell is a tracking
                    # discontinuity, reported but not fatal
                    if ix or iy:
                        failures += 1
                    fresh = np.full((ny, nx), np.nan, dtype=complex)
                    fresh[iy, ix] = w
                    branches.append(fresh)
    noise_floor = 1e-12 / min(hx, hy)
    reports = []
    for br in branches:
        best = 0.0
        n_cells = int(np.count_nonzero(~np.isnan(br)))
        for iy in range(1, ny - 1):
            for ix in range(1, nx - 1):
                neigh = br[iy, ix - 1], br[iy, ix + 1], br[iy - 1, ix], br[iy + 1, ix]
                if any(np.isnan(v) for v in neigh):
                    continue
                ddx = (neigh[1] - neigh[0]) / (2.0 * hx)
                ddy = (neigh[3] - neigh[2]) / (2.0 * hy)
                best = max(best, abs(0.5 * (ddx + 1j * ddy)))
        reports.append(BranchReport(n_cells, best, best > 10.0 * noise_floor))
    return AnalyticityReport(reports, noise_floor, failures)


def thread_count() -> int:
    """Parallelism cap from HULLSCOPE_THREADS (0 or unset means auto)."""
    raw = os.environ.get("HULLSCOPE_THREADS", "")
    if not raw:
        return 1
    n = int(raw)
    if n < 0:
        raise ParameterError("HULLSCOPE_THREADS must be >= 0")
    return (os.cpu_count() or 1) if n == 0 else n
