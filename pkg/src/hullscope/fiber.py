"""Fibers of the level-M hull over fixed z, and the measure-theoretic
machinery that makes them finite.

Membership of (z, w) at bidegree caps (d, e) means |Q(z, w)| <= M^(d+e)
sup_curve|Q| for every test polynomial Q of bidegree (d, e).  The exact
fiber is a finite (often measure-zero) set, invisible to any grid; the scan
therefore restricts test polynomials to a coefficient box whose size is
matched to the grid resolution, so accepted cells form a one-cell-thick
blob around each true fiber point.  Certificates found along the way are
cached and reused to reject most grid points without an LP solve; the
accepted set does not depend on the cache, only the work done does.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bishop import (construct_bishop, default_base_point, default_domain,
                     default_r0, green_rate, vanishing_order)
from .curve import CurveC2, sample_boundary
from .errors import ExclusionError, LPFailureError, NumericalError, ParameterError
from .extremal import (CAP_DEFAULT, MEMBER_TOL, WitnessCache, basis_bidegree,
                       basis_total, eval_monomials, solve_modulus_lp,
                       thread_count)
from .polyalg import (BivariatePoly, UnivariatePoly, make_unit, roots,
                      slice_coefficients)

__all__ = [
    "MembershipResult",
    "FiberScanner",
    "FiberSet",
    "SublevelSet",
    "MeasureEstimate",
    "LimitPolyResult",
    "membership_bidegree",
    "fiber_scan",
    "inclusion_check",
    "t_set",
    "sublevel_measure",
    "limit_polynomial",
    "fiber_roots_by_consensus",
    "finiteness_experiment",
    "write_finiteness_json",
    "write_finiteness_csv",
]

FIBER_S = 192        # boundary samples for fiber LPs
FIBER_K_DIR = 12     # modulus directions for fiber LPs


class _Engine:
    """Sampled monomial matrix for one curve and basis, reused across solves."""

    def __init__(self, curve: CurveC2, exps, S: int, k_dir: int):
        samples = sample_boundary(curve, S)
        zs = float(np.abs(samples.z).max())
        ws = float(np.abs(samples.w).max())
        self.z_scale = zs if zs > 0 else 1.0
        self.w_scale = ws if ws > 0 else 1.0
        self.exps = exps
        self.n_exp = np.array([n for n, _ in exps])
        self.m_exp = np.array([m for _, m in exps])
        self.k_dir = k_dir
        self.phi = eval_monomials(samples.z, samples.w, exps,
                                  self.z_scale, self.w_scale)

    def w_grad_bound(self, coeffs_abs, z_abs: float, w_abs: float) -> float:
        """Upper bound for |dQ/dw| at |z| fixed over |w'| <= w_abs."""
        zp = (z_abs / self.z_scale) ** self.n_exp
        with np.errstate(divide="ignore", invalid="ignore"):
            wp = np.where(self.m_exp > 0,
                          w_abs ** np.maximum(self.m_exp - 1, 0)
                          / self.w_scale ** self.m_exp, 0.0)
        return float((coeffs_abs * self.m_exp * zp * wp).sum())

    def phi_at(self, z, w):
        return eval_monomials(z, w, self.exps, self.z_scale, self.w_scale)[0]

    def solve(self, phi_x, cap):
        return solve_modulus_lp(self.phi, phi_x, self.k_dir, cap)

    def witness_poly(self, coeffs) -> BivariatePoly:
        d = max(n for n, _ in self.exps)
        e = max(m for _, m in self.exps)
        c = np.zeros((d + 1, e + 1), dtype=complex)
        for (n, m), v in zip(self.exps, coeffs):
            c[n, m] = v / (self.z_scale ** n * self.w_scale ** m)
        return BivariatePoly(c)

    def sup_of(self, coeffs) -> float:
        return float(np.abs(self.phi @ coeffs).max())


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    worst_ratio: float          # value^(1/(d+e)) / M, inf when unbounded
    value: float                # LP optimum, inf when unbounded
    status: str
    witness: BivariatePoly | None


def membership_bidegree(curve: CurveC2, z, w, M: float, d: int, e: int,
                        S: int = FIBER_S, K_dir: int = FIBER_K_DIR,
                        cap: float = CAP_DEFAULT,
                        engine: _Engine | None = None) -> MembershipResult:
    """Extremal test max{|Q(z,w)| : sup_curve|Q| <= 1, bidegree (d,e)}.

    member iff value^(1/(d+e)) <= M (1 + tol).  An unbounded LP (the point
    is separated by a polynomial nearly vanishing on the curve) means
    member = False with worst_ratio = inf.
    """
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    if d < 1 or e < 1:
        raise ParameterError(f"bidegree must be >= (1,1), got ({d},{e})")
    if engine is None:
        engine = _Engine(curve, basis_bidegree(d, e), S, K_dir)
    phi_x = engine.phi_at(complex(z), complex(w))
    status, opt, coeffs = engine.solve(phi_x, cap)
    if status == "infeasible_numerics":
        raise LPFailureError(
            f"membership LP failed at z={z}, w={w}, caps ({d},{e})")
    if status == "unbounded":
        return MembershipResult(False, math.inf, math.inf, status, None)
    value = opt ** (1.0 / (d + e))
    witness = engine.witness_poly(coeffs)
    return MembershipResult(value <= M * (1.0 + MEMBER_TOL), value / M,
                            opt, status, witness)


@dataclass(frozen=True)
class FiberSet:
    """Clustered w-points surviving membership over a fixed z."""

    z: complex
    M: float
    points: list                 # [(w, residual)] with residual = worst_ratio
    method: str                  # grid_scan | limit_roots
    degree_caps: tuple
    limit_poly: UnivariatePoly | None = None
    resolution: float = 0.0      # cluster radius the points are good to

    @property
    def cardinality(self) -> int:
        return len(self.points)


def _cluster(points, eps: float):
    """Single-linkage clusters; returns [(centroid, min residual)]."""
    ws = [w for w, _ in points]
    parent = list(range(len(ws)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(ws)):
        for j in range(i + 1, len(ws)):
            if abs(ws[i] - ws[j]) <= eps:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(ws)):
        groups.setdefault(find(i), []).append(i)
    out = []
    for idxs in groups.values():
        centroid = sum(ws[i] for i in idxs) / len(idxs)
        residual = min(points[i][1] for i in idxs)
        out.append((centroid, residual))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


class FiberScanner:
    """Shared state for repeated fiber scans of one curve at fixed caps.

    Holds the per-pair sampled monomial matrices and the certificate cache;
    certificates do not depend on z, so scans at many z reuse both.
    """

    def __init__(self, curve: CurveC2, d_max: int, e_max: int,
                 S: int = FIBER_S, K_dir: int = FIBER_K_DIR):
        if d_max < 1 or e_max < 1:
            raise ParameterError("degree caps must be >= 1")
        self.curve = curve
        self.d_max = d_max
        self.e_max = e_max
        self.pairs = sorted(
            ((d, e) for d in range(1, d_max + 1) for e in range(1, e_max + 1)),
            key=lambda p: (p[0] + p[1], p))
        self.engines = {}
        self.S = S
        self.K_dir = K_dir
        self.cache = WitnessCache()

    def engine(self, pair) -> _Engine:
        if pair not in self.engines:
            self.engines[pair] = _Engine(
                self.curve, basis_bidegree(*pair), self.S, self.K_dir)
        return self.engines[pair]

    def _margin_excludes(self, engine, pair, v, s, nm, phi_x, z_abs, w_abs,
                         cap, rho_cell, thresh):
        """Certified exclusion of the whole cell by one certificate.

        The certificate Q (sampled sup s, coefficient norm nm) rescaled by
        t = min(1/s, cap/nm) stays feasible; if t(|Q(center)| - L rho) with
        L a bound for |dQ/dw| on the cell still exceeds the threshold, no
        point of the cell can be a fiber point.
        """
        num = abs(np.dot(v, phi_x))
        t = cap / nm if s == 0.0 else min(1.0 / s, cap / nm)
        if t * num <= thresh:
            return False, 0.0
        lq = engine.w_grad_bound(np.abs(v), z_abs, w_abs)
        if t * (num - lq * rho_cell) > thresh:
            return True, t * num
        return False, t * num

    def cell_test(self, pair, z, w, M, cap, rho_cell):
        """(excluded, ratio) for one bidegree pair on the cell around w.

        A cell is excluded only when some certificate rules out every point
        of it; a cell whose center fails the raw threshold but cannot be
        excluded (the true fiber point may sit inside) is kept, with the
        center's ratio value^(1/(d+e))/M > 1 recording the ambiguity.
        """
        d, e = pair
        engine = self.engine(pair)
        phi_x = engine.phi_at(z, w)
        thresh = (M * (1.0 + MEMBER_TOL)) ** (d + e)
        z_abs, w_abs = abs(z), abs(w) + rho_cell
        vecs, sups, norms = self.cache.get(pair)
        for v, s, nm in zip(list(vecs), list(sups), list(norms)):
            if nm == 0.0:
                continue
            hit, val = self._margin_excludes(engine, pair, v, s, nm, phi_x,
                                             z_abs, w_abs, cap, rho_cell,
                                             thresh)
            if hit:
                return True, val ** (1.0 / (d + e)) / M
        status, opt, coeffs = engine.solve(phi_x, cap)
        if status == "infeasible_numerics":
            raise LPFailureError(f"fiber LP failed at z={z}, w={w}, "
                                 f"pair {pair}")
        if coeffs is None:
            # solver-certified ray with no vector to margin-test: the cell
            # cannot be certified either way; drop it conservatively
            return True, math.inf
        value = opt if status == "bounded" else math.inf
        if status == "unbounded" or opt > thresh:
            sup = engine.sup_of(coeffs)
            nm = float(np.abs(coeffs).max())
            self.cache.add(pair, coeffs, sup)
            if nm > 0.0:
                hit, val = self._margin_excludes(engine, pair, coeffs, sup,
                                                 nm, phi_x, z_abs, w_abs,
                                                 cap, rho_cell, thresh)
                if hit:
                    return True, val ** (1.0 / (d + e)) / M
                value = max(opt, val) if status == "bounded" else val
        ratio = (value ** (1.0 / (d + e)) / M if math.isfinite(value)
                 else math.inf)
        return False, ratio


def fiber_scan(curve: CurveC2, z, M: float, w_window, grid_n: int,
               d_max: int, e_max: int, S: int = FIBER_S,
               K_dir: int = FIBER_K_DIR, coeff_cap: float | None = None,
               cluster_eps: float | None = None,
               scanner: FiberScanner | None = None) -> FiberSet:
    """Membership scan over a w-grid against every bidegree pair up to caps.

    w_window = (re_lo, re_hi, im_lo, im_hi).  A grid cell survives when, for
    every pair (d, e) <= (d_max, e_max), no polynomial certificate excludes
    the whole cell from the level-M fiber (value vs M^(d+e), corrected by
    the certificate's w-derivative over the cell).  The cell holding a true
    fiber point is therefore never lost, everything farther than about one
    cell is rejected, and raising caps or lowering M only removes cells.
    Accepted cell centers are clustered with radius cluster_eps (default 2
    grid spacings, clusters being grid-resolution artifacts); the residual
    reported per cluster is the best worst-pair value^(1/(d+e))/M.
    """
    if grid_n < 16:
        raise ParameterError(f"grid_n must be >= 16, got {grid_n}")
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    re_lo, re_hi, im_lo, im_hi = map(float, w_window)
    xs = np.linspace(re_lo, re_hi, grid_n)
    ys = np.linspace(im_lo, im_hi, grid_n)
    spacing = max(xs[1] - xs[0], ys[1] - ys[0])
    rho_cell = spacing * math.sqrt(2.0) / 2.0
    if cluster_eps is None:
        cluster_eps = 2.0 * spacing
    if scanner is None:
        scanner = FiberScanner(curve, d_max, e_max, S, K_dir)
    cap = CAP_DEFAULT if coeff_cap is None else coeff_cap
    z = complex(z)
    big = (d_max, e_max)
    ladder = [p for p in scanner.pairs if p != big]
    accepted = []
    for yv in ys:
        for xv in xs:
            w = complex(xv, yv)
            # the largest pair first: its certificates reject almost the
            # whole grid after the first few solves
            excluded, ratio = scanner.cell_test(big, z, w, M, cap, rho_cell)
            if excluded:
                continue
            worst = ratio
            for pair in ladder:
                excluded, ratio = scanner.cell_test(pair, z, w, M, cap,
                                                    rho_cell)
                if excluded:
                    break
                worst = max(worst, ratio)
            if not excluded:
                accepted.append((w, worst))
    return FiberSet(z, M, _cluster(accepted, cluster_eps), "grid_scan",
                    (d_max, e_max), None, cluster_eps)


@dataclass(frozen=True)
class InclusionReport:
    ok: bool
    n_checked: int
    n_total_members: int
    counterexamples: list
    reversed_failures: int | None = None


def inclusion_check(curve: CurveC2, z, M: float, d: int, e: int,
                    samples: int, seed: int = 0, window=None,
                    S: int = FIBER_S, K_dir: int = FIBER_K_DIR,
                    cap: float = CAP_DEFAULT,
                    check_reversed: bool = False) -> InclusionReport:
    """Total-degree-(d+e) membership implies bidegree-(d,e) membership.

    Samples w values at the fixed z; a counterexample is a w that passes
    the total-degree test (exponent = polynomial degree d+e) but fails the
    bidegree test (exponent d+e).  The reversed inclusion may fail and is
    recorded, never asserted.
    """
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    rng = np.random.default_rng(seed)
    if window is None:
        bs = sample_boundary(curve, 256)
        top = max(1.0, 1.1 * float(np.abs(bs.w).max()))
        window = (-top, top, -top, top)
    z = complex(z)
    total_eng = _Engine(curve, basis_total(d + e), S, K_dir)
    bi_eng = _Engine(curve, basis_bidegree(d, e), S, K_dir)
    cache = WitnessCache()
    thresh = (M * (1.0 + MEMBER_TOL)) ** (d + e)
    counterexamples = []
    n_members = 0
    reversed_failures = 0 if check_reversed else None
    for _ in range(samples):
        w = complex(rng.uniform(window[0], window[1]),
                    rng.uniform(window[2], window[3]))
        phi_t = total_eng.phi_at(z, w)
        member_tot = False
        if cache.lower_bound("tot", phi_t) <= thresh:
            status, opt, coeffs = total_eng.solve(phi_t, cap)
            if status == "bounded" and opt <= thresh:
                member_tot = True
            elif coeffs is not None:
                cache.add("tot", coeffs, total_eng.sup_of(coeffs))
        need_bi = member_tot or check_reversed
        if not need_bi:
            continue
        res_bi = membership_bidegree(curve, z, w, M, d, e, S, K_dir,
                                     cap, engine=bi_eng)
        if member_tot:
            n_members += 1
            if not res_bi.member:
                counterexamples.append((z, w))
        if check_reversed and res_bi.member and not member_tot:
            reversed_failures += 1
    return InclusionReport(not counterexamples, samples, n_members,
                           counterexamples, reversed_failures)


# ---------------------------------------------------------------------------
# sublevel sets and their measure

@dataclass(frozen=True)
class SublevelSet:
    """{z in the unit disk : |poly(z)| <= threshold}."""

    poly: UnivariatePoly
    threshold: float
    d: int | None = None    # provenance when built from a bidegree-(d,e) F
    e: int | None = None
    j0: int | None = None

    def __post_init__(self):
        if not self.threshold > 0:
            raise ParameterError(f"threshold must be > 0, got {self.threshold}")

    def indicator(self, z):
        return np.abs(self.poly(z)) <= self.threshold


def t_set(F: BivariatePoly, r0: float) -> SublevelSet:
    """Exceptional z-set of F: sublevel of the unit slice coefficient G_j0
    at threshold r0^(d e / 2)."""
    if not 0 < r0 < 1:
        raise ParameterError(f"r0 must lie in (0,1), got {r0}")
    gs, j0 = slice_coefficients(F)
    return SublevelSet(gs[j0], r0 ** (F.d * F.e / 2.0), F.d, F.e, j0)


@dataclass(frozen=True)
class MeasureEstimate:
    estimate: float
    std_error: float
    n_samples: int
    bound: float       # 48 * threshold^(1/deg), the lemma bound being tested
    seed: int


def sublevel_measure(s: SublevelSet, n_samples: int, seed: int) -> MeasureEstimate:
    """Monte Carlo area of the sublevel set within the unit disk.

    Deterministic given the seed; std_error is the binomial standard error
    scaled by the disk area pi.
    """
    if n_samples < 10_000:
        raise ParameterError(f"need n_samples >= 1e4, got {n_samples}")
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random(n_samples))
    th = 2.0 * np.pi * rng.random(n_samples)
    pts = r * np.exp(1j * th)
    p_hat = float(np.count_nonzero(s.indicator(pts))) / n_samples
    k = s.poly.degree
    bound = 48.0 * s.threshold ** (1.0 / k) if k >= 1 else math.inf
    return MeasureEstimate(
        estimate=math.pi * p_hat,
        std_error=math.pi * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0)
                                      / n_samples),
        n_samples=n_samples, bound=bound, seed=seed)


# ---------------------------------------------------------------------------
# limit polynomial

@dataclass(frozen=True)
class LimitPolyResult:
    b_star: UnivariatePoly
    roots: np.ndarray
    used_d: list
    skipped_d: list
    cauchy_diffs: list   # sup-norm coefficient gaps between consecutive B_d


def limit_polynomial(curve: CurveC2, z1, e: int, d_list, r0: float | None = None,
                     zeta0: complex | None = None, fiber_points=None,
                     fiber_resolution: float = 0.0) -> LimitPolyResult:
    """Unit one-variable polynomials B_d = F_{d,e}(z1, .)/K bounding fibers.

    Degrees whose exceptional set T(d, e) contains z1 are skipped with a
    warning; at least 3 must survive.  The highest surviving degree's B_d is
    returned as B*; its at most e roots bound the fiber cardinality.  When
    fiber points from an independent scan are supplied, |B_d| is checked at
    each of them against r0^(lambda/2), allowing for the scan resolution via
    a derivative bound.
    """
    if zeta0 is None:
        zeta0 = default_base_point(curve)
    if r0 is None:
        r0 = default_r0(green_rate(default_domain(curve), zeta0))
    z1 = complex(z1)
    used, skipped, bs_list, diffs = [], [], [], []
    for d in sorted(set(int(v) for v in d_list)):
        F = construct_bishop(curve, d, e, zeta0)
        gs, j0 = slice_coefficients(F)
        lam = vanishing_order(curve, d, e)
        threshold = r0 ** (lam / 2.0)
        if abs(gs[j0](z1)) <= threshold:
            skipped.append(d)
            warnings.warn(f"z1={z1:g} lies in the exceptional set T({d},{e}); "
                          "skipping this degree", stacklevel=2)
            continue
        a_coeffs = (z1 ** np.arange(d + 1)) @ F.coeffs
        b = make_unit(UnivariatePoly(a_coeffs))
        if fiber_points is not None:
            lip = float(np.abs(np.arange(1, len(b.coeffs))
                               * b.coeffs[1:]).sum())
            slack = threshold * MEMBER_TOL + lip * fiber_resolution
            for w0 in fiber_points:
                val = abs(b(complex(w0)))
                if val > threshold + slack:
                    raise NumericalError(
                        f"|B_{d}({w0})| = {val:.3e} exceeds the fiber bound "
                        f"{threshold:.3e} (+ resolution slack {slack:.3e})")
        if bs_list:
            prev = bs_list[-1].coeffs
            cur = b.coeffs
            n = max(len(prev), len(cur))
            diffs.append(float(np.abs(np.pad(prev, (0, n - len(prev)))
                                      - np.pad(cur, (0, n - len(cur)))).max()))
        bs_list.append(b)
        used.append(d)
    if not used:
        raise ExclusionError(
            f"z1={z1:g} lies in T(d,{e}) for every supplied degree")
    if len(used) < 3:
        raise ExclusionError(
            f"only {len(used)} degrees survive the T(d,{e}) filter; need 3")
    b_star = bs_list[-1]
    rts = roots(b_star) if b_star.degree >= 1 else np.empty(0, dtype=complex)
    return LimitPolyResult(b_star, rts, used, skipped, diffs)


def fiber_roots_by_consensus(curve: CurveC2, z, e: int, d_list,
                             zeta0: complex | None = None,
                             tol: float = 1e-4) -> list:
    """Fiber candidates as roots shared by every degree's slice polynomial.

    For tracing geometry the exceptional-set gate of limit_polynomial is not
    needed: the normalized slices B_d(w) = F_{d,e}(z, w)/K vanish at genuine
    fiber points for every d, while spurious roots move with d.  Returns the
    roots of the largest degree's B_d confirmed by all the others.
    """
    z = complex(z)
    if zeta0 is None:
        zeta0 = default_base_point(curve)
    per_degree = []
    for d in sorted(set(int(v) for v in d_list)):
        F = construct_bishop(curve, d, e, zeta0)
        a_coeffs = (z ** np.arange(d + 1)) @ F.coeffs
        if not np.abs(a_coeffs).max() > 0:
            continue
        b = make_unit(UnivariatePoly(a_coeffs))
        per_degree.append(roots(b) if b.degree >= 1
                          else np.empty(0, dtype=complex))
    if len(per_degree) < 2:
        return []
    out = []
    for r in per_degree[-1]:
        if all(len(other) and np.abs(other - r).min() <= tol
               for other in per_degree[:-1]):
            out.append(complex(r))
    out.sort(key=lambda v: (v.real, v.imag))
    return out


# ---------------------------------------------------------------------------
# finiteness experiment

@dataclass(frozen=True)
class FinitenessSample:
    z: complex
    fiber: list              # [(w, residual)]
    b_star_roots: list
    cardinality: int
    within_bound: bool       # cardinality <= e
    roots_match: bool        # every cluster near a root of B*
    excluded: bool           # limit polynomial unavailable at this z


@dataclass(frozen=True)
class FinitenessReport:
    samples: list
    e: int
    M: float
    r0: float
    fraction_ok: float
    exceptional_fraction: float
    measure_bound: float        # 48 r0^(e/2)
    bound_fraction: float       # measure bound / pi
    bound_vacuous: bool


def _sample_disk_outside_tube(rng, n, proj, tube):
    out = []
    while len(out) < n:
        cand = math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        if np.abs(cand - proj).min() >= tube:
            out.append(complex(cand))
    return out


def finiteness_experiment(curve: CurveC2, M: float, e: int, n_z: int,
                          seed: int = 0, d_max: int | None = None,
                          d_list=None, grid_n: int = 33, window=None,
                          tube: float = 0.02, S: int = FIBER_S,
                          K_dir: int = FIBER_K_DIR) -> FinitenessReport:
    """Fiber cardinality versus the limit-polynomial bound over random z.

    Samples n_z points uniformly in the unit disk minus a tube around the
    projection of the curve, scans each fiber, and compares clusters with
    the roots of B*.  The empirical exceptional fraction is reported against
    the 48 r0^(e/2) measure bound (flagged vacuous when that exceeds pi).
    """
    if n_z < 20:
        raise ParameterError(f"need n_z >= 20, got {n_z}")
    if d_max is None:
        d_max = 2 * e
    if d_list is None:
        d_list = [d_max, d_max + 2, d_max + 4]
    zeta0 = default_base_point(curve)
    r0 = default_r0(green_rate(default_domain(curve), zeta0))
    rng = np.random.default_rng(seed)
    bs = sample_boundary(curve, 1024)
    if window is None:
        top = max(1.0, 1.1 * float(np.abs(bs.w).max()))
        window = (-top, top, -top, top)
    zs = _sample_disk_outside_tube(rng, n_z, bs.z, tube)
    # the scanner's certificate cache is shared across z: appends are atomic
    # and a missed certificate only costs an extra solve, so the accepted
    # fibers are identical whatever the interleaving
    scanner = FiberScanner(curve, d_max, e, S, K_dir)

    def run_one(z):
        fib = fiber_scan(curve, z, M, window, grid_n, d_max, e,
                         S=S, K_dir=K_dir, scanner=scanner)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # skipped degrees are recorded
                lp = limit_polynomial(curve, z, e, d_list, r0, zeta0)
            b_roots = list(lp.roots)
            excluded = False
        except ExclusionError:
            b_roots = []
            excluded = True
        tol = fib.resolution + 1e-3
        match = all(b_roots and min(abs(w - r) for r in b_roots) <= tol
                    for w, _ in fib.points) if fib.points else True
        if excluded:
            match = False
        return FinitenessSample(
            z=z, fiber=list(fib.points), b_star_roots=b_roots,
            cardinality=fib.cardinality,
            within_bound=fib.cardinality <= e,
            roots_match=match, excluded=excluded)

    n_threads = thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            samples = list(pool.map(run_one, zs))
    else:
        samples = [run_one(z) for z in zs]
    ok = [s for s in samples if s.within_bound and s.roots_match]
    frac_ok = len(ok) / len(samples)
    bound = 48.0 * r0 ** (e / 2.0)
    return FinitenessReport(
        samples=samples, e=e, M=M, r0=r0, fraction_ok=frac_ok,
        exceptional_fraction=1.0 - frac_ok, measure_bound=bound,
        bound_fraction=bound / math.pi, bound_vacuous=bound >= math.pi)


def write_finiteness_json(report: FinitenessReport, fh) -> None:
    """One JSON object per sample plus a summary, deterministic layout."""
    doc = {
        "summary": {
            "e": report.e,
            "M": report.M,
            "r0": report.r0,
            "fraction_ok": report.fraction_ok,
            "exceptional_fraction": report.exceptional_fraction,
            "measure_bound": report.measure_bound,
            "bound_fraction": report.bound_fraction,
            "bound_vacuous": report.bound_vacuous,
        },
        "samples": [
            {
                "z": [s.z.real, s.z.imag],
                "fiber": [[w.real, w.imag, res] for w, res in s.fiber],
                "b_star_roots": [[r.real, r.imag] for r in s.b_star_roots],
                "cardinality": s.cardinality,
                "within_bound": s.within_bound,
                "roots_match": s.roots_match,
                "excluded": s.excluded,
            }
            for s in report.samples
        ],
    }
    json.dump(doc, fh, indent=1, sort_keys=True)
    fh.write("\n")


def write_finiteness_csv(report: FinitenessReport, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["z_re", "z_im", "cardinality", "within_bound",
                     "roots_match", "excluded"])
    for s in report.samples:
        writer.writerow([format(s.z.real, ".17g"), format(s.z.imag, ".17g"),
                         s.cardinality, str(s.within_bound).lower(),
                         str(s.roots_match).lower(), str(s.excluded).lower()])
