"""Green's-function decay rates and vanishing-polynomial construction.

A holomorphic function bounded by 1 on a domain containing the unit circle
K, with a zero of order lambda at an interior base point, is bounded on K by
r^lambda with r = sup_K exp(-G) for the domain's Green's function G.  Unit
polynomials whose pullback along the curve vanishes to high order at the
base point therefore decay geometrically on the curve; this module builds
them and measures the decay.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .curve import CurveC2, sample_boundary, unit_circle
from .errors import (ConditioningError, DomainError, GeometryError,
                     ParameterError)
from .polyalg import (BivariatePoly, numerical_kernel, taylor_pullback,
                      unit_from_vector)

__all__ = [
    "Disk",
    "Annulus",
    "GreenRate",
    "DecayRecord",
    "Lemma21Report",
    "green_rate",
    "default_base_point",
    "default_domain",
    "default_r0",
    "construct_bishop",
    "vanishing_order",
    "decay_table",
    "write_decay_csv",
    "degree_threshold",
    "lemma21_check",
]

K_SAMPLES = 4096


@dataclass(frozen=True)
class Disk:
    radius: float
    center: complex = 0.0

    def contains(self, z) -> bool:
        return abs(complex(z) - self.center) < self.radius

    def describe(self) -> str:
        return f"disk(R={self.radius:g}, center={self.center:g})"


@dataclass(frozen=True)
class Annulus:
    inner: float
    outer: float

    def contains(self, z) -> bool:
        return self.inner < abs(complex(z)) < self.outer

    def describe(self) -> str:
        return f"annulus({self.inner:g}, {self.outer:g})"


@dataclass(frozen=True)
class GreenRate:
    """r = sup_K exp(-G(pole, .)) for the domain's Green's function."""

    r: float
    domain: object
    pole: complex

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise GeometryError(f"green rate must lie in (0,1), got {self.r}")


def _check_k_inside(domain) -> None:
    if isinstance(domain, Disk):
        if 1.0 + abs(domain.center) >= domain.radius:
            raise GeometryError(
                f"unit circle not inside {domain.describe()}")
    elif isinstance(domain, Annulus):
        if not (0.0 < domain.inner < 1.0 < domain.outer):
            raise GeometryError(
                f"unit circle not inside {domain.describe()}")
    else:
        raise ParameterError(f"unknown domain {domain!r}")


def _annulus_harmonic_basis(z, a: float, b: float, kmax: int):
    """1, log|z| and the scaled harmonics Re/Im (z/b)^k, (a/z)^k."""
    z = np.asarray(z, dtype=complex)
    cols = [np.ones(z.shape), np.log(np.abs(z))]
    zb = z / b
    az = a / z
    zk = np.ones_like(z)
    ak = np.ones_like(z)
    for _ in range(kmax):
        zk = zk * zb
        ak = ak * az
        cols += [zk.real, zk.imag, ak.real, ak.imag]
    return np.stack(cols, axis=-1)


def green_rate(domain, zeta0: complex, k_samples: int = K_SAMPLES) -> GreenRate:
    """sup over the sampled unit circle of exp(-G(zeta0, .)).

    Disks use the exact Moebius form of the Green's function.  Annuli solve
    the Dirichlet problem for the harmonic correction h (G = -log|z - zeta0|
    + h) by least squares on a scaled Laurent-harmonic basis over sampled
    boundary rings.
    """
    zeta0 = complex(zeta0)
    _check_k_inside(domain)
    if not domain.contains(zeta0):
        raise GeometryError(f"pole {zeta0} not inside {domain.describe()}")
    if abs(abs(zeta0) - 1.0) < 1e-12:
        raise GeometryError("pole sits on the unit circle K")
    K = unit_circle(k_samples)
    if isinstance(domain, Disk):
        if zeta0 == domain.center:
            # exp(-G) = |z - c|/R; the sup over |z|=1 is (1+|c|)/R exactly
            return GreenRate((1.0 + abs(domain.center)) / domain.radius,
                             domain, zeta0)
        u = (K - domain.center) / domain.radius
        u0 = (zeta0 - domain.center) / domain.radius
        em = np.abs(u - u0) / np.abs(1.0 - np.conj(u0) * u)
        return GreenRate(float(em.max()), domain, zeta0)

    a, b = domain.inner, domain.outer
    m_ring, kmax = 512, 48
    ring = unit_circle(m_ring)
    bd = np.concatenate([a * ring, b * ring])
    rhs = np.log(np.abs(bd - zeta0))
    basis = _annulus_harmonic_basis(bd, a, b, kmax)
    coef, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
    fit_res = np.abs(basis @ coef - rhs).max()
    if fit_res > 1e-8:
        raise ConditioningError(
            f"harmonic boundary fit residual {fit_res:.2e} too large")
    G = -np.log(np.abs(K - zeta0)) + _annulus_harmonic_basis(K, a, b, kmax) @ coef
    return GreenRate(float(np.exp(-G).max()), domain, zeta0)


def default_base_point(curve: CurveC2) -> complex:
    """0 for polynomial parameterizations, else a real point in the annulus."""
    if curve.is_polynomial:
        return 0.0
    return complex(0.5 * (1.0 + curve.rho))


def default_domain(curve: CurveC2):
    """Largest domain on which the parameterization is known valid, shrunk 0.9x."""
    if curve.is_polynomial:
        return Disk(0.9 / curve.rho)
    return Annulus(1.1 * curve.rho, 0.9 / curve.rho)


def default_r0(rate: GreenRate) -> float:
    """sqrt(r): strictly between the certified rate and 1."""
    return math.sqrt(rate.r)


def vanishing_order(curve: CurveC2, d: int, e: int) -> int:
    """d*e for one component, floor(d*e/N) per component otherwise."""
    n = curve.n_components
    return d * e if n == 1 else (d * e) // n


def construct_bishop(curve: CurveC2, d: int, e: int,
                     zeta0: complex | None = None,
                     k_samples: int = 1024) -> BivariatePoly:
    """Unit bidegree-(d,e) polynomial whose pullback along every component
    vanishes at zeta0 to the order given by vanishing_order.

    Stacks the per-component vanishing systems; the kernel is non-trivial
    because the stacked row count stays below (d+1)(e+1).  When the kernel
    has dimension > 1 the element of smallest sampled sup on the curve is
    taken, so an exact algebraic relation through the caps is found whenever
    one exists; the choice stays deterministic.
    """
    n = curve.n_components
    if d + e <= n:
        raise ParameterError(
            f"need d + e > N for N={n} components, got d+e={d + e}")
    lam = vanishing_order(curve, d, e)
    if lam < 1:
        raise ParameterError(f"vanishing order {lam} < 1 for (d,e)=({d},{e})")
    if zeta0 is None:
        zeta0 = default_base_point(curve)
    zeta0 = complex(zeta0)
    if curve.is_polynomial:
        # polynomial parameterizations extend to the whole disk |zeta| < 1/rho
        if abs(zeta0) >= 1.0 / curve.rho:
            raise DomainError(f"base point {zeta0} outside the validity disk")
    elif not curve.contains_parameter(zeta0):
        raise DomainError(f"base point {zeta0} outside the annulus")
    mat = np.vstack([taylor_pullback(f, g, zeta0, d, e, lam).matrix
                     for f, g in curve.components])
    basis = numerical_kernel(mat, (d + 1) * (e + 1))
    if basis.shape[0] == 1:
        return unit_from_vector(basis[0], d, e, mat)
    bs = sample_boundary(curve, k_samples)
    mons = np.stack([(bs.z ** nn) * (bs.w ** mm)
                     for nn in range(d + 1) for mm in range(e + 1)], axis=1)
    evals = mons @ basis.T  # pullback samples of each kernel basis vector
    _, s, vh = np.linalg.svd(evals, full_matrices=False)
    zero_tol = 1e-10 * max(float(s[0]), 1.0)
    n_zero = int(np.count_nonzero(s <= zero_tol))
    if n_zero == 0:
        combo = basis.T @ vh[-1].conj()
        return unit_from_vector(combo, d, e, mat)
    # exact algebraic relations through the caps: a whole subspace pulls
    # back to zero; prefer its lowest-degree element (the canonical
    # relation) so slice coefficients stay useful away from the origin
    zspace = basis.T @ vh[len(s) - n_zero:].conj().T  # (V, n_zero)
    weights = np.array([2.0 ** (nn + mm)
                        for nn in range(d + 1) for mm in range(e + 1)])
    _, _, wv = np.linalg.svd(weights[:, None] * zspace, full_matrices=False)
    combo = zspace @ wv[-1].conj()
    return unit_from_vector(combo, d, e, mat)


@dataclass(frozen=True)
class DecayRecord:
    d: int
    e: int
    lam: int
    sup_norm_K: float
    predicted_rate: float
    r0: float
    fitted_C: float
    passes: bool
    zero_pullback: bool


ZERO_PULLBACK_TOL = 1e-10
DECAY_PASS_SLACK = 1e-9


def decay_table(curve: CurveC2, zeta0: complex | None, d_list, e_list,
                rate: GreenRate, r0: float | None = None,
                k_samples: int = K_SAMPLES) -> list:
    """Bishop polynomials over the (d, e) grid with the decay bound fitted.

    The fitted constant is the smallest single C making every record satisfy
    sup_norm_K <= C^(d+e) * r^lambda; identically-zero pullbacks (exact
    algebraic relations) pass trivially and are excluded from the fit.
    """
    if r0 is None:
        r0 = default_r0(rate)
    if not rate.r < r0 < 1.0:
        raise ParameterError(f"need r < r0 < 1, got r={rate.r}, r0={r0}")
    bs = sample_boundary(curve, k_samples)
    rows = []
    for d in sorted(set(int(v) for v in d_list)):
        for e in sorted(set(int(v) for v in e_list)):
            F = construct_bishop(curve, d, e, zeta0)
            lam = vanishing_order(curve, d, e)
            sup = float(np.abs(F(bs.z, bs.w)).max())
            rows.append((d, e, lam, sup))
    nonzero = [(sup / rate.r ** lam) ** (1.0 / (d + e))
               for d, e, lam, sup in rows if sup > ZERO_PULLBACK_TOL]
    fitted_c = max(nonzero) if nonzero else 1.0
    records = []
    for d, e, lam, sup in rows:
        zero = sup <= ZERO_PULLBACK_TOL
        bound = fitted_c ** (d + e) * rate.r ** lam
        records.append(DecayRecord(
            d=d, e=e, lam=lam, sup_norm_K=sup, predicted_rate=rate.r,
            r0=r0, fitted_C=fitted_c,
            passes=zero or sup <= bound * (1.0 + DECAY_PASS_SLACK),
            zero_pullback=zero))
    return records


def write_decay_csv(records, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["d", "e", "lambda", "sup_norm_K", "r", "r0",
                     "fitted_C", "passes"])
    for rec in records:
        writer.writerow([rec.d, rec.e, rec.lam,
                         format(rec.sup_norm_K, ".17g"),
                         format(rec.predicted_rate, ".17g"),
                         format(rec.r0, ".17g"),
                         format(rec.fitted_C, ".17g"),
                         str(rec.passes).lower()])


def degree_threshold(M: float, C: float, r: float, r0: float) -> int:
    """Least d0 such that (MC)^(d+e) r^(de) <= r0^(de) for all d, e > d0.

    Equivalent to (1/d + 1/e) log(MC) <= log(r0/r); the worst case over
    d, e > d0 is d = e = d0 + 1, which is verified directly.
    """
    if not 0.0 < r < r0 < 1.0:
        raise ParameterError(f"need 0 < r < r0 < 1, got r={r}, r0={r0}")
    if M * C < 1.0:
        raise ParameterError(f"need M*C >= 1, got {M * C}")
    lhs = math.log(M * C)
    gap = math.log(r0 / r)

    def ok(t: int) -> bool:
        return 2.0 * lhs / (t + 1) <= gap

    d0 = max(0, math.floor(2.0 * lhs / gap))
    while not ok(d0):
        d0 += 1
    while d0 > 0 and ok(d0 - 1):
        d0 -= 1
    assert ok(d0) and (d0 == 0 or not ok(d0 - 1))
    return d0


@dataclass(frozen=True)
class Lemma21Report:
    domain: object
    pole: complex
    lam: int
    rate: float
    trials: int
    max_ratio: float       # sup_K |f| / r^lambda over all trials
    witness_ratio: float   # the extremal witness, equals 1 up to rounding
    passes: bool


LEMMA21_SLACK = 1e-9


def _blaschke(z, a: complex, disk: Disk):
    """Modulus exactly 1 on the disk boundary, zero at a."""
    u = (z - disk.center) / disk.radius
    u0 = (complex(a) - disk.center) / disk.radius
    return (u - u0) / (1.0 - np.conj(u0) * u)


def lemma21_check(domain, zeta0: complex, lam: int, trials: int,
                  seed: int = 0, k_samples: int = K_SAMPLES) -> Lemma21Report:
    """Random functions bounded by 1 with a zero of order lam at zeta0:
    verifies sup_K |f| <= r^lambda.

    Disks use Blaschke products (boundary modulus exactly 1).  Annuli use
    (z - zeta0)^lam times a random Laurent polynomial, normalized by a
    certified upper bound of its boundary sup so the hypothesis |f| <= 1
    holds rigorously.
    """
    if trials < 1:
        raise ParameterError("need at least one trial")
    zeta0 = complex(zeta0)
    rate = green_rate(domain, zeta0, k_samples)
    bound = rate.r ** lam
    K = unit_circle(k_samples)
    rng = np.random.default_rng(seed)
    max_ratio = 0.0
    for _ in range(trials):
        if isinstance(domain, Disk):
            f = _blaschke(K, zeta0, domain) ** lam
            for _ in range(int(rng.integers(0, 4))):
                a = domain.center + (rng.uniform(0, 0.9 * domain.radius)
                                     * np.exp(2j * np.pi * rng.uniform()))
                f = f * _blaschke(K, a, domain)
            f = f * np.exp(2j * np.pi * rng.uniform())
        else:
            lo = int(rng.integers(-3, 0))
            hi = int(rng.integers(1, 4))
            coeffs = rng.normal(size=hi - lo + 1) \
                + 1j * rng.normal(size=hi - lo + 1)
            ks = np.arange(lo, hi + 1)

            def gval(z):
                return (coeffs * z[:, None] ** ks).sum(axis=1)

            nb = 4096
            ring = unit_circle(nb)
            h_bnd = [np.abs((r_ * ring - zeta0) ** lam * gval(r_ * ring)).max()
                     for r_ in (domain.inner, domain.outer)]
            # certified sup bound: sampled sup / cos(pi * D / nb) for a
            # trigonometric polynomial of degree D on each ring
            deg = lam + max(abs(lo), hi)
            top = max(h_bnd) / math.cos(math.pi * deg / nb)
            f = (K - zeta0) ** lam * gval(K) / top
        ratio = float(np.abs(f).max()) / bound
        max_ratio = max(max_ratio, ratio)
    if isinstance(domain, Disk):
        witness = np.abs(_blaschke(K, zeta0, domain) ** lam).max() / bound
    else:
        witness = max_ratio  # no exact extremal witness on an annulus
    return Lemma21Report(
        domain=domain, pole=zeta0, lam=lam, rate=rate.r, trials=trials,
        max_ratio=max_ratio, witness_ratio=float(witness),
        passes=max_ratio <= 1.0 + LEMMA21_SLACK)
