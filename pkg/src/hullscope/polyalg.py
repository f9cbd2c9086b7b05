"""Bivariate and univariate complex polynomial arithmetic.

Coefficients c[n, m] multiply z^n w^m; the flattened basis order is (n, m)
lexicographic with n outer, which fixes file round-trips and the column
order of vanishing systems.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import polynomial as npoly

from .curve import LaurentPoly
from .errors import (ConditioningError, DegenerateError, DomainError,
                     ParameterError, ZeroPolynomialError)

__all__ = [
    "BivariatePoly",
    "UnivariatePoly",
    "VanishingSystem",
    "make_unit",
    "taylor_pullback",
    "null_unit_vector",
    "slice_coefficients",
    "roots",
]

UNIT_TOL = 1e-12
NULL_RESIDUAL_TOL = 1e-8
ROOT_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class BivariatePoly:
    """Dense coefficient matrix with total-degree or bidegree grading."""

    coeffs: np.ndarray  # shape (d+1, e+1)
    grading: str = "bidegree"  # "total" | "bidegree"

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        if self.grading not in ("total", "bidegree"):
            raise ParameterError(f"unknown grading {self.grading!r}")
        if self.grading == "total":
            n, m = np.indices(c.shape)
            bad = (n + m > max(c.shape) - 1) & (c != 0)
            if bad.any():
                raise ParameterError("total grading forbids c[n,m] != 0 with "
                                     "n+m > d")
        object.__setattr__(self, "coeffs", c.copy())
        self.coeffs.setflags(write=False)

    @property
    def d(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def e(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def total_degree(self) -> int:
        nz = np.argwhere(self.coeffs != 0)
        return int((nz[:, 0] + nz[:, 1]).max()) if nz.size else 0

    @property
    def is_unit(self) -> bool:
        m = np.abs(self.coeffs).max()
        return abs(m - 1.0) <= UNIT_TOL

    def __call__(self, z, w):
        return npoly.polyval2d(np.asarray(z, dtype=complex),
                               np.asarray(w, dtype=complex), self.coeffs)

    @classmethod
    def constant(cls, value, d: int = 0, e: int = 0, grading="bidegree"):
        c = np.zeros((d + 1, e + 1), dtype=complex)
        c[0, 0] = value
        return cls(c, grading)

    # sparse triplet JSON form, sorted (n, m) lex
    def to_dict(self):
        trips = [[int(n), int(m), float(v.real), float(v.imag)]
                 for (n, m), v in np.ndenumerate(self.coeffs) if v != 0]
        return {"grading": self.grading, "d": self.d, "e": self.e,
                "coeffs": trips}

    @classmethod
    def from_dict(cls, obj):
        extra = set(obj) - {"grading", "d", "e", "coeffs"}
        if extra:
            raise ParameterError(f"unknown fields {sorted(extra)} in polynomial")
        c = np.zeros((int(obj["d"]) + 1, int(obj["e"]) + 1), dtype=complex)
        for n, m, re, im in obj["coeffs"]:
            c[int(n), int(m)] = complex(re, im)
        return cls(c, obj.get("grading", "bidegree"))


@dataclass(frozen=True)
class UnivariatePoly:
    """Polynomial in one variable, coefficients ascending, trailing trimmed."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        nz = np.nonzero(c)[0]
        c = c[:nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        object.__setattr__(self, "coeffs", c.copy())
        self.coeffs.setflags(write=False)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_unit(self) -> bool:
        return abs(np.abs(self.coeffs).max() - 1.0) <= UNIT_TOL

    def __call__(self, w):
        return npoly.polyval(np.asarray(w, dtype=complex), self.coeffs)


@dataclass(frozen=True)
class VanishingSystem:
    """Linear conditions for the pullback F(f, g) to vanish at base_point.

    Row nu, column (n, m) holds the nu-th Taylor coefficient of f^n g^m at
    base_point; matrix @ c gives the first `order` Taylor coefficients of
    sum c[n,m] f^n g^m.
    """

    matrix: np.ndarray  # (order, (d+1)(e+1))
    base_point: complex
    order: int
    d: int
    e: int


def make_unit(p):
    """Divide by the (first, in basis order) coefficient of maximal modulus.

    That coefficient becomes exactly 1, which is stronger than the modulus-1
    normalization the definition asks for but easier to test.  Idempotent up
    to the phase of the chosen coefficient.
    """
    if isinstance(p, UnivariatePoly):
        c = p.coeffs
        if not c.any():
            raise ZeroPolynomialError("cannot normalize the zero polynomial")
        k = c[int(np.argmax(np.abs(c)))]
        return UnivariatePoly(c / k)
    c = p.coeffs
    if not c.any():
        raise ZeroPolynomialError("cannot normalize the zero polynomial")
    k = c.ravel()[int(np.argmax(np.abs(c)))]
    return BivariatePoly(c / k, p.grading)


def _taylor_series(p: LaurentPoly, zeta0: complex, order: int) -> np.ndarray:
    """First `order` Taylor coefficients of a Laurent polynomial at zeta0."""
    out = np.zeros(order, dtype=complex)
    for i, a in enumerate(p.coeffs):
        k = p.min_degree + i
        if a == 0:
            continue
        if k >= 0:
            top = min(k, order - 1)
            js = np.arange(top + 1)
            out[:top + 1] += a * np.array(
                [comb(k, int(j)) for j in js]) * zeta0 ** (k - js)
        else:
            # zeta0^k (1 + t/zeta0)^k via the binomial series
            binom = np.ones(order, dtype=float)
            for j in range(1, order):
                binom[j] = binom[j - 1] * (k - j + 1) / j
            out += a * binom * zeta0 ** (k - np.arange(order))
    return out


def _trunc_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[:len(a)]


def taylor_pullback(f: LaurentPoly, g: LaurentPoly, zeta0: complex,
                    d: int, e: int, order: int) -> VanishingSystem:
    """Vanishing system of the pullbacks f^n g^m at zeta0, truncated products.

    Each column is the length-`order` Taylor expansion of f^n g^m; requiring
    matrix @ c = 0 imposes `order` linear conditions on the coefficients of
    a bidegree-(d, e) polynomial.
    """
    if order < 1:
        raise ParameterError(f"order must be >= 1, got {order}")
    zeta0 = complex(zeta0)
    if zeta0 == 0 and (f.min_degree < 0 or g.min_degree < 0):
        raise DomainError("base point 0 is a pole of the parameterization")
    fs = _taylor_series(f, zeta0, order)
    gs = _taylor_series(g, zeta0, order)
    one = np.zeros(order, dtype=complex)
    one[0] = 1.0
    fpow = [one]
    for _ in range(d):
        fpow.append(_trunc_mul(fpow[-1], fs))
    gpow = [one]
    for _ in range(e):
        gpow.append(_trunc_mul(gpow[-1], gs))
    cols = [_trunc_mul(fpow[n], gpow[m])
            for n in range(d + 1) for m in range(e + 1)]
    mat = np.stack(cols, axis=1)
    norms = np.linalg.norm(mat, axis=1)
    norms = norms[norms > 0]
    if norms.size and norms.max() / norms.min() > 1e12:
        warnings.warn("vanishing system badly scaled "
                      f"(column-norm ratio {norms.max() / norms.min():.2e})",
                      stacklevel=2)
    return VanishingSystem(mat, zeta0, order, d, e)


def unit_from_vector(v: np.ndarray, d: int, e: int,
                     matrix: np.ndarray | None = None) -> BivariatePoly:
    """Reproducible unit polynomial from a coefficient vector.

    The first maximal-modulus coefficient is phase-rotated to exactly 1.
    When `matrix` is given the vanishing residual is checked against
    NULL_RESIDUAL_TOL relative to |matrix|.
    """
    mods = np.abs(v)
    k = int(np.argmax(mods >= mods.max() * (1 - 1e-12)))
    v = v / v[k]
    v = v / np.abs(v).max()  # exact unit even after the phase rotation
    if matrix is not None and matrix.size:
        resid = np.linalg.norm(matrix @ v)
        scale = np.linalg.norm(matrix, 2) * np.linalg.norm(v)
        if scale > 0 and resid > NULL_RESIDUAL_TOL * scale:
            raise ConditioningError(
                f"null vector residual {resid / scale:.2e} exceeds "
                f"{NULL_RESIDUAL_TOL:g}")
    return BivariatePoly(v.reshape(d + 1, e + 1))


def numerical_kernel(matrix: np.ndarray, ncols: int,
                     rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (rows) of the numerical kernel of `matrix`.

    Always returns at least the singular vector of least singular value, so
    callers with a dimension-count guarantee get a usable vector even when
    rounding hides the exact rank.
    """
    if matrix.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(matrix, full_matrices=True)
    rank = int(np.count_nonzero(s > s[0] * rtol)) if s.size and s[0] > 0 else 0
    rank = min(rank, ncols - 1)
    return vh[rank:].conj()


def null_unit_from_matrix(matrix: np.ndarray, d: int, e: int) -> BivariatePoly:
    """Unit polynomial from the least right singular vector of `matrix`."""
    ncols = (d + 1) * (e + 1)
    if matrix.shape[0] == 0:
        return BivariatePoly.constant(1.0, d, e)
    if matrix.shape[1] != ncols:
        raise ParameterError("matrix column count does not match bidegree")
    _, s, vh = np.linalg.svd(matrix)
    return unit_from_vector(vh[-1].conj(), d, e, matrix)


def null_unit_vector(sys: VanishingSystem) -> BivariatePoly:
    """Unit bidegree-(d,e) polynomial satisfying the vanishing conditions."""
    if sys.order >= (sys.d + 1) * (sys.e + 1):
        raise ParameterError(
            f"order {sys.order} >= (d+1)(e+1) = {(sys.d + 1) * (sys.e + 1)}; "
            "no kernel is guaranteed")
    return null_unit_from_matrix(sys.matrix, sys.d, sys.e)


def slice_coefficients(F: BivariatePoly):
    """Coefficients G_j(z) of F(z,w) = sum_j G_j(z) w^j, and the least j0
    for which G_j0 carries a coefficient of modulus >= 1 - 1e-12."""
    if not F.is_unit:
        raise ParameterError("slice_coefficients requires a unit polynomial")
    gs = [UnivariatePoly(F.coeffs[:, j]) for j in range(F.e + 1)]
    for j0, g in enumerate(gs):
        if np.abs(g.coeffs).max() >= 1.0 - UNIT_TOL:
            return gs, j0
    raise ZeroPolynomialError("no unit slice found; polynomial not unit?")


def roots(p: UnivariatePoly) -> np.ndarray:
    """All roots with multiplicity via the companion-matrix eigenvalues."""
    if p.degree < 1:
        raise DegenerateError("constant polynomial has no root set")
    r = npoly.polyroots(p.coeffs)
    scale = np.abs(p.coeffs).max()
    resid = np.abs(p(r)) / (scale * np.maximum(1.0, np.abs(r)) ** p.degree)
    if resid.max() > ROOT_RESIDUAL_TOL:
        raise ConditioningError(
            f"root residual {resid.max():.2e} exceeds {ROOT_RESIDUAL_TOL:g}")
    return r
