"""Closed real-analytic curves in C^2 given by Laurent-polynomial pairs.

A curve has N >= 1 components, each parameterized by a pair of Laurent
polynomials (f_k, g_k) on the annulus {rho < |zeta| < 1/rho} around the unit
circle.  All operations are pure functions of immutable values.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "LaurentPoly",
    "CurveC2",
    "BoundarySample",
    "eval_component",
    "sample_boundary",
    "sup_norm_on_curve",
    "simplicity_report",
    "curve_from_dict",
    "curve_to_dict",
    "load_curve",
    "save_curve",
]


@dataclass(frozen=True)
class LaurentPoly:
    """sum_k a_k zeta^(min_degree + k), coefficients stored ascending.

    Construction trims leading/trailing zero coefficients; the zero
    polynomial is canonically (min_degree=0, coeffs=[0]).
    """

    min_degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.size == 0:
            raise ParameterError("LaurentPoly needs at least one coefficient")
        nz = np.nonzero(c)[0]
        if nz.size == 0:
            object.__setattr__(self, "min_degree", 0)
            object.__setattr__(self, "coeffs", np.zeros(1, dtype=complex))
        else:
            lo, hi = nz[0], nz[-1]
            object.__setattr__(self, "min_degree", int(self.min_degree) + int(lo))
            object.__setattr__(self, "coeffs", c[lo:hi + 1].copy())
        self.coeffs.setflags(write=False)

    @property
    def max_degree(self) -> int:
        return self.min_degree + len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def degree_span(self) -> int:
        """max(|min_degree|, |max_degree|); 0 for the zero polynomial."""
        if self.is_zero:
            return 0
        return max(abs(self.min_degree), abs(self.max_degree))

    def __call__(self, zeta):
        """Evaluate by Horner on the polynomial part times zeta^min_degree."""
        zeta = np.asarray(zeta, dtype=complex)
        acc = np.zeros_like(zeta)
        for a in self.coeffs[::-1]:
            acc = acc * zeta + a
        if self.min_degree != 0:
            acc = acc * zeta ** self.min_degree
        return acc


@dataclass(frozen=True)
class CurveC2:
    """Finite union of closed curves zeta -> (f_k(zeta), g_k(zeta)), |zeta|=1."""

    components: tuple
    rho: float = 0.5
    label: str = ""

    def __post_init__(self):
        comps = tuple((f, g) for f, g in self.components)
        if len(comps) < 1:
            raise ParameterError("curve needs at least one component")
        if not (0.0 < self.rho < 1.0):
            raise ParameterError(f"rho must lie in (0,1), got {self.rho}")
        object.__setattr__(self, "components", comps)

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def is_polynomial(self) -> bool:
        """True when every parameterizing Laurent polynomial has min_degree >= 0."""
        return all(f.min_degree >= 0 and g.min_degree >= 0
                   for f, g in self.components)

    @property
    def max_laurent_degree(self) -> int:
        return max(max(f.degree_span, g.degree_span, 1)
                   for f, g in self.components)

    def contains_parameter(self, zeta) -> bool:
        r = abs(complex(zeta))
        return self.rho < r < 1.0 / self.rho


@dataclass(frozen=True)
class BoundarySample:
    """Points (f_k(zeta_j), g_k(zeta_j)) over uniform unit-circle parameters."""

    z: np.ndarray
    w: np.ndarray
    parameters: np.ndarray
    component_index: np.ndarray  # 1-based, matching eval_component

    def __len__(self):
        return len(self.z)


def eval_component(curve: CurveC2, k: int, zeta):
    """(f_k(zeta), g_k(zeta)) for 1 <= k <= N; zeta must lie in the annulus."""
    if not 1 <= k <= curve.n_components:
        raise ParameterError(f"component index {k} not in 1..{curve.n_components}")
    for val in np.atleast_1d(np.asarray(zeta, dtype=complex)):
        if not curve.contains_parameter(val):
            raise DomainError(
                f"|zeta|={abs(val):.6g} outside annulus ({curve.rho}, {1/curve.rho})")
    f, g = curve.components[k - 1]
    return f(zeta), g(zeta)


def unit_circle(S: int) -> np.ndarray:
    """exp(2*pi*i*j/S), j = 0..S-1."""
    return np.exp(2j * np.pi * np.arange(S) / S)


def sample_boundary(curve: CurveC2, S: int) -> BoundarySample:
    """N*S boundary points at uniform circle parameters; deterministic."""
    if S < 8:
        raise ParameterError(f"need S >= 8 samples per component, got {S}")
    zeta = unit_circle(S)
    zs, ws, comps = [], [], []
    for k in range(1, curve.n_components + 1):
        z, w = eval_component(curve, k, zeta)
        zs.append(z)
        ws.append(w)
        comps.append(np.full(S, k, dtype=int))
    return BoundarySample(
        z=np.concatenate(zs),
        w=np.concatenate(ws),
        parameters=np.tile(zeta, curve.n_components),
        component_index=np.concatenate(comps),
    )


def sup_norm_on_curve(p, curve: CurveC2, S: int = 4096) -> float:
    """max |p(z,w)| over S uniform boundary samples per component.

    p is any callable of two complex array arguments (e.g. BivariatePoly).
    Monotone nondecreasing under sample refinement S -> 2S.
    """
    if S < 64:
        raise ParameterError(f"need S >= 64, got {S}")
    bs = sample_boundary(curve, S)
    return float(np.abs(p(bs.z, bs.w)).max())


def simplicity_report(curve: CurveC2, S: int = 4096, tol: float = 1e-9):
    """Numerical injectivity check of each component on |zeta|=1.

    Two parameters more than 4 grid steps apart whose images are closer than
    tol flag the component as non-simple.  Violations are warnings, not
    errors: the machinery runs on non-simple curves too.
    """
    simple = []
    min_gap = 8.0 * np.sin(4 * np.pi / S)  # chordal distance of ~4 grid steps
    for k in range(1, curve.n_components + 1):
        zeta = unit_circle(S)
        z, w = eval_component(curve, k, zeta)
        ok = True
        block = 256
        for i0 in range(0, S, block):
            zi = z[i0:i0 + block, None]
            wi = w[i0:i0 + block, None]
            ti = zeta[i0:i0 + block, None]
            img = np.hypot(np.abs(zi - z[None, :]), np.abs(wi - w[None, :]))
            par = np.abs(ti - zeta[None, :])
            if np.any((par > min_gap) & (img < tol)):
                ok = False
                break
        if not ok:
            warnings.warn(
                f"component {k} of curve '{curve.label}' is not simple "
                f"(self-intersection within {tol:g})", stacklevel=2)
        simple.append(ok)
    return simple


# ---------------------------------------------------------------------------
# curve file format (JSON)

def _poly_from_dict(obj, where: str) -> LaurentPoly:
    extra = set(obj) - {"min_degree", "coeffs"}
    if extra:
        raise ParameterError(f"unknown fields {sorted(extra)} in {where}")
    if "min_degree" not in obj or "coeffs" not in obj:
        raise ParameterError(f"{where} needs 'min_degree' and 'coeffs'")
    coeffs = [complex(re, im) for re, im in obj["coeffs"]]
    return LaurentPoly(int(obj["min_degree"]), np.array(coeffs))


def curve_from_dict(obj) -> CurveC2:
    extra = set(obj) - {"label", "rho", "components"}
    if extra:
        raise ParameterError(f"unknown fields {sorted(extra)} in curve file")
    if "components" not in obj or not obj["components"]:
        raise ParameterError("curve file needs a non-empty 'components' list")
    comps = []
    for i, c in enumerate(obj["components"]):
        extra = set(c) - {"f", "g"}
        if extra:
            raise ParameterError(f"unknown fields {sorted(extra)} in component {i}")
        comps.append((_poly_from_dict(c["f"], f"component {i} field 'f'"),
                      _poly_from_dict(c["g"], f"component {i} field 'g'")))
    return CurveC2(components=tuple(comps),
                   rho=float(obj.get("rho", 0.5)),
                   label=str(obj.get("label", "")))


def curve_to_dict(curve: CurveC2):
    def poly(p):
        return {"min_degree": int(p.min_degree),
                "coeffs": [[float(a.real), float(a.imag)] for a in p.coeffs]}
    return {"label": curve.label, "rho": curve.rho,
            "components": [{"f": poly(f), "g": poly(g)}
                           for f, g in curve.components]}


def load_curve(path) -> CurveC2:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"cannot parse curve file {path}: {exc}") from exc
    return curve_from_dict(obj)


def save_curve(curve: CurveC2, path):
    with open(path, "w") as fh:
        json.dump(curve_to_dict(curve), fh, indent=2)
        fh.write("\n")
