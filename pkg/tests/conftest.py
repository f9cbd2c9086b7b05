import numpy as np
import pytest

from hullscope.curve import CurveC2, LaurentPoly


def lp(min_degree, coeffs):
    return LaurentPoly(min_degree, np.asarray(coeffs, dtype=complex))


@pytest.fixture(scope="session")
def circle_axis():
    """(zeta, 0): the unit circle in the z-axis."""
    return CurveC2(((lp(1, [1.0]), lp(0, [0.0])),), rho=0.5, label="circle-axis")


@pytest.fixture(scope="session")
def parabola():
    """(zeta, zeta^2): lies on the algebraic graph w = z^2."""
    return CurveC2(((lp(1, [1.0]), lp(2, [1.0])),), rho=0.5, label="parabola")


@pytest.fixture(scope="session")
def cubic():
    """(zeta, zeta^3 + 0.2 zeta): graph of w = z^3 + 0.2 z."""
    return CurveC2(((lp(1, [1.0]), lp(1, [0.2, 0.0, 1.0])),),
                   rho=0.5, label="cubic")


@pytest.fixture(scope="session")
def laurent_curve():
    """(zeta + 0.25/zeta, zeta): genuine Laurent data, no pole-free disk."""
    return CurveC2(((lp(-1, [0.25, 0.0, 1.0]), lp(1, [1.0])),),
                   rho=0.5, label="laurent")


@pytest.fixture(scope="session")
def two_component():
    """(zeta, zeta^2) together with a disjoint circle (zeta + 3, zeta)."""
    return CurveC2(((lp(1, [1.0]), lp(2, [1.0])),
                    (lp(0, [3.0, 1.0]), lp(1, [1.0]))),
                   rho=0.5, label="two-component")


@pytest.fixture(scope="session")
def figure_eight():
    """(zeta^2, 0): traverses its image twice, not simple."""
    return CurveC2(((lp(2, [1.0]), lp(0, [0.0])),), rho=0.5,
                   label="figure-eight")
