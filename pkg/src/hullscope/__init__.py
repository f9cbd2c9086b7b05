"""hullscope: desk-scale experiments on projective hulls of curves in C^2."""

from .curve import (BoundarySample, CurveC2, LaurentPoly, curve_from_dict,
                    eval_component, load_curve, sample_boundary, save_curve,
                    simplicity_report, sup_norm_on_curve)
from .polyalg import (BivariatePoly, UnivariatePoly, VanishingSystem,
                      make_unit, null_unit_vector, roots, slice_coefficients,
                      taylor_pullback)
from .bishop import (Annulus, DecayRecord, Disk, GreenRate, construct_bishop,
                     decay_table, default_base_point, default_domain,
                     default_r0, degree_threshold, green_rate, lemma21_check,
                     vanishing_order, write_decay_csv)
from .extremal import (ExtremalResult, HullSlice, SliceSpec, StabilityReport,
                       analyticity_probe, best_constant, extremal_curve,
                       extremal_value, hull_slice, stability_probe,
                       write_hull_csv)
from .fiber import (FiberScanner, FiberSet, MeasureEstimate,
                    MembershipResult, SublevelSet, fiber_roots_by_consensus,
                    fiber_scan, finiteness_experiment, inclusion_check,
                    limit_polynomial, membership_bidegree, sublevel_measure,
                    t_set, write_finiteness_csv, write_finiteness_json)

__version__ = "0.1.0"
