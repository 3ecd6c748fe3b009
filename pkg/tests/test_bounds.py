from fractions import Fraction

import numpy as np
import pytest

from indexbound import bounds, hodge, hypersurface as hyp
from indexbound.ambient import make_ambient
from indexbound.spectral import SpectralSystem


@pytest.fixture(scope="module")
def torus_forms(torus48):
    return hodge.harmonic_one_forms(torus48)


@pytest.fixture(scope="module")
def torus_spectrum(torus48):
    return SpectralSystem(torus48).spectrum(how_many=16)


def test_certificate_at_zero(torus48, torus_forms, torus_spectrum):
    rep = bounds.concentration_certificate(
        torus48, torus_forms, 0.0, mode="Prop41", spectrum=torus_spectrum
    )
    d = rep.as_dict()
    assert d["required"] == 1
    assert d["actual"] == 5
    assert d["margin"] < 0.0
    assert d["verdict"] == "pass"


def test_certificate_near_cluster(torus48, torus_forms, torus_spectrum):
    rep = bounds.concentration_certificate(
        torus48, torus_forms, -2.0 + 1e-3, mode="Prop41",
        spectrum=torus_spectrum,
    )
    d = rep.as_dict()
    assert d["actual"] == 5
    assert d["margin"] < 0.0
    assert d["verdict"] == "pass"


def test_certificate_equality_never_passes(torus48, torus_forms,
                                           torus_spectrum):
    # at the exact cluster value the hypothesis margin is zero up to roundoff
    rep = bounds.concentration_certificate(
        torus48, torus_forms, -2.0, mode="Prop41", spectrum=torus_spectrum
    )
    d = rep.as_dict()
    assert abs(d["margin"]) < 1e-10
    assert d["counts_ok"]
    assert d["verdict"] == "fail"  # strict inequality required


def test_starred_certificate(torus48, torus_forms, torus_spectrum):
    rep = bounds.concentration_certificate(
        torus48, torus_forms, 0.0, mode="Prop43", spectrum=torus_spectrum
    )
    d = rep.as_dict()
    assert d["required"] == 1
    assert abs(d["required_real"] - 2.0 / 8.0) < 1e-12
    assert d["actual"] == 5
    assert d["margin"] < 0.0
    assert abs(d["normalized_margin"] - d["margin"] / 2.0) < 1e-12
    assert d["verdict"] == "pass"


def test_constant_table():
    assert bounds.theorem_constant(make_ambient("sphere", dim=3)) == Fraction(1, 6)
    assert bounds.theorem_constant(
        make_ambient("complex_projective_veronese", m=2)
    ) == Fraction(1, 36)
    assert bounds.theorem_constant(
        make_ambient("quaternionic_projective_veronese", p=2)
    ) == Fraction(1, 105)
    assert bounds.theorem_constant(
        make_ambient("circle_times_sphere", n=3)
    ) == Fraction(1, 15)
    assert bounds.theorem_constant(
        make_ambient("sphere_times_sphere", p=2, q=3)
    ) == Fraction(1, 21)


def test_constant_closure_families():
    for m in range(1, 7):
        bounds.theorem_constant(make_ambient("complex_projective_veronese", m=m))
    for p in range(1, 5):
        bounds.theorem_constant(
            make_ambient("quaternionic_projective_veronese", p=p)
        )
    assert bounds.cayley_constant_check()
    assert bounds.CAYLEY_PLANE_CONSTANT == Fraction(
        2, bounds.CAYLEY_PLANE_EMBED_DIM * (bounds.CAYLEY_PLANE_EMBED_DIM - 1)
    )


def test_index_bound_table(torus48, torus_spectrum):
    rep = bounds.index_bound_report(torus48, spectrum=torus_spectrum)
    assert rep["constant"] == Fraction(1, 6)
    assert rep["constant_closure"]
    assert rep["bound"] == 5  # ceil(2/6) + n + 2
    assert rep["index"] == 5
    assert rep["consistent"] and rep["tight"]


def test_margins_sphere(torus48, torus_forms):
    rep = bounds.margins_sphere(torus48, torus_forms[0])
    assert rep.verdict == "pass"
    assert rep.values["max_deviation"] < 1e-8


def test_margins_cross():
    cp2 = bounds.margins_cross(make_ambient("complex_projective_veronese", m=2))
    assert cp2.values["margin"] == 0.0
    assert cp2.verdict.startswith("borderline")
    hp2 = bounds.margins_cross(make_ambient("quaternionic_projective_veronese", p=2))
    assert hp2.values["margin"] < 0.0
    assert hp2.verdict == "pass"
    cayley = bounds.margins_cross("cayley")
    assert abs(cayley.values["margin"] + 48.0) < 1e-12
    assert cayley.verdict == "pass"


def test_q_profile_minimum():
    rep = bounds.margins_product_q(grid_points=501, samples=2000)
    assert abs(rep.values["q_min"] - 7.0 / 8.0) < 1e-4
    assert rep.values["closed_form_agreement"] < 1e-12
    # the minimiser satisfies cos^2(theta) = 1/4 at phi = pi/2
    assert abs(np.cos(rep.values["argmin_theta"]) ** 2 - 0.25) < 1e-2
    assert abs(rep.values["argmin_phi"] - np.pi / 2) < 1e-2


def test_margins_convex():
    round_s = bounds.margins_convex(
        make_ambient("ellipsoid", semi_axes=[1, 1, 1, 1]), samples=100
    )
    assert abs(round_s.values["ratio_max"] - 1.0) < 1e-10
    assert round_s.verdict == "pass"
    mild = bounds.margins_convex(
        make_ambient("ellipsoid", semi_axes=[1, 1, 1, 1.1]), samples=400
    )
    assert mild.verdict == "pass"
    assert mild.values["ratio_max"] < np.sqrt(1.5)
    elongated = bounds.margins_convex(
        make_ambient("ellipsoid", semi_axes=[1, 1, 1, 2.0]), samples=400
    )
    assert elongated.verdict == "fail"


def test_margins_scalar3():
    rep = bounds.margins_scalar3(make_ambient("sphere", dim=3), samples=50)
    assert abs(rep.values["min_2R_minus_H2"] - 3.0) < 1e-10
    assert rep.values["contraction_residual"] < 1e-8
    assert rep.verdict == "pass"


def test_application_dispatch():
    rep = bounds.application_margins(
        "scalar3", target=make_ambient("sphere", dim=3), samples=10
    )
    assert rep.application == "scalar3"
    with pytest.raises(bounds.BoundsError):
        bounds.application_margins("nonexistent")


def test_borderline_residuals(geodesic_cp2):
    rep = bounds.borderline_cp_report(geodesic_cp2)
    assert rep["div_jn_residual"] < 1e-8
    assert rep["decomposition_residual"] < 1e-8
    assert rep["traced_gauss_residual"] < 1e-10


def test_borderline_decay_under_refinement():
    f = lambda p: 1.0 + 0.3 * np.sin(p[..., 0]) * np.cos(p[..., 2])
    coarse = bounds.borderline_cp_report(hyp.geodesic_sphere_cp2(12), f_fn=f)
    fine = bounds.borderline_cp_report(hyp.geodesic_sphere_cp2(24), f_fn=f)
    assert fine["decomposition_residual"] < coarse["decomposition_residual"]
    assert fine["step"] < coarse["step"]


def test_borderline_requires_complex_ambient(torus48):
    with pytest.raises(bounds.BoundsError):
        bounds.borderline_cp_report(torus48)
