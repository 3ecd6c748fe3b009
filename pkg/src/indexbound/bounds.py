"""Index lower bounds: concentration-of-spectrum certificates, the theorem
constant table with exact rational arithmetic, per-application pointwise
margins, and the borderline complex-projective residual checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ambient import (
    CircleTimesSphereModel,
    ComplexProjectiveVeroneseModel,
    EllipsoidModel,
    QuaternionicProjectiveVeroneseModel,
    RealProjectiveModel,
    SphereModel,
    SphereTimesSphereModel,
)
from .hodge import hodge_star_surface
from .spectral import assemble_jacobi
from .testfns import TestFunctionError, _rhs_integrand, integrand_quadratic_form


class BoundsError(Exception):
    pass


# ---------------------------------------------------------------------------
# certificates

@dataclass
class CertificateReport:
    mode: str  # 'Prop41' | 'Prop43'
    eta: float
    q: int
    d: int
    required_count: int
    required_real: float
    actual_count: int
    hypothesis_margin: float
    normalized_margin: float
    verdict: str = field(init=False)

    def __post_init__(self):
        passed = self.hypothesis_margin < 0 and self.actual_count >= self.required_count
        self.verdict = "pass" if passed else "fail"

    def as_dict(self):
        return {
            "mode": self.mode,
            "eta": self.eta,
            "q": self.q,
            "d": self.d,
            "required": self.required_count,
            "required_real": self.required_real,
            "actual": self.actual_count,
            "counts_ok": self.actual_count >= self.required_count,
            "margin": self.hypothesis_margin,
            "normalized_margin": self.normalized_margin,
            "verdict": self.verdict,
        }


def concentration_certificate(surface, basis, eta, mode="Prop41",
                              system=None, spectrum=None, how_many=24):
    """Certificate that at least a fixed fraction of dim(V) eigenvalues of the
    Jacobi operator lie strictly below eta.

    The hypothesis is that the integrand Gram form minus eta (Prop41) or
    2 eta (Prop43) times the L2 mass is negative definite; the conclusion
    compares count_below(eta) with the ceiling of the paper fraction.
    """
    q = len(basis)
    d = surface.embed_dim
    integrand_mode = "Prop32" if mode == "Prop41" else "Prop43"
    form = integrand_quadratic_form(surface, basis, integrand_mode)
    margin = form.hypothesis_margin(eta)
    # normalized margin: per unit of L2 mass, with the Prop43 factor divided out
    scale = np.linalg.eigvalsh(form.mass)[-1]
    factor = 2.0 if mode == "Prop43" else 1.0
    normalized = margin / (factor * scale)

    if mode == "Prop41":
        required_real = 2.0 * q / (d * (d - 1))
    elif mode == "Prop43":
        if surface.dim != 2:
            raise BoundsError("the starred certificate needs a surface (n = 2)")
        required_real = q / (2.0 * d)
    else:
        raise BoundsError(f"unknown certificate mode {mode!r}")
    required = math.ceil(required_real)

    if spectrum is None:
        system = system or assemble_jacobi(surface)
        spectrum = system.spectrum(how_many=how_many)
    actual = spectrum.count_below(eta)
    return CertificateReport(
        mode=mode, eta=float(eta), q=q, d=d,
        required_count=required, required_real=required_real,
        actual_count=actual, hypothesis_margin=margin,
        normalized_margin=normalized,
    )


# ---------------------------------------------------------------------------
# theorem constants (exact rationals)

def theorem_constant(ambient):
    """The index-bound constant for the ambient kind, as an exact Fraction,
    together with the generic form 2/(d(d-1)) it must equal."""
    d = ambient.embed_dim
    generic = Fraction(2, d * (d - 1))
    if isinstance(ambient, ComplexProjectiveVeroneseModel):
        m = ambient.m
        stated = Fraction(2, m * (m + 2) * (m + 1) ** 2)
    elif isinstance(ambient, QuaternionicProjectiveVeroneseModel):
        p = ambient.p
        stated = Fraction(2, (2 * p + 3) * (2 * p + 1) * (p + 1) * p)
    elif isinstance(ambient, CircleTimesSphereModel):
        n = ambient.n
        stated = Fraction(2, (n + 3) * (n + 2))
    elif isinstance(ambient, SphereTimesSphereModel):
        p, q = ambient.p, ambient.q
        stated = Fraction(2, (p + q + 2) * (p + q + 1))
    elif isinstance(ambient, SphereModel):  # includes RealProjective
        n = ambient.intrinsic_dim - 1
        stated = Fraction(2, (n + 2) * (n + 1))
    elif isinstance(ambient, EllipsoidModel):
        stated = generic
    else:
        raise BoundsError(f"no theorem constant for ambient kind {ambient.kind!r}")
    if stated != generic:
        raise BoundsError(
            f"constant table inconsistency for {ambient.kind!r}: "
            f"{stated} != 2/(d(d-1)) = {generic}"
        )
    return stated


CAYLEY_PLANE_CONSTANT = Fraction(1, 351)
CAYLEY_PLANE_EMBED_DIM = 27


def cayley_constant_check():
    """1/351 must be 2/(d(d-1)) for the 27-dimensional embedding."""
    d = CAYLEY_PLANE_EMBED_DIM
    return CAYLEY_PLANE_CONSTANT == Fraction(2, d * (d - 1))


def index_bound_report(surface, spectrum=None, how_many=24):
    """Theorem-constant lower bound for the surface against its computed index."""
    ambient = surface.ambient
    C = theorem_constant(ambient)
    b1 = surface.betti_one
    bound = math.ceil(C * b1)
    sphere_case = isinstance(ambient, SphereModel) and not isinstance(
        ambient, RealProjectiveModel
    )
    totally_geodesic = (
        surface.node_fields()["a_norm_sq"].max() < 1e-8
    )
    if sphere_case and not totally_geodesic:
        n = surface.dim
        bound += n + 2
    if spectrum is None:
        spectrum = assemble_jacobi(surface).spectrum(how_many=how_many)
    index = spectrum.morse_index
    return {
        "surface": surface.name,
        "ambient": ambient.kind,
        "constant": C,
        "constant_closure": C
        == Fraction(2, ambient.embed_dim * (ambient.embed_dim - 1)),
        "betti_one": b1,
        "bound": bound,
        "index": index,
        "consistent": index >= bound,
        "tight": index == bound,
    }


# ---------------------------------------------------------------------------
# application margins

@dataclass
class MarginReport:
    application: str
    values: dict
    thresholds: dict
    verdict: str


def q_closed_form(theta, phi):
    """q = 1 + sin^2(phi) cos^2(theta) (2 cos^2(theta) - 1)."""
    c2 = np.cos(theta) ** 2
    return 1.0 + np.sin(phi) ** 2 * c2 * (2.0 * c2 - 1.0)


def q_defining_expression(theta, phi):
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    cp2, sp2 = np.cos(phi) ** 2, np.sin(phi) ** 2
    return (
        c2 + s2 * cp2 + sp2 + c2**2 + s2**2 - 1.0 + 2.0 * c2 * s2 * cp2
    )


def margins_sphere(surface, form):
    """Deviation of the wedge-coordinate integrand from its constant sphere
    value -(2n-2)|omega|^2."""
    if not isinstance(surface.ambient, SphereModel):
        raise BoundsError("the sphere margin needs a sphere ambient")
    fields = surface.node_fields()
    ok = fields["interior"]
    integrand = _rhs_integrand(surface, form, "Prop32")
    n = surface.dim
    target = -(2.0 * n - 2.0) * form.norm_sq
    dev = np.abs(integrand - target)[ok]
    values = {
        "max_deviation": float(dev.max()),
        "mean_deviation": float(dev.mean()),
    }
    verdict = "pass" if values["max_deviation"] < 1e-8 else "fail"
    return MarginReport("sphere", values, {"max_deviation": 1e-8}, verdict)


def margins_cross(ambient):
    """Einstein margin (8/3)(n+3-K) of a rank-one ambient; zero flags the
    borderline complex-projective case."""
    if ambient == "cayley":
        n_plus_1, K = 16, 36
        kind = "cayley_plane"
    else:
        K = ambient.einstein_constant
        if K is None:
            raise BoundsError("cross margin needs an Einstein ambient")
        n_plus_1 = ambient.intrinsic_dim
        kind = ambient.kind
    n = n_plus_1 - 1
    margin = (8.0 / 3.0) * (n + 3 - K)
    values = {"einstein_constant": float(K), "margin": margin, "kind": kind}
    if margin == 0.0:
        verdict = "borderline: strict by the projective-space residual checks"
    elif margin < 0.0:
        verdict = "pass"
    else:
        verdict = "fail"
    return MarginReport("cross", values, {"margin": 0.0}, verdict)


def margins_product_q(grid_points=2001, samples=10000, seed=0,
                      surfaces=None):
    """Grid minimum of q(theta, phi), closed-form agreement, and pointwise
    negativity of the wedge integrand on S^1 x S^{n-1} for n = 3, 4."""
    t = np.linspace(0.0, np.pi, grid_points)
    th, ph = np.meshgrid(t, t, indexing="ij")
    qv = q_closed_form(th, ph)
    i_min = np.unravel_index(np.argmin(qv), qv.shape)
    rng = np.random.default_rng(seed)
    ths = rng.uniform(0, np.pi, samples)
    phs = rng.uniform(0, np.pi, samples)
    agree = float(
        np.abs(q_closed_form(ths, phs) - q_defining_expression(ths, phs)).max()
    )
    values = {
        "q_min": float(qv[i_min]),
        "argmin_theta": float(t[i_min[0]]),
        "argmin_phi": float(t[i_min[1]]),
        "closed_form_agreement": agree,
    }
    if surfaces is None:
        from .hypersurface import circle_times_equator
        surfaces = [circle_times_equator(n, 14) for n in (3, 4)]
    for surf in surfaces:
        from .hodge import harmonic_one_forms

        form = harmonic_one_forms(surf)[0]
        integrand = _rhs_integrand(surf, form, "Prop32")
        ok = surf.node_fields()["interior"]
        values[f"integrand_max_{surf.name}"] = float(integrand[ok].max())
    ok_verdict = (
        abs(values["q_min"] - 0.875) < 1e-6
        and agree < 1e-12
        and all(v < 0 for k, v in values.items() if k.startswith("integrand_max"))
    )
    return MarginReport(
        "product_q", values,
        {"q_min": 0.875, "closed_form_agreement": 1e-12, "integrand_max": 0.0},
        "pass" if ok_verdict else "fail",
    )


def margins_convex(ambient, samples=400, seed=0):
    """Pointwise pinching of a convex hypersurface of Euclidean space:
    ratio k_{n+1}/k_1 against sqrt((n+1)/2) (and sqrt(5/3) for n = 2), and
    the margin 4 k_{n+1}^2 - 2(n+1) k_1^2."""
    if not isinstance(ambient, EllipsoidModel):
        raise BoundsError("the convex margin needs an ellipsoid ambient")
    rng = np.random.default_rng(seed)
    n = ambient.intrinsic_dim - 1
    ratio_max = 0.0
    margin_max = -np.inf
    for _ in range(samples):
        p = ambient.random_point(rng)
        k = ambient.principal_curvatures(p)
        ratio_max = max(ratio_max, k[-1] / k[0])
        margin_max = max(margin_max, 4 * k[-1] ** 2 - 2 * (n + 1) * k[0] ** 2)
    thresholds = {"ratio": math.sqrt((n + 1) / 2.0)}
    if n == 2:
        thresholds["ratio_refined"] = math.sqrt(5.0 / 3.0)
    values = {"ratio_max": ratio_max, "margin_max": margin_max,
              "semi_axes": list(map(float, ambient.semi_axes))}
    passes = ratio_max < thresholds["ratio"]
    if n == 2:
        passes = passes or ratio_max < thresholds["ratio_refined"]
    return MarginReport("convex", values, thresholds,
                        "pass" if passes else "fail")


def margins_scalar3(ambient, samples=200, seed=0):
    """Scalar-curvature condition 2 R - |H|^2 > 0 and the contraction identity
    R = |H|^2 - |II|^2 on random samples of the ambient embedding."""
    rng = np.random.default_rng(seed)
    min_margin = np.inf
    max_contraction = 0.0
    for _ in range(samples):
        p = ambient.random_point(rng)
        R = ambient.scalar_curvature(p)
        H = ambient.mean_curvature_vector(p)
        ii_sq = ambient.ii_total_norm_sq(p)
        min_margin = min(min_margin, 2.0 * R - float(H @ H))
        max_contraction = max(
            max_contraction, abs(R - (float(H @ H) - ii_sq))
        )
    values = {"min_2R_minus_H2": float(min_margin),
              "contraction_residual": float(max_contraction)}
    verdict = "pass" if min_margin > 0 and max_contraction < 1e-8 else "fail"
    return MarginReport("scalar3", values,
                        {"margin": 0.0, "contraction": 1e-8}, verdict)


def application_margins(application, target=None, **kwargs):
    """Dispatch to the per-application margin evaluations."""
    if application == "sphere":
        surface, form = target
        return margins_sphere(surface, form)
    if application == "cross":
        return margins_cross(target)
    if application == "product_q":
        return margins_product_q(**kwargs)
    if application == "convex":
        return margins_convex(target, **kwargs)
    if application == "scalar3":
        return margins_scalar3(target, **kwargs)
    raise BoundsError(f"unknown application {application!r}")


# ---------------------------------------------------------------------------
# borderline complex-projective residuals

def borderline_cp_report(surface, f_fn=None, step_factor=1e-3):
    """Residuals of the computable borderline lemmas on a minimal hypersurface
    of a complex projective ambient, for omega-sharp = f JN.

    Derivatives use central differences with a step tied to the mesh spacing,
    so the residuals decay under refinement.
    """
    model = surface.ambient
    if not isinstance(model, ComplexProjectiveVeroneseModel):
        raise BoundsError("the borderline report needs a complex projective ambient")
    if f_fn is None:
        f_fn = lambda p: np.ones(p.shape[:-1])

    from .hypersurface import chart_jacobian, orthonormal_frames

    params = surface.node_params
    h_min = min(ax.h for ax in surface.axes)
    step = step_factor * h_min

    def z_of(p):
        return model.point_from_homogeneous(surface.model_point_fn(p))

    def jn_field(p):
        z = z_of(p)
        normal = surface.normal_fn(p)
        v = model.horizontal_from_ambient(z, normal)
        return model.tangent_from_horizontal(z, 1j * v)

    def omega_sharp_field(p):
        return f_fn(p)[..., None] * jn_field(p)

    jac = chart_jacobian(surface.chart_fn, params, step)
    frames, coeffs, ok = orthonormal_frames(jac)

    def frame_derivative(field_fn):
        d = chart_jacobian(field_fn, params, step)
        return np.einsum("nab,nbd->nad", coeffs, d)

    def tangential(v):  # project (n, a, d) onto the surface tangent space
        comp = np.einsum("nad,nbd->nab", v, frames)
        return np.einsum("nab,nbd->nad", comp, frames)

    # (i) divergence of JN
    d_jn = frame_derivative(jn_field)
    div_jn = np.einsum("nad,nad->n", d_jn, frames)
    div_residual = float(np.abs(div_jn[ok]).max())

    # (ii) norm decomposition |grad_X (f JN)|^2 = |X f|^2 + f^2 |grad_X JN|^2
    f_vals = f_fn(params)
    df = np.empty(params.shape)
    for i in range(params.shape[-1]):
        e = np.zeros(params.shape[-1])
        e[i] = step
        df[:, i] = (f_fn(params + e) - f_fn(params - e)) / (2.0 * step)
    xf = np.einsum("nab,nb->na", coeffs, df)
    d_omega = tangential(frame_derivative(omega_sharp_field))
    d_jn_t = tangential(d_jn)
    lhs = np.einsum("nad,nad->na", d_omega, d_omega)
    rhs = xf**2 + (f_vals**2)[:, None] * np.einsum(
        "nad,nad->na", d_jn_t, d_jn_t
    )
    decomposition_residual = float(np.abs(lhs - rhs)[ok].max())

    # (iii) traced Gauss with U = JN: Ric(U,U) - Rm(U,N,U,N) must equal 2m-2
    rng = np.random.default_rng(0)
    idx = rng.choice(np.flatnonzero(ok), size=min(200, int(ok.sum())),
                     replace=False)
    jn_nodes = jn_field(params)
    target = 2.0 * model.m - 2.0
    gauss_res = 0.0
    for i in idx:
        z = z_of(params[i])
        ric = model.ricci(z, jn_nodes[i])
        rm = model.riemann_xyxy(z, jn_nodes[i], surface.normals[i])
        gauss_res = max(gauss_res, abs(ric - rm - target))

    return {
        "surface": surface.name,
        "div_jn_residual": div_residual,
        "decomposition_residual": decomposition_residual,
        "traced_gauss_residual": float(gauss_res),
        "step": step,
    }
