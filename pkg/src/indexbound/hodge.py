"""Harmonic one-forms on discrete hypersurfaces.

For two-dimensional surfaces the basis comes from the kernel of a lowest-order
edge-element (Whitney) one-form Laplacian on the triangulated grid; in higher
dimensions the catalog surfaces carry their harmonic forms in closed form
(circle-factor forms dt).  Also provides the surface Hodge star and the
integrated Bochner identity residual used to reject non-harmonic probes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class HodgeError(Exception):
    pass


@dataclass
class DiscreteOneForm:
    """A one-form sampled at grid nodes through its frame components."""

    surface: object
    components: np.ndarray  # (n_nodes, n) values omega(e_k)
    provenance: str  # 'analytic-catalog' or 'hodge-solver'

    def __post_init__(self):
        if not np.all(np.isfinite(self.components)):
            raise HodgeError("one-form has non-finite components")

    @property
    def sharp(self):
        """Ambient vectors of the metric dual, (n_nodes, d)."""
        frames = self.surface.node_fields()["frames"]
        return np.einsum("na,nad->nd", self.components, frames)

    @property
    def norm_sq(self):
        return np.einsum("na,na->n", self.components, self.components)

    def l2_inner(self, other):
        fem = self.surface.fem()
        vals = np.einsum("na,na->n", self.components, other.components)
        return fem.integrate(fem.to_dof(vals))

    def l2_norm_sq(self):
        return self.l2_inner(self)

    def scaled(self, c):
        return DiscreteOneForm(self.surface, c * self.components, self.provenance)


def combine(basis, coefficients):
    """Linear combination of one-forms over a shared surface."""
    if len(basis) != len(coefficients):
        raise HodgeError("coefficient count does not match basis size")
    comp = sum(c * w.components for c, w in zip(coefficients, basis))
    return DiscreteOneForm(basis[0].surface, comp, basis[0].provenance)


def _orthonormalize(basis):
    out = []
    for w in basis:
        comp = w.components.copy()
        for u in out:
            comp = comp - u.l2_inner(
                DiscreteOneForm(w.surface, comp, w.provenance)
            ) * u.components
        cand = DiscreteOneForm(w.surface, comp, w.provenance)
        nrm = np.sqrt(cand.l2_norm_sq())
        if nrm < 1e-10:
            raise HodgeError("harmonic basis is numerically dependent")
        out.append(cand.scaled(1.0 / nrm))
    return out


def one_form_from_sharp(surface, sharp_nodes, provenance="analytic-catalog"):
    """Frame components of a one-form given its ambient metric dual at nodes."""
    frames = surface.node_fields()["frames"]
    comp = np.einsum("nad,nd->na", frames, np.asarray(sharp_nodes))
    return DiscreteOneForm(surface, comp, provenance)


def gradient_one_form(surface, f_fn, step=None):
    """df for a scalar function of the grid parameters (non-harmonic probe)."""
    params = surface.node_params
    step = step or surface.fd_step
    k = params.shape[-1]
    df = np.empty(params.shape)
    for i in range(k):
        e = np.zeros(k)
        e[i] = step
        df[:, i] = (f_fn(params + e) - f_fn(params - e)) / (2.0 * step)
    _, C, _ = _frames_with_coeffs(surface)
    comp = np.einsum("nai,ni->na", C, df)
    return DiscreteOneForm(surface, comp, "analytic-catalog")


def _frames_with_coeffs(surface):
    from .hypersurface import chart_jacobian, orthonormal_frames

    jac = chart_jacobian(surface.chart_fn, surface.node_params, surface.fd_step)
    frames, coeffs, ok = orthonormal_frames(jac)
    return frames, coeffs, ok


# ---------------------------------------------------------------------------
# Whitney edge-element solver (surfaces only)

def _triangulate(surface):
    """Split the fine node lattice into triangles on fused vertex labels.

    Returns (triangles, tri_params): vertex triples into DOF labels and the
    parameter coordinates of their corners (seam-consistent).
    """
    grid = surface.grid
    fem = surface.fem()
    shape = grid.shape
    fuse = fem.fuse
    ii, jj = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")

    def nid(i, j):
        ax0, ax1 = grid.axes
        i = i % shape[0] if ax0.periodic else i
        j = j % shape[1] if ax1.periodic else j
        return np.ravel_multi_index((i, j), shape)

    tris, params = [], []
    ax0, ax1 = grid.axes
    i_max = shape[0] if ax0.periodic else shape[0] - 1
    j_max = shape[1] if ax1.periodic else shape[1] - 1
    p = grid.node_params.reshape(shape + (2,))
    h0 = ax0.length / (shape[0] if ax0.periodic else shape[0] - 1)
    h1 = ax1.length / (shape[1] if ax1.periodic else shape[1] - 1)
    for i in range(i_max):
        for j in range(j_max):
            base = p[i, j]
            corners = {
                (0, 0): base,
                (1, 0): base + [h0, 0.0],
                (0, 1): base + [0.0, h1],
                (1, 1): base + [h0, h1],
            }
            ids = {off: fuse[nid(i + off[0], j + off[1])] for off in corners}
            for tri in [((0, 0), (1, 0), (1, 1)), ((0, 0), (1, 1), (0, 1))]:
                vs = [ids[o] for o in tri]
                if len(set(vs)) < 3:
                    continue  # degenerate at a fused pole
                tris.append(vs)
                params.append([corners[o] for o in tri])
    return np.asarray(tris), np.asarray(params)


def _whitney_matrices(surface):
    """d0, d1, M0 (lumped), M1, M2 on the triangulated fused mesh."""
    tris, tparams = _triangulate(surface)
    n_v = surface.fem().n_dofs

    # edge table
    edges = {}
    tri_edges = np.empty(tris.shape, dtype=np.int64)
    tri_signs = np.empty(tris.shape)
    for t, tri in enumerate(tris):
        for k, (a, b) in enumerate([(0, 1), (1, 2), (2, 0)]):
            va, vb = tri[a], tri[b]
            key = (min(va, vb), max(va, vb))
            if key not in edges:
                edges[key] = len(edges)
            tri_edges[t, k] = edges[key]
            tri_signs[t, k] = 1.0 if va < vb else -1.0
    n_e = len(edges)

    d0 = sp.lil_matrix((n_e, n_v))
    for (a, b), e in edges.items():
        d0[e, a] = -1.0
        d0[e, b] = 1.0
    d0 = d0.tocsr()

    d1 = sp.lil_matrix((len(tris), n_e))
    for t in range(len(tris)):
        for k in range(3):
            d1[t, tri_edges[t, k]] += tri_signs[t, k]
    d1 = d1.tocsr()

    # per-triangle metric from the surface chart at the centroid
    cent = tparams.mean(axis=1)
    g = surface.metric_fn(cent)  # (T, 2, 2)
    ginv = np.linalg.inv(g)
    detg = np.linalg.det(g)
    E = tparams[:, 1:, :] - tparams[:, :1, :]  # (T, 2, 2) edge param vectors
    area_param = 0.5 * np.abs(np.linalg.det(E))
    area = area_param * np.sqrt(detg)

    # barycentric gradients as parameter covectors: rows of inverse(E)^T
    Einv = np.linalg.inv(E)
    grad12 = np.swapaxes(Einv, -1, -2)  # (T, 2 funcs lambda_1,2, 2 comps)
    grad0 = -grad12.sum(axis=1, keepdims=True)
    grads = np.concatenate([grad0, grad12], axis=1)  # (T, 3, 2)

    # Whitney one-forms at edge midpoints; 3-midpoint rule is exact here
    lam_mid = np.array(
        [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]
    )  # (q, vertex)
    edge_verts = [(0, 1), (1, 2), (2, 0)]
    W = np.empty((len(tris), 3, 3, 2))  # (T, q, edge, comp)
    for k, (a, b) in enumerate(edge_verts):
        W[:, :, k, :] = (
            lam_mid[None, :, a, None] * grads[:, None, b, :]
            - lam_mid[None, :, b, None] * grads[:, None, a, :]
        )
    inner = np.einsum("tqac,tcd,tqbd->tqab", W, ginv, W)
    M1_loc = (area[:, None, None] / 3.0) * inner.sum(axis=1)
    M1_loc *= tri_signs[:, :, None] * tri_signs[:, None, :]

    rows = np.repeat(tri_edges[:, :, None], 3, axis=2).ravel()
    cols = np.repeat(tri_edges[:, None, :], 3, axis=1).ravel()
    M1 = sp.coo_matrix((M1_loc.ravel(), (rows, cols)), shape=(n_e, n_e)).tocsr()

    M0 = np.zeros(n_v)
    for t, tri in enumerate(tris):
        M0[tri] += area[t] / 3.0
    M0 = sp.diags(M0)

    M2 = sp.diags(1.0 / area)
    return d0, d1, M0, M1, M2, edges, tris, tparams, grads, area


def _edge_cochain_to_nodes(surface, mats, omega_e):
    """Whitney evaluation of an edge cochain at the vertices, averaged over
    incident triangles, returned as frame components at grid nodes."""
    d0, d1, M0, M1, M2, edges, tris, tparams, grads, area = mats
    fem = surface.fem()
    n_v = fem.n_dofs
    cov = np.zeros((n_v, 2))
    wsum = np.zeros(n_v)
    edge_verts = [(0, 1), (1, 2), (2, 0)]
    edge_idx = np.empty((len(tris), 3), dtype=np.int64)
    sign = np.empty((len(tris), 3))
    for t, tri in enumerate(tris):
        for k, (a, b) in enumerate(edge_verts):
            va, vb = tri[a], tri[b]
            edge_idx[t, k] = edges[(min(va, vb), max(va, vb))]
            sign[t, k] = 1.0 if va < vb else -1.0
    vals = omega_e[edge_idx] * sign  # oriented values per local edge
    for corner in range(3):
        # lambda_corner = 1 there; W_(ab) evaluates to +/- grad of the other vertex
        contrib = np.zeros((len(tris), 2))
        for k, (a, b) in enumerate(edge_verts):
            if a == corner:
                contrib += vals[:, k, None] * grads[:, b, :]
            elif b == corner:
                contrib -= vals[:, k, None] * grads[:, a, :]
        v = tris[:, corner]
        np.add.at(cov, v, contrib * (area[:, None] / 3.0))
        np.add.at(wsum, v, area / 3.0)
    cov /= wsum[:, None]

    # parameter covector -> frame components via the frame coefficient matrix
    _, C, _ = _frames_with_coeffs(surface)
    cov_nodes = cov[fem.fuse]
    comp = np.einsum("nai,ni->na", C, cov_nodes)
    return comp


def harmonic_one_forms(surface, num_probe=6):
    """L2-orthonormal basis of harmonic one-forms on a catalog hypersurface."""
    if surface.dim == 2:
        return _harmonic_forms_whitney(surface, num_probe)
    return _harmonic_forms_catalog(surface)


def _harmonic_forms_whitney(surface, num_probe):
    mats = _whitney_matrices(surface)
    d0, d1, M0, M1, M2 = mats[:5]
    M0_inv = sp.diags(1.0 / M0.diagonal())
    A = (d1.T @ M2 @ d1 + M1 @ d0 @ M0_inv @ d0.T @ M1).tocsc()
    A = 0.5 * (A + A.T)
    k = max(num_probe, surface.betti_one + 2)
    vals, vecs = spla.eigsh(A, k=k, M=M1.tocsc(), sigma=-0.05)
    order = np.argsort(vals)
    vals, vecs = np.abs(vals[order]), vecs[:, order]

    # rank decision at relative eigenvalue gap 1e6 below the top of the window
    threshold = vals[-1] / 1e6
    kernel_dim = int(np.sum(vals < threshold))
    if kernel_dim != surface.betti_one:
        raise HodgeError(
            f"discrete Hodge kernel dimension {kernel_dim} does not match "
            f"the expected first Betti number {surface.betti_one} "
            f"(eigenvalues {vals[:4]})"
        )
    basis = [
        DiscreteOneForm(
            surface,
            _edge_cochain_to_nodes(surface, mats, vecs[:, i]),
            "hodge-solver",
        )
        for i in range(kernel_dim)
    ]
    return _orthonormalize(basis)


def _harmonic_forms_catalog(surface):
    """Closed-form harmonic forms for higher-dimensional catalog kinds."""
    name = surface.name
    if surface.betti_one == 0:
        return []
    if name.startswith("generalized_clifford") or name.startswith(
        "circle_times_equator"
    ):
        # the circle-factor form d(alpha); its dual is the circle direction
        # scaled by one over the squared circle speed
        from .hypersurface import chart_jacobian

        params = surface.node_params
        jac = chart_jacobian(surface.chart_fn, params, surface.fd_step)
        dalpha_vec = jac[:, 0, :]
        r_sq = np.einsum("nd,nd->n", dalpha_vec, dalpha_vec)
        sharp = dalpha_vec / r_sq[:, None]
        form = one_form_from_sharp(surface, sharp)
        return _orthonormalize([form])
    raise HodgeError(f"no harmonic-form catalog entry for surface {name!r}")


def hodge_star_surface(surface, form):
    """Surface Hodge star in the positively oriented node frame."""
    if surface.dim != 2:
        raise HodgeError("the surface star is defined only for n = 2")
    c = form.components
    starred = np.stack([-c[:, 1], c[:, 0]], axis=-1)
    return DiscreteOneForm(surface, starred, form.provenance)


# ---------------------------------------------------------------------------
# Bochner residual

def _grid_gradient(surface, node_field):
    """Parameter-direction central differences of a per-node array,
    shape (n_nodes, n_axes) + field shape."""
    grid = surface.grid
    shape = grid.shape
    f = np.asarray(node_field).reshape(shape + node_field.shape[1:])
    out = []
    for ax_i, ax in enumerate(grid.axes):
        h = ax.length / (shape[ax_i] if ax.periodic else shape[ax_i] - 1)
        if ax.periodic:
            d = (np.roll(f, -1, axis=ax_i) - np.roll(f, 1, axis=ax_i)) / (2 * h)
        else:
            d = np.gradient(f, h, axis=ax_i)
        out.append(d.reshape((grid.n_nodes,) + node_field.shape[1:]))
    return np.stack(out, axis=1)


def _ricci_m(surface, U):
    """Intrinsic Ricci Ric^M(U, U) at the nodes via the traced Gauss identity
    for minimal hypersurfaces."""
    from .ambient import SphereModel, _ProductSphereModel

    fields = surface.node_fields()
    frames = fields["frames"]
    A = fields["shape_operator"]
    N = surface.normals
    Uf = np.einsum("nad,nd->na", frames, U)  # frame components of U
    a_u_sq = np.einsum("nab,nb,nac,nc->n", A, Uf, A, Uf)

    model = surface.ambient
    if isinstance(model, SphereModel):
        u_sq = np.einsum("nd,nd->n", U, U)
        ric_n = model.einstein_constant * u_sq
        rm_unun = u_sq  # sectional curvature one, U tangent to M so U ⟂ N
    elif isinstance(model, _ProductSphereModel):
        U2 = U[:, model.split:]
        N2 = N[:, model.split:]
        d2 = model.intrinsic_dim - model.dim1
        ric_n = (d2 - 1) * np.einsum("nd,nd->n", U2, U2)
        if model.dim1 >= 2:
            U1 = U[:, : model.split]
            ric_n += (model.dim1 - 1) * np.einsum("nd,nd->n", U1, U1)
        rm_unun = (
            np.einsum("nd,nd->n", U2, U2) * np.einsum("nd,nd->n", N2, N2)
            - np.einsum("nd,nd->n", U2, N2) ** 2
        )
        if model.dim1 >= 2:
            U1, N1 = U[:, : model.split], N[:, : model.split]
            rm_unun += (
                np.einsum("nd,nd->n", U1, U1) * np.einsum("nd,nd->n", N1, N1)
                - np.einsum("nd,nd->n", U1, N1) ** 2
            )
    else:
        ric_n = np.empty(len(U))
        rm_unun = np.empty(len(U))
        for i in range(len(U)):
            if np.linalg.norm(U[i]) < 1e-14:
                ric_n[i] = rm_unun[i] = 0.0
                continue
            pt = surface.model_point_fn(surface.node_params[i])
            ric_n[i] = model.ricci(pt, U[i])
            rm_unun[i] = model.riemann_xyxy(pt, U[i], N[i])
    return ric_n - rm_unun - a_u_sq


def bochner_residual(surface, form):
    """| ∫|∇ω|² + ∫Ric^M(ω♯, ω♯) | / ∫|ω|² — near zero exactly for harmonic ω."""
    fem = surface.fem()
    fields = surface.node_fields()
    frames = fields["frames"]
    ok = fields["interior"]
    _, C, _ = _frames_with_coeffs(surface)

    sharp = form.sharp
    dsharp = _grid_gradient(surface, sharp)  # (n, axes, d)
    along_frame = np.einsum("nab,nbd->nad", C, dsharp)
    proj = np.einsum("nad,nbd->nab", along_frame, frames)
    grad_sq = np.einsum("nab,nab->n", proj, proj)

    ric_term = _ricci_m(surface, sharp)
    grad_sq = np.where(ok, grad_sq, 0.0)
    ric_term = np.where(ok, ric_term, 0.0)

    num = fem.integrate(fem.to_dof(grad_sq)) + fem.integrate(fem.to_dof(ric_term))
    den = fem.integrate(fem.to_dof(np.where(ok, form.norm_sq, 0.0)))
    return abs(num) / den
