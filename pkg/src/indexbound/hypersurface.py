"""Discrete closed minimal hypersurfaces inside the ambient models.

A hypersurface is described by a chart from a structured parameter grid into
the ambient embedding space, together with a unit normal field (tangent to the
ambient manifold) and the stability potential Ric(N, N) + |A|^2.  Geometry at
the nodes — orthonormal tangent frames, the shape operator, curvature traces —
is recovered by small-step central differences of the chart, which keeps every
catalog entry expressible in closed form.
"""

from __future__ import annotations

import io

import numpy as np
from scipy.optimize import brentq

from .ambient import (
    AmbientError,
    CircleTimesSphereModel,
    ComplexProjectiveVeroneseModel,
    EllipsoidModel,
    RealProjectiveModel,
    SphereModel,
    make_ambient,
)
from .elements import Axis, FemSystem, TensorGrid


# ---------------------------------------------------------------------------
# spherical charts

def spherical_chart(angles):
    """Standard angular chart of S^k: (..., k) angles -> (..., k+1) unit vectors.

    The first k-1 angles run over [0, pi] and the last over [0, 2 pi).
    """
    angles = np.asarray(angles)
    k = angles.shape[-1]
    out = np.empty(angles.shape[:-1] + (k + 1,))
    sin_prod = np.ones(angles.shape[:-1])
    for i in range(k):
        out[..., i] = sin_prod * np.cos(angles[..., i])
        sin_prod = sin_prod * np.sin(angles[..., i])
    out[..., k] = sin_prod
    return out


def spherical_metric(angles):
    """Round metric of S^k in the angular chart, (..., k, k) diagonal."""
    angles = np.asarray(angles)
    k = angles.shape[-1]
    g = np.zeros(angles.shape[:-1] + (k, k))
    diag = np.ones(angles.shape[:-1])
    for i in range(k):
        g[..., i, i] = diag
        diag = diag * np.sin(angles[..., i]) ** 2
    return g


def spherical_axes(k, nodes):
    axes = [Axis(f"theta{i + 1}", np.pi, nodes) for i in range(k - 1)]
    axes.append(Axis("phi", 2.0 * np.pi, nodes, periodic=True))
    return axes


# ---------------------------------------------------------------------------
# batched differential geometry of a chart

def chart_jacobian(fn, params, step):
    """Central-difference parameter derivatives of a batched map,
    shape (..., k, out_dim)."""
    params = np.asarray(params, dtype=float)
    k = params.shape[-1]
    cols = []
    for i in range(k):
        e = np.zeros(k)
        e[i] = step
        cols.append((fn(params + e) - fn(params - e)) / (2.0 * step))
    return np.stack(cols, axis=-2)


def orthonormal_frames(jac, tol=1e-10):
    """Row-wise Gram-Schmidt of chart Jacobians.

    Returns (frames, coeffs, ok) with frames = coeffs @ jac orthonormal;
    `ok` is False where the Jacobian is numerically degenerate.
    """
    jac = np.asarray(jac)
    k = jac.shape[-2]
    frames = np.zeros_like(jac)
    coeffs = np.zeros(jac.shape[:-1] + (k,))
    ok = np.ones(jac.shape[:-2], dtype=bool)
    for a in range(k):
        v = jac[..., a, :].copy()
        c = np.zeros(jac.shape[:-2] + (k,))
        c[..., a] = 1.0
        for b in range(a):
            proj = np.einsum("...d,...d->...", frames[..., b, :], v)
            v -= proj[..., None] * frames[..., b, :]
            c -= proj[..., None] * coeffs[..., b, :]
        nv = np.linalg.norm(v, axis=-1)
        ok &= nv > tol
        nv_safe = np.where(nv > tol, nv, 1.0)
        frames[..., a, :] = v / nv_safe[..., None]
        coeffs[..., a, :] = c / nv_safe[..., None]
    return frames, coeffs, ok


class DiscreteHypersurface:
    """A closed minimal hypersurface sampled on a structured parameter grid."""

    def __init__(self, name, ambient, axes, chart_fn, normal_fn,
                 metric_fn=None, potential_fn=None, model_point_fn=None,
                 betti_one=0, fd_step_frac=1e-6):
        self.name = name
        self.ambient = ambient
        self.axes = list(axes)
        self.chart_fn = chart_fn
        self.normal_fn = normal_fn
        self._metric_fn = metric_fn
        self._potential_fn = potential_fn
        self.model_point_fn = model_point_fn or (lambda p: chart_fn(p))
        self.betti_one = int(betti_one)
        self.fd_step = fd_step_frac * min(a.length for a in self.axes)

        self.grid = TensorGrid(self.axes)
        self.node_params = self.grid.node_params
        self.positions = chart_fn(self.node_params)
        self.normals = normal_fn(self.node_params)
        self._fem = None
        self._fields = None

    # -- dimensions -----------------------------------------------------------
    @property
    def dim(self):
        return len(self.axes)

    @property
    def embed_dim(self):
        return self.ambient.embed_dim

    def with_resolution(self, scale):
        """A re-sampled copy with node counts multiplied by `scale`."""
        axes = [
            Axis(a.name, a.length, max(4, int(round(a.nodes * scale))),
                 periodic=a.periodic, lo=a.lo)
            for a in self.axes
        ]
        return DiscreteHypersurface(
            self.name, self.ambient, axes, self.chart_fn, self.normal_fn,
            metric_fn=self._metric_fn, potential_fn=self._potential_fn,
            model_point_fn=self.model_point_fn, betti_one=self.betti_one,
        )

    # -- chart-derived fields -------------------------------------------------
    def metric_fn(self, params):
        if self._metric_fn is not None:
            return self._metric_fn(params)
        jac = chart_jacobian(self.chart_fn, params, self.fd_step)
        return np.einsum("...ad,...bd->...ab", jac, jac)

    def potential_fn(self, params):
        if self._potential_fn is not None:
            return self._potential_fn(params)
        raise AmbientError(
            f"surface {self.name!r} has no closed-form potential; "
            "use node_fields()['potential_generic']"
        )

    def fem(self):
        if self._fem is None:
            pot = self._potential_fn
            self._fem = FemSystem(
                self.grid, self.metric_fn, potential_fn=pot,
                positions=self.positions,
            )
        return self._fem

    def node_fields(self):
        """Frames, shape operator, and potential ingredients at grid nodes.

        Chart-degenerate nodes (poles, seams) are flagged in 'interior' and
        carry zeros in the derived tensors.
        """
        if self._fields is not None:
            return self._fields
        jac = chart_jacobian(self.chart_fn, self.node_params, self.fd_step)
        frames, coeffs, ok = orthonormal_frames(jac)
        njac = chart_jacobian(self.normal_fn, self.node_params, self.fd_step)
        dn = np.einsum("...ab,...bd->...ad", coeffs, njac)
        A = -np.einsum("...ad,...bd->...ab", dn, frames)
        a_sym = 0.5 * (A + np.swapaxes(A, -1, -2))
        fields = {
            "jacobian": jac,
            "frames": frames,
            "interior": ok,
            "shape_operator": np.where(ok[..., None, None], a_sym, 0.0),
            "shape_asymmetry": np.where(
                ok, np.abs(A - np.swapaxes(A, -1, -2)).max(axis=(-1, -2)), 0.0
            ),
        }
        fields["a_norm_sq"] = np.einsum(
            "...ab,...ab->...", fields["shape_operator"], fields["shape_operator"]
        )
        fields["mean_curvature"] = np.einsum(
            "...aa->...", fields["shape_operator"]
        )
        self._fields = fields
        return fields

    def ric_nn(self, node_indices):
        """Ambient Ricci in the normal direction at selected nodes (loop-based)."""
        out = np.empty(len(node_indices))
        for j, i in enumerate(node_indices):
            point = self.model_point_fn(self.node_params[i])
            out[j] = self.ambient.ricci(point, self.normals[i])
        return out

    def pointwise_checks(self, sample=200, seed=0):
        """Max residuals of the defining properties at interior nodes."""
        f = self.node_fields()
        ok = f["interior"]
        res = {}
        res["normal_unit"] = float(
            np.abs(np.linalg.norm(self.normals, axis=-1) - 1.0).max()
        )
        res["normal_vs_frame"] = float(
            np.abs(
                np.einsum("...ad,...d->...a", f["frames"], self.normals)[ok]
            ).max()
        )
        # normal must be tangent to the ambient manifold
        rng = np.random.default_rng(seed)
        idx = np.flatnonzero(ok)
        idx = rng.choice(idx, size=min(sample, len(idx)), replace=False)
        tang = max(
            self.ambient.tangency_residual(
                self.model_point_fn(self.node_params[i]), self.normals[i]
            )
            for i in idx
        )
        res["normal_ambient_tangency"] = float(tang)
        res["shape_asymmetry"] = float(f["shape_asymmetry"][ok].max())
        res["minimality"] = float(np.abs(f["mean_curvature"][ok]).max())
        if self._metric_fn is not None:
            g_an = self._metric_fn(self.node_params[ok])
            g_fd = np.einsum(
                "...ad,...bd->...ab", f["jacobian"][ok], f["jacobian"][ok]
            )
            res["metric_consistency"] = float(np.abs(g_an - g_fd).max())
        if self._potential_fn is not None:
            pot = np.atleast_1d(self.potential_fn(self.node_params[idx]))
            if pot.shape == ():
                pot = np.full(len(idx), float(pot))
            generic = self.ric_nn(idx) + f["a_norm_sq"][idx]
            res["potential_consistency"] = float(np.abs(pot - generic).max())
        return res

    # -- plain-text mesh dump -------------------------------------------------
    def mesh_dump(self):
        """Node / cell / weight table as plain text."""
        fem = self.fem()
        buf = io.StringIO()
        k, d = self.dim, self.embed_dim
        buf.write(f"# surface {self.name}\n")
        buf.write(f"# nodes {self.grid.n_nodes} dofs {fem.n_dofs} "
                  f"dim {k} embed {d}\n")
        buf.write("# node: index dof param_1..param_k x_1..x_d weight\n")
        wnode = fem.node_weights[fem.fuse]
        for i in range(self.grid.n_nodes):
            p = " ".join(f"{v:.12g}" for v in self.node_params[i])
            x = " ".join(f"{v:.12g}" for v in self.positions[i])
            buf.write(f"node {i} {fem.fuse[i]} {p} {x} {wnode[i]:.12g}\n")
        buf.write("# cell: index node_indices\n")
        for c, conn in enumerate(self.grid.cell_connectivity()):
            buf.write("cell %d %s\n" % (c, " ".join(map(str, conn))))
        return buf.getvalue()


# ---------------------------------------------------------------------------
# double covers

class DoubleCoverLift:
    """Pairing of grid nodes under a free involution of the parameter grid.

    Used to compute spectra of quotient hypersurfaces (projective ambients):
    fields on the quotient correspond to even fields upstairs, while the unit
    normal of a one-sided quotient is odd.
    """

    def __init__(self, surface, involution_fn, tol=1e-9):
        self.surface = surface
        grid = surface.grid
        image = np.asarray(involution_fn(grid.node_params), dtype=float)
        # wrap periodic coordinates back into the box
        for j, ax in enumerate(grid.axes):
            if ax.periodic:
                image[:, j] = ax.lo + np.mod(image[:, j] - ax.lo, ax.length)
        key = {}
        scale = 1.0 / tol
        for i, p in enumerate(grid.node_params):
            key[tuple(np.round(p * scale).astype(np.int64))] = i
        perm = np.empty(grid.n_nodes, dtype=np.int64)
        for i, p in enumerate(image):
            k = tuple(np.round(p * scale).astype(np.int64))
            if k not in key:
                raise ValueError("involution does not map grid nodes to grid nodes")
            perm[i] = key[k]
        if np.any(perm[perm] != np.arange(grid.n_nodes)):
            raise ValueError("map is not an involution on the grid")
        if np.any(perm == np.arange(grid.n_nodes)):
            raise ValueError("involution must be free")
        self.node_permutation = perm

    def parity_split(self, node_field):
        """Even and odd parts of a per-node field (any trailing shape)."""
        f = np.asarray(node_field)
        g = f[self.node_permutation]
        return 0.5 * (f + g), 0.5 * (f - g)

    def classify(self, node_field, tol=1e-8):
        even, odd = self.parity_split(node_field)
        scale = max(float(np.abs(node_field).max()), 1.0)
        if np.abs(odd).max() <= tol * scale:
            return "even"
        if np.abs(even).max() <= tol * scale:
            return "odd"
        return "mixed"

    def descend(self, node_field, tol=1e-8):
        """Values of an even field on the quotient, one per node pair.

        Raises ValueError for fields that are not even: they do not descend.
        """
        if self.classify(node_field, tol) != "even":
            raise ValueError("field is odd or mixed; it does not descend")
        keep = np.arange(len(self.node_permutation)) < self.node_permutation
        return np.asarray(node_field)[keep]

    def dof_permutation(self, fem):
        """The involution acting on fused DOFs."""
        perm = np.empty(fem.n_dofs, dtype=np.int64)
        perm[fem.fuse] = fem.fuse[self.node_permutation]
        return perm

    def odd_projector(self, fem):
        """Columns spanning the odd subspace at DOF level, (n_dofs, n_odd)."""
        import scipy.sparse as sp

        perm = self.dof_permutation(fem)
        rows, cols, vals = [], [], []
        col = 0
        for i in range(fem.n_dofs):
            j = perm[i]
            if j <= i:
                continue
            rows += [i, j]
            cols += [col, col]
            vals += [1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)]
            col += 1
        return sp.coo_matrix((vals, (rows, cols)), shape=(fem.n_dofs, col)).tocsr()


# ---------------------------------------------------------------------------
# catalog

def clifford_torus(nodes=96, ambient=None):
    """The square torus S^1(1/sqrt2) x S^1(1/sqrt2) inside S^3 (or its image
    in RP^3 when handed a projective ambient)."""
    model = ambient or make_ambient("sphere", dim=3)
    r = 1.0 / np.sqrt(2.0)

    def chart(p):
        u, v = p[..., 0], p[..., 1]
        return np.stack(
            [np.cos(u), np.sin(u), np.cos(v), np.sin(v)], axis=-1
        ) * r

    def normal(p):
        u, v = p[..., 0], p[..., 1]
        return np.stack(
            [np.cos(u), np.sin(u), -np.cos(v), -np.sin(v)], axis=-1
        ) * r

    def metric(p):
        g = np.zeros(p.shape[:-1] + (2, 2))
        g[..., 0, 0] = 0.5
        g[..., 1, 1] = 0.5
        return g

    axes = [
        Axis("u", 2 * np.pi, nodes, periodic=True),
        Axis("v", 2 * np.pi, nodes, periodic=True),
    ]
    return DiscreteHypersurface(
        "clifford_torus", model, axes, chart, normal,
        metric_fn=metric, potential_fn=lambda p: np.full(p.shape[:-1], 4.0),
        betti_one=2,
    )


def clifford_torus_projective(nodes=96):
    """Clifford torus with its projective ambient plus the deck involution."""
    surface = clifford_torus(nodes, ambient=make_ambient("real_projective", dim=3))
    lift = DoubleCoverLift(surface, lambda p: p + np.pi)
    return surface, lift


def equator_in_sphere(n, nodes=32):
    """Totally geodesic S^n inside S^{n+1}; potential is the constant n."""
    model = make_ambient("sphere", dim=n + 1)

    def chart(p):
        x = spherical_chart(p)
        pad = np.zeros(x.shape[:-1] + (1,))
        return np.concatenate([x, pad], axis=-1)

    def normal(p):
        out = np.zeros(p.shape[:-1] + (n + 2,))
        out[..., -1] = 1.0
        return out

    return DiscreteHypersurface(
        f"equator_s{n}", model, spherical_axes(n, nodes), chart, normal,
        metric_fn=spherical_metric,
        potential_fn=lambda p: np.full(p.shape[:-1], float(n)),
        betti_one=0,
    )


def generalized_clifford(n, nodes=24):
    """S^1(r) x S^{n-1}(s) in S^{n+1} with r = 1/sqrt(n); potential 2n."""
    model = make_ambient("sphere", dim=n + 1)
    r = 1.0 / np.sqrt(n)
    s = np.sqrt((n - 1.0) / n)

    def chart(p):
        alpha = p[..., 0]
        w = spherical_chart(p[..., 1:])
        circ = np.stack([np.cos(alpha), np.sin(alpha)], axis=-1) * r
        return np.concatenate([circ, s * w], axis=-1)

    def normal(p):
        alpha = p[..., 0]
        w = spherical_chart(p[..., 1:])
        circ = np.stack([np.cos(alpha), np.sin(alpha)], axis=-1) * s
        return np.concatenate([circ, -r * w], axis=-1)

    def metric(p):
        g = np.zeros(p.shape[:-1] + (n, n))
        g[..., 0, 0] = r**2
        g[..., 1:, 1:] = s**2 * spherical_metric(p[..., 1:])
        return g

    axes = [Axis("alpha", 2 * np.pi, nodes, periodic=True)]
    axes += spherical_axes(n - 1, nodes)
    return DiscreteHypersurface(
        f"generalized_clifford_s1xs{n - 1}", model, axes, chart, normal,
        metric_fn=metric,
        potential_fn=lambda p: np.full(p.shape[:-1], 2.0 * n),
        betti_one=1,
    )


def circle_times_equator(n, nodes=24):
    """S^1 x S^{n-1} sitting in the product ambient S^1 x S^n; the normal
    points along the sphere factor, so the potential is n - 1."""
    model = make_ambient("circle_times_sphere", n=n)

    def chart(p):
        t = p[..., 0]
        w = spherical_chart(p[..., 1:])
        pad = np.zeros(w.shape[:-1] + (1,))
        return np.concatenate(
            [np.stack([np.cos(t), np.sin(t)], axis=-1), w, pad], axis=-1
        )

    def normal(p):
        out = np.zeros(p.shape[:-1] + (n + 3,))
        out[..., -1] = 1.0
        return out

    def metric(p):
        g = np.zeros(p.shape[:-1] + (n, n))
        g[..., 0, 0] = 1.0
        g[..., 1:, 1:] = spherical_metric(p[..., 1:])
        return g

    axes = [Axis("t", 2 * np.pi, nodes, periodic=True)]
    axes += spherical_axes(n - 1, nodes)
    return DiscreteHypersurface(
        f"circle_times_equator_s{n - 1}", model, axes, chart, normal,
        metric_fn=metric,
        potential_fn=lambda p: np.full(p.shape[:-1], n - 1.0),
        betti_one=1,
    )


def minimal_geodesic_sphere_radius(model, lo=0.3, hi=1.3):
    """Radius at which the geodesic sphere about a point is minimal, found by
    root-bracketing on the numerically computed mean curvature."""

    def mean_curv(r):
        surf = geodesic_sphere_cp2(nodes=8, radius=r)
        f = surf.node_fields()
        return float(f["mean_curvature"][f["interior"]].mean())

    return brentq(mean_curv, lo, hi, xtol=1e-10)


def geodesic_sphere_cp2(nodes=24, radius=None):
    """Geodesic sphere of the minimal radius about a point of CP^2.

    The chart runs over the unit 3-sphere of horizontal directions in angular
    coordinates (xi1, xi2, eta); the normal is the velocity of the radial
    geodesic, computed in closed form through the Veronese embedding.
    """
    model = make_ambient("complex_projective_veronese", m=2)
    r = np.pi / 3.0 if radius is None else float(radius)
    cr, sr = np.cos(r), np.sin(r)

    def homogeneous(p):
        xi1, xi2, eta = p[..., 0], p[..., 1], p[..., 2]
        w1 = np.exp(1j * xi1) * np.cos(eta)
        w2 = np.exp(1j * xi2) * np.sin(eta)
        return np.stack([np.ones_like(w1), w1, w2], axis=-1)

    def z_and_zdot(p):
        h = homogeneous(p)
        z = h.copy()
        z[..., 0] *= cr
        z[..., 1:] *= sr
        zdot = h.copy()
        zdot[..., 0] *= -sr
        zdot[..., 1:] *= cr
        return z, zdot

    def chart(p):
        z, _ = z_and_zdot(p)
        return model.position(z)

    def normal(p):
        z, zdot = z_and_zdot(p)
        return model.flatten(model.outer(z, zdot))

    def potential(p):
        # Einstein constant 6 plus |A|^2 = 4 cot(2r)^2 + 2 cot(r)^2
        val = 6.0 + 4.0 / np.tan(2 * r) ** 2 + 2.0 / np.tan(r) ** 2
        return np.full(p.shape[:-1], val)

    axes = [
        Axis("xi1", 2 * np.pi, nodes, periodic=True),
        Axis("xi2", 2 * np.pi, nodes, periodic=True),
        Axis("eta", np.pi / 2, max(4, nodes // 2)),
    ]
    return DiscreteHypersurface(
        "geodesic_sphere_cp2", model, axes, chart, normal,
        potential_fn=potential,
        model_point_fn=lambda p: z_and_zdot(p)[0],
        betti_one=0,
    )


def ellipsoid_section(semi_axes, nodes=24):
    """Hyperplane section {x_last = 0} of an ellipsoid: a totally geodesic
    minimal hypersurface with constant unit normal along the last axis."""
    semi_axes = np.asarray(semi_axes, dtype=float)
    model = make_ambient("ellipsoid", semi_axes=semi_axes)
    k = len(semi_axes) - 2  # dimension of the section

    def chart(p):
        u = spherical_chart(p)
        x = u * semi_axes[:-1]
        pad = np.zeros(x.shape[:-1] + (1,))
        return np.concatenate([x, pad], axis=-1)

    def normal(p):
        out = np.zeros(p.shape[:-1] + (len(semi_axes),))
        out[..., -1] = 1.0
        return out

    return DiscreteHypersurface(
        "ellipsoid_section", model, spherical_axes(k, nodes), chart, normal,
        betti_one=0,
    )
