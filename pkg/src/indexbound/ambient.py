"""Ambient Riemannian manifolds with explicit isometric embeddings into R^d.

Each model knows how to embed points, produce orthonormal tangent frames,
evaluate the second fundamental form of the embedding, and recover curvature
through the Gauss equation.  All evaluations are pure functions of
(model, point, vectors); models are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class AmbientError(Exception):
    """Invalid model parameters or chart-domain violations."""


class TangencyError(AmbientError):
    """A vector handed to a pointwise operation is not tangent."""


@dataclass(frozen=True)
class TangentVectorAt:
    """An ambient R^d vector attached to a point of the embedded manifold."""

    base_point: np.ndarray
    components: np.ndarray


#: residual keys backed by finite differences, allowed a looser tolerance
_FD_CHECKS = frozenset({"gauss_fd_closure", "ii_scaling", "complex_parallel"})


@dataclass
class IdentityReport:
    """Max residuals of the self-checks of a model over random samples."""

    kind: str
    sample_count: int
    residuals: dict = field(default_factory=dict)
    tolerance: float = 1e-8
    fd_tolerance: float = 1e-4

    def _tol(self, key):
        return self.fd_tolerance if key in _FD_CHECKS else self.tolerance

    @property
    def failures(self):
        return {k: v for k, v in self.residuals.items() if v > self._tol(k)}

    @property
    def ok(self):
        return not self.failures


# ---------------------------------------------------------------------------
# quaternion helpers (quaternions are (..., 4) float arrays, w + xi + yj + zk)

def qmul(a, b):
    """Hamilton product on (..., 4) arrays."""
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(a):
    out = np.array(a, copy=True)
    out[..., 1:] *= -1.0
    return out


def qdot(z, w):
    """Quaternionic inner product sum_i conj(z_i) w_i over the second-to-last axis."""
    return qmul(qconj(z), w).sum(axis=-2)


class AmbientModel:
    """Base class; subclasses fill in the embedding geometry."""

    kind = "abstract"
    einstein_constant = None
    has_complex_structure = False

    def __init__(self, intrinsic_dim, embed_dim):
        if intrinsic_dim < 1:
            raise AmbientError("intrinsic dimension must be >= 1")
        self.intrinsic_dim = int(intrinsic_dim)
        self.embed_dim = int(embed_dim)

    # -- required per subclass ------------------------------------------------
    def random_point(self, rng):
        raise NotImplementedError

    def position(self, point):
        raise NotImplementedError

    def tangent_frame(self, point):
        """Orthonormal basis of the tangent space, shape (intrinsic_dim, d)."""
        raise NotImplementedError

    def ii_quad(self, point, X):
        """II(X, X) as an ambient R^d vector."""
        raise NotImplementedError

    def curve(self, point, X, t):
        """A point of the manifold reached from `point` with initial velocity X.

        Used by the finite-difference oracle for II; the particular curve does
        not matter as long as it stays on the manifold.
        """
        raise NotImplementedError

    # -- shared operations ----------------------------------------------------
    def project_tangent(self, point, v):
        frame = self.tangent_frame(point)
        return frame.T @ (frame @ v)

    def tangency_residual(self, point, v):
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        return np.linalg.norm(v - self.project_tangent(point, v)) / nv

    def check_tangent(self, point, v, tol=1e-7):
        if self.tangency_residual(point, v) > tol:
            raise TangencyError("vector is not tangent at the given point")

    def ii(self, point, X, Y):
        """Second fundamental form II(X, Y), by polarization of ii_quad."""
        return 0.25 * (self.ii_quad(point, X + Y) - self.ii_quad(point, X - Y))

    def ii_quad_fd(self, point, X, h=1e-4):
        """Finite-difference oracle: normal part of the acceleration of a curve
        with velocity X, second-order central differences with one Richardson
        extrapolation level."""

        def accel(step):
            return (
                self.curve(point, X, step)
                - 2.0 * self.position(point)
                + self.curve(point, X, -step)
            ) / step**2

        a = (4.0 * accel(h) - accel(2.0 * h)) / 3.0
        return a - self.project_tangent(point, a)

    def riemann_xyxy(self, point, X, Y):
        """Rm(X, Y, X, Y) of the ambient metric via the Gauss equation."""
        iixy = self.ii(point, X, Y)
        return float(
            self.ii_quad(point, X) @ self.ii_quad(point, Y) - iixy @ iixy
        )

    def ricci(self, point, X):
        """Ric(X, X), summing sectional terms over an orthonormal frame."""
        if np.linalg.norm(X) == 0.0:
            raise AmbientError("cannot complete a frame around the zero vector")
        frame = self.tangent_frame(point)
        return sum(self.riemann_xyxy(point, X, e) for e in frame)

    def scalar_curvature(self, point):
        frame = self.tangent_frame(point)
        return sum(
            self.riemann_xyxy(point, e, f) for e in frame for f in frame
        )

    def mean_curvature_vector(self, point):
        frame = self.tangent_frame(point)
        return sum(self.ii_quad(point, e) for e in frame)

    def ii_total_norm_sq(self, point):
        """|II|^2 summed over an orthonormal frame pair."""
        frame = self.tangent_frame(point)
        return sum(
            float(np.dot(self.ii(point, e, f), self.ii(point, e, f)))
            for e in frame
            for f in frame
        )

    def random_tangent(self, point, rng, unit=True):
        frame = self.tangent_frame(point)
        c = rng.standard_normal(frame.shape[0])
        v = frame.T @ c
        if unit:
            v /= np.linalg.norm(v)
        return v

    def random_orthonormal_pair(self, point, rng):
        X = self.random_tangent(point, rng)
        Y = self.random_tangent(point, rng, unit=False)
        Y = Y - (Y @ X) * X
        return X, Y / np.linalg.norm(Y)

    # -- optional complex structure ------------------------------------------
    def complex_structure(self, point, X):
        raise AmbientError(f"model kind {self.kind!r} carries no complex structure")


def _orthonormal_complement(vectors, dim):
    """Rows orthonormal, spanning the complement of `vectors` in R^dim."""
    vs = np.atleast_2d(vectors)
    q, _ = np.linalg.qr(np.concatenate([vs.T, np.eye(dim)], axis=1))
    # first columns of q reproduce span(vs); the rest complete it
    comp = q[:, vs.shape[0] : dim]
    return comp.T


class SphereModel(AmbientModel):
    """Round unit sphere S^dim in R^{dim+1}; totally umbilic, |II(X,Y)| = |<X,Y>|."""

    kind = "sphere"

    def __init__(self, dim):
        if dim < 2:
            raise AmbientError("sphere dimension must be >= 2")
        super().__init__(dim, dim + 1)
        self.einstein_constant = float(dim - 1)

    def point(self, x):
        x = np.asarray(x, dtype=float)
        return x / np.linalg.norm(x)

    def random_point(self, rng):
        return self.point(rng.standard_normal(self.embed_dim))

    def position(self, point):
        return point

    def tangent_frame(self, point):
        return _orthonormal_complement(point, self.embed_dim)

    def ii_quad(self, point, X):
        return -float(X @ X) * point

    def curve(self, point, X, t):
        s = np.linalg.norm(X)
        if s == 0.0:
            return point.copy()
        return np.cos(s * t) * point + np.sin(s * t) * X / s


class RealProjectiveModel(SphereModel):
    """RP^dim represented by its two-to-one sphere cover with the antipodal map."""

    kind = "real_projective"
    antipodal = True

    def involution(self, point):
        return -point


class _ProjectiveVeroneseBase(AmbientModel):
    """Shared machinery for the Hermitian-matrix embeddings [z] -> z z*.

    Points are unit vectors z (modulo phase / unit-quaternion action); ambient
    coordinates flatten Hermitian matrices isometrically for the metric
    <A, B> = Re tr(AB) / 2.
    """

    def horizontal_project(self, z, v):
        raise NotImplementedError

    def flatten(self, A):
        raise NotImplementedError

    def unflatten(self, a):
        raise NotImplementedError

    def chart(self, z):
        raise NotImplementedError

    def matvec(self, A, z):
        raise NotImplementedError

    def outer(self, z, w):
        """z w* + w z* as a Hermitian matrix."""
        raise NotImplementedError

    def self_outer(self, z):
        raise NotImplementedError

    def norm_sq(self, z):
        raise NotImplementedError

    # -- generic pieces -------------------------------------------------------
    def position(self, z):
        return self.flatten(self.chart(z))

    def tangent_from_horizontal(self, z, v):
        return self.flatten(self.outer(z, v))

    def horizontal_from_ambient(self, z, X):
        """Recover the horizontal lift v from an ambient tangent vector X."""
        v = self.matvec(self.unflatten(X), z)
        return self.horizontal_project(z, v)

    def ii_quad(self, z, X):
        v = self.horizontal_from_ambient(z, X)
        return self.flatten(
            2.0 * (self.self_outer(v) - self.norm_sq(v) * self.chart(z))
        )

    def curve(self, z, X, t):
        v = self.horizontal_from_ambient(z, X)
        s = np.sqrt(self.norm_sq(v))
        if s == 0.0:
            return self.position(z)
        zt = np.cos(s * t) * z + np.sin(s * t) * v / s
        return self.position(zt)


class ComplexProjectiveVeroneseModel(_ProjectiveVeroneseBase):
    """CP^m embedded in the (m+1)^2-dimensional space of Hermitian matrices.

    Sectional curvatures lie in [1, 4]; the metric is Einstein with constant
    2m + 2, and the complex structure acts on horizontal lifts by i.
    """

    kind = "complex_projective_veronese"
    has_complex_structure = True

    def __init__(self, m):
        if m < 1:
            raise AmbientError("complex projective dimension must be >= 1")
        self.m = int(m)
        super().__init__(2 * m, (m + 1) ** 2)
        self.einstein_constant = float(2 * m + 2)
        iu = np.triu_indices(m + 1, k=1)
        self._iu = iu

    # flattening: diagonal / sqrt(2), then Re and Im of the upper triangle
    def flatten(self, A):
        A = np.asarray(A)
        diag = np.real(np.diagonal(A, axis1=-2, axis2=-1)) / np.sqrt(2.0)
        off = A[..., self._iu[0], self._iu[1]]
        return np.concatenate([diag, np.real(off), np.imag(off)], axis=-1)

    def unflatten(self, a):
        n1 = self.m + 1
        k = len(self._iu[0])
        A = np.zeros(a.shape[:-1] + (n1, n1), dtype=complex)
        idx = np.arange(n1)
        A[..., idx, idx] = a[..., :n1] * np.sqrt(2.0)
        off = a[..., n1 : n1 + k] + 1j * a[..., n1 + k :]
        A[..., self._iu[0], self._iu[1]] = off
        A[..., self._iu[1], self._iu[0]] = np.conj(off)
        return A

    def chart(self, z):
        return z[..., :, None] * np.conj(z)[..., None, :]

    def matvec(self, A, z):
        return np.einsum("...ij,...j->...i", A, z)

    def self_outer(self, z):
        return self.chart(z)

    def outer(self, z, w):
        return (
            z[..., :, None] * np.conj(w)[..., None, :]
            + w[..., :, None] * np.conj(z)[..., None, :]
        )

    def norm_sq(self, z):
        return np.real(np.einsum("...i,...i->...", np.conj(z), z))

    def horizontal_project(self, z, v):
        return v - z * np.einsum("...i,...i->...", np.conj(z), v)[..., None]

    def point_from_homogeneous(self, z):
        z = np.asarray(z, dtype=complex)
        return z / np.sqrt(self.norm_sq(z))[..., None]

    def random_point(self, rng):
        z = rng.standard_normal(self.m + 1) + 1j * rng.standard_normal(self.m + 1)
        return self.point_from_homogeneous(z)

    def tangent_frame(self, z):
        basis = np.concatenate(
            [z[:, None], np.eye(self.m + 1, dtype=complex)], axis=1
        )
        q, _ = np.linalg.qr(basis)
        # columns 1.. span the complex orthogonal complement of z
        frame = []
        for k in range(1, self.m + 1):
            w = q[:, k]
            frame.append(self.tangent_from_horizontal(z, w))
            frame.append(self.tangent_from_horizontal(z, 1j * w))
        return np.asarray(frame)

    def complex_structure(self, z, X):
        v = self.horizontal_from_ambient(z, X)
        return self.tangent_from_horizontal(z, 1j * v)

    def sectional_formula(self, z, X, Y):
        """1 + 3 g(X, JY)^2 for orthonormal X, Y."""
        return 1.0 + 3.0 * float(X @ self.complex_structure(z, Y)) ** 2

    def nabla_j_residual(self, z, rng, h=1e-5):
        """Finite-difference residual of the parallelism of J along a random curve."""
        X = self.random_tangent(z, rng)
        Y = self.random_tangent(z, rng)
        v = self.horizontal_from_ambient(z, X)

        def z_at(t):
            s = np.sqrt(self.norm_sq(v))
            return self.point_from_homogeneous(
                np.cos(s * t) * z + np.sin(s * t) * v / s
            )

        # W(t): projection of the frozen ambient vector Y onto the tangent space
        def W(t):
            zt = z_at(t)
            w = self.horizontal_from_ambient(zt, Y)
            return self.tangent_from_horizontal(zt, w), zt

        def JW(t):
            w, zt = W(t)
            return self.complex_structure(zt, w)

        dW = (W(h)[0] - W(-h)[0]) / (2 * h)
        dJW = (JW(h) - JW(-h)) / (2 * h)
        nab_W = self.project_tangent(z, dW)
        nab_JW = self.project_tangent(z, dJW)
        res = nab_JW - self.complex_structure(z, nab_W)
        return float(np.linalg.norm(res))


class QuaternionicProjectiveVeroneseModel(_ProjectiveVeroneseBase):
    """HP^p embedded in the (2p+1)(p+1)-dimensional space of quaternionic
    Hermitian matrices; Einstein with constant 4p + 8."""

    kind = "quaternionic_projective_veronese"

    def __init__(self, p):
        if p < 1:
            raise AmbientError("quaternionic projective dimension must be >= 1")
        self.p = int(p)
        super().__init__(4 * p, (2 * p + 1) * (p + 1))
        self.einstein_constant = float(4 * p + 8)
        self._iu = np.triu_indices(p + 1, k=1)

    def flatten(self, A):
        # A has shape (..., p+1, p+1, 4)
        n1 = self.p + 1
        idx = np.arange(n1)
        diag = A[..., idx, idx, 0] / np.sqrt(2.0)
        off = A[..., self._iu[0], self._iu[1], :]
        return np.concatenate(
            [diag, off.reshape(off.shape[:-2] + (-1,))], axis=-1
        )

    def unflatten(self, a):
        n1 = self.p + 1
        k = len(self._iu[0])
        A = np.zeros(a.shape[:-1] + (n1, n1, 4))
        idx = np.arange(n1)
        A[..., idx, idx, 0] = a[..., :n1] * np.sqrt(2.0)
        off = a[..., n1:].reshape(a.shape[:-1] + (k, 4))
        A[..., self._iu[0], self._iu[1], :] = off
        A[..., self._iu[1], self._iu[0], :] = qconj(off)
        return A

    def chart(self, z):
        return qmul(z[..., :, None, :], qconj(z)[..., None, :, :])

    def matvec(self, A, z):
        return qmul(A, z[..., None, :, :]).sum(axis=-2)

    def self_outer(self, z):
        return self.chart(z)

    def outer(self, z, w):
        return qmul(z[..., :, None, :], qconj(w)[..., None, :, :]) + qmul(
            w[..., :, None, :], qconj(z)[..., None, :, :]
        )

    def norm_sq(self, z):
        return np.sum(z * z, axis=(-2, -1))

    def horizontal_project(self, z, v):
        q = qdot(z, v)
        return v - qmul(z, q[..., None, :])

    def point_from_homogeneous(self, z):
        z = np.asarray(z, dtype=float)
        return z / np.sqrt(self.norm_sq(z))

    def random_point(self, rng):
        return self.point_from_homogeneous(rng.standard_normal((self.p + 1, 4)))

    def tangent_frame(self, z):
        # Gram-Schmidt the coordinate directions against the four vertical
        # directions z * {1, i, j, k}, keeping 4p horizontal lifts.
        vert = [qmul(z, np.tile(e, (self.p + 1, 1))) for e in np.eye(4)]
        frame = []
        horiz = []
        for i in range(self.p + 1):
            for a in range(4):
                v = np.zeros((self.p + 1, 4))
                v[i, a] = 1.0
                v = self.horizontal_project(z, v)
                for w in horiz:
                    v = v - w * np.sum(w * v)
                nv = np.sqrt(self.norm_sq(v))
                if nv < 1e-8:
                    continue
                v = v / nv
                horiz.append(v)
                frame.append(self.tangent_from_horizontal(z, v))
                if len(frame) == 4 * self.p:
                    return np.asarray(frame)
        raise AmbientError("failed to build a horizontal frame")

    def quaternionic_structures(self, z, X):
        """[IX, JX, KX] via right multiplication on the horizontal lift."""
        v = self.horizontal_from_ambient(z, X)
        out = []
        for a in range(1, 4):
            e = np.zeros(4)
            e[a] = 1.0
            out.append(
                self.tangent_from_horizontal(z, qmul(v, np.tile(e, (self.p + 1, 1))))
            )
        return out

    def sectional_formula(self, z, X, Y):
        """1 + 3 sum_a g(X, A_a Y)^2 over the local quaternionic structures."""
        return 1.0 + 3.0 * sum(
            float(X @ W) ** 2 for W in self.quaternionic_structures(z, Y)
        )


class _ProductSphereModel(AmbientModel):
    """Product of two round factors embedded blockwise in R^{d1} x R^{d2}."""

    def __init__(self, dim1, dim2):
        self.dim1 = int(dim1)  # sphere dimension of first factor
        self.dim2 = int(dim2)
        self.split = dim1 + 1
        super().__init__(dim1 + dim2, dim1 + dim2 + 2)

    def point(self, x):
        x = np.asarray(x, dtype=float)
        c, s = x[: self.split], x[self.split :]
        return np.concatenate([c / np.linalg.norm(c), s / np.linalg.norm(s)])

    def random_point(self, rng):
        return self.point(rng.standard_normal(self.embed_dim))

    def position(self, point):
        return point

    def factors(self, v):
        return v[..., : self.split], v[..., self.split :]

    def tangent_frame(self, point):
        c, s = self.factors(point)
        f1 = _orthonormal_complement(c, self.split)
        f2 = _orthonormal_complement(s, self.embed_dim - self.split)
        frame = np.zeros((self.intrinsic_dim, self.embed_dim))
        frame[: self.dim1, : self.split] = f1
        frame[self.dim1 :, self.split :] = f2
        return frame

    def ii_quad(self, point, X):
        c, s = self.factors(point)
        X1, X2 = self.factors(X)
        return np.concatenate([-float(X1 @ X1) * c, -float(X2 @ X2) * s])

    def curve(self, point, X, t):
        c, s = self.factors(point)
        X1, X2 = self.factors(X)
        out = []
        for base, vel in ((c, X1), (s, X2)):
            sp = np.linalg.norm(vel)
            if sp == 0.0:
                out.append(base.copy())
            else:
                out.append(np.cos(sp * t) * base + np.sin(sp * t) * vel / sp)
        return np.concatenate(out)

    def riemann_product_formula(self, point, X, Y):
        """|pi2 X|^2 |pi2 Y|^2 - <pi2 X, pi2 Y>^2 (+ first factor when dim1 >= 2)."""
        X1, Y1 = self.factors(X)[0], self.factors(Y)[0]
        X2, Y2 = self.factors(X)[1], self.factors(Y)[1]
        val = float(X2 @ X2) * float(Y2 @ Y2) - float(X2 @ Y2) ** 2
        if self.dim1 >= 2:
            val += float(X1 @ X1) * float(Y1 @ Y1) - float(X1 @ Y1) ** 2
        return val


class CircleTimesSphereModel(_ProductSphereModel):
    """S^1 x S^n in R^{n+3}; the flat circle factor makes Ric only non-negative."""

    kind = "circle_times_sphere"

    def __init__(self, n):
        if n < 2:
            raise AmbientError("sphere factor dimension must be >= 2")
        super().__init__(1, n)
        self.n = int(n)


class SphereTimesSphereModel(_ProductSphereModel):
    kind = "sphere_times_sphere"

    def __init__(self, p, q):
        if p < 2 or q < 2:
            raise AmbientError("both factor dimensions must be >= 2")
        super().__init__(p, q)
        self.p, self.q = int(p), int(q)


class EllipsoidModel(AmbientModel):
    """Ellipsoid sum x_i^2 / a_i^2 = 1 in R^{n+2}, with outward normal and
    shape operator available for the pinching checks."""

    kind = "ellipsoid"

    def __init__(self, semi_axes):
        semi_axes = np.asarray(semi_axes, dtype=float)
        if semi_axes.ndim != 1 or len(semi_axes) < 3:
            raise AmbientError("need at least three semi-axes")
        if np.any(semi_axes <= 0):
            raise AmbientError("semi-axes must be positive")
        super().__init__(len(semi_axes) - 1, len(semi_axes))
        self.semi_axes = semi_axes
        self._g = 1.0 / semi_axes**2

    def point(self, x):
        x = np.asarray(x, dtype=float)
        return x / np.sqrt(np.sum(x**2 * self._g))

    def random_point(self, rng):
        return self.point(rng.standard_normal(self.embed_dim))

    def position(self, point):
        return point

    def outward_normal(self, point):
        grad = self._g * point
        return grad / np.linalg.norm(grad)

    def tangent_frame(self, point):
        return _orthonormal_complement(self.outward_normal(point), self.embed_dim)

    def ii_quad(self, point, X):
        nu = self.outward_normal(point)
        accel = -float(np.sum(X**2 * self._g)) * point
        return float(accel @ nu) * nu

    def curve(self, point, X, t):
        return self.point(point + t * X)

    def principal_curvatures(self, point):
        """Eigenvalues of the shape operator w.r.t. the outward normal
        (positive on convex bodies), ascending."""
        nu = self.outward_normal(point)
        frame = self.tangent_frame(point)
        scale = np.linalg.norm(self._g * point)
        W = (frame * self._g) @ frame.T / scale
        return np.sort(np.linalg.eigvalsh(W))


class GenericEmbeddedHypersurfaceModel(AmbientModel):
    """Graph hypersurface x -> (x, h(x)) in R^{n+2}, with finite-difference
    second derivatives (step 1e-5, one Richardson level)."""

    kind = "generic_embedded_hypersurface"

    def __init__(self, height_fn, base_dim, fd_step=1e-5):
        if base_dim < 2:
            raise AmbientError("base dimension must be >= 2")
        super().__init__(base_dim, base_dim + 1)
        self.height_fn = height_fn
        self.fd_step = float(fd_step)

    def point(self, x):
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, [float(self.height_fn(x))]])

    def random_point(self, rng):
        return self.point(rng.standard_normal(self.intrinsic_dim))

    def position(self, point):
        return point

    def _gradient(self, x):
        h = self.fd_step

        def d(step):
            g = np.zeros(len(x))
            for i in range(len(x)):
                e = np.zeros(len(x))
                e[i] = step
                g[i] = (self.height_fn(x + e) - self.height_fn(x - e)) / (2 * step)
            return g

        return (4.0 * d(h) - d(2.0 * h)) / 3.0

    def outward_normal(self, point):
        g = self._gradient(point[:-1])
        nu = np.concatenate([-g, [1.0]])
        return nu / np.linalg.norm(nu)

    def tangent_frame(self, point):
        return _orthonormal_complement(self.outward_normal(point), self.embed_dim)

    def ii_quad(self, point, X):
        x = point[:-1]
        xi = X[:-1]
        h = self.fd_step

        def quad(step):
            return (
                self.height_fn(x + step * xi)
                - 2.0 * self.height_fn(x)
                + self.height_fn(x - step * xi)
            ) / step**2

        hess = (4.0 * quad(h) - quad(2.0 * h)) / 3.0
        nu = self.outward_normal(point)
        return hess * nu[-1] * nu

    def curve(self, point, X, t):
        return self.point(point[:-1] + t * X[:-1])


_KINDS = {
    "sphere": lambda p: SphereModel(p["dim"]),
    "real_projective": lambda p: RealProjectiveModel(p["dim"]),
    "complex_projective_veronese": lambda p: ComplexProjectiveVeroneseModel(p["m"]),
    "quaternionic_projective_veronese": lambda p: QuaternionicProjectiveVeroneseModel(
        p["p"]
    ),
    "circle_times_sphere": lambda p: CircleTimesSphereModel(p["n"]),
    "sphere_times_sphere": lambda p: SphereTimesSphereModel(p["p"], p["q"]),
    "ellipsoid": lambda p: EllipsoidModel(p["semi_axes"]),
    "generic_embedded_hypersurface": lambda p: GenericEmbeddedHypersurfaceModel(
        p["height_fn"], p["base_dim"]
    ),
}


def make_ambient(kind, **parameters):
    """Construct an ambient model by kind name; see _KINDS for parameters."""
    try:
        builder = _KINDS[kind]
    except KeyError:
        raise AmbientError(f"unknown ambient kind {kind!r}") from None
    try:
        return builder(parameters)
    except KeyError as exc:
        raise AmbientError(f"missing parameter {exc} for kind {kind!r}") from None


def verify_model_identities(model, sample_count, seed=0):
    """Random-sample self-checks of a model; returns an IdentityReport whose
    residuals are maxima over (point, orthonormal pair) draws."""
    if sample_count < 1:
        raise AmbientError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    res = {}

    def bump(key, value):
        res[key] = max(res.get(key, 0.0), abs(float(value)))

    for _ in range(sample_count):
        p = model.random_point(rng)
        X, Y = model.random_orthonormal_pair(p, rng)
        pos = model.position(p)

        # tangency of the frame against computed normal directions
        bump("frame_tangency", np.abs(model.tangent_frame(p) @ model.ii_quad(p, X)).max()
             if np.linalg.norm(model.ii_quad(p, X)) > 0 else 0.0)
        bump("ii_symmetry",
             np.linalg.norm(model.ii(p, X, Y) - model.ii(p, Y, X)))
        c = 1.7
        bump("ii_scaling",
             np.linalg.norm(model.ii_quad(p, c * X) - c**2 * model.ii_quad(p, X)))
        bump("gauss_fd_closure",
             np.linalg.norm(model.ii_quad(p, X) - model.ii_quad_fd(p, X)))

        if model.einstein_constant is not None:
            bump("einstein", model.ricci(p, X) - model.einstein_constant)

        if isinstance(model, SphereModel):
            bump("umbilicity",
                 np.linalg.norm(model.ii(p, X, Y)) - abs(float(X @ Y)))
            bump("sectional_one", model.riemann_xyxy(p, X, Y) - 1.0)

        if isinstance(model, _ProjectiveVeroneseBase):
            A = model.unflatten(pos)
            if isinstance(model, ComplexProjectiveVeroneseModel):
                bump("variety_projector",
                     np.abs(A @ A - A).max())
                bump("variety_trace", np.trace(A).real - 1.0)
            rm = model.riemann_xyxy(p, X, Y)
            bump("veronese_ii_quad", model.ii_quad(p, X) @ model.ii_quad(p, X) - 4.0)
            bump("veronese_polarized",
                 model.ii_quad(p, X) @ model.ii_quad(p, Y)
                 + 2.0 * model.ii(p, X, Y) @ model.ii(p, X, Y) - 4.0)
            bump("veronese_mixed",
                 model.ii(p, X, Y) @ model.ii(p, X, Y) - (4.0 - rm) / 3.0)
            bump("sectional_range_low", max(0.0, 1.0 - rm))
            bump("sectional_range_high", max(0.0, rm - 4.0))
            bump("sectional_formula", rm - model.sectional_formula(p, X, Y))

        if model.has_complex_structure:
            JX = model.complex_structure(p, X)
            bump("complex_isometry", np.linalg.norm(JX) - np.linalg.norm(X))
            bump("complex_square",
                 np.linalg.norm(model.complex_structure(p, JX) + X))
            bump("complex_parallel", model.nabla_j_residual(p, rng))

        if isinstance(model, _ProductSphereModel):
            bump("product_curvature",
                 model.riemann_xyxy(p, X, Y) - model.riemann_product_formula(p, X, Y))

        if isinstance(model, EllipsoidModel):
            k = model.principal_curvatures(p)
            nu = model.outward_normal(p)
            bump("shape_vs_ii",
                 model.ii_quad(p, X) @ nu + float((model._g * X) @ X)
                 / np.linalg.norm(model._g * p))
            if np.allclose(model.semi_axes, model.semi_axes[0]):
                bump("round_umbilic", k.max() - k.min())

    return IdentityReport(kind=model.kind, sample_count=sample_count, residuals=res)
