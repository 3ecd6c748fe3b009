"""Index form and Jacobi spectrum of a discrete hypersurface.

The Galerkin matrices of the surface give the symmetric pencil
(K - P) phi = lambda M phi whose negative eigenvalues count unstable
deformation directions (the Morse index).  Odd-parity restriction onto the
double-cover subspace handles one-sided quotients.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SpectralError(Exception):
    pass


@dataclass
class SpectrumReport:
    """Low end of the Jacobi spectrum with residuals and multiplicity clusters."""

    surface: str
    eigenvalues: np.ndarray
    residuals: np.ndarray
    cluster_ids: np.ndarray
    n_dofs: int
    cluster_gap: float = 1e-3

    @property
    def morse_index(self):
        return self.count_below(0.0)

    def count_below(self, eta):
        """Number of eigenvalues strictly below eta (raises if the computed
        window may not cover them all)."""
        eta = float(eta)
        if len(self.eigenvalues) and eta > self.eigenvalues[-1]:
            raise SpectralError(
                "threshold exceeds the computed spectral window; "
                "request more eigenvalues"
            )
        return int(np.sum(self.eigenvalues < eta))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("index,eigenvalue,residual,cluster id\n")
        for i, (lam, r, c) in enumerate(
            zip(self.eigenvalues, self.residuals, self.cluster_ids)
        ):
            buf.write(f"{i},{lam:.12g},{r:.3g},{c}\n")
        return buf.getvalue()


def _cluster(eigenvalues, gap):
    ids = np.zeros(len(eigenvalues), dtype=int)
    for i in range(1, len(eigenvalues)):
        scale = max(1.0, abs(eigenvalues[i]), abs(eigenvalues[i - 1]))
        ids[i] = ids[i - 1] + (
            eigenvalues[i] - eigenvalues[i - 1] > gap * scale
        )
    return ids


class SpectralSystem:
    """Assembled index-form pencil for one hypersurface (optionally restricted
    to the odd-parity subspace of a double cover)."""

    def __init__(self, surface, parity=None, lift=None):
        fem = surface.fem()
        if fem.potential is None:
            raise SpectralError(
                f"surface {surface.name!r} carries no potential; "
                "the index form needs Ric(N,N) + |A|^2"
            )
        self.surface = surface
        self.fem = fem
        self.parity = parity
        K, P, M = fem.stiffness, fem.potential, fem.mass
        if parity is None:
            self.basis = None
        elif parity == "odd":
            if lift is None:
                raise SpectralError("odd-parity restriction needs a DoubleCoverLift")
            B = lift.odd_projector(fem)
            K, P, M = (B.T @ A @ B for A in (K, P, M))
            self.basis = B
        else:
            raise SpectralError(f"unknown parity {parity!r}")
        self.stiffness = K.tocsr()
        self.potential = P.tocsr()
        self.mass = M.tocsr()

    @property
    def n_dofs(self):
        return self.stiffness.shape[0]

    def q_value(self, dof_vector):
        """Index form Q(u, u) of a nodal vector through the discrete matrices."""
        u = np.asarray(dof_vector)
        return float(u @ (self.stiffness @ u) - u @ (self.potential @ u))

    def l2_norm_sq(self, dof_vector):
        u = np.asarray(dof_vector)
        return float(u @ (self.mass @ u))

    def rayleigh_quotient(self, dof_vector):
        return self.q_value(dof_vector) / self.l2_norm_sq(dof_vector)

    def spectrum(self, how_many=24, cluster_gap=1e-3, dense_cutoff=5000):
        """Lowest eigenvalues of (K - P) phi = lambda M phi, smallest first."""
        A = (self.stiffness - self.potential).tocsc()
        M = self.mass.tocsc()
        n = self.n_dofs
        how_many = min(how_many, n)
        if n <= dense_cutoff:
            Ad = A.toarray()
            Md = M.toarray()
            vals, vecs = scipy.linalg.eigh(Ad, Md)
            vals, vecs = vals[:how_many], vecs[:, :how_many]
        else:
            # shift below the spectrum: lambda_1 >= -max potential density
            sigma = -float(
                np.abs(self.potential.diagonal()).sum()
                / max(self.mass.diagonal().sum(), 1e-300)
            ) - 1.0
            try:
                vals, vecs = spla.eigsh(A, k=how_many, M=M, sigma=sigma)
            except spla.ArpackNoConvergence as exc:
                raise SpectralError(
                    f"eigensolver failed to converge: {exc}"
                ) from exc
            order = np.argsort(vals)
            vals, vecs = vals[order], vecs[:, order]
        res = np.array(
            [
                np.linalg.norm(A @ v - lam * (M @ v))
                / max(np.linalg.norm(M @ v), 1e-300)
                for lam, v in zip(vals, vecs.T)
            ]
        )
        self.eigenvectors = vecs
        return SpectrumReport(
            surface=self.surface.name,
            eigenvalues=vals,
            residuals=res,
            cluster_ids=_cluster(vals, cluster_gap),
            n_dofs=n,
            cluster_gap=cluster_gap,
        )


def assemble_jacobi(surface, parity=None, lift=None):
    return SpectralSystem(surface, parity=parity, lift=lift)
