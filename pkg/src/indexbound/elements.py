"""Tensor-product quadratic (Q2) conforming finite elements on structured
parameter grids.

The grid lives on a box in parameter space; axes may be periodic, and nodes
whose chart images coincide (poles of spherical charts, seams) are fused into
single degrees of freedom.  Mass matrices are consistent, and stiffness /
potential matrices are assembled with 3-point Gauss quadrature per direction,
so the discrete eigenvalues of the Galerkin pencil sit above their continuous
counterparts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# 3-point Gauss rule on [0, 1]
_GP = 0.5 + np.sqrt(0.15) * np.array([-1.0, 0.0, 1.0])
_GW = np.array([5.0, 8.0, 5.0]) / 18.0


def shape1d(x):
    """Values of the three quadratic nodal shapes on [0, 1] at x, shape (..., 3)."""
    x = np.asarray(x)
    return np.stack(
        [2.0 * (x - 0.5) * (x - 1.0), -4.0 * x * (x - 1.0), 2.0 * x * (x - 0.5)],
        axis=-1,
    )


def dshape1d(x):
    x = np.asarray(x)
    return np.stack([4.0 * x - 3.0, 4.0 - 8.0 * x, 4.0 * x - 1.0], axis=-1)


@dataclass(frozen=True)
class Axis:
    """One direction of the parameter box.

    `nodes` is the requested resolution (nodes per direction); the actual node
    count is rounded to fit whole quadratic cells.
    """

    name: str
    length: float
    nodes: int
    periodic: bool = False
    lo: float = 0.0

    @property
    def n_cells(self):
        if self.periodic:
            return max(2, self.nodes // 2)
        return max(1, (self.nodes - 1) // 2)

    @property
    def n_nodes(self):
        return 2 * self.n_cells if self.periodic else 2 * self.n_cells + 1

    @property
    def h(self):
        return self.length / self.n_cells

    @property
    def coords(self):
        n = self.n_nodes
        denom = n if self.periodic else n - 1
        return self.lo + self.length * np.arange(n) / denom

    def cell_conn(self):
        """Per-cell node triples along this axis, shape (n_cells, 3)."""
        base = 2 * np.arange(self.n_cells)[:, None] + np.arange(3)
        if self.periodic:
            base %= self.n_nodes
        return base


class TensorGrid:
    """Structured tensor-product grid over a list of axes."""

    def __init__(self, axes):
        self.axes = list(axes)
        self.shape = tuple(a.n_nodes for a in self.axes)
        self.n_nodes = int(np.prod(self.shape))
        coords = [a.coords for a in self.axes]
        mesh = np.meshgrid(*coords, indexing="ij")
        self.node_params = np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def ndim(self):
        return len(self.axes)

    def node_index(self, multi):
        return int(np.ravel_multi_index(multi, self.shape))

    def cell_connectivity(self):
        """Global node indices per cell, shape (n_cells_total, 3**ndim)."""
        per_axis = [a.cell_conn() for a in self.axes]
        cell_counts = [a.n_cells for a in self.axes]
        conns = []
        for cell_multi in itertools.product(*[range(c) for c in cell_counts]):
            local = [per_axis[d][cell_multi[d]] for d in range(self.ndim)]
            combos = np.array(list(itertools.product(*local)))
            conns.append(np.ravel_multi_index(combos.T, self.shape))
        return np.asarray(conns)

    def cell_origins(self):
        """Lower corner parameter values of each cell, shape (n_cells_total, ndim)."""
        per_axis = [a.lo + a.h * np.arange(a.n_cells) for a in self.axes]
        mesh = np.meshgrid(*per_axis, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def _reference_tensors(ndim):
    """Tensor-product shape values / gradients at the Gauss points.

    Returns (gauss_local, weights, vals, grads) with shapes
    (G, ndim), (G,), (G, L), (G, L, ndim) for G = L = 3**ndim.
    """
    pts_1d = [_GP] * ndim
    gauss_local = np.array(list(itertools.product(*pts_1d)))
    weights = np.prod(
        np.array(list(itertools.product(*([_GW] * ndim)))), axis=-1
    )
    sv = shape1d(_GP)  # (3, 3): point, node
    sg = dshape1d(_GP)
    g_idx = list(itertools.product(range(3), repeat=ndim))
    l_idx = g_idx
    G = L = 3**ndim
    vals = np.ones((G, L))
    grads = np.ones((G, L, ndim))
    for gi, gm in enumerate(g_idx):
        for li, lm in enumerate(l_idx):
            for d in range(ndim):
                vals[gi, li] *= sv[gm[d], lm[d]]
                for dd in range(ndim):
                    f = sg[gm[dd], lm[dd]] if dd == d else sv[gm[dd], lm[dd]]
                    grads[gi, li, d] *= f
    return gauss_local, weights, vals, grads


class FemSystem:
    """Assembled Galerkin matrices for -div(grad) + V on a curved chart.

    Attributes
    ----------
    stiffness, mass, potential : scipy.sparse.csr_matrix, at fused-DOF level
    fuse : (n_nodes,) int array mapping grid nodes to DOFs
    node_weights : (n_dofs,) quadrature weights (consistent-mass row sums)
    """

    def __init__(self, grid, metric_fn, potential_fn=None, positions=None,
                 fuse_tol=1e-8):
        self.grid = grid
        ndim = grid.ndim
        conn = grid.cell_connectivity()
        origins = grid.cell_origins()
        hs = np.array([a.h for a in grid.axes])

        gauss_local, w, vals, grads = _reference_tensors(ndim)
        # physical gradients: reference gradient scaled by 1/h per axis
        grads_phys = grads / hs[None, None, :]
        cellvol = float(np.prod(hs))

        # quadrature points in parameter space, (C, G, ndim)
        qp = origins[:, None, :] + gauss_local[None, :, :] * hs[None, None, :]
        C, G = qp.shape[:2]
        flat_qp = qp.reshape(-1, ndim)

        g = np.asarray(metric_fn(flat_qp)).reshape(C, G, ndim, ndim)
        detg = np.linalg.det(g)
        if np.any(detg <= 0):
            raise ValueError("metric is not positive definite at a quadrature point")
        vol = np.sqrt(detg)  # (C, G)
        ginv = np.linalg.inv(g)

        scale = w[None, :] * vol * cellvol  # (C, G)
        K_e = np.einsum("cg,cgab,gia,gjb->cij", scale, ginv, grads_phys,
                        grads_phys, optimize=True)
        M_e = np.einsum("cg,gi,gj->cij", scale, vals, vals, optimize=True)
        if potential_fn is not None:
            V = np.asarray(potential_fn(flat_qp)).reshape(C, G)
            P_e = np.einsum("cg,gi,gj->cij", scale * V, vals, vals,
                            optimize=True)
        else:
            P_e = None

        rows = np.repeat(conn[:, :, None], conn.shape[1], axis=2).ravel()
        cols = np.repeat(conn[:, None, :], conn.shape[1], axis=1).ravel()

        def build(E):
            A = sp.coo_matrix(
                (E.ravel(), (rows, cols)), shape=(grid.n_nodes, grid.n_nodes)
            )
            return A.tocsr()

        K = build(K_e)
        M = build(M_e)
        P = build(P_e) if P_e is not None else None

        self.fuse = self._fusion_labels(grid, positions, fuse_tol)
        self.n_dofs = int(self.fuse.max()) + 1
        Z = sp.coo_matrix(
            (np.ones(grid.n_nodes), (np.arange(grid.n_nodes), self.fuse)),
            shape=(grid.n_nodes, self.n_dofs),
        ).tocsr()
        self.prolong = Z

        self.stiffness = (Z.T @ K @ Z).tocsr()
        self.mass = (Z.T @ M @ Z).tocsr()
        self.potential = (Z.T @ P @ Z).tocsr() if P is not None else None
        self.node_weights = np.asarray(self.mass.sum(axis=1)).ravel()

    @staticmethod
    def _fusion_labels(grid, positions, tol):
        if positions is None:
            return np.arange(grid.n_nodes)
        keys = np.round(np.asarray(positions) / tol).astype(np.int64)
        _, labels = np.unique(keys, axis=0, return_inverse=True)
        # relabel so that DOF order follows first appearance in node order
        order = np.full(labels.max() + 1, -1, dtype=np.int64)
        nxt = 0
        out = np.empty_like(labels)
        for i, lab in enumerate(labels):
            if order[lab] < 0:
                order[lab] = nxt
                nxt += 1
            out[i] = order[lab]
        return out

    # -- helpers --------------------------------------------------------------
    def to_dof(self, node_values):
        """Restrict per-node values to DOFs, taking the first representative."""
        node_values = np.asarray(node_values)
        out = np.empty((self.n_dofs,) + node_values.shape[1:], node_values.dtype)
        seen = np.zeros(self.n_dofs, dtype=bool)
        for i, d in enumerate(self.fuse):
            if not seen[d]:
                out[d] = node_values[i]
                seen[d] = True
        return out

    def to_nodes(self, dof_values):
        return np.asarray(dof_values)[self.fuse]

    def integrate(self, dof_values):
        """Integral over the surface of a function given by DOF values."""
        return float(self.node_weights @ np.asarray(dof_values))

    @property
    def volume(self):
        return float(self.node_weights.sum())
