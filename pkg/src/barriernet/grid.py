"""Uniform tensor grids with Dirichlet boundary and the divergence-form operator.

Nodes are stored as full nodal arrays of shape ``(n_0 + 2, ..., n_{d-1} + 2)``
including the boundary layer.  Flattening is row-major (C order), so in 2D the
node ``(i, j)`` with ``i`` along x has flat index ``i * (n_1 + 2) + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, EllipticityError


@dataclass(frozen=True)
class Grid:
    """Uniform grid on an interval or a rectangle.

    ``n`` counts interior points per axis, so the spacing is
    ``(hi - lo) / (n + 1)``.
    """

    dim: int
    extents: tuple[tuple[float, float], ...]
    n: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.extents) != self.dim or len(self.n) != self.dim:
            raise ConfigError("extents and n must have one entry per axis")
        for (lo, hi), m in zip(self.extents, self.n):
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise ConfigError(f"degenerate extent [{lo}, {hi}]")
            if m < 3:
                raise ConfigError(f"need at least 3 interior points per axis, got {m}")

    @property
    def h(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (m + 1) for (lo, hi), m in zip(self.extents, self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(m + 2 for m in self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_interior(self) -> int:
        return int(np.prod(self.n))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        out = []
        for (lo, hi), m in zip(self.extents, self.n):
            i = np.arange(m + 2, dtype=float)
            out.append(lo + (hi - lo) * i / (m + 1))
        return tuple(out)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.coords, indexing="ij"))

    @property
    def interior(self) -> tuple[slice, ...]:
        return (slice(1, -1),) * self.dim

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        mask[self.interior] = False
        return mask

    @property
    def diameter(self) -> float:
        return float(np.hypot.reduce([hi - lo for lo, hi in self.extents]))

    def padded(self, pad) -> "Grid":
        """Grid with ``pad`` extra nodes per side on each axis, same spacing and node alignment."""
        pad = _per_axis(pad, self.dim)
        ext = tuple((lo - p * hh, hi + p * hh) for (lo, hi), hh, p in zip(self.extents, self.h, pad))
        return Grid(self.dim, ext, tuple(m + 2 * p for m, p in zip(self.n, pad)))


def _per_axis(value, dim):
    if np.ndim(value) == 0:
        return (int(value),) * dim
    value = tuple(int(v) for v in value)
    if len(value) != dim:
        raise ConfigError(f"expected {dim} per-axis values, got {value}")
    return value


def build_grid(dim, extents, n) -> Grid:
    """Build a :class:`Grid`.

    ``extents`` is ``[lo, hi]`` in 1D or a list of per-axis pairs; ``n`` is an int
    or a per-axis sequence.

    >>> build_grid(1, [0, 1], 9).h
    (0.1,)
    """
    extents = np.asarray(extents, dtype=float)
    if extents.ndim == 1:
        extents = extents.reshape(1, 2) if dim == 1 else extents.reshape(-1, 2)
    if extents.shape != (dim, 2):
        raise ConfigError(f"extents must give {dim} (lo, hi) pairs")
    ext = tuple((float(lo), float(hi)) for lo, hi in extents)
    return Grid(int(dim), ext, _per_axis(n, dim))


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """Nodal samples of a scalar field on a grid, boundary layer included.

    ``expr`` optionally records the closed-form expression the samples came from,
    which lets the natural extension re-evaluate it outside the domain.
    """

    grid: Grid
    values: np.ndarray
    expr: object = field(default=None, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"field shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.shape, float(c)))

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior]

    @property
    def boundary(self) -> np.ndarray:
        return self.values[self.grid.boundary_mask]

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def with_interior(self, interior) -> "DiscreteField":
        vals = np.array(self.values)
        vals[self.grid.interior] = np.asarray(interior).reshape(self.grid.n)
        return DiscreteField(self.grid, vals)

    def __add__(self, other):
        return DiscreteField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return DiscreteField(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        return DiscreteField(self.grid, self.values * _vals(other))

    __rmul__ = __mul__


def _vals(x):
    return x.values if isinstance(x, DiscreteField) else x


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Discrete ``-div(a grad u)`` restricted to interior rows.

    ``matrix`` couples interior unknowns; ``coupling`` holds the columns that
    touch Dirichlet nodes (indexed by full flat node index), so that
    ``L u = matrix @ u_I + coupling @ u_full``.
    """

    grid: Grid
    matrix: sp.csr_matrix
    coupling: sp.csr_matrix

    def boundary_contribution(self, bc) -> np.ndarray:
        """Right-hand-side contribution ``-A_IB g`` of the Dirichlet data ``bc``."""
        g = np.asarray(_vals(bc), dtype=float).ravel()
        return -(self.coupling @ g)

    def apply(self, u) -> np.ndarray:
        """Interior values of ``L u`` for a full nodal field (boundary values included)."""
        full = np.asarray(_vals(u), dtype=float)
        return self.matrix @ full[self.grid.interior].ravel() + self.coupling @ full.ravel()

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


def assemble_operator(grid: Grid, a, check_ellipticity=True) -> SparseOperator:
    """Assemble the flux-form stencil of ``-div(a grad u)`` with arithmetic face means.

    In 1D the interior row ``i`` is
    ``(-a_{i-1/2}, a_{i-1/2} + a_{i+1/2}, -a_{i+1/2}) / h**2``; 2D adds the same
    three-point stencil along y.
    """
    avals = np.asarray(_vals(a), dtype=float)
    if avals.ndim == 0:
        avals = np.full(grid.shape, float(avals))
    if avals.shape != grid.shape:
        raise ValueError("diffusion field does not match grid")
    if check_ellipticity and not np.all(avals > 0):
        bad = float(avals.min())
        raise EllipticityError(f"diffusion coefficient must be positive everywhere (min {bad:.6g})")

    idx = np.arange(grid.size).reshape(grid.shape)
    interior_idx = idx[grid.interior]
    # flat node index -> interior row number, -1 on the boundary
    row_of = np.full(grid.size, -1, dtype=np.int64)
    row_of[interior_idx.ravel()] = np.arange(grid.n_interior)

    rows, cols, data = [], [], []
    diag = np.zeros(grid.n)
    for axis, hh in enumerate(grid.h):
        lo = [slice(1, -1)] * grid.dim
        hi = [slice(1, -1)] * grid.dim
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        a_c = avals[grid.interior]
        a_minus = 0.5 * (a_c + avals[tuple(lo)]) / hh**2
        a_plus = 0.5 * (a_c + avals[tuple(hi)]) / hh**2
        diag += a_minus + a_plus
        for nb, w in ((idx[tuple(lo)], a_minus), (idx[tuple(hi)], a_plus)):
            rows.append(np.arange(grid.n_interior))
            cols.append(nb.ravel())
            data.append(-w.ravel())
    rows.append(np.arange(grid.n_interior))
    cols.append(interior_idx.ravel())
    data.append(diag.ravel())

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    inner = row_of[cols] >= 0
    m = grid.n_interior
    matrix = sp.csr_matrix((data[inner], (rows[inner], row_of[cols[inner]])), shape=(m, m))
    coupling = sp.csr_matrix((data[~inner], (rows[~inner], cols[~inner])), shape=(m, grid.size))
    matrix.sort_indices()
    coupling.sort_indices()
    return SparseOperator(grid, matrix, coupling)
