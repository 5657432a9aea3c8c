"""Mollifier nets, field extension and the discrete embedding ``(E u * phi_eps)|_domain``.

Two kernel families are provided.

positive-bump
    ``C exp(-1 / (1 - x**2))`` on ``|x| < 1``; nonnegative, so at most the
    first moment vanishes (``K <= 1``).
vanishing-moment
    ``phi = F^{-1}[psi]`` for a smooth cutoff ``psi`` that is ``1`` on
    ``|xi| <= w`` and ``0`` for ``|xi| >= 2 w``.  Between the two plateaus
    ``psi(xi) = g(2w - |xi|) / (g(2w - |xi|) + g(|xi| - w))`` with
    ``g(z) = exp(-1/z)`` for ``z > 0``.  The profile is evaluated as
    ``phi(x) = 2 int_0^{2w} psi(xi) cos(2 pi x xi) dxi`` with the trapezoid rule
    on ``resolution`` nodes.  Every moment of order ``>= 1`` vanishes in the
    continuum; the discrete kernel is truncated where ``|phi| < 1e-12`` and its
    even moments up to ``K`` are then restored exactly by a small bump-shaped
    correction (see :func:`_fix_moments`).

Default cutoff width is ``w = 1/2``.  All kernels are even, and 2D kernels are
tensor products of the 1D profile.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ContractError, ResolutionWarning
from .grid import DiscreteField

POSITIVE_BUMP = "positive-bump"
VANISHING_MOMENT = "vanishing-moment"
KINDS = (POSITIVE_BUMP, VANISHING_MOMENT)

TRUNCATION_TOL = 1e-12
_SCAN_LIMIT = 400.0


def _g(z):
    out = np.zeros_like(z)
    pos = z > 0
    out[pos] = np.exp(-1.0 / z[pos])
    return out


def smooth_cutoff(xi, width=0.5):
    """The Fourier-side cutoff: ``1`` on ``|xi| <= width``, ``0`` beyond ``2 width``."""
    s = np.abs(np.asarray(xi, dtype=float))
    up, down = _g(2 * width - s), _g(s - width)
    denom = up + down
    out = np.ones_like(s)
    mid = s > width
    out[mid] = np.divide(up[mid], denom[mid], out=np.zeros_like(up[mid]), where=denom[mid] > 0)
    return out


def _bump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


_BUMP_MASS = 2 * integrate.quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]


@dataclass(frozen=True, eq=False)
class Mollifier:
    """An even mollifier profile ``phi`` on ``[0, radius]`` plus its evaluation rule.

    ``radius`` is the support radius (bump) or truncation radius (vanishing
    moment) of ``phi``; the kernel at scale ``eps`` reaches ``radius * eps``.
    """

    kind: str
    K: int
    resolution: int
    cutoff: float
    radius: float
    x_ref: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    _nodes: tuple = field(default=(), repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, x):
        """Continuum profile ``phi(x)`` (truncated, before moment correction)."""
        x = np.asarray(x, dtype=float)
        if self.kind == POSITIVE_BUMP:
            return _bump(x) / _BUMP_MASS
        xi, c = self._nodes
        flat = np.abs(x).ravel()
        out = np.empty_like(flat)
        for start in range(0, flat.size, 2048):
            chunk = flat[start : start + 2048]
            out[start : start + 2048] = np.cos(2 * np.pi * np.outer(chunk, xi)) @ c
        out[flat > self.radius] = 0.0
        return out.reshape(x.shape)

    @property
    def dx(self) -> float:
        return float(self.x_ref[1] - self.x_ref[0])

    def moment(self, k: int) -> float:
        """``int x**k phi(x) dx`` by the trapezoid rule on the reference profile."""
        x = np.concatenate([-self.x_ref[:0:-1], self.x_ref])
        p = np.concatenate([self.profile[:0:-1], self.profile])
        return float(integrate.trapezoid(x**k * p, dx=self.dx))

    def reach(self, h, eps) -> int:
        """Kernel half-width in nodes at spacing ``h`` and scale ``eps``."""
        return int(math.floor(self.radius * eps / h * (1 + 1e-12)))

    def weights(self, h, eps) -> np.ndarray:
        """Discrete 1D weights ``h * phi_eps(k h)`` for ``|k| <= reach`` (length ``2 P + 1``).

        Moments ``sum_k w_k (k h)**m`` equal ``delta_{m0}`` for the even ``m <= K``
        (and the odd ones vanish by symmetry).
        """
        key = (float(h), float(eps))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        P = self.reach(h, eps)
        t = np.arange(P + 1) * (h / eps)
        half = self(t) * (h / eps)
        if P == 0:
            w = np.ones(1)
        elif self.kind == POSITIVE_BUMP:
            w = _symmetric(half)
            w = w / w.sum()
        else:
            w = _symmetric(_fix_moments(t, half, self.K, self.radius))
        w.setflags(write=False)
        self._cache[key] = w
        return w


def _symmetric(half):
    return np.concatenate([half[:0:-1], half])


def _fix_moments(t, half, K, radius):
    """Add ``sum_j c_j (t/R)**(2j) bump(t/R)`` so that even moments ``0..K`` become exact.

    ``half`` holds samples at ``t >= 0`` of an even kernel (``t`` in kernel
    units, with ``t[0] = 0``).  The full symmetric sum of ``t**m * kernel`` is
    forced to ``delta_{m0}``; rescaling by ``R`` keeps the small linear system
    well conditioned.
    """
    n_even = K // 2 + 1
    n_even = min(n_even, max(1, np.count_nonzero(t < radius)))
    mult = np.full(t.size, 2.0)
    mult[0] = 1.0
    s = t / radius
    basis = np.array([s ** (2 * j) * _bump(s) for j in range(n_even)])
    powers = np.array([s ** (2 * m) for m in range(n_even)])
    A = (powers * mult) @ basis.T
    current = (powers * mult) @ half
    target = np.zeros(n_even)
    target[0] = 1.0
    coef = np.linalg.solve(A, target - current)
    return half + coef @ basis


def make_mollifier(kind=VANISHING_MOMENT, K=4, resolution=4096, cutoff=0.5) -> Mollifier:
    """Build a mollifier profile.

    Parameters
    ----------
    kind : {"positive-bump", "vanishing-moment"}
    K : int
        Highest moment order that must vanish.  A positive kernel cannot kill
        the second moment, so ``positive-bump`` accepts only ``K <= 1``.
    resolution : int
        Trapezoid nodes for the Fourier integral, and reference samples on
        ``[0, radius]``.
    cutoff : float
        Plateau half-width ``w`` of the Fourier cutoff.
    """
    if kind not in KINDS:
        raise ContractError(f"unknown mollifier kind {kind!r}; expected one of {KINDS}")
    if K < 0:
        raise ContractError("moment order K must be >= 0")
    if kind == POSITIVE_BUMP and K >= 2:
        raise ContractError(f"a positive kernel cannot have vanishing moments of order 2; got K = {K}")
    if resolution < 16:
        raise ContractError("resolution must be at least 16")
    if not cutoff > 0:
        raise ContractError("cutoff width must be positive")

    if kind == POSITIVE_BUMP:
        x_ref = np.linspace(0.0, 1.0, resolution)
        prof = _bump(x_ref) / _BUMP_MASS
        return Mollifier(kind, int(K), int(resolution), float(cutoff), 1.0, x_ref, prof)

    xi = np.linspace(0.0, 2 * cutoff, resolution)
    tw = np.full(resolution, xi[1] - xi[0])
    tw[[0, -1]] *= 0.5
    c = 2.0 * tw * smooth_cutoff(xi, cutoff)
    radius = _truncation_radius(xi, c)
    probe = Mollifier(kind, int(K), int(resolution), float(cutoff), radius, np.zeros(2), np.zeros(2), (xi, c))
    x_ref = np.linspace(0.0, radius, resolution)
    dx = x_ref[1] - x_ref[0]
    raw = probe(x_ref)
    raw[-1] = 0.0  # below the truncation tolerance; keeps trapezoid == plain sum
    # reference profile carries quadrature weight dx, so its moments are exact too
    prof = _fix_moments(x_ref, raw * dx, K, radius) / dx
    return Mollifier(kind, int(K), int(resolution), float(cutoff), radius, x_ref, prof, (xi, c))


def _truncation_radius(xi, c):
    x = np.arange(0.0, _SCAN_LIMIT, 0.05)
    vals = np.abs(np.cos(2 * np.pi * np.outer(x, xi)) @ c)
    big = np.nonzero(vals >= TRUNCATION_TOL)[0]
    return float(x[big[-1] + 1])


# -- extension -----------------------------------------------------------

EXTENSION_TAGS = ("zero", "even", "natural")


@dataclass(frozen=True)
class ExtensionMethod:
    """How a field is continued outside the domain before convolution.

    ``zero`` fills zeros, ``even`` mirrors across each face (about the boundary
    node), and ``natural`` re-evaluates the field's closed-form expression on
    the padded grid (falling back to ``even`` when no expression is attached).
    """

    tag: str = "natural"
    pad: int | tuple[int, ...] = 0

    def __post_init__(self):
        if self.tag not in EXTENSION_TAGS:
            raise ContractError(f"unknown extension {self.tag!r}; expected one of {EXTENSION_TAGS}")


def extend_field(fld: DiscreteField, method: ExtensionMethod) -> DiscreteField:
    """Extend ``fld`` onto ``fld.grid.padded(method.pad)``; original nodes are copied exactly."""
    grid = fld.grid
    pad = (method.pad,) * grid.dim if np.ndim(method.pad) == 0 else tuple(method.pad)
    if any(p < 0 for p in pad):
        raise ContractError("padding must be nonnegative")
    big = grid.padded(pad)
    inner = tuple(slice(p, p + s) for p, s in zip(pad, grid.shape))
    widths = [(p, p) for p in pad]
    tag = method.tag
    if tag == "natural" and fld.expr is None:
        tag = "even"
    if tag == "zero":
        vals = np.pad(fld.values, widths, mode="constant")
    elif tag == "even":
        vals = np.pad(fld.values, widths, mode="reflect")
    else:
        vals = fld.expr(*big.mesh, clip=0.5 * min(grid.h))
        vals[inner] = fld.values
    return DiscreteField(big, vals, expr=fld.expr)


def regularize(fld: DiscreteField, mollifier: Mollifier, eps: float, extension="natural") -> DiscreteField:
    """Discrete ``(E u * phi_eps)`` restricted to the original nodes.

    The convolution is the trapezoid rule with the nodes of the grid (the kernel
    vanishes at its truncation ends, so trapezoid and rectangle sums agree).
    ``extension`` is a tag or an :class:`ExtensionMethod`; with an explicit
    ``pad`` narrower than the kernel reach a :class:`ContractError` is raised.
    """
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    grid = fld.grid
    if eps < min(grid.h):
        warnings.warn(
            f"eps = {eps:g} is below the grid spacing {min(grid.h):g}; regularization is close to the identity",
            ResolutionWarning,
            stacklevel=2,
        )
    reach = tuple(mollifier.reach(hh, eps) for hh in grid.h)
    if isinstance(extension, str):
        extension = ExtensionMethod(extension, reach)
    pad = (extension.pad,) * grid.dim if np.ndim(extension.pad) == 0 else tuple(extension.pad)
    if any(p < r for p, r in zip(pad, reach)):
        raise ContractError(f"padding {pad} is narrower than the kernel reach {reach} nodes")
    ext = extend_field(fld, extension).values
    # trim surplus padding so the 'valid' convolution lands on the original nodes
    ext = ext[tuple(slice(p - r, ext.shape[i] - (p - r)) for i, (p, r) in enumerate(zip(pad, reach)))]
    out = ext
    for axis, hh in enumerate(grid.h):
        out = _convolve_axis(out, mollifier.weights(hh, eps), axis)
    return DiscreteField(grid, out)


def _convolve_axis(arr, w, axis):
    windows = np.lib.stride_tricks.sliding_window_view(arr, w.size, axis=axis)
    return np.einsum("...k,k->...", windows, w)
