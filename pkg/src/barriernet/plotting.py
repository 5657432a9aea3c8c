"""PNG figures next to the CSVs (headless Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def plot_sweep(report, out_dir) -> list:
    """Barriers and Hoelder norms against ``eps`` (log-log)."""
    rows = [r for r in report.rows if r.ok]
    if not rows:
        return []
    eps = np.array([r.eps for r in rows])
    out = Path(out_dir)

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, style in (("alpha", "o-"), ("beta", "s-"), ("alpha_lower", "v--"), ("beta_upper", "^--"), ("u_min", ".:"), ("u_max", ".:")):
        ax.semilogx(eps, [getattr(r, name) for r in rows], style, label=name)
    ax.set_xlabel("eps")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    paths = [_save(fig, out / "barriers.png")]

    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("holder_k0", "holder_k1g", "holder_k2g", "schauder_ratio"):
        vals = np.array([getattr(r, name) for r in rows])
        ok = np.isfinite(vals) & (vals > 0)
        if ok.any():
            ax.loglog(eps[ok], vals[ok], "o-", label=name)
    ax.set_xlabel("eps")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    paths.append(_save(fig, out / "norms.png"))
    return paths


def plot_solution(u, out_dir, name="solution.png") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    grid = u.grid
    if grid.dim == 1:
        ax.plot(grid.coords[0], u.values, "-")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
    else:
        im = ax.pcolormesh(*grid.mesh, u.values, shading="auto")
        fig.colorbar(im, ax=ax)
        ax.set_aspect("equal")
    return _save(fig, Path(out_dir) / name)


def plot_critical(report, out_dir) -> list:
    d = np.asarray(report.differences)
    if d.size == 0 or not np.any(d > 0):
        return []
    js = [r.j for r in report.rows[:-1]]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(js, np.where(d > 0, d, np.nan), "o-")
    ax.set_xlabel("j  (eps = 2**-j)")
    ax.set_ylabel("H1 norm of u_{j+1} - u_j")
    return [_save(fig, Path(out_dir) / "critical.png")]
