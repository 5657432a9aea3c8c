"""Run configuration: TOML files (or a previously written run manifest) into frozen dataclasses.

Recognized sections and keys (defaults in parentheses)::

    [grid]        dim (1), extents ([0, 1]), n (257)
    [schedule]    eps_0 (0.5), ratio (0.5), count (8)
    [mollifier]   kind ("vanishing-moment" in 1D, "positive-bump" in 2D),
                  K (4, or 0 for the bump), cutoff (0.5), resolution (4096),
                  extension ("natural")
    [problem]     a ("1"), rho ("1"), [[problem.terms]] exponent, coefficient
    [lichnerowicz] R ("0"), tau2 (12), sigma2 ("1"), rho_m ("0"), kappa (1),
                  a ("1"), rho ("1")
    [iteration]   tol_sup (1e-10), max_iter (20000), slack (1e-10)
    [diagnostics] gamma (0.5), q_target (3), schauder_threshold (1e-6)
    [critical]    a, b, m, i, rho, n (1025), j_min (3), j_max (9),
                  extents ([0, 1])

Exactly one of ``[problem]`` and ``[lichnerowicz]`` is needed for ``solve``,
``sweep`` and ``validate``; ``critical`` needs ``[critical]``.
"""

from __future__ import annotations

import hashlib
import json
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .colombeau import EpsSchedule
from .errors import ConfigError
from .expressions import as_expr
from .grid import build_grid
from .lichnerowicz import HamiltonianData, assemble_hamiltonian
from .monotone import IterationConfig
from .mollify import EXTENSION_TAGS, KINDS, POSITIVE_BUMP, VANISHING_MOMENT, make_mollifier
from .problem import ProblemSpec

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    extents: tuple = ((0.0, 1.0),)
    n: tuple = (257,)

    def build(self):
        return build_grid(self.dim, [list(e) for e in self.extents], list(self.n))


@dataclass(frozen=True)
class MollifierConfig:
    kind: str = VANISHING_MOMENT
    K: int = 4
    cutoff: float = 0.5
    resolution: int = 4096
    extension: str = "natural"

    def build(self):
        return make_mollifier(self.kind, self.K, self.resolution, self.cutoff)


@dataclass(frozen=True)
class ProblemConfig:
    a: str = "1"
    rho: str = "1"
    terms: tuple = ()  # ((exponent, coefficient text), ...)


@dataclass(frozen=True)
class LichnerowiczConfig:
    R: str = "0"
    tau2: float = 12.0
    sigma2: str = "1"
    rho_m: str = "0"
    kappa: float = 1.0
    a: str = "1"
    rho: str = "1"


@dataclass(frozen=True)
class DiagnosticsConfig:
    gamma: float = 0.5
    q_target: float = 3.0
    schauder_threshold: float = 1e-6


@dataclass(frozen=True)
class CriticalConfig:
    a: str = "1 + inv_pow(0.5, 0.5)"
    b: str = "-1"
    m: int = 5
    i: int = 1
    rho: str = "1"
    n: int = 1025
    j_min: int = 3
    j_max: int = 9
    extents: tuple = (0.0, 1.0)


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    schedule: EpsSchedule = field(default_factory=EpsSchedule)
    mollifier: MollifierConfig = field(default_factory=MollifierConfig)
    iteration: IterationConfig = field(default_factory=IterationConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    problem: ProblemConfig | None = None
    lichnerowicz: LichnerowiczConfig | None = None
    critical: CriticalConfig | None = None

    def to_dict(self) -> dict:
        """Effective configuration as plain JSON-compatible data."""
        out = {
            "grid": {"dim": self.grid.dim, "extents": [list(e) for e in self.grid.extents], "n": list(self.grid.n)},
            "schedule": asdict(self.schedule),
            "mollifier": asdict(self.mollifier),
            "iteration": {k: v for k, v in asdict(self.iteration).items() if k != "direction"},
            "diagnostics": asdict(self.diagnostics),
        }
        if self.problem is not None:
            out["problem"] = {
                "a": self.problem.a,
                "rho": self.problem.rho,
                "terms": [{"exponent": n, "coefficient": c} for n, c in self.problem.terms],
            }
        if self.lichnerowicz is not None:
            out["lichnerowicz"] = asdict(self.lichnerowicz)
        if self.critical is not None:
            crit = asdict(self.critical)
            crit["extents"] = list(self.critical.extents)
            out["critical"] = crit
        return out

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def problem_spec(self) -> ProblemSpec:
        grid = self.grid.build()
        if self.lichnerowicz is not None:
            lc = self.lichnerowicz
            data = HamiltonianData(lc.R, lc.tau2, lc.sigma2, lc.rho_m, lc.kappa)
            return assemble_hamiltonian(data, grid, lc.a, lc.rho)
        if self.problem is None:
            raise ConfigError("no [problem] or [lichnerowicz] block in the configuration")
        return ProblemSpec.build(grid, self.problem.a, self.problem.rho, self.problem.terms)


# -- parsing ---------------------------------------------------------------

_SECTIONS = {
    "grid": {"dim", "extents", "n"},
    "schedule": {"eps_0", "ratio", "count"},
    "mollifier": {"kind", "K", "cutoff", "resolution", "extension"},
    "problem": {"a", "rho", "terms"},
    "lichnerowicz": {"R", "tau2", "sigma2", "rho_m", "kappa", "a", "rho"},
    "iteration": {"tol_sup", "max_iter", "slack"},
    "diagnostics": {"gamma", "q_target", "schauder_threshold"},
    "critical": {"a", "b", "m", "i", "rho", "n", "j_min", "j_max", "extents"},
}
_TERM_KEYS = {"exponent", "coefficient"}


class _Locator:
    """Best-effort line lookup for error messages."""

    def __init__(self, text):
        self.lines = text.splitlines() if text else []

    def line_of(self, key, section=None):
        current = None
        pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
        head = re.compile(r"^\s*\[\[?\s*([^\]]+?)\s*\]\]?")
        for no, line in enumerate(self.lines, 1):
            m = head.match(line)
            if m:
                current = m.group(1)
                if section is None and current == key:
                    return no
                continue
            if pat.match(line) and (section is None or current is None or current.split(".")[0] == section):
                return no
        return None

    def where(self, key, section=None):
        no = self.line_of(key, section)
        return f" (line {no})" if no else ""


def _num(value, name, loc, section, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {name} must be a number, got {value!r}{loc.where(name, section)}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"[{section}] {name} must be an integer{loc.where(name, section)}")
        return int(value)
    return float(value)


def _expr_text(value, name, loc, section, dim):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = repr(float(value))
    if not isinstance(value, str):
        raise ConfigError(f"[{section}] {name} must be an expression string{loc.where(name, section)}")
    try:
        as_expr(value, dim)
    except ConfigError as exc:
        raise ConfigError(f"[{section}] {name}: {exc}{loc.where(name, section)}") from None
    return value.strip()


def _wrap(fn, section, loc, key=None):
    try:
        return fn()
    except ConfigError as exc:
        raise ConfigError(f"[{section}] {exc}{loc.where(key or section, None if key is None else section)}") from None


def config_from_dict(raw: dict, text: str = "") -> RunConfig:
    """Validate a parsed TOML/JSON mapping and apply defaults."""
    loc = _Locator(text)
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    for section, body in raw.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section or key {section!r}{loc.where(section)}")
        if not isinstance(body, dict):
            raise ConfigError(f"{section!r} must be a table{loc.where(section)}")
        for key in body:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]{loc.where(key, section)}")

    g = raw.get("grid", {})
    dim = _num(g.get("dim", 1), "dim", loc, "grid", int)
    if dim not in (1, 2):
        raise ConfigError(f"[grid] dim must be 1 or 2{loc.where('dim', 'grid')}")
    extents = g.get("extents", [0.0, 1.0] if dim == 1 else [[0.0, 1.0], [0.0, 1.0]])
    try:
        ext = [[float(extents[0]), float(extents[1])]] if dim == 1 and not isinstance(extents[0], list) else [
            [float(lo), float(hi)] for lo, hi in extents
        ]
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"[grid] extents must be [lo, hi] pairs{loc.where('extents', 'grid')}") from None
    n = g.get("n", 257)
    n = [n] * dim if not isinstance(n, list) else n
    n = tuple(_num(v, "n", loc, "grid", int) for v in n)
    grid_cfg = GridConfig(dim, tuple(tuple(e) for e in ext), n)
    _wrap(grid_cfg.build, "grid", loc)

    s = raw.get("schedule", {})
    schedule = _wrap(
        lambda: EpsSchedule(
            _num(s.get("eps_0", 0.5), "eps_0", loc, "schedule"),
            _num(s.get("ratio", 0.5), "ratio", loc, "schedule"),
            _num(s.get("count", 8), "count", loc, "schedule", int),
        ),
        "schedule",
        loc,
    )

    mo = raw.get("mollifier", {})
    kind = mo.get("kind", VANISHING_MOMENT if dim == 1 else POSITIVE_BUMP)
    if kind not in KINDS:
        raise ConfigError(f"[mollifier] kind must be one of {KINDS}{loc.where('kind', 'mollifier')}")
    K = _num(mo.get("K", 4 if kind == VANISHING_MOMENT else 0), "K", loc, "mollifier", int)
    if kind == POSITIVE_BUMP and K >= 2:
        raise ConfigError(f"[mollifier] a positive-bump kernel allows K <= 1{loc.where('K', 'mollifier')}")
    extension = mo.get("extension", "natural")
    if extension not in EXTENSION_TAGS:
        raise ConfigError(f"[mollifier] extension must be one of {EXTENSION_TAGS}{loc.where('extension', 'mollifier')}")
    moll = MollifierConfig(
        kind,
        K,
        _num(mo.get("cutoff", 0.5), "cutoff", loc, "mollifier"),
        _num(mo.get("resolution", 4096), "resolution", loc, "mollifier", int),
        extension,
    )
    if moll.cutoff <= 0 or moll.resolution < 16:
        raise ConfigError("[mollifier] cutoff must be positive and resolution at least 16")

    it = raw.get("iteration", {})
    iteration = _wrap(
        lambda: IterationConfig(
            _num(it.get("tol_sup", 1e-10), "tol_sup", loc, "iteration"),
            _num(it.get("max_iter", 20000), "max_iter", loc, "iteration", int),
            _num(it.get("slack", 1e-10), "slack", loc, "iteration"),
        ),
        "iteration",
        loc,
    )

    d = raw.get("diagnostics", {})
    diag = DiagnosticsConfig(
        _num(d.get("gamma", 0.5), "gamma", loc, "diagnostics"),
        _num(d.get("q_target", 3.0), "q_target", loc, "diagnostics"),
        _num(d.get("schauder_threshold", 1e-6), "schauder_threshold", loc, "diagnostics"),
    )
    if not 0 < diag.gamma < 1:
        raise ConfigError(f"[diagnostics] gamma must lie in (0, 1){loc.where('gamma', 'diagnostics')}")

    problem = lich = crit = None
    if "problem" in raw and "lichnerowicz" in raw:
        raise ConfigError("give either [problem] or [lichnerowicz], not both")
    if "problem" in raw:
        p = raw["problem"]
        terms_raw = p.get("terms")
        if not terms_raw:
            raise ConfigError(f"[problem] needs at least one [[problem.terms]] entry{loc.where('problem')}")
        terms = []
        for t in terms_raw:
            if not isinstance(t, dict):
                raise ConfigError("[[problem.terms]] entries must be tables")
            for key in t:
                if key not in _TERM_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [[problem.terms]]{loc.where(key, 'problem')}")
            if "exponent" not in t or "coefficient" not in t:
                raise ConfigError(f"[[problem.terms]] needs exponent and coefficient{loc.where('problem')}")
            terms.append(
                (
                    _num(t["exponent"], "exponent", loc, "problem", int),
                    _expr_text(t["coefficient"], "coefficient", loc, "problem", dim),
                )
            )
        exps = [e for e, _ in terms]
        if len(set(exps)) != len(exps):
            dup = sorted({e for e in exps if exps.count(e) > 1})
            raise ConfigError(f"[problem] exponents must be distinct; repeated {dup}{loc.where('exponent', 'problem')}")
        problem = ProblemConfig(
            _expr_text(p.get("a", "1"), "a", loc, "problem", dim),
            _expr_text(p.get("rho", "1"), "rho", loc, "problem", dim),
            tuple(terms),
        )
    if "lichnerowicz" in raw:
        lc = raw["lichnerowicz"]
        lich = LichnerowiczConfig(
            _expr_text(lc.get("R", "0"), "R", loc, "lichnerowicz", dim),
            _num(lc.get("tau2", 12.0), "tau2", loc, "lichnerowicz"),
            _expr_text(lc.get("sigma2", "1"), "sigma2", loc, "lichnerowicz", dim),
            _expr_text(lc.get("rho_m", "0"), "rho_m", loc, "lichnerowicz", dim),
            _num(lc.get("kappa", 1.0), "kappa", loc, "lichnerowicz"),
            _expr_text(lc.get("a", "1"), "a", loc, "lichnerowicz", dim),
            _expr_text(lc.get("rho", "1"), "rho", loc, "lichnerowicz", dim),
        )
        if lich.kappa <= 0 or lich.tau2 < 0:
            raise ConfigError(f"[lichnerowicz] needs kappa > 0 and tau2 >= 0{loc.where('lichnerowicz')}")
    if "critical" in raw:
        c = raw["critical"]
        ext = c.get("extents", [0.0, 1.0])
        crit = CriticalConfig(
            _expr_text(c.get("a", CriticalConfig.a), "a", loc, "critical", 1),
            _expr_text(c.get("b", CriticalConfig.b), "b", loc, "critical", 1),
            _num(c.get("m", 5), "m", loc, "critical", int),
            _num(c.get("i", 1), "i", loc, "critical", int),
            _expr_text(c.get("rho", "1"), "rho", loc, "critical", 1),
            _num(c.get("n", 1025), "n", loc, "critical", int),
            _num(c.get("j_min", 3), "j_min", loc, "critical", int),
            _num(c.get("j_max", 9), "j_max", loc, "critical", int),
            (float(ext[0]), float(ext[1])),
        )
        if crit.j_max - crit.j_min < 2:
            raise ConfigError(f"[critical] needs j_max - j_min >= 2{loc.where('j_max', 'critical')}")
    return RunConfig(grid_cfg, schedule, moll, iteration, diag, problem, lich, crit)


def parse_config(path) -> RunConfig:
    """Read a TOML config, or the ``config`` block of a JSON run manifest."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if path.suffix == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        raw = raw.get("config", raw) if isinstance(raw, dict) else raw
        return config_from_dict(raw)
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, text)


def parse_config_text(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from None
    return config_from_dict(raw, text)
