"""Scenario configuration files.

The grammar is INI-like: ``[section]`` headers, ``key = value`` lines,
``#`` comments.  Values are JSON where they parse as JSON (numbers, lists,
inline matrices, ``true``/``null``) and bare strings otherwise.  Indented
continuation lines let a matrix span several lines.  A value ``@file.json``
loads an Operator JSON file relative to the config file.

Sections::

    [scenario]    name, seed
    [system]      dim or j, rho, hamiltonian, omega, grid
    [params]      scenario-specific keys (see DEFAULTS)
    [output]      format, path, normalization
    [tolerances]  scenario-specific assertion tolerances

Matrices are written either as nested real lists ``[[1, 0], [0, 0]]`` or as
``{"re": [[...]], "im": [[...]]}``; they are stored in the latter form.
"""

from __future__ import annotations

import configparser
import copy
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .operators import ROLE_TOL, check_partition, role_violation

SCENARIO_NAMES = (
    "two_slit", "precession_consistency", "reproduction_sweep", "negativity_map",
    "conditioning_demo", "inference_search", "axiom_audit",
)
FORMATS = ("json", "csv", "text")
NORMALIZATIONS = ("unit_trace", "paper_4_2")
SECTIONS = ("scenario", "system", "params", "output", "tolerances")

STATE_PRESETS = ("zero", "one", "up", "down", "plus", "minus", "mixed", "random", "random_pure")
PROJECTOR_PRESETS = ("zero", "one", "up", "down", "plus", "minus", "identity")
HAMILTONIAN_PRESETS = ("zero", "jx", "jy", "jz", "random")
BASIS_PRESETS = ("z", "x")
MAX_CONFIG_DIM = 9

_AXIOMS = ["1_positivity", "2_normalisation", "3_hermiticity", "4_additivity",
           "5_triviality", "6_boundedness", "7_subadditivity", "interference_identity"]

# Per-scenario defaults; every key a config may set appears here.
DEFAULTS: dict[str, dict[str, Any]] = {
    "two_slit": {
        "description": "two-outcome partition at t1, screen filter at t2: additivity gap and interference",
        "system": {"dim": 2, "rho": "plus", "hamiltonian": "zero", "omega": 1.0, "grid": [0.0, 1.0]},
        "params": {"partition": "z", "screen": "plus", "t1": 0.0, "t2": 1.0, "expect_gap": -0.5},
        "tolerances": {"gap": 1e-12, "identity": 1e-12},
        "format": "csv",
    },
    "precession_consistency": {
        "description": "sigma_z histories under precession: consistency, statistical vs closed-time-path correlation",
        "system": {"dim": 2, "rho": "zero", "hamiltonian": "jx", "omega": 1.0,
                   "grid": [0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]},
        "params": {"observable": "z", "oracle": "cos"},
        "tolerances": {"consistency": 1e-10, "correlation": 1e-10},
        "format": "json",
    },
    "reproduction_sweep": {
        "description": "random projector histories: Hilbert-space vs phase-space coherence",
        "system": {"dim": 2, "rho": "random", "hamiltonian": "random", "omega": 1.0,
                   "grid": [0.0, 0.6, 1.3]},
        "params": {"n_histories": 100, "max_filters": 2, "space": "auto", "write_w": True},
        "tolerances": {"reproduction": 1e-9},
        "format": "json",
    },
    "negativity_map": {
        "description": "Wigner symbol of a sharp filter on the sphere or torus and its negativity",
        "system": {"dim": 2, "rho": "mixed", "hamiltonian": "zero", "omega": 1.0, "grid": [0.0]},
        "params": {"filter": "up", "kind": "wigner", "expect_negative": True,
                   "expect_pole": None, "expect_antipode": None},
        "tolerances": {"symbol": 1e-12},
        "format": "json",
        "normalization": "paper_4_2",
    },
    "conditioning_demo": {
        "description": "evidence conditioning vs state reduction, and trivial post-selection",
        "system": {"dim": 3, "rho": "random", "hamiltonian": "random", "omega": 1.0,
                   "grid": [0.0, 0.5, 1.1, 1.7]},
        "params": {"n_fixtures": 100, "max_filters": 2, "t_final": 2.5},
        "tolerances": {"reduction": 1e-10, "postselect": 1e-12},
        "format": "json",
    },
    "inference_search": {
        "description": "randomized search for incompatible inferences across consistent coarse-grainings",
        "system": {"dim": 3, "rho": "random_pure", "hamiltonian": "random", "omega": 1.0,
                   "grid": [0.0, 1.0]},
        "params": {"n_partitions": 200, "mode": "weak", "three_box": True},
        "tolerances": {"bound": 1e-9, "identity": 1e-10},
        "format": "json",
    },
    "axiom_audit": {
        "description": "the seven coherence-functional axioms over random fixtures",
        "system": {"dim": 2, "rho": "random", "hamiltonian": "random", "omega": 1.0,
                   "grid": [0.0, 0.4, 0.9]},
        "params": {"dims": [2, 3], "n_fixtures": 200, "histories_per_fixture": 4,
                   "max_filters": 2, "assert_axioms": list(_AXIOMS)},
        "tolerances": {"axioms": 1e-10, "identity": 1e-12},
        "format": "json",
    },
}


@dataclass(frozen=True)
class Issue:
    line: int | None
    column: int | None
    message: str
    invariant: str | None = None

    def __str__(self) -> str:
        where = "config"
        if self.line is not None:
            where = f"line {self.line}" + (f", column {self.column}" if self.column else "")
        tail = f" [invariant: {self.invariant}]" if self.invariant else ""
        return f"{where}: {self.message}{tail}"


class ConfigError(ValueError):
    def __init__(self, issues: list[Issue]):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass
class SystemSpec:
    dim: int
    rho: Any
    hamiltonian: Any
    omega: float
    grid: list[float]
    j: str | None = None

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(self.grid)


@dataclass
class OutputSpec:
    format: str
    path: str
    normalization: str


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int
    system: SystemSpec
    params: dict
    output: OutputSpec
    tolerances: dict
    base_dir: str = field(default=".", compare=False, repr=False)

    def scaled_tolerances(self, scale: float) -> dict:
        return {k: v * scale for k, v in self.tolerances.items()}


# -- matrices ---------------------------------------------------------------------

def canonical_matrix(v: Any) -> dict:
    """Nested real list, {re, im} with nested or flat lists, or Operator JSON -> {re, im} nested."""
    if isinstance(v, dict):
        if "re" not in v:
            raise ValueError("matrix object needs an 're' entry")
        re_ = np.asarray(v["re"], dtype=float)
        im_ = np.asarray(v.get("im", np.zeros_like(re_)), dtype=float)
        if re_.ndim == 1:
            d = int(v.get("dim", round(np.sqrt(re_.size))))
            if d * d != re_.size or im_.size != re_.size:
                raise ValueError(f"flat matrix of {re_.size} entries is not square")
            re_, im_ = re_.reshape(d, d), im_.reshape(d, d)
    elif isinstance(v, list):
        re_ = np.asarray(v, dtype=float)
        im_ = np.zeros_like(re_)
    else:
        raise ValueError(f"expected a matrix, got {type(v).__name__}")
    if re_.ndim != 2 or re_.shape[0] != re_.shape[1] or re_.shape != im_.shape:
        raise ValueError(f"matrix must be square, got shape {re_.shape}")
    return {"re": re_.tolist(), "im": im_.tolist()}


def matrix_of(v: dict) -> np.ndarray:
    return np.asarray(v["re"], dtype=float) + 1j * np.asarray(v["im"], dtype=float)


def _is_matrix_value(v: Any) -> bool:
    return isinstance(v, dict) or (isinstance(v, list) and bool(v) and isinstance(v[0], list))


def preset_state(name: str, dim: int) -> np.ndarray:
    """Deterministic state presets as density matrices."""
    e = np.eye(dim, dtype=complex)
    if name in ("zero", "up"):
        v = e[0]
    elif name in ("one", "down"):
        v = e[dim - 1]
    elif name == "plus":
        v = np.ones(dim, dtype=complex) / np.sqrt(dim)
    elif name == "minus":
        if dim != 2:
            raise ValueError("'minus' is defined for dim 2 only")
        v = np.array([1, -1], dtype=complex) / np.sqrt(2)
    elif name == "mixed":
        return e / dim
    elif name == "identity":
        return e
    else:
        raise ValueError(f"unknown preset {name!r}")
    return np.outer(v, v.conj())


def basis_filters(name: str, dim: int) -> list[np.ndarray]:
    if name == "z":
        u = np.eye(dim, dtype=complex)
    elif name == "x":
        k = np.arange(dim)
        u = np.exp(2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)
    else:
        raise ValueError(f"unknown basis preset {name!r}")
    return [np.outer(u[:, i], u[:, i].conj()) for i in range(dim)]


# -- parsing -------------------------------------------------------------------------

_SECTION_RE = re.compile(r"^\s*\[([^\]]*)\]")
_KEY_RE = re.compile(r"^([^\s=:#;][^=:]*?)\s*[=:]\s*")


def _line_index(text: str) -> tuple[dict, dict]:
    """(section -> line, (section, key) -> (line, value column))."""
    sections, keys = {}, {}
    current = None
    for n, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith(("#", ";")) or raw[:1].isspace():
            continue
        m = _SECTION_RE.match(raw)
        if m:
            current = m.group(1).strip()
            sections.setdefault(current, n)
            continue
        m = _KEY_RE.match(raw)
        if m and current is not None:
            keys.setdefault((current, m.group(1).strip().lower()), (n, m.end() + 1))
    return sections, keys


class _Ctx:
    def __init__(self, text: str, base_dir: Path):
        self.sections, self.keys = _line_index(text)
        self.base_dir = base_dir
        self.issues: list[Issue] = []

    def at(self, section: str, key: str | None = None) -> tuple[int | None, int | None]:
        if key is not None and (section, key) in self.keys:
            return self.keys[(section, key)]
        return self.sections.get(section), None

    def error(self, section: str, key: str | None, message: str, invariant: str | None = None):
        line, col = self.at(section, key)
        self.issues.append(Issue(line, col, message, invariant))


def _value(ctx: _Ctx, section: str, key: str, raw: str) -> Any:
    raw = raw.strip()
    if raw.startswith("@"):
        path = (ctx.base_dir / raw[1:].strip()).resolve()
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            ctx.error(section, key, f"file not found: {path}", "path resolvable")
        except json.JSONDecodeError as exc:
            ctx.error(section, key, f"{path}: invalid JSON ({exc.msg})")
        return None
    if raw == "":
        return None
    if raw[0] in "[{":
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            line, col = ctx.at(section, key)
            if line is not None:
                line += exc.lineno - 1
                col = (col or 1) + exc.colno - 1 if exc.lineno == 1 else exc.colno
            ctx.issues.append(Issue(line, col, f"invalid JSON value for {key!r}: {exc.msg}"))
            return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _syntax_issues(exc: configparser.Error) -> list[Issue]:
    if isinstance(exc, configparser.MissingSectionHeaderError):
        return [Issue(exc.lineno, 1, "key outside of any [section]")]
    if isinstance(exc, configparser.ParsingError):
        return [Issue(n, 1, f"cannot parse line: {line.strip()!r}") for n, line in exc.errors]
    if isinstance(exc, configparser.DuplicateOptionError):
        return [Issue(exc.lineno, 1, f"duplicate key {exc.option!r} in [{exc.section}]")]
    if isinstance(exc, configparser.DuplicateSectionError):
        return [Issue(exc.lineno, 1, f"duplicate section [{exc.section}]")]
    return [Issue(None, None, str(exc))]


def parse_config(text: str, base_dir: str | Path = ".") -> ScenarioConfig:
    """Parse and fully validate a scenario config; raise ConfigError listing every issue."""
    base = Path(base_dir)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                   comment_prefixes=("#", ";"), empty_lines_in_values=False)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(_syntax_issues(exc)) from None
    ctx = _Ctx(text, base)
    raw: dict[str, dict[str, Any]] = {}
    for sec in cp.sections():
        if sec not in SECTIONS:
            ctx.error(sec, None, f"unknown section [{sec}]; expected one of {', '.join(SECTIONS)}")
            continue
        raw[sec] = {k: _value(ctx, sec, k, v) for k, v in cp.items(sec)}
    if ctx.issues:
        raise ConfigError(ctx.issues)
    cfg = _build(ctx, raw)
    if ctx.issues:
        raise ConfigError(ctx.issues)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([Issue(None, None, f"cannot read {p}: {exc.strerror}")]) from None
    return parse_config(text, p.parent)


def _take(ctx: _Ctx, sec: dict, section: str, allowed) -> None:
    for k in sec:
        if k not in allowed:
            ctx.error(section, k, f"unknown key {k!r} in [{section}]")


def _build(ctx: _Ctx, raw: dict) -> ScenarioConfig | None:
    sc = raw.get("scenario", {})
    _take(ctx, sc, "scenario", ("name", "seed"))
    name = sc.get("name")
    if name not in SCENARIO_NAMES:
        ctx.error("scenario", "name" if "name" in sc else None,
                  f"scenario name must be one of {', '.join(SCENARIO_NAMES)}, got {name!r}")
        return None
    dflt = DEFAULTS[name]
    seed = sc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        ctx.error("scenario", "seed", f"seed must be an integer in [0, 2^64), got {seed!r}")
        seed = 0

    system = _build_system(ctx, raw.get("system", {}), dflt["system"])

    params = copy.deepcopy(dflt["params"])
    p_in = raw.get("params", {})
    _take(ctx, p_in, "params", params)
    for k, v in p_in.items():
        if k in params:
            params[k] = v

    out_in = raw.get("output", {})
    _take(ctx, out_in, "output", ("format", "path", "normalization"))
    fmt = out_in.get("format", dflt["format"])
    if fmt not in FORMATS:
        ctx.error("output", "format", f"format must be one of {', '.join(FORMATS)}, got {fmt!r}")
    norm = out_in.get("normalization", dflt.get("normalization", "unit_trace"))
    if norm not in NORMALIZATIONS:
        ctx.error("output", "normalization",
                  f"normalization must be one of {', '.join(NORMALIZATIONS)}, got {norm!r}")
    path = out_in.get("path", name)
    if not isinstance(path, str) or not path or Path(path).is_absolute() or ".." in Path(path).parts:
        ctx.error("output", "path", f"output path must be a relative directory name, got {path!r}",
                  "path resolvable")
        path = name

    tols = dict(dflt["tolerances"])
    t_in = raw.get("tolerances", {})
    _take(ctx, t_in, "tolerances", tols)
    for k, v in t_in.items():
        if k not in tols:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            ctx.error("tolerances", k, f"tolerance {k!r} must be a positive number, got {v!r}")
            continue
        tols[k] = float(v)

    if system is None:
        return None
    cfg = ScenarioConfig(name, int(seed), system, params, OutputSpec(fmt, path, norm), tols,
                         str(ctx.base_dir))
    _check_params(ctx, cfg)
    return cfg


def _build_system(ctx: _Ctx, s: dict, dflt: dict) -> SystemSpec | None:
    _take(ctx, s, "system", ("dim", "j", "rho", "hamiltonian", "omega", "grid"))
    j = s.get("j")
    dim = s.get("dim")
    if j is not None:
        try:
            two_j = Fraction(str(j)) * 2
            if two_j.denominator != 1 or two_j < 1:
                raise ValueError
        except (ValueError, ZeroDivisionError):
            ctx.error("system", "j", f"j must be a positive half-integer, got {j!r}")
            return None
        j = str(Fraction(str(j)))
        if dim is not None and dim != int(two_j) + 1:
            ctx.error("system", "dim", f"dim {dim} contradicts j = {j} (2j+1 = {int(two_j) + 1})",
                      "dim = 2j+1")
            return None
        dim = int(two_j) + 1
    if dim is None:
        dim = dflt["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or not 2 <= dim <= MAX_CONFIG_DIM:
        ctx.error("system", "dim", f"dim must be an integer in [2, {MAX_CONFIG_DIM}], got {dim!r}")
        return None

    omega = s.get("omega", dflt["omega"])
    if isinstance(omega, bool) or not isinstance(omega, (int, float)):
        ctx.error("system", "omega", f"omega must be a number, got {omega!r}")
        omega = 1.0

    grid = s.get("grid", dflt["grid"])
    ok = isinstance(grid, list) and grid and all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in grid)
    if not ok:
        ctx.error("system", "grid", f"grid must be a non-empty list of numbers, got {grid!r}")
        grid = [0.0]
    elif any(b <= a for a, b in zip(grid, grid[1:])):
        ctx.error("system", "grid", "grid times must be strictly increasing", "grid ordering")
    grid = [float(t) for t in grid]

    rho = _operator_field(ctx, "rho", s.get("rho", dflt["rho"]), dim, "density", STATE_PRESETS)
    ham = _operator_field(ctx, "hamiltonian", s.get("hamiltonian", dflt["hamiltonian"]), dim,
                          "hermitian", HAMILTONIAN_PRESETS)
    if isinstance(ham, str) and ham in ("jx", "jy") and dim < 2:
        ctx.error("system", "hamiltonian", "spin presets need dim >= 2")
    return SystemSpec(dim, rho, ham, float(omega), grid, j)


def _operator_field(ctx: _Ctx, key: str, v: Any, dim: int, role: str, presets) -> Any:
    section = "system"
    if isinstance(v, str):
        if v not in presets:
            ctx.error(section, key, f"unknown preset {v!r}; expected one of {', '.join(presets)}")
        elif v == "minus" and dim != 2:
            ctx.error(section, key, "'minus' is defined for dim 2 only")
        return v
    return _matrix_field(ctx, section, key, v, dim, role)


def _matrix_field(ctx: _Ctx, section: str, key: str, v: Any, dim: int, role: str) -> Any:
    try:
        cm = canonical_matrix(v)
    except (ValueError, TypeError) as exc:
        ctx.error(section, key, f"{key}: {exc}")
        return None
    m = matrix_of(cm)
    if m.shape[0] != dim:
        ctx.error(section, key, f"{key} has dim {m.shape[0]}, system has dim {dim}", "dimension match")
        return cm
    why = role_violation(m, role)
    if why is not None:
        ctx.error(section, key, f"{key} is not a valid {role}: {why}", role)
    return cm


def _projector_param(ctx: _Ctx, key: str, v: Any, dim: int) -> Any:
    if isinstance(v, str):
        if v not in PROJECTOR_PRESETS:
            ctx.error("params", key, f"unknown projector preset {v!r}; expected one of "
                      f"{', '.join(PROJECTOR_PRESETS)}")
        elif v == "minus" and dim != 2:
            ctx.error("params", key, "'minus' is defined for dim 2 only")
        return v
    return _matrix_field(ctx, "params", key, v, dim, "projector")


def _partition_param(ctx: _Ctx, key: str, v: Any, dim: int) -> Any:
    if isinstance(v, str):
        if v not in BASIS_PRESETS:
            ctx.error("params", key, f"unknown basis preset {v!r}; expected one of {', '.join(BASIS_PRESETS)}")
        return v
    if not isinstance(v, list) or not v or not all(_is_matrix_value(x) for x in v):
        ctx.error("params", key, f"{key} must be a basis preset or a list of matrices")
        return v
    out = [_matrix_field(ctx, "params", key, x, dim, "projector") for x in v]
    if all(x is not None for x in out):
        try:
            check_partition([matrix_of(x) for x in out], ROLE_TOL)
        except ValueError as exc:
            ctx.error("params", key, str(exc), "orthogonal exhaustive partition")
    return out


def _want(ctx: _Ctx, key: str, v: Any, kind, lo=None, allow_none=False) -> bool:
    if v is None and allow_none:
        return True
    ok = isinstance(v, kind) and not isinstance(v, bool) if kind is not bool else isinstance(v, bool)
    if ok and lo is not None and v < lo:
        ok = False
    if not ok:
        what = {int: "an integer", float: "a number", bool: "true or false", str: "a string"}.get(
            kind if not isinstance(kind, tuple) else float, "a value")
        bound = f" >= {lo}" if lo is not None else ""
        ctx.error("params", key, f"{key} must be {what}{bound}, got {v!r}")
    return ok


def _check_params(ctx: _Ctx, cfg: ScenarioConfig) -> None:
    p, dim, grid = cfg.params, cfg.system.dim, cfg.system.grid
    num = (int, float)
    name = cfg.scenario

    def on_grid(key):
        t = p[key]
        if _want(ctx, key, t, num) and not any(abs(t - g) <= 1e-12 * max(1.0, abs(t)) for g in grid):
            ctx.error("params", key, f"{key} = {t} is not a grid time {grid}", "time on grid")

    if name == "two_slit":
        p["partition"] = _partition_param(ctx, "partition", p["partition"], dim)
        if isinstance(p["partition"], list) and len(p["partition"]) != 2:
            ctx.error("params", "partition", "the two-slit partition needs exactly two filters")
        p["screen"] = _projector_param(ctx, "screen", p["screen"], dim)
        on_grid("t1")
        on_grid("t2")
        if isinstance(p["t1"], num) and isinstance(p["t2"], num) and not p["t1"] < p["t2"]:
            ctx.error("params", "t2", "t2 must be later than t1", "time ordering")
        _want(ctx, "expect_gap", p["expect_gap"], num, allow_none=True)
        if p["partition"] == "z" or p["partition"] == "x":
            if dim != 2:
                ctx.error("params", "partition", "basis presets give a two-element partition only for dim 2")
    elif name == "precession_consistency":
        p["observable"] = _partition_param(ctx, "observable", p["observable"], dim)
        if p["oracle"] not in ("cos", "none"):
            ctx.error("params", "oracle", f"oracle must be 'cos' or 'none', got {p['oracle']!r}")
        if p["oracle"] == "cos" and not (dim == 2 and p["observable"] == "z"
                                         and cfg.system.hamiltonian in ("jx", "jy")):
            ctx.error("params", "oracle", "the cos oracle needs dim 2, observable z and H = omega Jx or Jy",
                      "oracle applicability")
        if len(grid) < 2:
            ctx.error("system", "grid", "need at least two grid times")
    elif name == "reproduction_sweep":
        _want(ctx, "n_histories", p["n_histories"], int, 2)
        _want(ctx, "max_filters", p["max_filters"], int, 0)
        _want(ctx, "write_w", p["write_w"], bool)
        if p["space"] not in ("auto", "sphere", "torus"):
            ctx.error("params", "space", f"space must be auto, sphere or torus, got {p['space']!r}")
        elif p["space"] == "torus" and (dim % 2 == 0 or dim < 3):
            ctx.error("params", "space", f"the torus needs odd dim >= 3, got {dim}", "odd dimension")
        elif p["space"] == "sphere" and dim > 9:
            ctx.error("params", "space", "sphere supports j <= 4")
    elif name == "negativity_map":
        p["filter"] = _projector_param(ctx, "filter", p["filter"], dim)
        if p["kind"] not in ("wigner", "q", "p"):
            ctx.error("params", "kind", f"kind must be wigner, q or p, got {p['kind']!r}")
        elif p["kind"] != "wigner" and dim % 2 == 1 and cfg.system.j is None:
            ctx.error("params", "kind", "Q and P symbols need the sphere; set j instead of dim")
        _want(ctx, "expect_negative", p["expect_negative"], bool)
        _want(ctx, "expect_pole", p["expect_pole"], num, allow_none=True)
        _want(ctx, "expect_antipode", p["expect_antipode"], num, allow_none=True)
    elif name == "conditioning_demo":
        _want(ctx, "n_fixtures", p["n_fixtures"], int, 1)
        _want(ctx, "max_filters", p["max_filters"], int, 0)
        if len(grid) < 2:
            ctx.error("system", "grid", "need at least two grid times (evidence first)")
        if _want(ctx, "t_final", p["t_final"], num) and not p["t_final"] > grid[-1]:
            ctx.error("params", "t_final", "t_final must be after the last grid time", "time ordering")
    elif name == "inference_search":
        _want(ctx, "n_partitions", p["n_partitions"], int, 0)
        _want(ctx, "three_box", p["three_box"], bool)
        if p["mode"] not in ("weak", "full"):
            ctx.error("params", "mode", f"mode must be weak or full, got {p['mode']!r}")
        if dim < 2 or len(grid) < 2:
            ctx.error("system", "grid", "need at least two grid times")
    elif name == "axiom_audit":
        dims = p["dims"]
        if not (isinstance(dims, list) and dims and all(isinstance(x, int) and not isinstance(x, bool)
                                                        and 2 <= x <= MAX_CONFIG_DIM for x in dims)):
            ctx.error("params", "dims", f"dims must be a list of integers in [2, {MAX_CONFIG_DIM}]")
        elif not (isinstance(cfg.system.rho, str) and isinstance(cfg.system.hamiltonian, str)):
            if dims != [dim]:
                ctx.error("params", "dims", "explicit rho/hamiltonian matrices need dims = [system dim]",
                          "dimension match")
        _want(ctx, "n_fixtures", p["n_fixtures"], int, 1)
        _want(ctx, "histories_per_fixture", p["histories_per_fixture"], int, 1)
        _want(ctx, "max_filters", p["max_filters"], int, 0)
        ax = p["assert_axioms"]
        if not isinstance(ax, list) or any(a not in _AXIOMS for a in ax):
            ctx.error("params", "assert_axioms", f"assert_axioms must list names from {', '.join(_AXIOMS)}")


# -- emission ---------------------------------------------------------------------------

def _emit_value(v: Any) -> str:
    if isinstance(v, str):
        try:
            json.loads(v)
        except json.JSONDecodeError:
            if v and not v.startswith(("@", "[", "{")) and v == v.strip() and "#" not in v:
                return v
        return json.dumps(v)
    if isinstance(v, float):
        return repr(v)
    return json.dumps(v)


def emit_config(cfg: ScenarioConfig) -> str:
    """Text that parses back to an equal config (all defaults written out)."""
    s = cfg.system
    lines = ["[scenario]", f"name = {cfg.scenario}", f"seed = {cfg.seed}", "", "[system]"]
    lines.append(f"j = {s.j}" if s.j is not None else f"dim = {s.dim}")
    lines += [
        f"rho = {_emit_value(s.rho)}",
        f"hamiltonian = {_emit_value(s.hamiltonian)}",
        f"omega = {_emit_value(float(s.omega))}",
        f"grid = {_emit_value([float(t) for t in s.grid])}",
        "",
        "[params]",
    ]
    lines += [f"{k} = {_emit_value(v)}" for k, v in cfg.params.items()]
    lines += ["", "[output]", f"format = {cfg.output.format}", f"path = {_emit_value(cfg.output.path)}",
              f"normalization = {cfg.output.normalization}", "", "[tolerances]"]
    lines += [f"{k} = {_emit_value(float(v))}" for k, v in cfg.tolerances.items()]
    return "\n".join(lines) + "\n"


def default_config(name: str, seed: int = 0) -> ScenarioConfig:
    return parse_config(f"[scenario]\nname = {name}\nseed = {seed}\n")
