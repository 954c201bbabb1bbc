"""The canonical demonstrations, run from a validated ScenarioConfig.

Each scenario returns a table, scalar summary values, extra artifacts and a
list of checks.  ``run_scenario`` writes everything into a run directory
together with a manifest, and maps the outcome to an exit code.
"""

from __future__ import annotations

import hashlib
import itertools
import os
import platform
import shutil
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
import scipy

from . import __version__, _accel, report
from .coherence import (
    AXIOM_NAMES,
    SystemModel,
    additivity_gap,
    axiom_suite,
    coherence_matrix,
    condition,
    inference_scan,
    is_consistent,
    latest_slot_subadditivity,
    postselect,
    quantum_correlation,
    reduce_state,
    statistical_correlation,
    value,
)
from .config import (
    DEFAULTS,
    SCENARIO_NAMES,
    ScenarioConfig,
    basis_filters,
    emit_config,
    matrix_of,
    preset_state,
)
from .histories import FilterHistory, HistoryProposition, TemporalGrid, disjoint, operationally_additive
from .operators import ObservableSpec, Operator, identity, ket_projector
from .phasespace import (
    build_kernels,
    build_W,
    history_symbol,
    phase_space_coherence,
    qudit_torus,
    sharpness_report,
    solid_angle_factor,
    sphere,
    symbol_at,
    wigner_symbol,
)
from .phasespace.kernels import spin_matrices
from .phasespace.symbols import NEG_TOL
from .sampling import (
    random_density,
    random_hamiltonian,
    random_history,
    random_projector,
    random_two_time_partition,
    with_partners,
)

EXIT_OK, EXIT_CONFIG, EXIT_ASSERTION = 0, 1, 2
ENV_OUTPUT_DIR = "RELPHASE_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    limit: float
    note: str = ""

    def as_dict(self) -> dict:
        return dict(name=self.name, passed=self.passed, value=self.value, limit=self.limit, note=self.note)


@dataclass
class ScenarioResult:
    columns: list[str]
    rows: list[dict]
    summary: dict
    checks: list[Check] = field(default_factory=list)
    artifacts: dict[str, bytes] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass
class RunOutcome:
    exit_code: int
    run_dir: Path | None
    manifest: dict | None
    result: ScenarioResult | None = None
    message: str = ""


# -- system construction ---------------------------------------------------------

def make_state(spec, dim: int, rng: np.random.Generator) -> Operator:
    if isinstance(spec, dict):
        return Operator(matrix_of(spec), "density")
    if spec == "random":
        return random_density(rng, dim)
    if spec == "random_pure":
        return random_density(rng, dim, pure=True)
    return Operator(preset_state(spec, dim), "density")


def make_hamiltonian(spec, dim: int, omega: float, rng: np.random.Generator) -> Operator:
    if isinstance(spec, dict):
        return Operator(matrix_of(spec), "hermitian")
    if spec == "zero":
        return Operator(np.zeros((dim, dim)), "hermitian")
    if spec == "random":
        return random_hamiltonian(rng, dim, scale=omega)
    jx, jy, jz = spin_matrices(dim)
    return Operator(omega * {"jx": jx, "jy": jy, "jz": jz}[spec], "hermitian")


def make_projector(spec, dim: int) -> Operator:
    if isinstance(spec, dict):
        return Operator(matrix_of(spec), "projector")
    return Operator(preset_state(spec, dim), "projector")


def make_partition(spec, dim: int) -> list[Operator]:
    mats = basis_filters(spec, dim) if isinstance(spec, str) else [matrix_of(x) for x in spec]
    return [Operator(m, "projector") for m in mats]


def make_model(cfg: ScenarioConfig, rng: np.random.Generator, dim: int | None = None) -> SystemModel:
    s = cfg.system
    d = dim or s.dim
    return SystemModel(make_state(s.rho, d, rng), make_hamiltonian(s.hamiltonian, d, s.omega, rng),
                       TemporalGrid(tuple(s.grid)))


def make_space(cfg: ScenarioConfig, prefer: str = "auto"):
    d = cfg.system.dim
    if prefer == "torus" or (prefer == "auto" and cfg.system.j is None and d % 2 == 1):
        return qudit_torus(d)
    return sphere(Fraction(d - 1, 2))


# -- scenarios ------------------------------------------------------------------------

def run_two_slit(cfg: ScenarioConfig, tol: dict, rng: np.random.Generator) -> ScenarioResult:
    p = cfg.params
    model = make_model(cfg, rng)
    parts = make_partition(p["partition"], model.dim)
    screen = make_projector(p["screen"], model.dim)
    g = model.grid
    i1, i2 = g.index(p["t1"]), g.index(p["t2"])
    branches = [FilterHistory(g, {i1: f, i2: screen}) for f in parts]
    d = coherence_matrix(model, branches)
    gap = additivity_gap(model, ObservableSpec((0.0, 1.0), tuple(parts)), screen, p["t1"], p["t2"])
    only = FilterHistory(g, {i2: screen})
    p_screen = value(model, only, only).real
    inter = 2 * d[0, 1].real
    rows = [
        {"branch": f"branch_{i}", "intensity": float(d[i, i].real), "re_interference": float(d[i, 1 - i].real)}
        for i in range(2)
    ]
    rows.append({"branch": "total", "intensity": p_screen, "re_interference": inter})
    checks = [Check("interference_identity", abs(gap + inter) <= tol["identity"], abs(gap + inter),
                    tol["identity"], "gap = -2 Re d(branch_0, branch_1)")]
    if p["expect_gap"] is not None:
        err = abs(gap - p["expect_gap"])
        checks.append(Check("additivity_gap", err <= tol["gap"], err, tol["gap"],
                            f"expected {report.fmt_float(p['expect_gap'])}"))
    summary = {"additivity_gap": gap, "p_screen": p_screen, "sum_branch_intensities": float(np.trace(d).real),
               "re_d_01": float(d[0, 1].real), "im_d_01": float(d[0, 1].imag)}
    art = {"d_matrix.csv": report.matrix_csv(d, ["branch_0", "branch_1"]).encode()}
    return ScenarioResult(["branch", "intensity", "re_interference"], rows, summary, checks, art)


def _eigenvalues(n: int) -> tuple[float, ...]:
    return tuple(1.0 - 2.0 * k / (n - 1) for k in range(n)) if n > 1 else (1.0,)


def run_precession(cfg: ScenarioConfig, tol: dict, rng: np.random.Generator) -> ScenarioResult:
    p = cfg.params
    model = make_model(cfg, rng)
    filters = make_partition(p["observable"], model.dim)
    obs = ObservableSpec(_eigenvalues(len(filters)), tuple(filters))
    a = obs.operator
    g = model.grid
    t1 = g.times[0]
    rows, art = [], {}
    worst_oracle = 0.0
    for k in range(1, len(g)):
        t2 = g.times[k]
        part = [FilterHistory(g, {0: f1, k: f2}) for f1, f2 in itertools.product(filters, filters)]
        weak = is_consistent(model, part, "weak", tol["consistency"])
        full = is_consistent(model, part, "full", tol["consistency"])
        stat = statistical_correlation(model, obs, t1, t2)
        ctp = quantum_correlation(model, a, [t1], [t2]).value
        row = {"dt": t2 - t1, "t1": t1, "t2": t2, "weak_consistent": weak.consistent,
               "full_consistent": full.consistent, "worst_re_offdiagonal": weak.worst_offdiagonal,
               "worst_abs_offdiagonal": full.worst_offdiagonal, "statistical": stat,
               "ctp_re": ctp.real, "ctp_im": ctp.imag}
        if p["oracle"] == "cos":
            ref = float(np.cos(cfg.system.omega * (t2 - t1)))
            row["oracle"] = ref
            row["oracle_error"] = abs(stat - ref)
            worst_oracle = max(worst_oracle, abs(stat - ref))
        rows.append(row)
        art[f"d_matrix_t{k}.csv"] = report.matrix_csv(weak.matrix).encode()
    cols = list(rows[0])
    checks = []
    if p["oracle"] == "cos":
        checks.append(Check("correlation_oracle", worst_oracle <= tol["correlation"], worst_oracle,
                            tol["correlation"], "statistical correlation vs cos(omega dt)"))
    summary = {
        "n_times": len(rows),
        "weak_consistent_count": sum(r["weak_consistent"] for r in rows),
        "full_consistent_count": sum(r["full_consistent"] for r in rows),
        "max_re_ctp_minus_statistical": max(abs(r["ctp_re"] - r["statistical"]) for r in rows),
        "max_oracle_error": worst_oracle,
    }
    return ScenarioResult(cols, rows, summary, checks, art)


def run_reproduction(cfg: ScenarioConfig, tol: dict, rng: np.random.Generator) -> ScenarioResult:
    p = cfg.params
    model = make_model(cfg, rng)
    space = make_space(cfg, p["space"])
    k = build_kernels(space)
    hs = [random_history(rng, model.grid, model.dim, p["max_filters"]) for _ in range(p["n_histories"])]
    rows = []
    best = None
    for i, a in enumerate(hs):
        b = hs[(i + 1) % len(hs)]
        fa, fb = history_symbol(k, a), history_symbol(k, b)
        w = build_W(model, k, fa.times, fb.times)
        ps = phase_space_coherence(k, w, fa, fb)
        hil = value(model, a, b)
        rows.append({"pair": i, "n": fa.n, "m": fb.n, "hilbert_re": hil.real, "hilbert_im": hil.imag,
                     "phase_space_re": ps.real, "phase_space_im": ps.imag, "abs_error": abs(ps - hil)})
        if best is None or fa.n + fb.n > best.n + best.m:
            best = w
    err = max(r["abs_error"] for r in rows)
    checks = [Check("reproduction", err <= tol["reproduction"], err, tol["reproduction"],
                    f"max |phase-space - Hilbert| over {len(rows)} pairs on {space.label()}")]
    summary = {"space": space.label(), "pairs": len(rows), "max_abs_error": err,
               "mean_abs_error": float(np.mean([r["abs_error"] for r in rows]))}
    art = {}
    if p["write_w"] and best is not None:
        art["W_sample.bin"] = best.values.astype("<c16").tobytes()
        art["W_sample.json"] = report.dumps(best.sidecar()).encode()
    return ScenarioResult(list(rows[0]), rows, summary, checks, art)


def run_negativity(cfg: ScenarioConfig, tol: dict, rng: np.random.Generator) -> ScenarioResult:
    p = cfg.params
    space = make_space(cfg)
    k = build_kernels(space, p["kind"])
    proj = make_projector(p["filter"], space.dim)
    f = wigner_symbol(k, proj)
    scale = solid_angle_factor(space) if cfg.output.normalization == "paper_4_2" else 1.0
    vals = f.values.real * scale
    neg_frac = float(space.weights[vals < -NEG_TOL].sum() / space.weights.sum())
    rows = []
    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
    for label, idx in (("grid_min", i_min), ("grid_max", i_max)):
        rows.append({"point": label, "x0": float(space.nodes[idx][0]), "x1": float(space.nodes[idx][1]),
                     "value": float(vals[idx])})
    summary = {"space": space.label(), "kind": p["kind"], "normalization": cfg.output.normalization,
               "scale": scale, "grid_min": float(vals.min()), "grid_max": float(vals.max()),
               "negativity_fraction": neg_frac}
    lo = float(vals.min())
    if space.kind == "sphere":
        pole, anti = (symbol_at(k, proj, [[0.0, 0.0], [np.pi, 0.0]]).real * scale).tolist()
        rows += [{"point": "pole", "x0": 0.0, "x1": 0.0, "value": pole},
                 {"point": "antipode", "x0": float(np.pi), "x1": 0.0, "value": anti}]
        summary.update(pole=pole, antipode=anti)
        lo = min(lo, pole, anti)
    summary["min_value"] = lo
    if p["kind"] == "wigner":
        sr = sharpness_report(k, proj)
        summary.update(l2_from_characteristic=sr.l2_distance, idempotency_defect=sr.idempotency_defect)
    checks = []
    if p["expect_negative"]:
        checks.append(Check("negativity_nonempty", lo < 0, lo, 0.0, "minimum symbol value must be negative"))
    for key, name in (("expect_pole", "pole"), ("expect_antipode", "antipode")):
        if p[key] is not None:
            if name not in summary:
                checks.append(Check(name, False, float("nan"), tol["symbol"], "pole values need the sphere"))
                continue
            e = abs(summary[name] - p[key])
            checks.append(Check(name, e <= tol["symbol"], e, tol["symbol"],
                                f"expected {report.fmt_float(p[key])}"))
    desc = dict(f.grid_descriptor(), normalization=cfg.output.normalization, scale=scale, kind=p["kind"])
    art = {"symbol.csv": f.to_csv(scale).encode(), "symbol_grid.json": report.dumps(desc).encode()}
    return ScenarioResult(["point", "x0", "x1", "value"], rows, summary, checks, art)


def _random_late_history(rng, grid: TemporalGrid, d: int, max_filters: int) -> FilterHistory:
    slots = list(range(1, len(grid)))
    n = int(rng.integers(0, min(max_filters, len(slots)) + 1))
    idx = sorted(rng.choice(slots, size=n, replace=False)) if n else []
    return FilterHistory(grid, {int(i): random_projector(rng, d) for i in idx}, dim=d)


def run_conditioning(cfg: ScenarioConfig, tol: dict, rng: np.random.Generator) -> ScenarioResult:
    p = cfg.params
    rows = []
    for n in range(p["n_fixtures"]):
        model = make_model(cfg, rng)
        g, d = model.grid, model.dim
        for _ in range(20):
            ev_p = random_projector(rng, d)
            if np.trace(ev_p.matrix @ model.rho.matrix).real > 1e-3:
                break
        ev = FilterHistory(g, {0: ev_p})
        a = _random_late_history(rng, g, d, p["max_filters"])
        b = _random_late_history(rng, g, d, p["max_filters"])
        cond = condition(model, ev, a, b, cross_check=False).value
        red = value(reduce_state(model, ev_p, g.times[0]), a, b)
        post = postselect(model, identity(d), p["t_final"], a, b).value
        bare = value(model, a, b)
        rows.append({"fixture": n, "conditioned_re": cond.real, "conditioned_im": cond.imag,
                     "reduced_re": red.real, "reduced_im": red.imag, "reduction_error": abs(cond - red),
                     "postselect_re": post.real, "postselect_im": post.imag,
                     "postselect_error": abs(post - bare)})
    e_red = max(r["reduction_error"] for r in rows)
    e_post = max(r["postselect_error"] for r in rows)
    checks = [
        Check("reduction", e_red <= tol["reduction"], e_red, tol["reduction"],
              "evidence conditioning vs rho -> P rho P / Tr(rho P)"),
        Check("postselect_identity", e_post <= tol["postselect"], e_post, tol["postselect"],
              "post-selection on the identity vs unconditioned"),
    ]
    summary = {"fixtures": len(rows), "max_reduction_error": e_red, "max_postselect_error": e_post}
    return ScenarioResult(list(rows[0]), rows, summary, checks)


def three_box_fixture():
    """Pre-selected (1,1,1), post-selected (1,1,-1) over three boxes, H = 0.

    Returns (model, partition, dfun) with dfun the post-selected functional.
    """
    grid = TemporalGrid((0.0, 1.0))
    psi = np.ones(3) / np.sqrt(3)
    phi = np.array([1.0, 1.0, -1.0]) / np.sqrt(3)
    model = SystemModel(Operator(np.outer(psi, psi), "density"), Operator(np.zeros((3, 3)), "hermitian"), grid)
    boxes = [FilterHistory(grid, {0: Operator(np.diag(np.eye(3)[i]), "projector")}) for i in range(3)]
    post = ket_projector(phi)

    def dfun(x, y):
        return postselect(model, post, 1.0, x, y).value

    return model, boxes, dfun


def _hit_row(source: str, k: int, h) -> dict:
    return {"source": source, "partition": k, "order": "-".join(map(str, h.order)),
            "re_d_alpha_gamma": h.re_d_alpha_gamma, "d_alpha_alpha": h.d_alpha_alpha,
            "d_gamma_gamma": h.d_gamma_gamma, "identity_residual": h.identity_residual,
            "bound_ok": h.bound_ok, "weak_consistent": h.weak_consistent,
            "full_consistent": h.full_consistent}


def run_inference(cfg: ScenarioConfig, tol: dict, rng: np.random.Generator) -> ScenarioResult:
    p = cfg.params
    rows = []
    for k in range(p["n_partitions"]):
        model = make_model(cfg, rng)
        part = random_two_time_partition(rng, model.grid, model.dim)
        rep = inference_scan(model, [part], tol=tol["bound"], mode=p["mode"])
        rows += [_hit_row("random", k, h) for h in rep.hits]
    random_hits = list(rows)
    summary = {"scanned": p["n_partitions"], "random_hits": len(random_hits)}
    if p["three_box"]:
        model, boxes, dfun = three_box_fixture()
        rep = inference_scan(model, [boxes], tol=tol["bound"], mode=p["mode"], dfun=dfun)
        rows += [_hit_row("three_box", 0, h) for h in rep.hits]
        summary["three_box_hits"] = len(rep.hits)
        summary["three_box_bound_ok"] = rep.all_bounded
        if rep.hits:
            summary["three_box_re_d_alpha_gamma"] = [h.re_d_alpha_gamma for h in rep.hits]
    worst_bound = max((r["re_d_alpha_gamma"] + 0.5 for r in random_hits), default=-np.inf)
    worst_id = max((r["identity_residual"] for r in random_hits), default=0.0)
    checks = [
        Check("bound", all(r["bound_ok"] for r in random_hits), float(worst_bound) if random_hits else 0.0,
              tol["bound"], "Re d(alpha, gamma) <= -1/2 on random hits; no hits is accepted"),
        Check("identity", worst_id <= tol["identity"], worst_id, tol["identity"],
              "d(beta+gamma, beta+gamma) = -2 Re d(alpha, beta+gamma) on random hits"),
    ]
    cols = ["source", "partition", "order", "re_d_alpha_gamma", "d_alpha_alpha", "d_gamma_gamma",
            "identity_residual", "bound_ok", "weak_consistent", "full_consistent"]
    return ScenarioResult(cols, rows, summary, checks)


def _propositions(hs: list[FilterHistory]) -> list[HistoryProposition]:
    out = []
    for a, b in itertools.combinations(hs, 2):
        if a.support & b.support and disjoint(a, b) and operationally_additive(a, b) is None:
            out.append(HistoryProposition([a, b]))
        if len(out) >= 2:
            break
    return out


def run_axioms(cfg: ScenarioConfig, tol: dict, rng: np.random.Generator) -> ScenarioResult:
    p = cfg.params
    names = list(AXIOM_NAMES) + ["interference_identity", "7_subadditivity_latest_slot"]
    worst = {n: 0.0 for n in names}
    checked = {n: 0 for n in names}
    for f in range(p["n_fixtures"]):
        d = p["dims"][f % len(p["dims"])]
        model = make_model(cfg, rng, d)
        hs = [random_history(rng, model.grid, d, p["max_filters"]) for _ in range(p["histories_per_fixture"])]
        hs = with_partners(rng, hs, d)
        rep = axiom_suite(model, hs, _propositions(hs), tol["axioms"], tol["identity"])
        results = rep.results + [latest_slot_subadditivity(model, hs, tol["axioms"])]
        for r in results:
            worst[r.name] = max(worst[r.name], r.worst)
            checked[r.name] += r.checked
    rows, checks = [], []
    for n in names:
        limit = tol["identity"] if n == "interference_identity" else tol["axioms"]
        asserted = n in p["assert_axioms"]
        ok = worst[n] <= limit
        rows.append({"axiom": n, "worst": worst[n], "checked": checked[n], "passed": ok, "asserted": asserted})
        if asserted:
            checks.append(Check(n, ok, worst[n], limit))
    summary = {"fixtures": p["n_fixtures"], "dims": p["dims"],
               "failed": [r["axiom"] for r in rows if not r["passed"]]}
    return ScenarioResult(["axiom", "worst", "checked", "passed", "asserted"], rows, summary, checks)


SCENARIOS: dict[str, Callable[[ScenarioConfig, dict, np.random.Generator], ScenarioResult]] = {
    "two_slit": run_two_slit,
    "precession_consistency": run_precession,
    "reproduction_sweep": run_reproduction,
    "negativity_map": run_negativity,
    "conditioning_demo": run_conditioning,
    "inference_search": run_inference,
    "axiom_audit": run_axioms,
}
assert tuple(SCENARIOS) == SCENARIO_NAMES


def describe_scenarios() -> list[tuple[str, str]]:
    return [(n, DEFAULTS[n]["description"]) for n in SCENARIO_NAMES]


# -- running and writing ----------------------------------------------------------------

def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def versions() -> dict:
    return {"relphase": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "backend": _accel.BACKEND}


def _table_bytes(res: ScenarioResult, fmt: str) -> tuple[str, bytes]:
    if fmt == "csv":
        rows = [[r.get(c, "") for c in res.columns] for r in res.rows]
        return "table.csv", report.csv_text(res.columns, rows).encode()
    if fmt == "text":
        body = report.aligned_text(res.rows, res.columns)
        return "table.txt", (report.key_values(res.summary) + "\n" + body).encode()
    return "table.json", report.dumps({"columns": res.columns, "rows": res.rows}).encode()


def output_root(explicit: str | os.PathLike | None = None) -> Path:
    return Path(explicit or os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR)


def run_scenario(cfg: ScenarioConfig, output_dir: str | os.PathLike | None = None, *,
                 tolerance_scale: float = 1.0, config_text: str | None = None) -> RunOutcome:
    """Run ``cfg`` and write its outputs; exit code 0 ok, 2 failed check, 1 error.

    Outputs are staged in a sibling directory and moved into place at the
    end, so an exception leaves nothing behind.
    """
    if not tolerance_scale > 0:
        raise ValueError("tolerance scale must be positive")
    root = output_root(output_dir)
    run_dir = root / cfg.output.path
    stage = root / f".{cfg.output.path}.partial-{os.getpid()}"
    timings = {}
    t0 = time.perf_counter()
    try:
        tol = cfg.scaled_tolerances(tolerance_scale)
        rng = np.random.default_rng(cfg.seed)
        res = SCENARIOS[cfg.scenario](cfg, tol, rng)
        timings["compute_s"] = time.perf_counter() - t0
        t1 = time.perf_counter()
        status = "passed" if res.passed else "failed"
        code = EXIT_OK if res.passed else EXIT_ASSERTION
        resolved = emit_config(cfg)
        files: dict[str, bytes] = {"config.resolved.ini": resolved.encode()}
        name, data = _table_bytes(res, cfg.output.format)
        files[name] = data
        files["summary.json"] = report.dumps({
            "scenario": cfg.scenario, "seed": cfg.seed, "status": status,
            "tolerance_scale": tolerance_scale, "summary": res.summary,
            "checks": [c.as_dict() for c in res.checks],
        }).encode()
        files.update(res.artifacts)
        if stage.exists():
            shutil.rmtree(stage)
        stage.mkdir(parents=True)
        for fname in sorted(files):
            (stage / fname).write_bytes(files[fname])
        timings["write_s"] = time.perf_counter() - t1
        timings["total_s"] = time.perf_counter() - t0
        raw = (config_text if config_text is not None else resolved).encode()
        manifest = {
            "tool": "relphase",
            "scenario": cfg.scenario,
            "seed": cfg.seed,
            "status": status,
            "exit_code": code,
            "format": cfg.output.format,
            "normalization": cfg.output.normalization,
            "tolerance_scale": tolerance_scale,
            "inputs": {"config_sha256": sha256(raw), "resolved_config_sha256": sha256(resolved.encode())},
            "versions": versions(),
            "timings": timings,
            "summary": res.summary,
            "checks": [c.as_dict() for c in res.checks],
            "outputs": [{"path": f, "sha256": sha256(files[f]), "bytes": len(files[f])} for f in sorted(files)],
        }
        (stage / "manifest.json").write_bytes(report.dumps(manifest).encode())
        if run_dir.exists():
            shutil.rmtree(run_dir)
        stage.rename(run_dir)
        return RunOutcome(code, run_dir, manifest, res)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
