"""Configuration-driven experiment runs with persisted, hashed outputs.

Configs are flat ``key = value`` text (diff-friendly, typed, unknown keys
rejected).  A full pipeline run chains: hypothesis checks -> solve ->
commutator scan -> constant calibration -> band energies and weights ->
integrated inequality check -> loss-of-derivatives search, writing CSV/
JSON artifacts plus a manifest with a content hash per file.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import multiprocessing
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import commutator, dyadic, energy, grid, solver
from .coefficients import builtin_family, run_all_checks
from .errors import ConfigurationError
from .grid import GridFunction


class ConfigError(ConfigurationError):
    """Malformed or out-of-range experiment configuration."""


_DEFAULT_DELTAS = tuple(round(0.1 * i, 10) for i in range(1, 31))


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "monomial"
    k: int = 2
    gamma: float = 0.0
    C0: float = 1.0
    lambda0: float = 0.5
    Lambda0: float = 1.5
    T: float = 1.0
    N: int = 128
    dt: float = 1e-3
    nu_max_override: Optional[int] = None
    m: float = 0.0
    delta_grid: tuple = _DEFAULT_DELTAS
    seed: int = 0
    output_dir: str = "out"
    data: str = "manufactured"   # manufactured | random | zero
    save_every: int = 1

    def validate(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ConfigError("N must be a power of two >= 8")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.save_every < 1:
            raise ConfigError("save_every must be >= 1")
        if self.data not in ("manufactured", "random", "zero"):
            raise ConfigError(f"unknown data kind {self.data!r}")
        if any(d <= 0 for d in self.delta_grid):
            raise ConfigError("delta grid entries must be positive")
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name, raw):
    f = _FIELDS[name]
    raw = raw.strip()
    if name == "delta_grid":
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if name == "nu_max_override":
        return None if raw.lower() in ("", "none") else int(raw)
    if f.type in ("int", int):
        return int(raw)
    if f.type in ("float", float):
        return float(raw)
    return raw


def parse_config(text) -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
    return ExperimentConfig(**values).validate()


def read_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def write_config(cfg: ExperimentConfig, path):
    with open(path, "w") as fh:
        for f in dataclasses.fields(ExperimentConfig):
            v = getattr(cfg, f.name)
            if f.name == "delta_grid":
                v = ",".join(repr(float(d)) for d in v)
            elif v is None:
                v = "none"
            fh.write(f"{f.name} = {v}\n")


def config_dict(cfg: ExperimentConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["delta_grid"] = list(d["delta_grid"])
    return d


# ---------------------------------------------------------------------------
# pieces shared by the runs


def coefficient_set(cfg: ExperimentConfig):
    return builtin_family(cfg.family, k=cfg.k, gamma=cfg.gamma, C0=cfg.C0,
                          T=cfg.T)


def cutoff_family(cfg: ExperimentConfig):
    return dyadic.build_cutoffs(cfg.N, nu_max=cfg.nu_max_override)


def initial_data(cfg: ExperimentConfig, cs):
    """Returns (u0, u1, forcing or None) for the configured data kind."""
    if cfg.data == "manufactured":
        exact = solver.cosine_mode()
        u0, u1 = exact.initial_data(cfg.N)
        return u0, u1, solver.manufactured_rhs(cs, exact)
    if cfg.data == "random":
        rng = np.random.default_rng(cfg.seed)
        u0 = grid.random_band_limited(cfg.N, rng=rng, decay=1.0)
        u1 = grid.random_band_limited(cfg.N, rng=rng, decay=0.5)
        return u0, u1, None
    zero = GridFunction(np.zeros(cfg.N, dtype=complex))
    return zero, zero, None


def scan_time(cs, nt=64):
    """Time at which beta oscillates most in x (largest commutators)."""
    x = grid.grid_points(256)
    best_t, best = 0.0, -1.0
    for t in np.linspace(0.0, cs.T, nt):
        vals = np.real(cs.beta(t, x))
        osc = float(np.max(vals) - np.min(vals))
        if osc > best:
            best_t, best = float(t), osc
    return best_t


def _hash_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, cfg, stages, extra=None):
    files = {}
    for root, _, names in os.walk(out_dir):
        for name in sorted(names):
            if name == "manifest.json":
                continue
            full = os.path.join(root, name)
            rel = os.path.relpath(full, out_dir)
            files[rel] = _hash_file(full)
    manifest = {"config": config_dict(cfg), "stages": stages, "files": files}
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return manifest


def write_plot_script(out_dir, plots):
    """Renderer-agnostic plot description referencing the CSVs."""
    with open(os.path.join(out_dir, "plots.json"), "w") as fh:
        json.dump({"plots": plots}, fh, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# runs


def run_check_conditions(cfg: ExperimentConfig, out_dir=None):
    """All five hypothesis checks; returns (exit_code, report list)."""
    cs = coefficient_set(cfg)
    reports = run_all_checks(cs)
    payload = [r.to_dict() for r in reports]
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "conditions.json"), "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
    code = 0 if all(r.verdict for r in reports) else 1
    return code, payload


def run_solve(cfg: ExperimentConfig, out_dir, force=False):
    cs = coefficient_set(cfg)
    u0, u1, f = initial_data(cfg, cs)
    steps = int(round(cfg.T / cfg.dt))
    traj = solver.solve_cauchy(cs, u0, u1, f=f, M=steps, t_end=cfg.T,
                               save_every=cfg.save_every, force=force)
    os.makedirs(out_dir, exist_ok=True)
    solver.save_trajectory(traj, out_dir)
    return traj, cs, f


def run_decompose(cfg: ExperimentConfig, out_dir, source_csv=None):
    """Decompose a grid function (from CSV or seeded random) into bands."""
    fam = cutoff_family(cfg)
    if source_csv:
        w = grid.from_csv(source_csv)
    else:
        w = grid.random_band_limited(cfg.N, rng=cfg.seed)
    blocks = dyadic.decompose(w, fam)
    os.makedirs(out_dir, exist_ok=True)
    grid.to_csv(w, os.path.join(out_dir, "source.csv"))
    dyadic.cutoffs_to_csv(fam, os.path.join(out_dir, "cutoffs.csv"))
    for nu in range(len(blocks)):
        grid.to_csv(blocks.block(nu), os.path.join(out_dir, f"block_{nu}.csv"))
    err = grid.norm(dyadic.reconstruct(blocks) - w) / max(grid.norm(w), 1e-300)
    summary = {"nu_max": fam.nu_max, "source_hash": blocks.source_hash,
               "reconstruction_error": err,
               "block_norms": [blocks.block_norm(nu)
                               for nu in range(len(blocks))]}
    with open(os.path.join(out_dir, "decompose.json"), "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
    return summary


def run_commutator_scan(cfg: ExperimentConfig, out_dir, t=None,
                        nu_max=None, method="dense-svd"):
    cs = coefficient_set(cfg)
    fam = dyadic.build_cutoffs(cfg.N, nu_max=nu_max or cfg.nu_max_override)
    t_scan = scan_time(cs) if t is None else float(t)
    s = commutator.scan(cs, t_scan, fam, method=method)
    os.makedirs(out_dir, exist_ok=True)
    commutator.scan_to_csv(s, os.path.join(out_dir, "commutator_scan.csv"))
    report = commutator.verify_decay(s)
    commutator.decay_report_to_json(report,
                                    os.path.join(out_dir, "lemma2_report.json"))
    return s, report


def run_weights(cfg: ExperimentConfig, out_dir, scale=1.0):
    """Weight table h(nu, t) on a coarse time grid, for plotting."""
    cs = coefficient_set(cfg)
    fam = cutoff_family(cfg)
    times = np.linspace(0.0, cfg.T, 65)
    table = energy.weight_table(fam.nu_max, times, cs, scale=scale)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "weights.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "nu", "h"])
        for i, t in enumerate(times):
            for nu in range(fam.nu_max + 1):
                writer.writerow([grid._fmt(t), nu, grid._fmt(table[nu, i])])
    return table


def run_verify_energy(cfg: ExperimentConfig, traj, cs, out_dir, budget=1e-4):
    """Scan, calibrate, build the ledger, and check the integrated bound."""
    fam = dyadic.build_cutoffs(traj.n_points, traj.period,
                               nu_max=cfg.nu_max_override)
    s = commutator.scan(cs, scan_time(cs), fam)
    constants = energy.calibrate_constants(cs, fam, s)
    ledger = energy.build_ledger(traj, fam, cs, constants, m=cfg.m)
    report = energy.verify_energy_inequality(traj, fam, cs, ledger,
                                             budget=budget)
    os.makedirs(out_dir, exist_ok=True)
    commutator.scan_to_csv(s, os.path.join(out_dir, "commutator_scan.csv"))
    energy.ledger_to_csv(ledger, os.path.join(out_dir, "energies.csv"))
    energy.inequality_to_csv(report, os.path.join(out_dir, "etot.csv"))
    energy.constants_to_json(constants, os.path.join(out_dir, "constants.json"))
    with open(os.path.join(out_dir, "verify.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
    return s, constants, ledger, report


def run_full_pipeline(cfg: ExperimentConfig, out_dir=None, force=False,
                      budget=1e-4):
    """check -> solve -> scan -> calibrate -> energies -> verify -> loss.

    Raises on the first failing stage; artifacts written so far stay in
    place and the manifest names the failed stage.
    """
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    stages = []

    def stage(name):
        stages.append(name)

    try:
        stage("check-conditions")
        code, reports = run_check_conditions(cfg, out_dir)
        if code != 0 and not force:
            raise ConfigurationError(
                "hypothesis checks failed: "
                + ", ".join(r["condition_id"] for r in reports
                            if not r["verdict"]))
        stage("solve")
        traj, cs, f = run_solve(cfg, os.path.join(out_dir, "trajectory"),
                                force=force)
        stage("verify-energy")
        s, constants, ledger, ineq = run_verify_energy(cfg, traj, cs, out_dir,
                                                       budget=budget)
        decay = commutator.verify_decay(s)
        commutator.decay_report_to_json(
            decay, os.path.join(out_dir, "lemma2_report.json"))
        stage("loss-estimate")
        sizes = sorted({max(64, cfg.N // 2), cfg.N})
        loss = energy.estimate_loss(cs, cfg.m, cfg.delta_grid,
                                    grid_sizes=sizes, seed=cfg.seed)
        with open(os.path.join(out_dir, "loss.json"), "w") as fh:
            json.dump(loss.to_dict(), fh, indent=1, sort_keys=True)
        stage("done")
        write_plot_script(out_dir, [
            {"title": "weighted band energies", "xlabel": "t",
             "ylabel": "E", "series": [{"csv": "energies.csv", "x": "t",
                                        "y": "E", "group": "nu",
                                        "logy": True}]},
            {"title": "total energy vs source integral", "xlabel": "t",
             "ylabel": "value", "series": [
                 {"csv": "etot.csv", "x": "t", "y": "Etot"},
                 {"csv": "etot.csv", "x": "t", "y": "rhs_integral"}]},
            {"title": "commutator norms", "xlabel": "nu", "ylabel": "norm",
             "series": [{"csv": "commutator_scan.csv", "x": "nu",
                         "y": "norm_beta", "group": "mu", "logy": True}]},
        ])
        manifest = write_manifest(out_dir, cfg, stages, extra={
            "verify": ineq.to_dict(), "loss": loss.to_dict()})
        return {"manifest": manifest, "inequality": ineq, "loss": loss,
                "exit_code": 0 if ineq.passed else 1}
    except Exception:
        write_manifest(out_dir, cfg, stages + ["FAILED"])
        raise


def _sweep_worker(args):
    path, out_root, force = args
    cfg = read_config(path)
    name = os.path.splitext(os.path.basename(path))[0]
    out = os.path.join(out_root, name)
    try:
        result = run_full_pipeline(cfg, out, force=force)
        return name, result["exit_code"]
    except Exception as exc:          # worker must not kill the pool
        return name, f"error: {exc}"


def run_sweep(config_paths, out_root, jobs=1, force=False):
    """Independent pipeline runs fanned out across worker processes."""
    os.makedirs(out_root, exist_ok=True)
    args = [(p, out_root, force) for p in config_paths]
    if jobs <= 1:
        results = [_sweep_worker(a) for a in args]
    else:
        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_sweep_worker, args)
    return dict(results)
