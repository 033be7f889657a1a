"""Experiment driver: JSON config in, CSV + JSON sidecar out.

Experiments: fermi-table, limit-study, landau-check, box-equivalence,
classical-bvl, geometry-verify.  Runs are deterministic given the config
(seeds are explicit); floats are serialized with Python's shortest
round-trip repr so reruns are byte-identical.

Exit codes: 0 success, 2 config error, 3 numeric-accuracy failure,
4 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AccuracyError, ConfigError, ConvergenceError, ResourceLimitError
from .potentials import CellQuadrature, potential_from_spec
from .fermi_dirac import f_nu_quadrature, f_nu_series
from .semiclassics import (ThermoParams, fugacity_fixed_point,
                           fugacity_leading_closed_form, remainder_slope_study,
                           susceptibility_at_density, susceptibility_f12,
                           susceptibility_leading_terms)
from . import landau as landau_mod
from . import classical_gas as classical_mod
from . import geometry as geometry_mod
from . import quantum_box as box_mod

EXPERIMENTS = ("fermi-table", "limit-study", "landau-check", "box-equivalence",
               "classical-bvl", "geometry-verify")

_DEFAULTS = {"g": 2.0, "q": 1.0, "c": 1.0}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    physical: dict
    potential: dict
    numeric: dict
    seeds: dict
    applied_defaults: dict = field(default_factory=dict)

    def canonical_json(self) -> str:
        payload = {"experiment": self.experiment, "physical": self.physical,
                   "potential": self.potential, "numeric": self.numeric,
                   "seeds": self.seeds}
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_cell(v) for v in row])
        return buf.getvalue()


def _format_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def validate_config(raw: dict):
    """Full validation with every problem collected; returns ExperimentConfig."""
    problems = []
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        problems.append(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

    physical = dict(raw.get("physical", {}))
    applied = {}
    needs_beta = experiment not in ("fermi-table", "geometry-verify", None)
    if needs_beta and "beta" not in physical:
        problems.append("physical.beta is required")
    for key, default in _DEFAULTS.items():
        if key not in physical:
            physical[key] = default
            applied[f"physical.{key}"] = default
    for key in ("beta", "rho", "g", "q", "c", "b_field"):
        if key in physical and not isinstance(physical[key], (int, float)):
            problems.append(f"physical.{key} must be a number")
    if physical.get("beta", 1.0) <= 0:
        problems.append("physical.beta must be positive")

    potential = dict(raw.get("potential", {"name": "zero", "params": []}))
    if "name" not in potential:
        problems.append("potential.name is required when a potential block is given")
    else:
        try:
            potential_from_spec(potential["name"], potential.get("params", ()))
        except Exception as exc:
            problems.append(f"potential: {exc}")
    potential.setdefault("params", [])

    numeric = dict(raw.get("numeric", {}))
    grid = numeric.get("hbar_grid")
    if experiment == "limit-study":
        if not grid or len(grid) < 2:
            problems.append("numeric.hbar_grid with >= 2 entries is required")
        elif any(b >= a for a, b in zip(grid, grid[1:])):
            problems.append("numeric.hbar_grid must be strictly decreasing")
    for key in ("tolerance", "fd_step"):
        if key in numeric and numeric[key] <= 0:
            problems.append(f"numeric.{key} must be positive")

    seeds = dict(raw.get("seeds", {}))
    if experiment in ("classical-bvl",) and "mc" not in seeds:
        seeds["mc"] = 20250801
        applied["seeds.mc"] = seeds["mc"]

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(experiment=experiment, physical=physical,
                            potential=potential, numeric=numeric, seeds=seeds,
                            applied_defaults=applied)


def _params_from(cfg: ExperimentConfig, hbar: float) -> ThermoParams:
    phys = cfg.physical
    return ThermoParams(beta=phys.get("beta", 1.0), rho=phys.get("rho", 1.0),
                        hbar=hbar, g=phys["g"], q=phys["q"], c=phys["c"],
                        b=phys.get("b", 0.0))


def _run_fermi_table(cfg: ExperimentConfig):
    nu_grid = cfg.numeric.get("nu_grid", [0.5, 1.5, 2.5])
    u_grid = cfg.numeric.get("u_grid", [0.0, 0.05, 0.1, 0.3, 0.5])
    terms = int(cfg.numeric.get("series_terms", 120))
    rows = []
    for nu in nu_grid:
        for u in u_grid:
            fq = f_nu_quadrature(nu, u) if u != 0.0 else 0.0
            fs = f_nu_series(nu, u, terms) if abs(u) < 1.0 else math.nan
            rows.append([float(nu), float(u), fq, fs, abs(fq - fs)])
    return ResultTable(["nu", "u", "f_quadrature", "f_series", "abs_gap"], rows, {})


def _run_limit_study(cfg: ExperimentConfig):
    V = potential_from_spec(cfg.potential["name"], cfg.potential["params"])
    quad = CellQuadrature(order=int(cfg.numeric.get("quad_order", 32)),
                          tolerance=cfg.numeric.get("quad_tolerance", 1e-12))
    tol = cfg.numeric.get("tolerance", 1e-12)
    rows = []
    grid = cfg.numeric["hbar_grid"]
    for h in grid:
        params = _params_from(cfg, h)
        z_bar, _ = fugacity_fixed_point(params, V, tol=tol, quad=quad)
        x = susceptibility_f12(params, z_bar, V, quad)
        lead = susceptibility_leading_terms(params)
        rows.append([h, z_bar, x.orbital, x.spin, x.total, lead.total,
                     x.total / lead.total, abs(x.total - lead.total)])
    slope, _, _ = remainder_slope_study(grid, _params_from(cfg, grid[0]), V, quad=quad)
    rows.append(["slope", float(slope), math.nan, math.nan, math.nan, math.nan,
                 math.nan, math.nan])
    return ResultTable(["hbar", "z_bar", "X_orbital", "X_spin", "X_total",
                        "X_leading_total", "ratio", "abs_gap"], rows, {})


def _run_landau_check(cfg: ExperimentConfig):
    z_grid = cfg.numeric.get("z_grid", [1e-4, 1e-3])
    spec = landau_mod.LandauSumSpec(
        k_quadrature=int(cfg.numeric.get("k_quadrature", 160)),
        fd_step=cfg.numeric.get("fd_step"),
        richardson_levels=int(cfg.numeric.get("richardson_levels", 3)))
    hbar = cfg.numeric.get("hbar", 0.5)
    rows = []
    for z in z_grid:
        params = _params_from(cfg, hbar)
        x = landau_mod.landau_susceptibility_zero_field(params, z, spec)
        rho = landau_mod.landau_density_zero_field(params, z)
        lead = susceptibility_leading_terms(
            ThermoParams(beta=params.beta, rho=rho, hbar=hbar, g=params.g,
                         q=params.q, c=params.c))
        rows.append([float(z), spec.richardson_levels, x.total, x.orbital, x.spin,
                     x.total / lead.total])
    return ResultTable(["z", "b_steps_used", "X_total", "X_orbital", "X_spin",
                        "leading_ratio"], rows, {})


def _run_box_equivalence(cfg: ExperimentConfig):
    V = potential_from_spec(cfg.potential["name"], cfg.potential["params"])
    hbar = cfg.numeric.get("hbar", 1.0)
    rho_s = cfg.physical.get("rho", 0.25) / 2.0
    n_per_spin_list = cfg.numeric.get("n_per_spin", [2, 4, 8])
    target_spacing = cfg.numeric.get("grid_spacing", 0.24)
    rows = []
    for n_s in n_per_spin_list:
        L = (n_s / rho_s) ** (1.0 / 3.0)
        n = max(8, int(round(L / target_spacing)) - 1)
        box = box_mod.BoxDiscretization(L, n)
        params = _params_from(cfg, hbar)
        x_c, _ = box_mod.canonical_susceptibility_fv(box, params, V, n_s)
        x_gc, _ = box_mod.gc_susceptibility_fixed_density_fv(box, params, V, rho_s)
        spectra = box_mod._branch_spectra(box, params, V, 0.0, params.beta)
        f_l = box_mod.canonical_free_energy(spectra, params.beta, n_s) / 2.0
        p_star, _ = box_mod.legendre_pressure(spectra[-1], params.beta,
                                              n_s / box.volume)
        rows.append([L, n, n_s, f_l, p_star, abs(f_l - p_star), x_c.total,
                     x_gc, abs(x_c.total - x_gc)])
    return ResultTable(["L", "n", "N", "F_canonical", "P_star", "gap",
                        "X_canonical", "X_gc_fixed_density", "X_gap"], rows, {})


def _run_classical_bvl(cfg: ExperimentConfig):
    V = potential_from_spec(cfg.potential["name"], cfg.potential["params"])
    samples = int(cfg.numeric.get("samples", 10000))
    seed = int(cfg.seeds.get("mc", 20250801))
    rows = []
    for b_field in cfg.numeric.get("b_fields", [1.0, 5.0]):
        spec = classical_mod.ClassicalGasSpec(
            N=int(cfg.physical.get("n_particles", 4)),
            box_side=cfg.physical.get("box_side", 2.0),
            beta=cfg.physical["beta"], b_field=b_field,
            external_potential=V)
        mean, se = classical_mod.magnetization_mc(spec, samples, seed)
        gap = classical_mod.gauge_shift_invariance_check(spec, rng_seed=seed)
        rows.append([b_field, samples, mean, se, int(abs(mean) <= 3.0 * se),
                     classical_mod.magnetization_analytic(spec), gap])
    return ResultTable(["B", "samples", "mc_mean", "mc_stderr", "pass_3sigma",
                        "analytic_mean", "gauge_gap"], rows, {})


def _run_geometry_verify(cfg: ExperimentConfig):
    alpha = cfg.numeric.get("alpha", 0.5)
    hbar = cfg.numeric.get("hbar", 0.05)
    family = geometry_mod.build_cutoff_family(alpha, hbar)
    rng = np.random.default_rng(int(cfg.seeds.get("sample", 7)))
    pts = rng.uniform(-family.half_cell, family.half_cell, size=(4000, 3))
    pou_residual = float(np.abs(family.partition_sum(pts) - 1.0).max())

    gamma = (0, 0, 0)
    tau_v = family.tau(gamma, pts)
    hat_v = family.tau_hat(gamma, pts)
    hathat_v = family.tau_hat_hat(gamma, pts)
    prod1 = float(np.abs(hat_v * tau_v - tau_v).max())
    prod2 = float(np.abs(hathat_v * hat_v - hat_v).max())

    xi = complex(cfg.numeric.get("xi_re", -2.0), cfg.numeric.get("xi_im", 0.0))
    _, _, orb_gap = geometry_mod.verify_orbital_kernel_integral(xi, 0.0, 0.5)
    _, _, spin_gap = geometry_mod.verify_spin_kernel_integral(xi, 0.0, 0.5)

    o1 = geometry_mod.verify_orbital_kernel_integral(xi, 0.0, 0.5)[0]
    o2 = geometry_mod.verify_orbital_kernel_integral(xi, 0.0, 0.25)[0]
    s1 = geometry_mod.verify_spin_kernel_integral(xi, 0.0, 0.5)[0]
    s2 = geometry_mod.verify_spin_kernel_integral(xi, 0.0, 0.25)[0]
    ratio8_orb = abs(o1 / o2 - 8.0)
    ratio8_spin = abs(s1 / s2 - 8.0)

    beta = cfg.physical.get("beta", 1.0)
    contour = geometry_mod.build_contour(beta, sup_norm_v=1.0,
                                         nodes=int(cfg.numeric.get("contour_nodes", 96)))
    rng2 = np.random.default_rng(int(cfg.seeds.get("contour", 11)))
    worst_fd = 0.0
    for _ in range(20):
        lam = rng2.uniform(-0.9, 3.0)
        z = 10.0 ** rng2.uniform(-3, 0)
        approx = geometry_mod.fermi_factor_via_contour(contour, z, lam)
        exact = geometry_mod.fermi_factor(beta, z, lam)
        worst_fd = max(worst_fd, abs(approx - exact))

    checks = [
        ("partition_of_unity_residual", pou_residual, 1e-12),
        ("product_identity_tau_hat", prod1, 1e-14),
        ("product_identity_tau_hat_hat", prod2, 1e-14),
        ("orbital_kernel_gap", orb_gap, 1e-6),
        ("spin_kernel_gap", spin_gap, 1e-6),
        ("orbital_ratio8_gap", ratio8_orb, 8e-6),
        ("spin_ratio8_gap", ratio8_spin, 8e-6),
        ("contour_fermi_factor_gap", worst_fd, 1e-8),
    ]
    rows = [[name, value, bound, int(value <= bound)] for name, value, bound in checks]
    meta = {"family": {"alpha": alpha, "hbar": hbar, "card": family.card}}
    return ResultTable(["check", "value", "bound", "pass"], rows, meta)


_RUNNERS = {
    "fermi-table": _run_fermi_table,
    "limit-study": _run_limit_study,
    "landau-check": _run_landau_check,
    "box-equivalence": _run_box_equivalence,
    "classical-bvl": _run_classical_bvl,
    "geometry-verify": _run_geometry_verify,
}


def run_experiment(config: ExperimentConfig) -> ResultTable:
    start = time.time()
    table = _RUNNERS[config.experiment](config)
    table.metadata.update({
        "experiment": config.experiment,
        "config_hash": config.config_hash(),
        "code_version": __version__,
        "wall_time_s": round(time.time() - start, 3),
        "applied_defaults": config.applied_defaults,
    })
    return table


def write_results(table: ResultTable, out_dir: Path, stem: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    csv_path.write_text(table.to_csv())
    sidecar = dict(table.metadata)
    (out_dir / f"{stem}.meta.json").write_text(json.dumps(sidecar, indent=2,
                                                          sort_keys=True))
    return csv_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fermimag",
        description="Semiclassical Fermi-gas magnetism experiments")
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed-override", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None,
                        help="unused hint; computations are single-process")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed_override is not None:
        raw.setdefault("seeds", {})
        for key in list(raw["seeds"]) or ["mc"]:
            raw["seeds"][key] = args.seed_override
    try:
        config = validate_config(raw)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2

    try:
        table = run_experiment(config)
    except (AccuracyError, ConvergenceError) as exc:
        print(f"numeric failure in {config.experiment}: {exc}", file=sys.stderr)
        return 3
    except ResourceLimitError as exc:
        print(f"resource limit in {config.experiment}: {exc}", file=sys.stderr)
        return 4

    path = write_results(table, Path(args.out), config.experiment)
    if args.verbose:
        print(table.to_csv(), end="")
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
