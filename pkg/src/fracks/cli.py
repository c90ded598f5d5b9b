"""Command line entry point: ``fracks <command> --config cfg.json --out DIR``.

Exit codes: 0 success, 1 contract violation, 2 configuration error,
3 blow-up in a run that does not allow it.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import CFLError, ConfigError, DomainError, SizeError
from .io import to_jsonable, write_csv, write_json

EXIT_OK, EXIT_CONTRACT, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3

INITIAL_DEFAULTS = {
    "kind": "gaussian",
    "sigma": 1.0,
    "radius": 1.0,
    "centers": [[-2.0, 0.0], [2.0, 0.0]],
    "kappa_moment": 1.2,
}

MODEL_DEFAULTS = {
    "a": 1.8,
    "alpha": 1.3,
    "chi": 0.1,
    "eta": 0.0,
    "dt": 0.01,
    "T": 0.25,
    "seed": 0,
    "initial": INITIAL_DEFAULTS,
}

SCHEMAS = {
    "noise-selftest": {"a_values": [1.2, 1.5, 1.8, 2.0], "n_samples": 100_000, "level": 0.01, "seed": 0},
    "simulate": {
        **MODEL_DEFAULTS,
        "N": 64,
        "T": 0.1,
        "record_every": 1,
        "kappa": 1.2,
        "gamma": 1.3,
        "caps": [1e4, 1e6],
        "trajectory_every": 1,
        "allow_blowup": True,
    },
    "pde": {**MODEL_DEFAULTS, "M": 128, "L": 20.0, "snapshot_every": 0, "radii": [0.5, 1.0, 2.0, 3.0, 4.0]},
    "chaos-study": {**MODEL_DEFAULTS, "N_values": [64, 256, 1024], "n_seeds": 20, "M": 256, "L": 20.0},
    "thresholds": {"n_a": 50, "a_min": 1.01, "a_max": 1.99},
    "fraclap-check": {
        "cases": [[1.5, 0.5, 1.0], [1.2, 0.3, 1.0], [1.8, 1.2, 1.0], [1.5, 1.0, 2.0], [1.3, 0.8, 0.5], [1.9, 0.1, 1.0]],
        "tolerance": 1e-3,
    },
}


def _check_type(key: str, value, default):
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, list):
        ok = isinstance(value, list)
    else:
        ok = True
    if not ok:
        raise ConfigError(f"key {key!r}: expected {type(default).__name__}, got {type(value).__name__}")


def resolve(raw: dict, schema: dict, where: str = "") -> dict:
    """Merge ``raw`` over ``schema`` defaults, rejecting unknown keys and wrong types."""
    if not isinstance(raw, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys in {where or 'config'}: {unknown}")
    out = {}
    for key, default in schema.items():
        if key not in raw:
            out[key] = json.loads(json.dumps(default))
        elif isinstance(default, dict):
            out[key] = resolve(raw[key], default, f"{where}{key}.")
        else:
            _check_type(where + key, raw[key], default)
            out[key] = float(raw[key]) if isinstance(default, float) else raw[key]
    return out


def load_config(path: str | None, command: str) -> dict:
    raw = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return resolve(raw, SCHEMAS[command])


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    from . import __version__

    return f"v{__version__}"


@dataclass
class ExperimentManifest:
    command: str
    config_path: str | None
    output_dir: str
    seed: int
    git_describe: str
    config: dict
    outputs: list[str] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    status: str = "ok"

    def write(self, out: Path):
        return write_json(out / "manifest.json", to_jsonable(self))


def _sim_config(cfg: dict, N: int = 2):
    from .interaction import KernelParams
    from .particles import InitialDensity, SimConfig

    init = dict(cfg["initial"])
    init["centers"] = tuple(tuple(c) for c in init["centers"])
    return SimConfig(
        a=cfg["a"],
        kernel=KernelParams(cfg["alpha"], cfg["chi"], cfg["eta"]),
        N=int(cfg.get("N", N)),
        dt=cfg["dt"],
        T=cfg["T"],
        seed=int(cfg["seed"]),
        initial=InitialDensity(**init),
        record_every=int(cfg.get("record_every", 1)),
    )


def cmd_noise_selftest(cfg: dict, out: Path, man: ExperimentManifest) -> int:
    from .stable_noise import selftest

    rows, failed = [], []
    for a in cfg["a_values"]:
        for r in selftest(float(a), int(cfg["n_samples"]), int(cfg["seed"]), cfg["level"]):
            rows.append((a, r.name, r.statistic, r.threshold, int(bool(r.passed))))
            if not r.passed:
                failed.append(f"a={a} {r.name}")
    man.outputs.append(str(write_csv(out / "noise_selftest.csv", ["a", "test", "statistic", "threshold", "passed"], rows)))
    man.results["failed"] = failed
    for f in failed:
        print(f"FAILED {f}", file=sys.stderr)
    return EXIT_CONTRACT if failed else EXIT_OK


def cmd_simulate(cfg: dict, out: Path, man: ExperimentManifest) -> int:
    from .diagnostics import moment_hook, pair_moment_hook
    from .particles import run, trajectory_recorder, write_trajectory_csv

    config = _sim_config(cfg)
    traj = trajectory_recorder(int(cfg["trajectory_every"]))
    hooks = [traj, moment_hook(cfg["kappa"], "moment"), pair_moment_hook(cfg["gamma"], cfg["caps"], "pair")]
    series = run(config, hooks)
    man.outputs.append(str(write_trajectory_csv(out / "trajectory.csv", traj.rows)))
    man.outputs.append(str(series.to_csv(out / "diagnostics.csv")))
    man.results.update(series.manifest())
    if series.blew_up:
        man.status = "blowup"
        if not cfg["allow_blowup"]:
            return EXIT_BLOWUP
    return EXIT_OK


def cmd_pde(cfg: dict, out: Path, man: ExperimentManifest) -> int:
    from .meanfield import run_pde, write_radial_profile_csv

    config = _sim_config(cfg)
    res = run_pde(config, int(cfg["M"]), cfg["L"], int(cfg["snapshot_every"]) or None)
    rows = []
    for k, snap in enumerate(res.snapshots):
        name = f"density_{k:04d}.f64"
        snap.dump(out / name)
        man.outputs.append(str(out / name))
        rows.append((snap.time, res.masses[k], snap.negativity(), name))
    man.outputs.append(str(write_csv(out / "snapshots.csv", ["t", "mass", "negativity", "file"], rows)))
    man.outputs.append(str(write_radial_profile_csv(out / "radial_profile.csv", res.final, cfg["radii"])))
    man.results.update(
        boundary_contamination=res.boundary_contamination,
        boundary_mass=res.boundary_mass,
        unreliable_after=res.unreliable_after,
        notes=res.notes,
    )
    drift = max(abs(m - res.masses[0]) for m in res.masses) / abs(res.masses[0])
    man.results["max_mass_drift"] = drift
    return EXIT_OK


def cmd_chaos_study(cfg: dict, out: Path, man: ExperimentManifest) -> int:
    from .diagnostics import chaos_gap
    from .meanfield import run_pde
    from .particles import run

    base = _sim_config(cfg)
    ref = run_pde(base, int(cfg["M"]), cfg["L"]).final
    rows, medians = [], []
    for N in cfg["N_values"]:
        w1s = []
        for s in range(int(cfg["n_seeds"])):
            config = replace(base, N=int(N), seed=base.seed + s)
            series = run(config)
            w1, gap = chaos_gap(series.final, ref, seed=s)
            w1s.append(w1)
            rows.append((N, config.seed, w1, gap, int(series.blew_up)))
        medians.append(float(np.median(w1s)))
    man.outputs.append(str(write_csv(out / "chaos_study.csv", ["N", "seed", "w1_one_marginal", "w1_product_gap", "blowup"], rows)))
    man.outputs.append(str(write_csv(out / "chaos_medians.csv", ["N", "median_w1_one_marginal"], zip(cfg["N_values"], medians))))
    decreasing = all(b < a for a, b in zip(medians, medians[1:]))
    man.results.update(medians=medians, strictly_decreasing=decreasing)
    return EXIT_OK if decreasing else EXIT_CONTRACT


def cmd_thresholds(cfg: dict, out: Path, man: ExperimentManifest) -> int:
    from .thresholds import ThresholdTable

    a_values = np.linspace(cfg["a_min"], cfg["a_max"], int(cfg["n_a"]))
    if not (1.0 < a_values[0] and a_values[-1] < 2.0):
        raise ConfigError("a range must lie inside (1, 2)")
    table = ThresholdTable.build(a_values)
    man.outputs.append(
        str(
            write_csv(
                out / "thresholds.csv",
                ["a", "chi_rigorous", "chi_appendix_sup", "arg_eps", "a_star_rigorous"],
                [(*row, table.a_star_rigorous) for row in table.rows()],
            )
        )
    )
    man.results.update(a_star_rigorous=table.a_star_rigorous, notes=table.notes)
    write_json(out / "thresholds.json", {"a_star_rigorous": table.a_star_rigorous, "notes": table.notes})
    man.outputs.append(str(out / "thresholds.json"))
    return EXIT_CONTRACT if table.notes else EXIT_OK


def cmd_fraclap_check(cfg: dict, out: Path, man: ExperimentManifest) -> int:
    from .frac_laplacian import apply_pv, exact_power_law

    rows, worst = [], 0.0
    for case in cfg["cases"]:
        if len(case) != 3:
            raise ConfigError("each case is [a, eps, |x|]")
        a, eps, r = (float(v) for v in case)
        x = np.array([r, 0.0])
        quad = apply_pv(_power(eps), _power_grad(eps), x, a)
        exact = exact_power_law(a, eps, x)
        rel = abs(quad - exact) / abs(exact)
        worst = max(worst, rel)
        rows.append((a, eps, r, quad, exact, rel))
    man.outputs.append(
        str(write_csv(out / "fraclap_check.csv", ["a", "eps", "abs_x", "quadrature", "closed_form", "rel_error"], rows))
    )
    man.results["max_rel_error"] = worst
    return EXIT_OK if worst < cfg["tolerance"] else EXIT_CONTRACT


def _power(eps):
    return lambda p: np.hypot(p[..., 0], p[..., 1]) ** eps


def _power_grad(eps):
    def g(p):
        r = np.hypot(p[..., 0], p[..., 1])
        return eps * r[..., None] ** (eps - 2.0) * p

    return g


COMMANDS = {
    "noise-selftest": cmd_noise_selftest,
    "simulate": cmd_simulate,
    "pde": cmd_pde,
    "chaos-study": cmd_chaos_study,
    "thresholds": cmd_thresholds,
    "fraclap-check": cmd_fraclap_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracks", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, help="override the configured seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, default=1, help="worker cap for FFTs")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config, args.command)
        if args.seed is not None:
            if "seed" not in cfg:
                raise ConfigError(f"{args.command} takes no seed")
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg["seed"] = args.seed
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    from . import meanfield

    meanfield.WORKERS = args.threads
    out.mkdir(parents=True, exist_ok=True)
    man = ExperimentManifest(
        command=args.command,
        config_path=args.config,
        output_dir=str(out),
        seed=int(cfg.get("seed", 0)),
        git_describe=_git_describe(),
        config=cfg,
    )
    start = time.perf_counter()
    try:
        code = COMMANDS[args.command](cfg, out, man)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        man.status = f"config error: {exc}"
        code = EXIT_CONFIG
    except (ArithmeticError, CFLError, SizeError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        man.status = f"contract violation: {exc}"
        code = EXIT_CONTRACT
    man.results["exit_code"] = code
    man.results["elapsed_s"] = round(time.perf_counter() - start, 3)
    man.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
