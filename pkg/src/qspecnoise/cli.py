"""Command-line entry point: ``qspecnoise <command> [flags]``.

Each command writes into ``<out>/<command>/`` and leaves a ``manifest.json``
with the config digest, seeds and SHA-256 checksums of everything it wrote.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .channels import ChannelKind, NoisyStepConfig, make_channel, parse_kind, simulate_noisy
from .config import RunConfig
from .discovery import RegressionConfig, SnapshotDataset, discover
from .errors import ConfigError, QSpecNoiseError
from .field import InitialConditionSpec, ProblemSpec, make_initial_condition, random_initial_condition
from .qasm import export_qasm
from .quantum import simulate_ideal
from .solver import SolverConfig, coverage_within, error_map, solve_effective
from .transition import (ReadoutModel, ShotSampler, analytic_matrix, empirical_matrices, fit_p,
                         group_by_distance, hamming_profile)

log = logging.getLogger("qspecnoise")

# reference right-hand sides reported for p = 8.3e-4
REFERENCE_FULL = {"u": 0.0471, "u_xx": 0.0087, "u^2": -0.0228, "u*u_xx": -0.0021, "u_x^2": 0.0014, "u_x*u_xx": 0.0013}
REFERENCE_RESTRICTED = {"u": 0.0417, "u^2": -0.0193, "u_xx": 0.0013}


def _write_manifest(directory: Path, cfg: RunConfig, seeds=None, extra=None):
    files = sorted(p for p in directory.rglob("*") if p.is_file() and p.name != "manifest.json")
    record = {
        "config_sha256": cfg.digest(),
        "config": cfg.data,
        "seeds": list(seeds) if seeds is not None else [],
        "artifacts": {str(p.relative_to(directory)): io.sha256(p) for p in files},
    }
    record.update(extra or {})
    io.write_json(directory / "manifest.json", record)


def derive_seeds(master_seed: int, count: int) -> list[int]:
    rng = np.random.default_rng(master_seed)
    return [int(s) for s in rng.choice(2 ** 31 - 1, size=count, replace=False)]


def _channel_for(cfg: RunConfig, strength: float):
    return make_channel(cfg["noise"]["channel"], strength)


# simulate -------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig) -> dict:
    spec = cfg.problem
    sim = cfg["simulate"]
    steps = int(sim["steps"])
    ic_cfg = sim["ic"]
    ic = make_initial_condition(InitialConditionSpec(kind=ic_cfg.get("kind", "named"),
                                                     name=ic_cfg.get("name", "reference"),
                                                     seed=ic_cfg.get("seed")), spec)
    out = cfg.out / "simulate"
    out.mkdir(parents=True, exist_ok=True)
    runs = {}
    if sim["mode"] in ("ideal", "both"):
        runs["ideal"] = simulate_ideal(ic, steps)
    if sim["mode"] in ("noisy", "both"):
        for p in cfg["noise"]["strengths"]:
            ch = _channel_for(cfg, float(p))
            runs[f"noisy_{ch.kind.value}_p{float(p):g}"] = simulate_noisy(ic, steps, ch, method=sim["reconstruction"])
    summary = {}
    for name, fields in runs.items():
        ds = SnapshotDataset.from_fields(fields, {"run": name})
        io.write_dataset(out / name, ds)
        snaps = {}
        for t in sim["snapshot_times"]:
            m = int(round(float(t) / spec.dt))
            if 0 <= m <= steps:
                f = fields[m]
                io.write_field(out / name / f"u_t{f.time:.3f}.csv", f, {"run": name})
                snaps[f"{f.time:.3f}"] = {"max_abs": float(np.max(np.abs(f.values))), "mean": float(f.values.mean())}
        summary[name] = snaps
    io.write_json(out / "summary.json", summary)
    _write_manifest(out, cfg)
    return summary


# transition -----------------------------------------------------------------

def cmd_transition(cfg: RunConfig) -> dict:
    tr = cfg["transition"]
    kind = parse_kind(cfg["noise"]["channel"])
    strength = float(tr["damping_gamma"] if kind is ChannelKind.AMPLITUDE_DAMPING else tr["p"])
    step_cfg = NoisyStepConfig(make_channel(kind, strength))
    layers = [int(l) for l in tr["layers"]]
    sampler = None
    if int(tr["shots"]) > 0:
        readout = None
        if float(tr["readout_error"]) > 0:
            readout = ReadoutModel.symmetric(1, float(tr["readout_error"]))
        sampler = (int(tr["shots"]), int(tr["seed"]), readout)
    out = cfg.out / "transition"
    out.mkdir(parents=True, exist_ok=True)
    report = {"channel": kind.value, "strength": strength, "matrices": []}
    pauli = kind in (ChannelKind.BIT_FLIP, ChannelKind.BIT_PHASE_FLIP, ChannelKind.DEPOLARIZING)
    for n in [int(q) for q in tr["qubits"]]:
        smp = None
        if sampler is not None:
            shots, seed, ro = sampler
            ro_n = ReadoutModel(ro.confusions * n) if ro is not None else None
            smp = ShotSampler(shots, seed, ro_n, mitigate=ro_n is not None)
        emp = empirical_matrices(n, layers, step_cfg, smp)
        for l in layers:
            meta = {"n": n, "l": l, "p": tr["p"], "channel": kind.value, "strength": strength,
                    "shots": int(tr["shots"]), "seed": int(tr["seed"])}
            ana = analytic_matrix(n, float(tr["p"]), l)
            E = emp[l].entries
            io.write_matrix(out / f"analytic_n{n}_l{l}.csv", ana.entries, dict(meta, provenance="analytic"))
            io.write_matrix(out / f"empirical_n{n}_l{l}.csv", E, dict(meta, provenance="empirical"))
            entry = {
                "n": n, "l": l,
                "max_abs_diff_vs_analytic": float(np.max(np.abs(E - ana.entries))),
                "column_sum_error": float(np.max(np.abs(E.sum(axis=0) - 1))),
                "profile_empirical": group_by_distance(E).tolist(),
                "profile_analytic": group_by_distance(ana.entries).tolist(),
                "asymmetry": [{"k": k, "M[0,k]": float(E[0, k]), "M[k,0]": float(E[k, 0])} for k in range(1, 1 << n)],
            }
            if pauli and l >= 1:
                entry["fitted_p"] = fit_p(E, n, l)
            report["matrices"].append(entry)
    # Hamming-distance curves over layer count
    prof_layers = [int(l) for l in tr["profile_layers"]]
    for n in [int(q) for q in tr["profile_qubits"]]:
        emp = empirical_matrices(n, prof_layers, step_cfg)
        ana = hamming_profile(n, float(tr["p"]), prof_layers)
        rows = [[l, *ana[i], *group_by_distance(emp[l].entries)] for i, l in enumerate(prof_layers)]
        header = {"n": n, "p": tr["p"], "columns": ["l"] + [f"analytic_d{d}" for d in range(n + 1)]
                  + [f"empirical_d{d}" for d in range(n + 1)]}
        io.write_matrix(out / f"profile_n{n}.csv", np.array(rows, dtype=float), header)
    io.write_json(out / "report.json", report)
    _write_manifest(out, cfg, [int(tr["seed"])])
    return report


# datasets -------------------------------------------------------------------

def generate_dataset(seed: int, spec: ProblemSpec, channel_kind: str, p: float, steps: int,
                     method: str = "projection", role: str = "train") -> SnapshotDataset:
    ic = random_initial_condition(seed, spec)
    ch = make_channel(channel_kind, p)
    fields = simulate_noisy(ic, steps, ch, method=method)
    meta = {"seed": int(seed), "channel": ch.kind.value, "p": p, "steps": steps,
            "T": steps * spec.dt, "reconstruction": method, "role": role}
    return SnapshotDataset.from_fields(fields, meta)


def _gen_job(args):
    directory, seed, spec_dict, kind, p, steps, method, role = args
    ds = generate_dataset(seed, ProblemSpec.from_dict(spec_dict), kind, p, steps, method, role)
    io.write_dataset(directory, ds)
    return str(directory)


def dataset_seeds(cfg: RunConfig):
    d = cfg["datasets"]
    count, holdout = int(d["count"]), int(d["holdout"])
    seeds = derive_seeds(int(d["master_seed"]), count + holdout)
    train = [int(s) for s in d["seeds"]] if d.get("seeds") is not None else seeds[:count]
    held = [s for s in seeds[count:] if s not in train]
    return train, held[:holdout]


def cmd_gen_datasets(cfg: RunConfig, workers: int = 1) -> dict:
    d = cfg["datasets"]
    spec = cfg.problem
    train, held = dataset_seeds(cfg)
    out = cfg.out / "datasets"
    jobs = []
    for role, seeds in (("train", train), ("holdout", held)):
        for i, s in enumerate(seeds):
            jobs.append((out / role / f"ds_{i:03d}", s, spec.to_dict(), cfg["noise"]["channel"], float(d["p"]),
                         int(d["steps"]), cfg["simulate"]["reconstruction"], role))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            list(ex.map(_gen_job, jobs))
    else:
        for job in jobs:
            _gen_job(job)
            log.info("wrote %s", job[0])
    _write_manifest(out, cfg, train + held, {"train_seeds": train, "holdout_seeds": held})
    return {"train": len(train), "holdout": len(held), "directory": str(out)}


def _load_datasets(directory: Path):
    dirs = sorted(p for p in directory.glob("ds_*") if p.is_dir())
    if not dirs:
        raise ConfigError(f"no datasets found under {directory}; run gen-datasets first")
    return [io.read_dataset(p) for p in dirs]


# discover / validate --------------------------------------------------------

def _regression_config(cfg: RunConfig, restrict=None) -> RegressionConfig:
    dc = cfg["discovery"]
    return RegressionConfig(ridge=float(dc["ridge"]), threshold=float(dc["threshold"]), restrict=restrict,
                            stride_t=int(dc["stride_t"]), stride_x=int(dc["stride_x"]))


def side_by_side(model, reference: dict) -> list:
    names = list(dict.fromkeys(list(model.as_dict()) + list(reference)))
    return [{"term": t, "recovered": model.as_dict().get(t, 0.0), "reference": reference.get(t, 0.0)} for t in names]


def cmd_discover(cfg: RunConfig) -> dict:
    train = _load_datasets(cfg.out / "datasets" / "train")
    out = cfg.out / "discover"
    full = discover(train, _regression_config(cfg))
    restricted = discover(train, _regression_config(cfg, list(cfg["discovery"]["restrict"])))
    io.write_model(out / "model_full.json", full, {"restrict": None})
    io.write_model(out / "model_restricted.json", restricted, {"restrict": list(cfg["discovery"]["restrict"])})
    report = {
        "n_datasets": len(train),
        "full": {"equation": str(full), "comparison": side_by_side(full, REFERENCE_FULL)},
        "restricted": {"equation": str(restricted), "comparison": side_by_side(restricted, REFERENCE_RESTRICTED)},
    }
    io.write_json(out / "report.json", report)
    _write_manifest(out, cfg)
    return report


def cmd_validate(cfg: RunConfig, datasets_dir: Path | None = None) -> dict:
    mdir = cfg.out / "discover"
    models = {}
    for name in ("full", "restricted"):
        path = mdir / f"model_{name}.json"
        if path.exists():
            models[name] = io.read_model(path)
    if not models:
        raise ConfigError(f"no models under {mdir}; run discover first")
    held = _load_datasets(datasets_dir or cfg.out / "datasets" / "holdout")
    tol = float(cfg["validate"]["tol"])
    scfg = SolverConfig(substeps=int(cfg["validate"]["substeps"]))
    out = cfg.out / "validate"
    report = {"tol": tol, "models": {}}
    for name, model in models.items():
        per = []
        inside = total = 0
        for i, ds in enumerate(held):
            T = (ds.n_snapshots - 1) * ds.spec.dt
            traj = solve_effective(model, ds.snapshot(0), T, scfg)
            e = error_map(traj, ds)
            io.write_matrix(out / f"error_{name}_{i:03d}.csv", e.values, {"model": name, "dataset": i, "tol": tol})
            cov = coverage_within(e, tol)
            inside += int(np.sum(np.abs(e.values) <= tol))
            total += e.values.size
            per.append({"dataset": i, "seed": ds.meta.get("seed"), "coverage": cov,
                        "max_abs_error": float(np.max(np.abs(e.values)))})
        report["models"][name] = {"equation": str(model), "coverage": inside / total, "per_dataset": per}
    io.write_json(out / "report.json", report)
    _write_manifest(out, cfg)
    return report


# argument parsing -----------------------------------------------------------

def _csv_list(text, cast=str):
    return [cast(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qspecnoise", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("simulate", "transition", "gen-datasets", "discover", "validate", "export-qasm"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--p", type=float)
        sp.add_argument("--steps", type=int)
        sp.add_argument("--qubits", type=str, help="comma-separated qubit counts")
        sp.add_argument("--channel", type=str)
        sp.add_argument("--shots", type=int)
        sp.add_argument("--restrict-terms", type=str, help="comma-separated library terms")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "gen-datasets":
            sp.add_argument("--count", type=int)
            sp.add_argument("--holdout", type=int)
            sp.add_argument("--workers", type=int, default=1)
        if name == "validate":
            sp.add_argument("--datasets", type=Path, help="directory of ds_* datasets to validate against")
        if name == "export-qasm":
            sp.add_argument("--basis", type=int, help="prepare this computational basis state with Ry(pi)")
            sp.add_argument("--output", type=Path, help="write QASM here instead of stdout")
    return ap


def overrides_from_args(args) -> dict:
    ov: dict = {}

    def put(section, key, value):
        ov.setdefault(section, {})[key] = value

    if args.out is not None:
        ov["out"] = str(args.out)
    if args.seed is not None:
        put("datasets", "master_seed", args.seed)
        put("transition", "seed", args.seed)
    if args.p is not None:
        put("noise", "strengths", [args.p])
        put("transition", "p", args.p)
        put("datasets", "p", args.p)
    if args.steps is not None:
        put("simulate", "steps", args.steps)
        put("datasets", "steps", args.steps)
        put("transition", "layers", [args.steps])
    if args.qubits:
        put("transition", "qubits", _csv_list(args.qubits, int))
    if args.channel:
        put("noise", "channel", args.channel)
    if args.shots is not None:
        put("transition", "shots", args.shots)
    if args.restrict_terms:
        put("discovery", "restrict", _csv_list(args.restrict_terms))
    if getattr(args, "count", None) is not None:
        put("datasets", "count", args.count)
    if getattr(args, "holdout", None) is not None:
        put("datasets", "holdout", args.holdout)
    return ov


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.load(args.config, overrides_from_args(args))
        if args.command == "simulate":
            result = cmd_simulate(cfg)
        elif args.command == "transition":
            result = cmd_transition(cfg)
        elif args.command == "gen-datasets":
            result = cmd_gen_datasets(cfg, workers=args.workers)
        elif args.command == "discover":
            result = cmd_discover(cfg)
        elif args.command == "validate":
            result = cmd_validate(cfg, args.datasets)
        else:
            n = int(args.qubits.split(",")[0]) if args.qubits else cfg.problem.n
            spec = ProblemSpec(L=cfg.problem.L, c=cfg.problem.c, N=1 << n, dt=cfg.problem.dt)
            l = args.steps if args.steps is not None else 1
            text = export_qasm(spec, l, args.basis)
            if args.output:
                args.output.parent.mkdir(parents=True, exist_ok=True)
                args.output.write_text(text)
            else:
                sys.stdout.write(text)
            return 0
    except (QSpecNoiseError, ValueError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return 2 if isinstance(exc, (ConfigError, ValueError)) else 1
    print(io.dumps(result))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
