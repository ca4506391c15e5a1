"""Batch experiment runner: optimization runs and trainability scans as data files.

Subcommands
-----------
vqe              trajectories of sequential or Adam optimization of a cost
fidelity         final infidelity against fresh Haar targets, over a layer range
spectral-radius  Monte Carlo second moment of the centered-matrix spectral radius
bounds           numeric checks of the upper (theorem 1) / lower (theorem 2) bounds

Every output starts with ``#``-prefixed lines echoing the fully resolved
configuration, followed by a header row; numbers are written with 17
significant digits, locale independent. With ``--format json`` the same
content is emitted as JSON lines (config record first). Identical
invocations produce byte-identical files; per-row wall-clock timing is only
recorded under ``--timing`` since it breaks that reproducibility.

Range flags accept ``a..b`` (inclusive) and comma lists, e.g. ``2..8`` or
``2,4,8``. Relative output paths resolve against ``$QUATOPT_OUTDIR`` when it
is set. Exit status is 0 on success and 2 on a configuration error, with a
machine-readable JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from multiprocessing import get_context

import numpy as np

from . import bpstats, models, optimizers
from .circuits import EvalCounter, brickwork_light_cones, build_template
from .models import CostSpec
from .optimizers import MethodConfig
from .randhaar import haar_state, make_rng

OUTDIR_ENV = "QUATOPT_OUTDIR"


class ConfigError(ValueError):
    """Invalid flag combination; reported as a JSON record on stderr."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


def parse_range_list(text: str) -> list[int]:
    """Parse ``a..b`` (inclusive) or comma-separated integer lists."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty range {part!r}", key="range")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ConfigError(f"could not parse range {text!r}", key="range")
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def resolve_output(path: str | None, default_name: str) -> str:
    base = os.environ.get(OUTDIR_ENV, "")
    if path is None:
        path = default_name
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    return path


def write_table(path: str, fmt: str, config: dict, header: list[str], rows) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# config " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        data = buf.getvalue()
    else:
        lines = [json.dumps({"config": config}, sort_keys=True)]
        for row in rows:
            lines.append(json.dumps(dict(zip(header, row)), sort_keys=True))
        data = "\n".join(lines) + "\n"
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(data)


# --- vqe -------------------------------------------------------------------


def _cost_spec_from_args(args) -> CostSpec:
    return CostSpec(
        kind=args.cost,
        num_qubits=args.n,
        j=args.j,
        h=args.h,
        periodic=not args.open_boundary,
    )


def _vqe_run(task) -> tuple[int, list, list]:
    (ansatz, n, layers, method, sweeps, skip_tol, decomposition, lr, iterations,
     cost_kind, j, h, periodic, seed, run_id, timing) = task
    template = build_template(ansatz, n, layers)
    spec = CostSpec(kind=cost_kind, num_qubits=n, j=j, h=h, periodic=periodic)
    cost = spec.cost()
    rng = make_rng(seed, stream=run_id)
    counter = EvalCounter()
    t0 = time.perf_counter_ns()
    if method == "adam":
        config = MethodConfig(
            "adam", decomposition=decomposition, learning_rate=lr, iterations=iterations
        )
        angles = rng.uniform(
            0.0, 2.0 * np.pi, size=(template.num_slots, 2 if decomposition == "ryrz" else 3)
        )
        traj = optimizers.adam_baseline(
            template, cost, config, initial_angles=angles, counter=counter
        )
    else:
        config = MethodConfig(method, sweeps=sweeps, skip_tol=skip_tol)
        params, axes = optimizers.initial_parameters(method, template, rng)
        traj = optimizers.run_sequential(
            template, cost, config, initial_params=params, axes=axes, counter=counter
        )
    wall_total = time.perf_counter_ns() - t0
    rows = [
        ["update", run_id, r.sweep, r.update_index, r.slot_id,
         r.energy, r.evals, r.wall_ns if timing else 0, ""]
        for r in traj.records
    ]
    reference = spec.reference_energy()
    summary = [
        ["summary", run_id, -1, -1, -1, traj.final_energy, counter.count,
         wall_total if timing else 0, reference]
    ]
    return run_id, rows, summary


def cmd_vqe(args) -> int:
    if args.method not in optimizers.METHODS:
        raise ConfigError(f"unknown method {args.method!r}", key="method")
    tasks = [
        (args.ansatz, args.n, args.layers, args.method, args.sweeps, args.skip_tol,
         args.decomposition, args.learning_rate, args.iterations, args.cost,
         args.j, args.h, not args.open_boundary, args.seed, run, args.timing)
        for run in range(args.runs)
    ]
    results = _map_tasks(_vqe_run, tasks, args.jobs)
    results.sort(key=lambda item: item[0])
    rows = []
    for _, updates, summary in results:
        rows.extend(updates)
        rows.extend(summary)
    header = ["kind", "run", "sweep", "update_index", "slot_id", "energy",
              "eval_count", "wall_ns", "reference_energy"]
    config = _echo_config(args, command="vqe")
    path = resolve_output(args.output, "vqe.csv" if args.format == "csv" else "vqe.jsonl")
    write_table(path, args.format, config, header, rows)
    print(path)
    return 0


# --- fidelity ---------------------------------------------------------------


def _fidelity_run(task) -> tuple[int, list, list]:
    (n, layers, method, sweeps, skip_tol, seed, run_id, timing) = task
    template = build_template("alternating", n, layers)
    rng = make_rng(seed, stream=run_id * 100003 + layers)
    target = haar_state(n, rng)
    cost = models.infidelity_cost(target)
    counter = EvalCounter()
    t0 = time.perf_counter_ns()
    config = MethodConfig(method, sweeps=sweeps, skip_tol=skip_tol)
    params, axes = optimizers.initial_parameters(method, template, rng)
    traj = optimizers.run_sequential(
        template, cost, config, initial_params=params, axes=axes, counter=counter
    )
    wall = time.perf_counter_ns() - t0 if timing else 0
    row = [layers, run_id, traj.records[0].energy, traj.final_energy,
           counter.count, wall]
    return run_id, [row], []


def cmd_fidelity(args) -> int:
    if args.method == "adam":
        raise ConfigError("fidelity maximization drives the sequential methods", key="method")
    layer_values = parse_range_list(args.layers)
    tasks = [
        (args.n, layers, args.method, args.sweeps, args.skip_tol, args.seed, run, args.timing)
        for layers in layer_values
        for run in range(args.runs)
    ]
    results = _map_tasks(_fidelity_run, tasks, args.jobs)
    rows = [row for _, rws, _ in results for row in rws]
    rows.sort(key=lambda r: (r[0], r[1]))
    header = ["layers", "run", "initial_infidelity", "final_infidelity",
              "eval_count", "wall_ns"]
    config = _echo_config(args, command="fidelity")
    path = resolve_output(args.output, "fidelity.csv" if args.format == "csv" else "fidelity.jsonl")
    write_table(path, args.format, config, header, rows)
    print(path)
    return 0


# --- spectral radius scan ----------------------------------------------------


def cmd_spectral_radius(args) -> int:
    if args.cost not in ("global", "local"):
        raise ConfigError(f"unknown cost {args.cost!r}", key="cost")
    n_values = parse_range_list(args.n)
    layer_values = parse_range_list(args.layers)
    rows = []
    for n in n_values:
        for layers in layer_values:
            est = bpstats.second_moment_spectral_radius(
                args.family, n, layers, args.cost,
                slot_id=args.slot, samples=args.samples, seed=args.seed,
                jobs=args.jobs,
            )
            warning = "stderr_unreliable" if args.samples < 2 else ""
            rows.append([args.family, args.cost, n, layers, est.mean,
                         est.stderr, est.samples, args.seed, warning])
    header = ["family", "cost", "n", "layers", "mean_r2", "stderr",
              "samples", "seed", "warning"]
    config = _echo_config(args, command="spectral-radius")
    path = resolve_output(
        args.output, "spectral_radius.csv" if args.format == "csv" else "spectral_radius.jsonl"
    )
    write_table(path, args.format, config, header, rows)
    print(path)
    return 0


# --- bound checks -------------------------------------------------------------


def cmd_bounds(args) -> int:
    if args.theorem not in (1, 2):
        raise ConfigError(f"no bound numbered {args.theorem}", key="theorem")
    rows = []
    if args.theorem == 1:
        obs = models.mixed_field_ising(args.n) if args.n >= 2 else models.local_z_observable(args.n)
        state = _zero_state(args.n)
        branches = ["U1", "U2"] if args.branch == "both" else [args.branch.upper()]
        for branch in branches:
            report = bpstats.theorem1_bound(
                branch, args.n, obs, state, p=args.p,
                axis=(1.0, 0.0, 0.0) if args.p == 2 else None,
                samples=args.samples, bound_samples=args.bound_samples,
                seed=args.seed,
            )
            rows.append([1, branch, args.n, args.p, report.side,
                         report.bound_value, report.bound_stderr,
                         report.estimate.mean, report.estimate.stderr,
                         report.estimate.samples, report.passed])
    else:
        if args.n % 2:
            raise ConfigError("theorem-2 checks need an even qubit count", key="n")
        if args.m != 2:
            raise ConfigError("only 2-qubit blocks are implemented", key="m")
        obs = models.local_z_observable(args.n)
        state = _zero_state(args.n)
        cones = brickwork_light_cones(args.n, args.layers, column=0, qubit=0)
        bound = bpstats.theorem2_bound(
            args.n, args.m, args.layers, 1, args.p, obs, state, cones
        )
        est = bpstats.haar_block_second_moment(
            args.n, args.layers, obs, samples=args.samples, seed=args.seed,
            p=args.p, jobs=args.jobs,
        )
        passed = est.mean >= bound - 3.0 * est.stderr
        rows.append([2, "blocks", args.n, args.p, "lower", bound, 0.0,
                     est.mean, est.stderr, est.samples, passed])
    header = ["theorem", "branch", "n", "p", "side", "bound_value",
              "bound_stderr", "estimate_mean", "estimate_stderr", "samples",
              "passed"]
    config = _echo_config(args, command="bounds")
    path = resolve_output(args.output, "bounds.csv" if args.format == "csv" else "bounds.jsonl")
    write_table(path, args.format, config, header, rows)
    print(path)
    return 0


# --- plumbing ----------------------------------------------------------------


def _zero_state(n):
    from .simcore import StateVector

    return StateVector.zero_state(n)


def _map_tasks(fn, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with get_context("fork").Pool(jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _echo_config(args, command: str) -> dict:
    # jobs only schedules work and output names the file itself; neither is
    # needed to reproduce the numbers, and both would break byte identity
    skip = {"func", "jobs", "output"}
    cfg = {"command": command}
    for key, value in sorted(vars(args).items()):
        if key not in skip:
            cfg[key] = value
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quatopt",
        description="sequential gate optimization experiments and trainability scans",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", default=None, help="output file (default per subcommand)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="parallel independent runs/chunks")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--timing", action="store_true",
                       help="record wall-clock nanoseconds (breaks byte reproducibility)")

    p_vqe = sub.add_parser("vqe", help="optimization trajectories for an observable cost")
    common(p_vqe)
    p_vqe.add_argument("--ansatz", choices=("alternating", "cyclic", "ladder"),
                       default="alternating")
    p_vqe.add_argument("--n", type=int, required=True)
    p_vqe.add_argument("--layers", type=int, required=True)
    p_vqe.add_argument("--method", default="fqs")
    p_vqe.add_argument("--sweeps", type=int, default=100)
    p_vqe.add_argument("--runs", type=int, default=20)
    p_vqe.add_argument("--cost", choices=("ising", "local_z"), default="ising")
    p_vqe.add_argument("--j", type=float, default=1.0)
    p_vqe.add_argument("--h", type=float, default=models.DEFAULT_TRANSVERSE_FIELD)
    p_vqe.add_argument("--open-boundary", action="store_true")
    p_vqe.add_argument("--skip-tol", type=float, default=1e-12)
    p_vqe.add_argument("--decomposition", choices=("ryrz", "rzryrz"), default="ryrz")
    p_vqe.add_argument("--learning-rate", type=float, default=0.1)
    p_vqe.add_argument("--iterations", type=int, default=100)
    p_vqe.set_defaults(func=cmd_vqe)

    p_fid = sub.add_parser("fidelity", help="infidelity minimization against Haar targets")
    common(p_fid)
    p_fid.add_argument("--n", type=int, required=True)
    p_fid.add_argument("--layers", default="1..6", help="layer range, e.g. 1..6 or 1,3,5")
    p_fid.add_argument("--method", default="fqs")
    p_fid.add_argument("--sweeps", type=int, default=100)
    p_fid.add_argument("--runs", type=int, default=40)
    p_fid.add_argument("--skip-tol", type=float, default=1e-12)
    p_fid.set_defaults(func=cmd_fidelity)

    p_sr = sub.add_parser("spectral-radius", help="second moment of the centered-matrix radius")
    common(p_sr)
    p_sr.add_argument("--cost", choices=("global", "local"), required=True)
    p_sr.add_argument("--n", required=True, help="qubit range, e.g. 2..8")
    p_sr.add_argument("--layers", required=True, help="layer range, e.g. 2,4,8")
    p_sr.add_argument("--samples", type=int, default=1000)
    p_sr.add_argument("--slot", type=int, default=0)
    p_sr.add_argument("--family", choices=("alternating", "cyclic", "ladder"),
                      default="alternating")
    p_sr.set_defaults(func=cmd_spectral_radius)

    p_b = sub.add_parser("bounds", help="numeric checks of the spectral-radius bounds")
    common(p_b)
    p_b.add_argument("--theorem", type=int, required=True)
    p_b.add_argument("--n", type=int, required=True)
    p_b.add_argument("--p", type=int, default=4, choices=(2, 3, 4))
    p_b.add_argument("--m", type=int, default=2)
    p_b.add_argument("--layers", type=int, default=2,
                     help="block columns for the lower-bound check")
    p_b.add_argument("--branch", choices=("u1", "u2", "both"), default="both")
    p_b.add_argument("--samples", type=int, default=10000)
    p_b.add_argument("--bound-samples", type=int, default=4000)
    p_b.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        record = {"error": str(exc)}
        if exc.key:
            record["key"] = exc.key
        print(json.dumps(record), file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
