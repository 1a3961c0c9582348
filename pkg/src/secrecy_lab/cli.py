"""``secrecy-lab`` command line: region-eval, optimize, sweep, simulate, softcover.

Exit codes: 0 success (an infeasible region point is still a success),
1 config error, 2 budget or guard error, 3 I/O error.

Every command that writes ``--out PATH`` also writes ``PATH.manifest.json``
holding the fully resolved config; passing that manifest back as
``--config`` reproduces the output byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .config import (
    MANIFEST_KEY,
    ConfigError,
    parse_optimize,
    parse_region_eval,
    parse_simulate,
    parse_softcover,
    parse_sweep,
    read_json,
    spec_to_json,
)
from .infotheory import DistributionError
from .optimize import OPTIMIZERS, SearchConfig, format_float, sweep_csv, sweep_fig2
from .regions import evaluate
from .simulate import BudgetError, SimulationConfig, run_trials, softcover_tv

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_IO = 0, 1, 2, 3


class OutputError(OSError):
    pass


def atomic_write(path: Path, text: str) -> None:
    """Write via a temp file in the same directory and rename into place."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".",
                                   prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_manifest(out: Path, command: str, config: dict, seed, started: float) -> None:
    manifest = {
        MANIFEST_KEY: 1,
        "command": command,
        "tool_version": __version__,
        "seed": seed,
        "config": config,
        "outputs": [str(out)],
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
    }
    atomic_write(Path(f"{out}.manifest.json"), dumps(manifest))


def _emit(args, command: str, text: str, config: dict, seed, started: float) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    atomic_write(args.out, text)
    write_manifest(args.out, command, config, seed, started)


def _search_override(cfg: SearchConfig, args) -> SearchConfig:
    data = cfg.to_json()
    if args.seed is not None:
        data["seed"] = args.seed
    if args.eps_rate is not None:
        data["eps_rate"] = args.eps_rate
    if args.threads is not None:
        data["threads"] = args.threads
    return SearchConfig(**data)


# ---------------------------------------------------------------- commands


def cmd_region_eval(args, obj, started) -> None:
    spec, eps = parse_region_eval(obj)
    if args.eps_rate is not None:
        eps = args.eps_rate
    point = evaluate(spec, eps)
    resolved = {**spec_to_json(spec), "eps_rate": eps}
    _emit(args, "region-eval", dumps(point.to_json()), resolved, None, started)


def cmd_optimize(args, obj, started) -> None:
    job = parse_optimize(obj)
    search = _search_override(job.search, args)
    result = OPTIMIZERS[search.scheme](search, job.p_s, job.p_yz_given_x, job.dist)
    out = {
        "empty_region": result.empty,
        "best": None if result.empty else result.best.to_json(),
        "argmax": None if result.empty else spec_to_json(result.argmax),
        "evaluations": result.evaluations,
    }
    resolved = {
        "search": search.to_json(),
        "p_s": job.p_s.to_json(),
        "p_yz_given_x": job.p_yz_given_x.to_json(),
        "dist": job.dist.to_json(),
    }
    _emit(args, "optimize", dumps(out), resolved, search.seed, started)


def cmd_sweep(args, obj, started) -> None:
    job = parse_sweep(obj)
    cfg_i = _search_override(job.scheme_i, args)
    cfg_o = _search_override(job.scheme_o, args)
    rows = sweep_fig2(job.sweep, cfg_i, cfg_o, threads=args.threads or 1)
    resolved = {
        "sweep": job.sweep.to_json(),
        "scheme_i": cfg_i.to_json(),
        "scheme_o": cfg_o.to_json(),
    }
    _emit(args, "sweep", sweep_csv(rows), resolved, cfg_i.seed, started)


def cmd_simulate(args, obj, started) -> None:
    kwargs = parse_simulate(obj)
    if args.seed is not None:
        kwargs["seed"] = args.seed
    try:
        cfg = SimulationConfig(**kwargs, threads=args.threads or 1)
    except (ValueError, TypeError) as exc:
        raise ConfigError("", str(exc))
    report = run_trials(cfg)
    resolved = {**kwargs, "spec": spec_to_json(kwargs["spec"])}
    _emit(args, "simulate", dumps(report.to_json()), resolved, cfg.seed, started)
    if args.csv is not None:
        atomic_write(args.csv, report.per_time_csv())


def cmd_softcover(args, obj, started) -> None:
    job = parse_softcover(obj)
    seed = job.seed if args.seed is None else args.seed
    header = ["n", "k"] + [f"tv_r{format_float(r)}" for r in job.rates]
    lines = [",".join(header)]
    for n in job.n_values:
        k = math.floor(n * job.k_fraction)
        row = [str(n), str(k)]
        for r in job.rates:
            tv = softcover_tv(job.p_uxz, r, n, k, job.codebook_samples, seed, job.budget)
            row.append(format_float(tv))
        lines.append(",".join(row))
    resolved = {
        "p_uxz": job.p_uxz.to_json(),
        "rates": job.rates,
        "n_values": job.n_values,
        "k_fraction": job.k_fraction,
        "codebook_samples": job.codebook_samples,
        "seed": seed,
        "budget": job.budget,
    }
    _emit(args, "softcover", "\n".join(lines) + "\n", resolved, seed, started)


COMMANDS = {
    "region-eval": cmd_region_eval,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "softcover": cmd_softcover,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secrecy-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None,
                       help="output file (stdout when omitted); a manifest is written next to it")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap; results do not depend on it")
        p.add_argument("--eps-rate", type=float, default=None, dest="eps_rate")
        if name == "simulate":
            p.add_argument("--csv", type=Path, default=None, help="also write t,de_t per time index")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        obj = read_json(args.config)
        COMMANDS[args.command](args, obj, started)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BudgetError as exc:
        print(f"budget guard: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, DistributionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
