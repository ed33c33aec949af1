"""Command-line front end: ``dmiw run|validate|suite``.

Exit codes: 0 success, 2 configuration error, 3 simulation error, 4 I/O error.
"""

import argparse
import csv
import dataclasses
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import ConfigError, parse_config
from .core import DmiwError

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_IO = 0, 2, 3, 4
CHAIN_COLUMNS = ("stage", "K", "spacing_x", "spacing_y", "spacing_z", "groups")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else None
    return v


def _histogram_rows(summary):
    edges, dens = summary.histogram
    return zip(edges[:-1], edges[1:], dens)


def execute(cfg, threads=None):
    """Run one experiment.  Returns (tables {suffix: (header, rows)}, metrics)."""
    p = cfg.params
    e = cfg.experiment
    if e == "DoubleSlit":
        s = ex.run_double_slit(p, threads=threads)
        return {"histogram": (("bin_left", "bin_right", "density"), list(_histogram_rows(s)))}, s.metrics
    if e == "OracleDoubleSlit":
        s = ex.run_oracle_double_slit(p, samples=cfg.samples)
        return {"histogram": (("bin_left", "bin_right", "density"), list(_histogram_rows(s)))}, s.metrics
    if e == "SgSingle":
        s = ex.run_sg_single(p)
        return {"histogram": (("bin_left", "bin_right", "density"), list(_histogram_rows(s)))}, s.metrics
    if e in ("SgChainAbsorber", "SgChainFlux"):
        run = ex.run_sg_chain_absorber if e == "SgChainAbsorber" else ex.run_sg_chain_fluxconserving
        history, _ = run(p, threads=threads)
        sm = ex.sparsity_metrics(history)
        for r in history:
            print(f"stage {r['stage']}: K={r['K']} groups={r['groups']}", file=sys.stderr)
        rows = [[r[c] for c in CHAIN_COLUMNS] for r in history]
        metrics = {"growth_log2_per_stage": sm["growth_log2_per_stage"], "split_axes": sm["split_axes"],
                   "stages": [{k: v for k, v in r.items()} for r in sm["table"]]}
        return {"chain": (CHAIN_COLUMNS, rows)}, metrics
    if e == "FdStudy":
        r = ex.run_fd_study(p)
        rows = list(zip(r["K"], r["error"], r["abs_error"]))
        print(f"fitted order {r['order']:.4f}", file=sys.stderr)
        return {"fd": (("K", "error", "abs_error"), rows)}, {"order": r["order"]}
    raise ConfigError(f"unknown experiment {e!r}")


def run_config(cfg, out_dir, threads=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    tables, metrics = execute(cfg, threads)
    wall = time.perf_counter() - t0
    paths = []
    for suffix, (header, rows) in tables.items():
        path = out / f"{cfg.name}_{suffix}.csv"
        write_csv(path, header, rows)
        paths.append(path)
    summary = {"config": _jsonable(cfg.echo()), "seed": cfg.seed, "metrics": _jsonable(metrics),
               "wall_time_s": wall, "outputs": [p.name for p in paths]}
    with open(out / f"{cfg.name}_summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    return summary, paths


def load(path, seed=None):
    text = Path(path).read_text(encoding="utf-8")
    cfg = parse_config(text)
    return with_seed(cfg, seed) if seed is not None else cfg


def with_seed(cfg, seed):
    cfg.seed = seed
    if hasattr(cfg.params, "seed"):
        cfg.params = dataclasses.replace(cfg.params, seed=seed)
    return cfg


def echo_header(cfg, stream=None):
    stream = stream or sys.stdout
    for k, v in cfg.echo().items():
        print(f"# {k} = {v}", file=stream)


def bundled_configs():
    root = resources.files("dmiw") / "configs"
    return sorted((p for p in root.iterdir() if p.name.endswith(".cfg")), key=lambda p: p.name)


def _guarded(fn):
    try:
        return fn()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (DmiwError, ArithmeticError, ValueError) as e:
        print(f"simulation error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SIM


def cmd_run(args):
    def go():
        cfg = load(args.config, args.seed)
        echo_header(cfg)
        summary, paths = run_config(cfg, args.out, args.threads or cfg.threads or ex.default_threads())
        for p in paths:
            print(f"wrote {p}")
        print(json.dumps(summary["metrics"], sort_keys=True, default=str))
        return EXIT_OK
    return _guarded(go)


def cmd_validate(args):
    def go():
        cfg = load(args.config, args.seed)
        echo_header(cfg)
        print("ok")
        return EXIT_OK
    return _guarded(go)


def cmd_suite(args):
    def go():
        status = EXIT_OK
        for ref in bundled_configs():
            cfg = parse_config(ref.read_text(encoding="utf-8"))
            if args.seed is not None:
                cfg = with_seed(cfg, args.seed)
            t0 = time.perf_counter()
            try:
                summary, _ = run_config(cfg, args.out, args.threads or ex.default_threads())
            except DmiwError as e:
                print(f"{cfg.name}: FAILED {type(e).__name__}: {e}")
                status = EXIT_SIM
                continue
            print(f"{cfg.name}: {json.dumps(summary['metrics'], default=str)[:200]} "
                  f"({time.perf_counter() - t0:.1f} s)")
        return status
    return _guarded(go)


def build_parser():
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default: all cores)")
    flags.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: dmiw_out)")
    flags.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    ap = argparse.ArgumentParser(prog="dmiw", description="Discrete many-interacting-worlds experiments",
                                 parents=[flags])
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", parents=[flags], help="run one experiment config")
    r.add_argument("config")
    v = sub.add_parser("validate", parents=[flags], help="parse a config and echo the effective parameters")
    v.add_argument("config")
    sub.add_parser("suite", parents=[flags], help="run the bundled scenarios")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    for k, v in (("threads", None), ("out", "dmiw_out"), ("seed", None)):
        if not hasattr(args, k):
            setattr(args, k, v)
    return {"run": cmd_run, "validate": cmd_validate, "suite": cmd_suite}[args.cmd](args)


if __name__ == "__main__":
    sys.exit(main())
