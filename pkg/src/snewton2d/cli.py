"""Command-line front end.

    snewton2d solve CONFIG      exit 0 converged, 2 not converged, 1 config error
    snewton2d verify RESULT_DIR exit 0 all checks pass, 3 mismatch, 1 unreadable
    snewton2d sweep CONFIG      exit 0 all rows ran, 2 some row failed, 1 config error
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from .config import RunConfig, load_run_config, load_sweep_config
from .diagnostics import decay_fit, symmetry_report
from .errors import ConfigError, CorruptField, SNError
from .logpotential import build_kernel
from .results import save_result, verify_result_dir
from .solver import solve_ground_state

EXIT_OK, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_MISMATCH = 0, 1, 2, 3

# bump CSV_VERSION whenever the column list changes
CSV_VERSION = 1
SWEEP_COLUMNS = [
    "csv_version", "index", "n", "L", "seed", "mode", "p", "q", "gamma", "b", "a",
    "status", "converged", "level", "residual", "nehari_residual", "pohozaev_residual",
    "angular_rel_dev", "decay_rate", "iters", "wall_time",
]

def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def run_solve(config_path) -> int:
    try:
        cfg, text = load_run_config(config_path)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    try:
        result = solve_ground_state(cfg.params, cfg.solver, cfg.grid)
    except (ConfigError, CorruptField, FileNotFoundError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except SNError as exc:
        _err(f"solve failed: {exc}")
        return EXIT_NOT_CONVERGED
    save_result(cfg.output, result, cfg.grid, cfg.to_json(), text, cfg.diagnostics)
    print(
        f"{result.mode}: level={result.level:.12g} residual={result.residual:.3e} "
        f"iters={result.iters} converged={result.converged} -> {cfg.output}"
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def run_verify(result_dir) -> int:
    try:
        outcome = verify_result_dir(result_dir)
    except (ConfigError, CorruptField, KeyError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    if outcome.ok:
        print(f"ok: {outcome.checked} values match")
        return EXIT_OK
    for line in outcome.failures:
        print(line, file=sys.stderr)
    return EXIT_MISMATCH


def _sweep_row(index: int, cfg: RunConfig) -> dict:
    row = {
        "csv_version": CSV_VERSION,
        "index": index,
        "n": cfg.grid.n,
        "L": cfg.grid.half_width,
        "seed": "" if cfg.seed is None else cfg.seed,
        "mode": cfg.solver.mode,
        "p": cfg.params.p,
        "q": cfg.params.q,
        "gamma": cfg.params.gamma,
        "b": cfg.params.b,
        "a": cfg.params.a.to_json(),
    }
    t0 = time.perf_counter()
    try:
        res = solve_ground_state(cfg.params, cfg.solver, cfg.grid, build_kernel(cfg.grid))
        sym = symmetry_report(res.field)
        try:
            rate = decay_fit(res.field).A
        except SNError:
            rate = float("nan")
        row.update(
            status="ok" if res.converged else f"not converged: {res.message}",
            converged=res.converged,
            level=res.level,
            residual=res.residual,
            nehari_residual=res.nehari_residual,
            pohozaev_residual=res.pohozaev_residual,
            angular_rel_dev=sym.angular_rel_dev,
            decay_rate=rate,
            iters=res.iters,
        )
    except Exception as exc:  # a failing row must not stop the sweep
        row.update(status=f"error: {type(exc).__name__}: {exc}", converged=False)
    row["wall_time"] = round(time.perf_counter() - t0, 3)
    return row


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_sweep(config_path) -> int:
    try:
        runs, workers, outdir = load_sweep_config(config_path)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(_sweep_row, range(len(runs)), runs))
    rows.sort(key=lambda r: r["index"])
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "sweep.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SWEEP_COLUMNS)
        for row in rows:
            wr.writerow([_fmt(row.get(c, "")) for c in SWEEP_COLUMNS])
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK if all(r.get("converged") for r in rows) else EXIT_NOT_CONVERGED


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="snewton2d", description="Planar Schrodinger-Newton ground states.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("solve", help="solve one configuration")
    p.add_argument("config")
    p = sub.add_parser("verify", help="recompute and check a saved result")
    p.add_argument("result_dir")
    p = sub.add_parser("sweep", help="run a cartesian sweep and write sweep.csv")
    p.add_argument("config")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.cmd == "solve":
        return run_solve(args.config)
    if args.cmd == "verify":
        return run_verify(args.result_dir)
    return run_sweep(args.config)


if __name__ == "__main__":
    sys.exit(main())
