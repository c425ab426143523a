"""Command-line harness: ``nestgil {sample,reconstruct,bench-rate,radon-sim,run}``.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numerical divergence.
Settings come from built-in defaults, then ``--config FILE``, then ``--set``
and the dedicated flags (flags win).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .bench import make_lasso, run_rate_bench
from .config import ConfigError, RunConfig, load_config_file
from .image import CoverageError, DimensionError, Image, PatchGrid
from .io import PGMError, format_row, read_csv_matrix, read_pgm, write_csv_matrix, write_pgm
from .metrics import MetricReport
from .operators import OperatorSizeError, gaussian_orthonormal, measurement_count, radon_parallel
from .phantoms import disk, shepp_logan
from .reconstruct import adjoint_baseline, ct_reconstruct, nest_dgil_reconstruct, sample_blocks, thread_count

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGENCE = 0, 2, 3, 4
COMMANDS = ("sample", "reconstruct", "bench-rate", "radon-sim", "run")
TREND_SLACK_DB = 0.5


class DataError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nestgil", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS, default="run",
                    help="pipeline to execute (default: run, dispatching on --task)")
    ap.add_argument("--task", help="cs-natural, ct-sparse or bench-rate (for 'run')")
    ap.add_argument("--input", help="input PGM (sample, radon-sim) or measurement CSV (reconstruct)")
    ap.add_argument("--output", help="output path; derived files share its stem")
    ap.add_argument("--truth", help="ground-truth PGM for reconstruction metrics")
    ap.add_argument("--ratio", type=float, help="CS ratio M/N in (0, 1]")
    ap.add_argument("--views", help="comma-separated view counts for radon-sim")
    ap.add_argument("--stages", type=int, help="number of Nesterov-II stages")
    ap.add_argument("--seed", type=int, help="sampling-matrix seed")
    ap.add_argument("--patch", type=int, help="patch side")
    ap.add_argument("--overlap", type=int, help="patch grid stride")
    ap.add_argument("--gil-domains", type=int, help="number of GIL series terms")
    ap.add_argument("--gil-psi", help="identity or normalized")
    ap.add_argument("--preset", help="parameter preset (default, desk-tv, exact)")
    ap.add_argument("--config", help="flat key=value configuration file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override any configuration key (repeatable)")
    return ap


def resolve_config(args) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (p.strip() for p in item.split("=", 1))
        overrides[key] = value
    flags = {
        "task": args.task, "input": args.input, "output": args.output, "truth": args.truth,
        "ratio": args.ratio, "views": args.views, "stages": args.stages, "seed": args.seed,
        "patch": args.patch, "overlap": args.overlap, "gil.domains": args.gil_domains,
        "gil.psi": args.gil_psi, "preset": args.preset,
    }
    return RunConfig(file_values, overrides, flags)


def manifest(command: str, cfg: RunConfig) -> str:
    return f"nestgil {command} config={cfg.digest()} seed={cfg['seed']}"


def _stem(path: str, suffixes=(".pgm", ".csv")) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix.lower() in suffixes else p


def _require(cfg: RunConfig, key: str) -> str:
    if cfg[key] is None:
        raise ConfigError(f"missing required setting {key!r}")
    return cfg[key]


def _write_lines(path, comments, header, rows):
    with open(path, "w", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


# ---------------------------------------------------------------- sample

def cmd_sample(cfg: RunConfig, command: str = "sample") -> Path:
    img = read_pgm(_require(cfg, "input"))
    out = Path(cfg["output"] or _stem(cfg["input"]).with_suffix(".measurements.csv"))
    p = cfg["patch"]
    grid = PatchGrid(img.height, img.width, p, cfg["overlap"])
    n = p * p
    m = measurement_count(cfg["ratio"], n)
    op = gaussian_orthonormal(m, n, cfg["seed"])
    y = sample_blocks(img, op, grid)
    meta = [manifest(command, cfg), f"shape={img.height},{img.width}", f"ratio={cfg['ratio']!r}",
            f"seed={cfg['seed']}", f"patch={p}", f"overlap={cfg['overlap']}", f"m={m}", f"n={n}",
            f"operator={op.name}"]
    write_csv_matrix(out, y, meta)
    return out


# ---------------------------------------------------------------- reconstruct

def _read_measurements(path):
    try:
        y, comments = read_csv_matrix(path)
    except ValueError as exc:
        raise DataError(f"malformed measurement file {path}: {exc}") from exc
    meta = {}
    for c in comments:
        for token in c.split():
            if "=" in token:
                k, v = token.split("=", 1)
                meta.setdefault(k, v)
    needed = ("shape", "ratio", "seed", "patch", "overlap", "m", "n")
    missing = [k for k in needed if k not in meta]
    if missing:
        raise DataError(f"measurement file {path} lacks header fields {missing}")
    try:
        h, w = (int(v) for v in meta["shape"].split(","))
        info = {"shape": (h, w), "ratio": float(meta["ratio"]), "seed": int(meta["seed"]),
                "patch": int(meta["patch"]), "overlap": int(meta["overlap"]),
                "m": int(meta["m"]), "n": int(meta["n"])}
    except ValueError as exc:
        raise DataError(f"bad measurement header in {path}: {exc}") from exc
    return y, info


def cmd_reconstruct(cfg: RunConfig, command: str = "reconstruct", truth=None) -> Path:
    src = _require(cfg, "input")
    y, info = _read_measurements(src)
    for key in ("seed", "ratio", "patch", "overlap"):
        if key in cfg.explicit and cfg[key] != info[key]:
            raise ConfigError(f"{key}={cfg[key]!r} does not match measurement file ({key}={info[key]!r})")
    h, w = info["shape"]
    p = info["patch"]
    grid = PatchGrid(h, w, p, info["overlap"])
    if info["n"] != p * p or info["m"] != measurement_count(info["ratio"], info["n"]):
        raise DataError("measurement header is inconsistent with its patch size and ratio")
    if y.shape != (len(grid), info["m"]):
        raise DataError(f"expected {len(grid)}x{info['m']} measurements, found {y.shape[0]}x{y.shape[1]}")
    op = gaussian_orthonormal(info["m"], info["n"], info["seed"])

    if truth is None and cfg["truth"] is not None:
        truth = read_pgm(cfg["truth"])
    if truth is not None and np.shape(truth) != (h, w):
        raise DataError(f"ground truth shape {np.shape(truth)} differs from measured shape {(h, w)}")

    stages = cfg.stages_for("cs-natural")
    rec = nest_dgil_reconstruct(y, op, grid, cfg.gil(), cfg.schedules(), n_stages=stages,
                                n_jobs=thread_count(), keep_stages=True)
    base = adjoint_baseline(y, op, grid)
    dr = cfg["data_range"]

    stem = _stem(cfg["output"] or str(_stem(src)) + ".rec")
    stem.parent.mkdir(parents=True, exist_ok=True)
    out_pgm = stem.with_suffix(".pgm")
    write_pgm(out_pgm, Image(np.clip(rec.image, 0.0, dr), dr), maxval=65535)
    head = [manifest(command, cfg), f"shape={h},{w}", f"stages={stages}"]
    write_csv_matrix(str(stem) + ".image.csv", rec.image, head)

    rows = []
    for name, img in (("nest-dgil", rec.image), ("adjoint", base)):
        if truth is None:
            rows.append(MetricReport(name).to_csv_row())
        else:
            rows.append(MetricReport.compute(name, np.asarray(truth), img, dr).to_csv_row())
    _write_lines(str(stem) + ".report.csv", head, MetricReport.HEADER, rows)

    psnrs = rec.psnr_trace(None if truth is None else np.asarray(truth), dr)
    trace = [f"{k},{_fmt(f)},{_fmt(q)}" for k, (f, q) in enumerate(zip(rec.objective_trace, psnrs))]
    _write_lines(str(stem) + ".trace.csv", head, "k,objective,psnr", trace)
    return out_pgm


# ---------------------------------------------------------------- bench-rate

def cmd_bench_rate(cfg: RunConfig, command: str = "bench-rate") -> Path:
    inst = make_lasso(cfg["seed"], cfg["bench.m"], cfg["bench.n"], cfg["bench.lambda"], cfg["bench.scale"])
    res = run_rate_bench(inst, cfg["bench.iters"], cfg["bench.oracle_iters"])
    stem = _stem(cfg["output"] or "bench-rate")
    stem.parent.mkdir(parents=True, exist_ok=True)
    names = ("ista", "fista", "nesterov2")
    head = [manifest(command, cfg), f"f_star={res['f_star']!r}", "columns are F(x_k) - F*"]
    rows = [f"{k}," + format_row([res["gaps"][n][k] for n in names]) for k in range(cfg["bench.iters"] + 1)]
    _write_lines(str(stem) + ".trace.csv", head, "k," + ",".join(names), rows)
    slope_rows = [f"{n},{_fmt(res['slopes'][n])}" for n in names]
    _write_lines(str(stem) + ".slopes.csv", [manifest(command, cfg), "window=10..200"], "method,slope", slope_rows)
    for row in slope_rows:
        print(row)
    return Path(str(stem) + ".slopes.csv")


# ---------------------------------------------------------------- radon-sim

def _phantom(cfg: RunConfig) -> np.ndarray:
    if cfg["input"]:
        img = read_pgm(cfg["input"]).values
    elif cfg["phantom"] == "disk":
        img = disk(cfg["size"])
    else:
        img = shepp_logan(cfg["size"])
    if img.shape[0] != img.shape[1]:
        raise DataError(f"radon-sim needs a square phantom, got {img.shape}")
    return img


def cmd_radon_sim(cfg: RunConfig, command: str = "radon-sim") -> Path:
    img = _phantom(cfg)
    side = img.shape[0]
    stem = _stem(cfg["output"] or "radon-sim")
    stem.parent.mkdir(parents=True, exist_ok=True)
    stages = cfg.stages_for("ct-sparse")
    dr = cfg["data_range"]
    gil, sched = cfg.gil(), cfg.schedules()
    rows, scores = [], []
    for v in cfg["views"]:
        op = radon_parallel(side, v, cfg["detectors"])
        sino = op.apply(img.ravel()).reshape(v, op.n_detectors)
        head = [manifest(command, cfg), f"views={v}", f"detectors={op.n_detectors}", f"side={side}"]
        write_csv_matrix(f"{stem}.v{v}.sinogram.csv", sino, head)
        rec = ct_reconstruct(sino, op, side, gil, sched, n_stages=stages)
        write_pgm(f"{stem}.v{v}.pgm", Image(np.clip(rec.image, 0.0, dr), dr), maxval=65535)
        report = MetricReport.compute(f"views{v}", img, rec.image, dr, ct=True)
        scores.append((v, report.psnr))
        rows.append(report.to_csv_row())
    comments = [manifest(command, cfg), f"stages={stages}"]
    ordered = sorted(scores)
    broken = [(a, b) for a, b in zip(ordered, ordered[1:]) if b[1] < a[1] - TREND_SLACK_DB]
    if broken:
        for (va, pa), (vb, pb) in broken:
            print(f"warning: PSNR drops from {pa:.2f} dB at {va} views to {pb:.2f} dB at {vb} views",
                  file=sys.stderr)
        comments.append("trend=violated")
    else:
        comments.append("trend=monotone")
    out = Path(f"{stem}.metrics.csv")
    _write_lines(out, comments, MetricReport.HEADER, rows)
    return out


# ---------------------------------------------------------------- run / main

def cmd_run(cfg: RunConfig) -> Path:
    task = cfg["task"]
    if task == "bench-rate":
        return cmd_bench_rate(cfg, "run")
    if task == "ct-sparse":
        return cmd_radon_sim(cfg, "run")
    src = _require(cfg, "input")
    truth = read_pgm(src)
    stem = _stem(cfg["output"] or str(_stem(src)) + ".rec")
    meas = Path(str(stem) + ".measurements.csv")
    sample_cfg = RunConfig({k: v for k, v in cfg.values.items() if k in cfg.explicit}, {"output": str(meas)})
    cmd_sample(sample_cfg, "run")
    rec_cfg = RunConfig({k: v for k, v in cfg.values.items() if k in cfg.explicit},
                        {"input": str(meas), "output": str(stem)})
    return cmd_reconstruct(rec_cfg, "run", truth=truth.values)


HANDLERS = {"sample": cmd_sample, "reconstruct": cmd_reconstruct, "bench-rate": cmd_bench_rate,
            "radon-sim": cmd_radon_sim, "run": cmd_run}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        thread_count()
        out = HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (DataError, PGMError, DimensionError, CoverageError, OperatorSizeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # remaining ValueErrors come from validating settings (e.g. NESTGIL_THREADS)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(os.fspath(out))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
