"""Command-line interface: coreset / solve / bench / track subcommands.

Exit codes: 2 invalid flags or parameters, 3 I/O failure, 4 numeric overflow.
Every command is deterministic for a fixed --seed; JSON reports echo the
parameters, the seed, and the package version.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .data_io import (
    gen_synthetic,
    load_motion_vectors,
    load_segments_csv,
    save_weighted_points_csv,
)
from .errors import GridOverflowError, ParseError, SegcoresetError
from .geometry import CoresetParams, LipSpec, WeightedPointSet
from .oracle import dense_loss
from .pipeline import coreset_of_segments
from .solver import lloyd, kmeanspp_seed, segments_to_grid_union, solve_segments
from .tracking import run_tracker

EXIT_BAD_FLAGS = 2
EXIT_IO = 3
EXIT_OVERFLOW = 4

_LIP_CHOICES = {"l1": LipSpec.identity, "l2": LipSpec.power, "huber": LipSpec.huber}


def _make_lip(name: str) -> LipSpec:
    if name == "l1":
        return LipSpec.identity()
    if name == "l2":
        return LipSpec.power(2)
    return LipSpec.huber(1.0)


def _check_eps(args) -> None:
    if not (0.0 < args.eps <= 0.1) and not args.unsafe_eps:
        raise _FlagError(
            f"--eps {args.eps} outside (0, 0.1]; pass --unsafe-eps to bypass"
        )
    if args.unsafe_eps and not (0.0 < args.eps <= 0.1):
        print(f"warning: eps={args.eps} is outside the guaranteed range", file=sys.stderr)


class _FlagError(Exception):
    pass


def _apply_threads(n: int) -> None:
    # single-process; this caps any BLAS pool numpy may spin up
    import os

    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def _report_common(args) -> dict:
    return {
        "version": __version__,
        "seed": args.seed,
        "parameters": {
            k: v for k, v in vars(args).items() if k not in ("func",) and v is not None
        },
    }


def cmd_coreset(args) -> int:
    _check_eps(args)
    lip = _make_lip(args.lip)
    L = load_segments_csv(args.input)
    params = CoresetParams(
        k=args.k,
        epsilon=args.eps,
        delta=args.delta,
        vc_dim_dstar=args.dstar,
        sample_factor=args.sample_factor,
    )
    t0 = time.perf_counter()
    report = coreset_of_segments(L, params, lip, args.seed, grid_size=args.grid_size)
    elapsed = time.perf_counter() - t0
    save_weighted_points_csv(args.out, report.coreset)
    if args.report:
        doc = _report_common(args)
        doc.update(
            {
                "n_segments": len(L),
                "intermediate_size": report.intermediate_size,
                "final_size": report.final_size,
                "eps_prime": report.eps_prime,
                "sample_size": report.sample_size,
                "timings": dict(report.timings, total=elapsed),
            }
        )
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_solve(args) -> int:
    _check_eps(args)
    L = load_segments_csv(args.input)
    params = CoresetParams(k=args.k, epsilon=args.eps, delta=args.delta)
    res = solve_segments(L, args.k, params, args.seed, grid_size=args.grid_size)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        d = res.centers.centers.shape[1]
        w.writerow([f"c{i+1}" for i in range(d)])
        for c in res.centers.centers:
            w.writerow([format(v, ".17g") for v in c])
    if args.loss_report:
        loss = dense_loss(L, res.centers, LipSpec.power(2), points_per_segment=10_000)
        doc = _report_common(args)
        doc.update(
            {
                "n_segments": len(L),
                "grid_cost": res.cost,
                "dense_loss": loss,
                "iterations": res.iterations,
            }
        )
        with open(args.loss_report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0


def _parse_sizes(text: str) -> list[int]:
    try:
        lo, hi, step = (int(v) for v in text.split(":"))
    except ValueError:
        raise _FlagError(f"--sizes must be LO:HI:STEP, got {text!r}") from None
    if lo < 1 or hi < lo or step < 1:
        raise _FlagError(f"bad size range {text!r}")
    return list(range(lo, hi + 1, step))


def _bench_instance(dataset: str, size: int, seed: int):
    if dataset == "synthetic":
        return gen_synthetic(size, 2, seed)
    if dataset == "roads":
        from .data_io import load_roads_fixture, sample_by_length

        base = load_roads_fixture()
        return sample_by_length(base, size, seed)
    raise _FlagError("--dataset mv requires --mv-input with a vector file")


def _mv_instance(path: str, size: int, seed: int):
    records = load_motion_vectors(path)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(records), size=min(size, len(records)), replace=False)
    return [records[i].as_segment() for i in sorted(idx)]


def _solve_loss(L, k: int, P: WeightedPointSet, seed: int) -> float:
    """Best-of-log k-means on P, scored by the dense oracle on L."""
    reps = max(1, math.ceil(math.log2(1 + len(L))))
    best = None
    for rep in range(reps):
        rep_seed = int(np.random.SeedSequence([seed, rep]).generate_state(1)[0])
        init = kmeanspp_seed(P, k, rep_seed)
        res = lloyd(P, init, seed=seed)
        if best is None or res.cost < best.cost:
            best = res
    return dense_loss(L, best.centers, LipSpec.power(2), points_per_segment=1000)


def cmd_bench(args) -> int:
    sizes = _parse_sizes(args.sizes)
    if args.reps < 1:
        raise _FlagError("--reps must be >= 1")
    params = CoresetParams(
        k=args.k,
        epsilon=args.eps,
        delta=args.delta,
        vc_dim_dstar=args.dstar,
        sample_factor=args.sample_factor,
    )
    lip = LipSpec.power(2)
    rows = []
    for size in sizes:
        per_rep = {"coreset": [], "midpoint": [], "uniform": [], "t_coreset": [], "t_solve": []}
        for rep in range(args.reps):
            seed = int(np.random.SeedSequence([args.seed, size, rep]).generate_state(1)[0])
            if args.dataset == "mv":
                L = _mv_instance(args.mv_input, size, seed)
            else:
                L = _bench_instance(args.dataset, size, seed)
            rng = np.random.default_rng(seed)

            t0 = time.perf_counter()
            report = coreset_of_segments(L, params, lip, seed, grid_size=10)
            t1 = time.perf_counter()
            loss_core = _solve_loss(L, args.k, report.coreset, seed)
            t2 = time.perf_counter()

            mids = np.array([s.point_at(0.5) for s in L])
            P_mid = WeightedPointSet(mids, np.ones(len(L)))
            loss_mid = _solve_loss(L, args.k, P_mid, seed)

            x = rng.random((len(L), 10))
            unif = np.concatenate(
                [s.point_at(x[i]) for i, s in enumerate(L)], axis=0
            )
            P_unif = WeightedPointSet(unif, np.full(unif.shape[0], 0.1))
            loss_unif = _solve_loss(L, args.k, P_unif, seed)

            per_rep["coreset"].append(loss_core)
            per_rep["midpoint"].append(loss_mid)
            per_rep["uniform"].append(loss_unif)
            per_rep["t_coreset"].append(t1 - t0)
            per_rep["t_solve"].append(t2 - t1)
        row = {"size": size, "reps": args.reps}
        for key, vals in per_rep.items():
            q25, q50, q75 = np.percentile(vals, [25, 50, 75])
            row[f"{key}_median"] = q50
            row[f"{key}_p25"] = q25
            row[f"{key}_p75"] = q75
        rows.append(row)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return 0


def _parse_dims(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise _FlagError(f"--dims must be WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise _FlagError("frame dimensions must be positive")
    return w, h


def cmd_track(args) -> int:
    dims = _parse_dims(args.dims)
    records = load_motion_vectors(args.mv)
    state = run_tracker(records, args.k, dims, window_len=args.window, seed=args.seed)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window", "start_x", "start_y", "end_x", "end_y", "largest_cluster_size"])
        for e in state.track:
            w.writerow(
                [e.window]
                + [format(v, ".17g") for v in (*e.mean_start, *e.mean_end)]
                + [e.largest_cluster_size]
            )
    if args.report:
        doc = _report_common(args)
        doc.update(
            {
                "windows": len(state.track),
                "vectors_processed": state.vectors_processed,
                "elapsed_seconds": state.elapsed_seconds,
                "vectors_per_second": state.vectors_per_second,
            }
        )
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segcoreset")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps_default=None):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--unsafe-eps", action="store_true")

    p = sub.add_parser("coreset", help="compress segments into a weighted point coreset")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--lip", choices=sorted(_LIP_CHOICES), default="l2")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--dstar", type=int)
    p.add_argument("--sample-factor", type=float, default=1.0)
    p.add_argument("--grid-size", type=int)
    common(p)
    p.set_defaults(func=cmd_coreset)

    p = sub.add_parser("solve", help="k-means centers for a segment set")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-report")
    p.add_argument("--grid-size", type=int)
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="coreset vs baseline losses over sizes")
    p.add_argument("--dataset", choices=["synthetic", "roads", "mv"], required=True)
    p.add_argument("--mv-input")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--sizes", default="200:1000:100")
    p.add_argument("--out", required=True)
    p.add_argument("--dstar", type=int, default=10)
    p.add_argument("--sample-factor", type=float, default=0.01)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("track", help="windowed motion-vector tracking")
    p.add_argument("--mv", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dims", required=True)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    common(p)
    p.set_defaults(func=cmd_track)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags already; preserve --version/-h exits
        raise exc
    _apply_threads(args.threads)
    try:
        return args.func(args)
    except _FlagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAGS
    except GridOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SegcoresetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAGS


if __name__ == "__main__":
    sys.exit(main())
