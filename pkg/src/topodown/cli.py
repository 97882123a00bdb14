"""Command line front end: ``topodown downsample | metrics | bench``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from .apps.synthetic import synthetic_corpus
from .metrics import REPORT_FIELDS, aggregate, evaluate, rows_to_csv
from .methods import ALL_METHODS, MethodOutcome, run_method
from .raster import BinaryImage, Factors, ImageFormatError, read_image_file, write_image_file
from .solver import DEFAULT_TIME_LIMIT, Status
from .topology import label_components

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_UNKNOWN = 0, 1, 2, 3
_EXIT_BY_STATUS = {
    Status.OPTIMAL: EXIT_OK,
    Status.SUBOPTIMAL: EXIT_OK,
    Status.INFEASIBLE: EXIT_INFEASIBLE,
    Status.UNKNOWN: EXIT_UNKNOWN,
}


class CliError(Exception):
    pass


def exit_code(status) -> int:
    """Exit code for a method outcome status string."""
    try:
        return _EXIT_BY_STATUS[Status(status)]
    except ValueError:
        return {"ok": EXIT_OK, "timeout": EXIT_UNKNOWN}.get(status, EXIT_ERROR)


def _coverage(text: str | None):
    if text is None:
        return None, None
    try:
        dx, dy = (int(v) for v in text.split(","))
    except ValueError:
        raise CliError(f"bad --coverage {text!r}; expected dx,dy") from None
    if dx < 0 or dy < 0:
        raise CliError("coverage extensions must be non-negative")
    return dx, dy


def _factors(text: str) -> Factors:
    try:
        return Factors.parse(text)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _jsonable(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    return obj


# --------------------------------------------------------------------------- visualization


def component_colors(img: BinaryImage, comp_map: np.ndarray | None = None) -> np.ndarray:
    """RGB array: black components in shades of red, the outer white region
    white and enclosed white regions in greys.

    ``comp_map`` holds exterior-labeling ids (0 is the outer white); without
    it the image is labeled on its own.
    """
    ids = label_components(img, exterior=True).label_map if comp_map is None else comp_map
    black = img.pixels
    rgb = np.full(img.shape + (3,), 255, dtype=np.uint8)
    for k, comp in enumerate(np.unique(ids[black])):
        rgb[black & (ids == comp)] = (255 - (k * 47) % 136, (k * 29) % 90, (k * 53) % 90)
    holes = [c for c in np.unique(ids[~black]) if c != 0]
    for k, comp in enumerate(holes):
        g = 215 - (k * 37) % 130
        rgb[~black & (ids == comp)] = (g, g, g)
    return rgb


def write_visualization(path, img: BinaryImage, comp_map, factors: Factors) -> None:
    rgb = component_colors(img, comp_map)
    rgb = np.repeat(np.repeat(rgb, factors.b, axis=0), factors.a, axis=1)
    Image.fromarray(rgb, mode="RGB").save(str(path), "PNG")


# --------------------------------------------------------------------------- commands


def cmd_downsample(args) -> int:
    img = read_image_file(args.input)
    factors = _factors(args.factor)
    dx, dy = _coverage(args.coverage)
    try:
        out = run_method(img, factors, args.method, time_limit=args.time_limit, dx=dx, dy=dy, backend=args.solver)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    code = exit_code(out.status)
    print(f"{args.method}: {out.status} in {out.elapsed:.3f}s" + (f" ({out.message})" if out.message else ""),
          file=sys.stderr)
    if out.image is None:
        return code if code != EXIT_OK else EXIT_ERROR
    if args.out:
        write_image_file(out.image, args.out)
    else:
        sys.stdout.write("\n".join(out.image.to_strings()) + "\n")
    if args.visualize:
        write_visualization(args.visualize, out.image, out.component_map, factors)
    return code


def cmd_metrics(args) -> int:
    a = read_image_file(args.original)
    b = read_image_file(args.downsampled)
    try:
        report = evaluate(a, b, with_ph=not args.no_ph)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    for k in ("image", "method", "factors", "status"):
        report.pop(k, None)
    json.dump(_jsonable(report), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def load_corpus(directory) -> list[tuple[str, BinaryImage]]:
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in (".pbm", ".png"))
    if not paths:
        raise CliError(f"no .pbm or .png images in {directory}")
    return [(p.name, read_image_file(p)) for p in paths]


def _bench_one(job):
    name, img, factors, methods, time_limit, with_ph = job
    rows = []
    for m in methods:
        try:
            o = run_method(img, factors, m, time_limit=time_limit)
        except ValueError as exc:
            # e.g. acn on a factor that is not a power of two
            o = MethodOutcome(m, None, None, "error", 0.0, str(exc))
        rows.append(evaluate(img, o.image, with_ph=with_ph, image=name, method=m, factors=factors,
                             status=o.status, elapsed_seconds=o.elapsed))
    return rows


def bench_rows(corpus, factors_list, methods, time_limit=DEFAULT_TIME_LIMIT, with_ph=True, jobs=1) -> list[dict]:
    """Per-image report rows for every method and factor, in a fixed order."""
    todo = [(name, img, f, tuple(methods), time_limit, with_ph) for f in factors_list for name, img in corpus
            if img.width % f.a == 0 and img.height % f.b == 0]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_bench_one, todo))
    else:
        chunks = [_bench_one(j) for j in todo]
    return [r for chunk in chunks for r in chunk]


def common_rows(rows) -> list[dict]:
    """Keep only (image, factors) groups where every method that ran produced
    an image, so all methods are averaged over the same inputs. Methods that
    reject a factor outright fail on every image and are left out instead."""
    refused = {(r["method"], r["factors"]) for r in rows if r["status"] == "error"}
    rows = [r for r in rows if (r["method"], r["factors"]) not in refused]
    bad = {(r["image"], r["factors"]) for r in rows if isinstance(r["iou"], float) and math.isnan(r["iou"])}
    return [r for r in rows if (r["image"], r["factors"]) not in bad]


def cmd_bench(args) -> int:
    if args.synthetic:
        imgs = synthetic_corpus(args.synthetic, seed=args.seed, width=args.size, height=args.size)
        corpus = [(f"synthetic_{args.seed}_{i:04d}", img) for i, img in enumerate(imgs)]
    elif args.corpus:
        corpus = load_corpus(args.corpus)
    else:
        raise CliError("give a corpus directory or --synthetic N")
    factors_list = [_factors(t) for t in args.factors.split(",") if t.strip()]
    methods = [m.strip() for m in args.methods.split(",")] if args.methods else list(ALL_METHODS)
    for m in methods:
        if m not in ALL_METHODS:
            raise CliError(f"unknown method {m!r}")
    rows = bench_rows(corpus, factors_list, methods, args.time_limit, not args.no_ph, args.jobs)
    if args.per_image:
        Path(args.per_image).write_text(rows_to_csv(rows, _fields(args)))
    agg = aggregate(common_rows(rows))
    fields = ["method", "factors", "n", "iou", "dice", "betti_error"]
    if not args.no_ph:
        fields.append("ph_distance")
    if args.timing:
        fields.append("elapsed_seconds")
    text = rows_to_csv(agg, fields)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _fields(args):
    fields = [f for f in REPORT_FIELDS if not (args.no_ph and f == "ph_distance")]
    return fields if args.timing else [f for f in fields if f != "elapsed_seconds"]


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topodown", description="Downsample binary masks without changing their topology.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("downsample", help="downsample one image")
    d.add_argument("input", help="PBM or 8-bit grayscale PNG")
    d.add_argument("--factor", required=True, help="N or AxB")
    d.add_argument("--method", default="ip", help=", ".join(ALL_METHODS))
    d.add_argument("--coverage", help="dx,dy coverage extension (default A/4,B/4)")
    d.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    d.add_argument("--solver", help="auto, bnb, highs or external (default: $TOPODOWN_SOLVER or auto)")
    d.add_argument("--out", help="output image (.pbm or .png); prints text rows if omitted")
    d.add_argument("--visualize", help="write a component-colored PNG here")
    d.set_defaults(func=cmd_downsample)

    m = sub.add_parser("metrics", help="compare an original with a downsampled image")
    m.add_argument("original")
    m.add_argument("downsampled")
    m.add_argument("--no-ph", action="store_true", help="skip the persistence distance")
    m.set_defaults(func=cmd_metrics)

    b = sub.add_parser("bench", help="aggregate metrics over a corpus")
    b.add_argument("corpus", nargs="?", help="directory of .pbm/.png images")
    b.add_argument("--synthetic", type=int, metavar="N", help="use N generated images instead")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--size", type=int, default=64, help="side of generated images")
    b.add_argument("--factors", default="2,4,8")
    b.add_argument("--methods", help="comma separated subset (default: all)")
    b.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--no-ph", action="store_true")
    b.add_argument("--timing", action="store_true", help="add elapsed_seconds (makes output run-dependent)")
    b.add_argument("--out", help="aggregate CSV path (default stdout)")
    b.add_argument("--per-image", help="also write per-image rows to this CSV")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    if getattr(args, "method", None) is not None and args.method not in ALL_METHODS:
        print(f"topodown: unknown method {args.method!r}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (CliError, ImageFormatError, OSError, ValueError) as exc:
        print(f"topodown: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
