"""``polyterrain`` command-line interface.

Subcommands: ``generate``, ``texture``, ``analyze``, ``bench``.
Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 numerical failure.
"""

import argparse
import os
import sys

import numpy as np

from . import analysis, bench, io, textures
from ._validation import TerrainError, ValidationError
from .fbm import METHODS, FbmConfig, generate_heightmap, generate_region, normalize_map

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3
FORMATS = ("pgm16", "png", "csv")
_EXT = {"pgm16": ".pgm", "png": ".png", "csv": ".csv"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def resolve_method(method, variant=None, smoothstep=3):
    """Map CLI method names (including the short ``zg``/``perlin``) to a config method."""
    if method == "zg":
        method = "zg_separable" if variant == "separable" else "zg_paper"
    elif method == "perlin":
        method = f"perlin{smoothstep}"
    elif variant is not None and method.startswith("zg"):
        raise ValidationError("--variant only applies to --method zg")
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}")
    return method


def _add_fbm_flags(p, octaves=8, size=512):
    p.add_argument("--method", default="zg", help="zg, perlin or one of " + ", ".join(METHODS))
    p.add_argument("--variant", choices=("paper", "separable"), default=None)
    p.add_argument("--smoothstep", type=int, choices=(3, 5), default=3)
    p.add_argument("--size", type=int, default=size, help="map resolution R")
    p.add_argument("--octaves", type=int, default=octaves)
    p.add_argument("--persistence", type=float, default=0.5)
    p.add_argument("--freq", type=int, default=2, help="cells across the map at octave 0")
    p.add_argument("--freq-ratio", type=float, default=2.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--gradient-weight", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true")


def _config(args, **overrides):
    kw = dict(
        seed=args.seed,
        method=resolve_method(args.method, args.variant, args.smoothstep),
        octaves=args.octaves,
        resolution=args.size,
        base_frequency=args.freq,
        frequency_ratio=args.freq_ratio,
        persistence=args.persistence,
        base_amplitude=args.amplitude,
        gradient_weight=args.gradient_weight,
        normalize=args.normalize,
        smoothstep=args.smoothstep,
    )
    kw.update(overrides)
    return FbmConfig(**kw)


def _write_map(data, path, fmt):
    if fmt == "pgm16":
        io.write_pgm16(data, path)
    elif fmt == "png":
        io.write_png16(data, path)
    else:
        io.write_csv(data, path)


def _sibling(path, suffix, fmt):
    stem, _ = os.path.splitext(path)
    return f"{stem}_{suffix}{_EXT[fmt]}"


def cmd_generate(args):
    cfg = _config(args)
    if args.origin is not None or args.extent is not None:
        hm = generate_region(cfg, tuple(args.origin or (0, 0)), args.extent)
        if cfg.normalize:
            hm = normalize_map(hm)
    else:
        hm = generate_heightmap(cfg)
    out = args.out or f"terrain{_EXT[args.format]}"
    _write_map(hm.data, out, args.format)
    written = [out]
    if args.gradient_maps:
        for suffix, img in (("grad", textures.gradient_norm(hm.data)),
                            ("hess", textures.hessian_norm(hm.data))):
            path = _sibling(out, suffix, args.format)
            _write_map(img, path, args.format)
            written.append(path)
    if args.obj:
        io.write_obj(hm.data, args.obj, args.obj_scale)
        written.append(args.obj)
    if args.color:
        level = float(np.median(hm.data)) if args.sea_level is None else args.sea_level
        io.write_rgb_png(io.terrain_colors(hm.data, level), args.color)
        written.append(args.color)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_texture(args):
    spec = textures.TextureSpec(args.kind, _config(args), args.gain, args.frequency)
    img = textures.texture(spec)
    out = args.out or f"{args.kind}{_EXT[args.format]}"
    _write_map(img, out, args.format)
    print(out)
    return EXIT_OK


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args):
    if args.crest:
        rep = analysis.crest_dimension(args.a, args.f, args.n, args.panels)
        _emit(rep.to_csv(), args.csv)
        print(f"D={rep.dimension:.6f} R2={rep.r2:.6f}")
        return EXIT_OK
    sizes = tuple(args.sizes)
    if args.sweep:
        template = _config(args, normalize=False)
        sweep = analysis.dimension_vs_octaves(template, args.sweep_octaves, args.sweep_persistence,
                                              _sea_level(args), sizes)
        _emit(sweep.to_csv(), args.csv)
        return EXIT_OK
    data = io.read_heightmap(args.input) if args.input else generate_heightmap(_config(args)).data
    coast = analysis.coastline_mask(data, _sea_level(args))
    rep = analysis.box_count(coast, sizes)
    _emit(rep.to_csv(), args.csv)
    print(f"D={rep.dimension:.6f} R2={rep.r2:.6f} sea_level={coast.sea_level:.6g}")
    return EXIT_OK


def _sea_level(args):
    return "median" if args.sea_level is None else args.sea_level


def cmd_bench(args):
    runs = bench.run_grid(args.methods, args.octaves, args.sizes, args.reps, args.warmup,
                          args.threads, args.seed)
    _emit(bench.runs_to_csv(runs), args.csv)
    if any(r.method == bench.BASELINE for r in runs):
        rep = bench.speedup_report(runs)
        if args.speedup_csv:
            _emit(rep.to_csv(), args.speedup_csv)
        for m in dict.fromkeys(r.method for r in runs):
            print(f"speedup {m}: {rep.mean_ratio(m):.4f}")
    if len({(r.octaves, r.resolution) for r in runs}) >= 2:
        for m in dict.fromkeys(r.method for r in runs):
            fit = bench.fit_cost_model([r for r in runs if r.method == m])
            print(f"cost {m}: alpha={fit.alpha:.4g} beta={fit.beta:.4g} R2={fit.r2:.4f}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="polyterrain", description="Polynomial cell noise terrain generator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="render a heightmap")
    _add_fbm_flags(g)
    g.add_argument("--out", default=None)
    g.add_argument("--format", choices=FORMATS, default="pgm16")
    g.add_argument("--gradient-maps", action="store_true",
                   help="also write gradient-norm and Hessian-norm images")
    g.add_argument("--obj", default=None, help="heightfield mesh output path")
    g.add_argument("--obj-scale", type=float, default=1.0)
    g.add_argument("--origin", type=int, nargs=2, default=None, metavar=("X", "Y"),
                   help="global pixel offset of a region")
    g.add_argument("--extent", type=int, default=None, help="region side length in pixels")
    g.add_argument("--color", default=None, help="colormapped RGB PNG output path")
    g.add_argument("--sea-level", type=float, default=None)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("texture", help="render a turbulence texture")
    t.add_argument("kind", choices=textures.KINDS)
    _add_fbm_flags(t, octaves=6, size=256)
    t.add_argument("--gain", type=float, default=5.0)
    t.add_argument("--frequency", type=float, default=4.0)
    t.add_argument("--out", default=None)
    t.add_argument("--format", choices=FORMATS, default="pgm16")
    t.set_defaults(func=cmd_texture)

    a = sub.add_parser("analyze", help="fractal dimension of a coastline or crest")
    _add_fbm_flags(a)
    a.add_argument("--input", default=None, help="map file (.pgm or .csv)")
    a.add_argument("--sea-level", type=float, default=None, help="default: median height")
    a.add_argument("--sizes", type=int, nargs="+", default=list(analysis.DEFAULT_BOX_SIZES))
    a.add_argument("--crest", action="store_true")
    a.add_argument("--a", type=float, default=2.0)
    a.add_argument("--f", type=float, default=2.0)
    a.add_argument("--n", type=int, default=10)
    a.add_argument("--panels", type=int, default=64)
    a.add_argument("--sweep", action="store_true")
    a.add_argument("--sweep-octaves", type=int, nargs="+", default=list(range(1, 9)))
    a.add_argument("--sweep-persistence", type=float, nargs="+", default=[0.3, 0.5, 0.7])
    a.add_argument("--csv", default=None, help="report path (default: stdout)")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="time heightmap generation")
    b.add_argument("--methods", nargs="+", default=["zg_paper", "perlin3", "generic"])
    b.add_argument("--octaves", type=int, nargs="+", default=[4])
    b.add_argument("--sizes", type=int, nargs="+", default=[1024])
    b.add_argument("--reps", type=int, default=100)
    b.add_argument("--warmup", type=int, default=2)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv", default=None, help="timing CSV path (default: stdout)")
    b.add_argument("--speedup-csv", default=None)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "crest", False) and getattr(args, "sweep", False):
        print("polyterrain: error: --crest and --sweep are exclusive", file=sys.stderr)
        return EXIT_VALIDATION
    if getattr(args, "input", None) and getattr(args, "sweep", False):
        print("polyterrain: error: --sweep generates its own maps; drop --input", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except TerrainError as exc:
        print(f"polyterrain: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"polyterrain: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
