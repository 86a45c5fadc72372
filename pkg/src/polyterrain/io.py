"""Readers and writers for heightmaps: 16-bit PGM, CSV, PNG and OBJ meshes.

16-bit PGM is the canonical lossless format.  Samples are the heights mapped
affinely from ``[min, max]`` onto ``[0, 65535]``; the range is stored in a
header comment so :func:`read_pgm16` restores heights to within one
quantization step.
"""

import csv
import re

import numpy as np

from ._validation import ValidationError, check_finite_array

PGM_MAX = 65535
_RANGE_RE = re.compile(r"#\s*polyterrain\s+min=(\S+)\s+max=(\S+)")


def _as_2d(data, name="data"):
    arr = check_finite_array(getattr(data, "data", data), name)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2D, got shape {arr.shape}")
    return arr


def quantize16(arr, lo=None, hi=None):
    lo = float(arr.min()) if lo is None else lo
    hi = float(arr.max()) if hi is None else hi
    if hi == lo:
        return np.zeros(arr.shape, dtype=np.uint16), lo, hi
    q = np.rint((arr - lo) / (hi - lo) * PGM_MAX)
    return np.clip(q, 0, PGM_MAX).astype(np.uint16), lo, hi


def write_pgm16(data, path):
    """Binary (P5) PGM, maxval 65535, big-endian samples."""
    arr = _as_2d(data)
    q, lo, hi = quantize16(arr)
    rows, cols = arr.shape
    header = f"P5\n# polyterrain min={lo!r} max={hi!r}\n{cols} {rows}\n{PGM_MAX}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(q.astype(">u2").tobytes())


def _pgm_tokens(raw):
    tokens, comments, pos = [], [], 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            end = raw.index(b"\n", pos)
            comments.append(raw[pos:end].decode("ascii", "replace"))
            pos = end + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos].decode("ascii"))
    return tokens, comments, pos + 1


def read_pgm(path):
    """Read a P5 PGM; returns ``(samples, maxval, (min, max) or None)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    tokens, comments, offset = _pgm_tokens(raw)
    if tokens[0] != "P5":
        raise ValidationError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = ">u2" if maxval > 255 else "u1"
    samples = np.frombuffer(raw, dtype=dtype, count=rows * cols, offset=offset).reshape(rows, cols)
    rng = None
    for c in comments:
        m = _RANGE_RE.match(c)
        if m:
            rng = (float(m.group(1)), float(m.group(2)))
    return samples.astype(np.int64), maxval, rng


def read_pgm16(path):
    """Heights from a PGM written by :func:`write_pgm16`.

    Files without a stored range come back scaled to ``[0, 1]``.
    """
    samples, maxval, rng = read_pgm(path)
    lo, hi = rng if rng is not None else (0.0, 1.0)
    return lo + samples / maxval * (hi - lo)


def write_csv(data, path):
    """One map row per line, comma separated, '.' decimal point, LF endings."""
    arr = _as_2d(data)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in arr:
            w.writerow([repr(float(v)) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = [[float(v) for v in r] for r in csv.reader(fh) if r]
    return np.array(rows)


def write_png16(data, path):
    """16-bit grayscale PNG with the same affine mapping as the PGM writer."""
    from PIL import Image

    q, _, _ = quantize16(_as_2d(data))
    Image.fromarray(q).save(path, format="PNG")


def read_png16(path):
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im).astype(np.int64)


def write_rgb_png(rgb, path):
    from PIL import Image

    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValidationError("expected an (rows, cols, 3) image")
    Image.fromarray(np.clip(np.rint(rgb * 255), 0, 255).astype(np.uint8), mode="RGB").save(path)


def write_obj(data, path, height_scale=1.0):
    """Heightfield mesh: one vertex per pixel at ``(x, h * height_scale, y)``.

    Vertices are written row-major; each pixel quad becomes two triangles.
    """
    arr = _as_2d(data)
    if not np.isfinite(height_scale):
        raise ValidationError("height_scale must be finite")
    rows, cols = arr.shape
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# polyterrain heightfield {cols}x{rows}\n")
        for r in range(rows):
            for c in range(cols):
                fh.write(f"v {c} {float(arr[r, c] * height_scale)!r} {r}\n")
        for r in range(rows - 1):
            for c in range(cols - 1):
                v0 = r * cols + c + 1
                v1, v2 = v0 + 1, v0 + cols
                v3 = v2 + 1
                fh.write(f"f {v0} {v2} {v1}\n")
                fh.write(f"f {v1} {v2} {v3}\n")


def read_obj(path):
    """Vertices ``(n, 3)`` and 1-based triangle indices ``(m, 3)``."""
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(v) for v in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(v.split("/")[0]) for v in parts[1:4]])
    return np.array(verts).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def read_heightmap(path):
    """Load a map from ``.pgm`` or ``.csv`` by extension."""
    p = str(path).lower()
    if p.endswith(".pgm"):
        return read_pgm16(path)
    if p.endswith(".csv"):
        return read_csv(path)
    raise ValidationError(f"unsupported map format: {path}")


# 5-stop terrain colormap: deep water, water, sand, grass, rock/snow
_STOPS = np.array([-1.0, 0.0, 0.05, 0.4, 1.0])
_COLORS = np.array([
    [0.05, 0.10, 0.35],
    [0.20, 0.45, 0.75],
    [0.85, 0.80, 0.55],
    [0.30, 0.60, 0.20],
    [0.95, 0.95, 0.95],
])


def terrain_colors(data, sea_level=0.0):
    """RGB in [0, 1] for a map, with heights rescaled so ``sea_level`` maps to 0."""
    arr = _as_2d(data)
    lo, hi = float(arr.min()), float(arr.max())
    t = np.where(arr < sea_level,
                 -(sea_level - arr) / max(sea_level - lo, 1e-12),
                 (arr - sea_level) / max(hi - sea_level, 1e-12))
    return np.stack([np.interp(t, _STOPS, _COLORS[:, k]) for k in range(3)], axis=-1)
