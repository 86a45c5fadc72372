"""Seeded, stateless corner data on the integer lattice.

Every value is a pure function of ``(seed, octave, ix, iy)``; there are no
permutation tables, so separately generated chunks agree on shared lattice
lines.

Hash: three chained rounds of the splitmix64 finalizer::

    z = mix(seed * K_SEED + octave * K_OCTAVE)
    z = mix(z + ix * K_X)
    z = mix(z + iy * K_Y + stream * K_STREAM)

all arithmetic modulo 2**64, signed inputs taken in two's complement.
Streams: 0 = height, 1 = gradient angle, 2 = gradient magnitude.
A 64-bit hash maps to ``[0, 1)`` through its top 53 bits.
"""

from dataclasses import dataclass

import numba
import numpy as np

from ._validation import ValidationError

K_SEED = np.uint64(0x9E3779B97F4A7C15)
K_OCTAVE = np.uint64(0xC2B2AE3D27D4EB4F)
K_X = np.uint64(0x165667B19E3779F9)
K_Y = np.uint64(0xD6E8FEB86659FD93)
K_STREAM = np.uint64(0xFF51AFD7ED558CCD)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

STREAM_HEIGHT = 0
STREAM_ANGLE = 1
STREAM_MAGNITUDE = 2

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class LatticeKey:
    seed: int
    octave: int
    ix: int
    iy: int


def _u64(v):
    arr = np.asarray(v)
    if arr.dtype == np.uint64:
        return arr
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64).astype(np.uint64)
    # python ints outside the int64 range
    return np.asarray(np.vectorize(lambda x: int(x) & _MASK64, otypes=[np.uint64])(arr))


def _mix(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def hash_lattice(seed, octave, ix, iy, stream=0):
    """64-bit avalanche hash of a lattice key; broadcasts over ``ix``/``iy``."""
    # 1-d arrays, not numpy scalars: scalar uint64 overflow raises warnings
    seed = np.atleast_1d(_u64(int(seed) & _MASK64))
    octave = np.atleast_1d(_u64(int(octave)))
    ix = np.atleast_1d(_u64(ix))
    iy = np.atleast_1d(_u64(iy))
    z = _mix(seed * K_SEED + octave * K_OCTAVE)
    z = _mix(z + ix * K_X)
    return _mix(z + iy * K_Y + np.atleast_1d(np.uint64(stream)) * K_STREAM)


def to_unit(h):
    """Map 64-bit hashes to doubles uniform in [0, 1)."""
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def corner_heights(seed, octave, ix, iy):
    """Heights uniform in [-1, 1) for arrays of lattice coordinates."""
    return 2.0 * to_unit(hash_lattice(seed, octave, ix, iy, STREAM_HEIGHT)) - 1.0


def corner_gradients(seed, octave, ix, iy, w=1.0, unit=False):
    """Gradient pairs ``(f, g)``.

    Direction is uniform in angle.  Magnitude is uniform in ``[0, w]``, or
    exactly 1 when ``unit`` is set (gradient-interpolation noise).
    """
    angle = 2.0 * np.pi * to_unit(hash_lattice(seed, octave, ix, iy, STREAM_ANGLE))
    if unit:
        mag = 1.0
    else:
        if w < 0:
            raise ValidationError("gradient weight must be non-negative")
        mag = w * to_unit(hash_lattice(seed, octave, ix, iy, STREAM_MAGNITUDE))
    return mag * np.cos(angle), mag * np.sin(angle)


def corner_height(key):
    return float(corner_heights(key.seed, key.octave, key.ix, key.iy)[0])


def corner_gradient(key, w, unit=False):
    f, g = corner_gradients(key.seed, key.octave, key.ix, key.iy, w, unit)
    return float(np.atleast_1d(f)[0]), float(np.atleast_1d(g)[0])


def default_gradient_weight(base_amplitude=1.0):
    return base_amplitude / 100.0


@numba.njit(cache=True)
def _mix_scalar(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _unit_block(seed, octave, x0, y0, nx, ny, stream):
    """Compiled twin of ``to_unit(hash_lattice(...))`` over a rectangular block."""
    out = np.empty((ny, nx))
    base = _mix_scalar(seed * K_SEED + octave * K_OCTAVE)
    tail = np.uint64(stream) * K_STREAM
    for i in range(nx):
        zx = _mix_scalar(base + np.uint64(x0 + i) * K_X)
        for j in range(ny):
            z = _mix_scalar(zx + np.uint64(y0 + j) * K_Y + tail)
            out[j, i] = np.float64(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    return out


def unit_block(seed, octave, x0, y0, nx, ny, stream=STREAM_HEIGHT):
    """Uniform ``[0, 1)`` values for lattice points ``[x0, x0+nx) x [y0, y0+ny)``, shape ``(ny, nx)``."""
    return _unit_block(np.uint64(int(seed) & _MASK64), np.uint64(int(octave)),
                       np.int64(x0), np.int64(y0), int(nx), int(ny), int(stream))


def height_block(seed, octave, x0, y0, nx, ny):
    return 2.0 * unit_block(seed, octave, x0, y0, nx, ny, STREAM_HEIGHT) - 1.0


def lattice_block(seed, octave, x0, y0, nx, ny, w=0.0, unit=False, gradients=True):
    """Corner data for lattice points ``[x0, x0+nx) x [y0, y0+ny)``.

    Returns ``(h, f, g)`` arrays of shape ``(ny, nx)`` indexed
    ``[iy - y0, ix - x0]``; ``f`` and ``g`` are None when ``gradients`` is off.
    """
    h = height_block(seed, octave, x0, y0, nx, ny)
    if not gradients:
        return h, None, None
    angle = 2.0 * np.pi * unit_block(seed, octave, x0, y0, nx, ny, STREAM_ANGLE)
    if unit:
        mag = 1.0
    else:
        if w < 0:
            raise ValidationError("gradient weight must be non-negative")
        mag = w * unit_block(seed, octave, x0, y0, nx, ny, STREAM_MAGNITUDE)
    return h, mag * np.cos(angle), mag * np.sin(angle)
