"""numba-compiled octave accumulation loops.

Each loop adds one octave into ``out`` in place.  ``params`` holds the
amplitude-scaled cell terms as ``(cells_y, cells_x, k)``; ``row_cell`` and
``col_cell`` map pixels to cell indices relative to that array.  Rows are
independent, so the parallel build splits them across threads without
changing any pixel's arithmetic.
"""

import numba
from numba import prange

from . import _pixel

_zg = numba.njit(inline="always")(_pixel.zg_pixel)
_perlin = numba.njit(inline="always")(_pixel.perlin_pixel)
_generic = numba.njit(inline="always")(_pixel.generic_pixel)


def _zg_octave(out, params, row_cell, col_cell, sy, sx, row_k, col_k, cross):
    height, width = out.shape
    for r in prange(height):
        cy = row_cell[r]
        syr = sy[r]
        crow = cross[row_k[r]]
        for c in range(width):
            cx = col_cell[c]
            out[r, c] += _zg(params[cy, cx, 0], params[cy, cx, 1], params[cy, cx, 2],
                             params[cy, cx, 3], sx[c], syr, crow[col_k[c]])


def _perlin_octave(out, params, row_cell, col_cell, y, ym1, sy, x, xm1, sx):
    height, width = out.shape
    for r in prange(height):
        cy = row_cell[r]
        yr = y[r]
        ym1r = ym1[r]
        syr = sy[r]
        for c in range(width):
            cx = col_cell[c]
            p = params[cy, cx]
            out[r, c] += _perlin(p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7],
                                 x[c], xm1[c], yr, ym1r, sx[c], syr)


def _generic_octave(out, params, row_cell, col_cell, y1, y2, y3, x1, x2, x3):
    height, width = out.shape
    for r in prange(height):
        cy = row_cell[r]
        a = y1[r]
        b = y2[r]
        d = y3[r]
        for c in range(width):
            cx = col_cell[c]
            p = params[cy, cx]
            out[r, c] += _generic(p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7],
                                  p[8], p[9], p[10], p[11], x1[c], x2[c], x3[c], a, b, d)


_serial = {
    "zg": numba.njit(cache=True)(_zg_octave),
    "perlin": numba.njit(cache=True)(_perlin_octave),
    "generic": numba.njit(cache=True)(_generic_octave),
}
_parallel = {}


def octave_loop(family, threads=1):
    """Compiled loop for ``family`` in {"zg", "perlin", "generic"}."""
    if threads <= 1:
        return _serial[family]
    if family not in _parallel:
        src = {"zg": _zg_octave, "perlin": _perlin_octave, "generic": _generic_octave}[family]
        _parallel[family] = numba.njit(cache=True, parallel=True)(src)
    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    return _parallel[family]
