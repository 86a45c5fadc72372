"""Per-pixel kernel bodies.

Plain Python so tests can drive them with an operation-counting number
type; :mod:`polyterrain._octave` compiles the same functions with numba.
Space-only quantities (smoothsteps, powers, ``x - 1``) arrive precomputed.
"""

from .kernels2d import zg_pixel  # noqa: F401  (3 mul, 3 add)


def perlin_pixel(f00, g00, f10, g10, f01, g01, f11, g11, x, xm1, y, ym1, sx, sy):
    v00 = f00 * x + g00 * y
    v10 = f10 * xm1 + g10 * y
    v01 = f01 * x + g01 * ym1
    v11 = f11 * xm1 + g11 * ym1
    h0 = v00 + sx * (v10 - v00)
    h1 = v01 + sx * (v11 - v01)
    return h0 + sy * (h1 - h0)


def generic_pixel(c00, c10, c20, c30, c01, c11, c21, c31, c02, c12, c03, c13,
                  x, x2, x3, y, y2, y3):
    return (c00 + c10 * x + c20 * x2 + c30 * x3
            + y * (c01 + c11 * x + c21 * x2 + c31 * x3)
            + y2 * (c02 + c12 * x)
            + y3 * (c03 + c13 * x))


# column order of the per-cell generic coefficient array
GENERIC_TERMS = ((0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (1, 1), (2, 1), (3, 1),
                 (0, 2), (1, 2), (0, 3), (1, 3))
