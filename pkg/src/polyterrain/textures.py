"""Turbulence textures and derivative images built on fBm maps.

Texture conventions (map coordinates ``x, y`` in ``[0, 1]``):

* marble: ``sin(2 pi * freq * x + gain * n)``
* wood:   ``sin(2 pi * freq * r + gain * n)``, ``r`` the distance to the map center
* cloud:  ``n`` rescaled to ``[0, 1]``

where ``n`` is the fBm map.  Outputs are grayscale images in ``[0, 1]``.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import ValidationError, check_real
from .fbm import FbmConfig, generate_heightmap, normalize_map

KINDS = ("marble", "wood", "cloud")


@dataclass(frozen=True)
class TextureSpec:
    kind: str = "marble"
    fbm: FbmConfig = field(default_factory=lambda: FbmConfig(octaves=6, resolution=256))
    gain: float = 5.0
    frequency: float = 4.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"texture kind must be one of {KINDS}, got {self.kind!r}")
        check_real(self.gain, "gain")
        check_real(self.frequency, "frequency", low=0.0, low_open=True)


def map_coordinates(resolution):
    t = (np.arange(resolution) + 0.5) / resolution
    return np.meshgrid(t, t, indexing="xy")


def texture(spec):
    """Render ``spec`` as a ``(R, R)`` image in ``[0, 1]``."""
    hm = generate_heightmap(spec.fbm)
    if spec.kind == "cloud":
        return 0.5 * (normalize_map(hm).data + 1.0)
    noise = hm.data
    x, y = map_coordinates(spec.fbm.resolution)
    if spec.kind == "marble":
        phase = 2.0 * np.pi * spec.frequency * x
    else:
        phase = 2.0 * np.pi * spec.frequency * np.hypot(x - 0.5, y - 0.5)
    return 0.5 * (np.sin(phase + spec.gain * noise) + 1.0)


def gradient_norm(data):
    """``|grad h|`` per pixel, derivatives in map units (pixel spacing ``1/R``)."""
    data = np.asarray(getattr(data, "data", data), dtype=float)
    spacing = 1.0 / data.shape[0]
    gy, gx = np.gradient(data, spacing)
    return np.hypot(gx, gy)


def hessian_norm(data):
    """Frobenius norm of the second-derivative matrix per pixel."""
    data = np.asarray(getattr(data, "data", data), dtype=float)
    spacing = 1.0 / data.shape[0]
    gy, gx = np.gradient(data, spacing)
    gyy, gyx = np.gradient(gy, spacing)
    gxy, gxx = np.gradient(gx, spacing)
    return np.sqrt(gxx**2 + gyy**2 + gxy**2 + gyx**2)


def mean_abs_laplacian(img):
    """Mean ``|Laplacian|`` (5-point stencil, interior pixels), a high-frequency energy proxy."""
    img = np.asarray(img, dtype=float)
    lap = (img[1:-1, :-2] + img[1:-1, 2:] + img[:-2, 1:-1] + img[2:, 1:-1]
           - 4.0 * img[1:-1, 1:-1])
    return float(np.mean(np.abs(lap)))
