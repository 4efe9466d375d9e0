"""M-PSK constellations and the single-user ML detector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Constellation:
    """Unit-average-power M-PSK symbol set.

    points[m] = exp(2j*pi*m/M), so every symbol sits on the unit circle and
    the decision regions are circular sectors of half width pi/M.
    """

    order: int
    points: np.ndarray
    half_angle: float

    def point_xy(self, m: int) -> np.ndarray:
        """Symbol m as a real 2-vector (Re, Im)."""
        p = self.points[m]
        return np.array([p.real, p.imag])


def mpsk(order: int) -> Constellation:
    """The M-point unit-circle constellation."""
    if order < 2:
        raise ValueError(f"PSK order must be >= 2, got {order}")
    m = np.arange(order)
    points = np.exp(2j * np.pi * m / order)
    return Constellation(order=order, points=points, half_angle=np.pi / order)


def detect_ml(r: complex, c: Constellation) -> int:
    """Index of the nearest constellation point.

    For equal-radius PSK this is nearest-in-angle and invariant to positive
    scaling of r. Ties (including r = 0, equidistant to all symbols) resolve
    to the lowest index.
    """
    if not np.isfinite(r):
        raise ValueError("received sample must be finite")
    return int(np.argmin(np.abs(r - c.points)))


def detect_ml_many(r, c: Constellation) -> np.ndarray:
    """Vectorized detect_ml over an arbitrary-shaped complex array."""
    r = np.asarray(r, dtype=complex)
    d2 = np.abs(r[..., None] - c.points) ** 2
    return np.argmin(d2, axis=-1)
