"""Exact model spaces: the round sphere S^2 and the flat square torus.

Both metrics have closed forms, so these backends double as oracles for
every property and acceptance test.  They are stateless after construction
and safe to share between threads.
"""

from __future__ import annotations

import numpy as np

from .core import COORD_TOL, SpaceBackend
from .errors import InvalidPoint, NotUnique

TIE_TOL = 1e-12        # torus translate ties (cut-locus detection)
ANTIPODAL_MARGIN = 1e-9


class SphereBackend(SpaceBackend):
    """Round sphere of given radius embedded in R^3; points are unit vectors.

    Distance is radius times the arc angle; shortest paths interpolate at
    constant angular speed along the minor great-circle arc.  Antipodal
    pairs (within ANTIPODAL_MARGIN) raise NotUnique.
    """

    name = "sphere"
    dimension_hint = 2

    def __init__(self, radius: float = 1.0, epsilon: float | None = None):
        if radius <= 0:
            raise ValueError(f"sphere radius must be positive, got {radius}")
        self.radius = float(radius)
        if epsilon is None:
            epsilon = 0.5 * np.pi * self.radius
        if not 0.0 < epsilon < np.pi * self.radius:
            raise ValueError(
                f"sphere epsilon must lie in (0, pi*radius), got {epsilon}"
            )
        self.epsilon = float(epsilon)

    def validate_coords(self, coords: np.ndarray) -> None:
        if coords.shape != (3,):
            raise InvalidPoint(f"sphere point needs 3 coords, got {coords.shape}")
        n = np.linalg.norm(coords)
        if abs(n - 1.0) > COORD_TOL:
            raise InvalidPoint(f"sphere point norm {n!r} is not 1 within 1e-12")

    def _angle(self, a: np.ndarray, b: np.ndarray) -> float:
        # atan2 form stays accurate near 0 and pi, unlike arccos(dot)
        return float(np.arctan2(np.linalg.norm(np.cross(a, b)),
                                np.dot(a, b)))

    def pair_distance(self, a: np.ndarray, b: np.ndarray) -> float:
        return self.radius * self._angle(a, b)

    def rows_distance(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        cross = np.linalg.norm(np.cross(A, B), axis=-1)
        dots = np.einsum("ij,ij->i", A, B)
        return self.radius * np.arctan2(cross, dots)

    def check_unique(self, a: np.ndarray, b: np.ndarray, d: float) -> None:
        if d >= np.pi * self.radius - ANTIPODAL_MARGIN:
            raise NotUnique(
                f"sphere: points at distance {d:.12g} are (nearly) antipodal; "
                "every great-circle arc between them is shortest"
            )

    def interpolate(self, a: np.ndarray, b: np.ndarray,
                    ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        omega = self._angle(a, b)
        out = np.empty((ts.size, 3))
        if omega < 1e-15:
            out[:] = a
        else:
            s = np.sin(omega)
            wa = np.sin((1.0 - ts) * omega) / s
            wb = np.sin(ts * omega) / s
            out = wa[:, None] * a[None, :] + wb[:, None] * b[None, :]
            # renormalize to keep the unit-norm invariant exact
            out /= np.linalg.norm(out, axis=1, keepdims=True)
        out[ts == 0.0] = a
        out[ts == 1.0] = b
        return out


class TorusBackend(SpaceBackend):
    """Flat square torus R^2 / (side * Z)^2; points live in [0,1)^2.

    Distance is the side length times the minimum over the nine integer
    translates of the coordinate difference; the shortest path is the
    straight segment of the minimizing lift, reduced mod 1.  Two translates
    tying within TIE_TOL raise NotUnique.
    """

    name = "torus"
    dimension_hint = 2

    _SHIFTS = np.array([[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)],
                       dtype=float)

    def __init__(self, side: float = 1.0, epsilon: float | None = None):
        if side <= 0:
            raise ValueError(f"torus side must be positive, got {side}")
        self.side = float(side)
        if epsilon is None:
            epsilon = self.side / 4.0
        if not 0.0 < epsilon < self.side / 2.0:
            raise ValueError(
                f"torus epsilon must lie in (0, side/2), got {epsilon}"
            )
        self.epsilon = float(epsilon)

    def validate_coords(self, coords: np.ndarray) -> None:
        if coords.shape != (2,):
            raise InvalidPoint(f"torus point needs 2 coords, got {coords.shape}")
        if np.any(coords < 0.0) or np.any(coords >= 1.0):
            raise InvalidPoint(
                f"torus coords {coords.tolist()} lie outside [0, 1)^2"
            )

    def _wrap_delta(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Displacement of the minimizing lift (unit coordinates)."""
        d = b - a
        return d - np.round(d)

    def pair_distance(self, a: np.ndarray, b: np.ndarray) -> float:
        return self.side * float(np.linalg.norm(self._wrap_delta(a, b)))

    def rows_distance(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        d = B - A
        d -= np.round(d)
        return self.side * np.linalg.norm(d, axis=1)

    def check_unique(self, a: np.ndarray, b: np.ndarray, d: float) -> None:
        diff = b - a
        cand = np.sort(self.side * np.linalg.norm(diff + self._SHIFTS, axis=1))
        if cand[1] - cand[0] <= TIE_TOL:
            raise NotUnique(
                f"torus: two lifts of the segment tie at length {cand[0]:.12g}"
            )

    def interpolate(self, a: np.ndarray, b: np.ndarray,
                    ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        delta = self._wrap_delta(a, b)
        out = np.mod(a[None, :] + ts[:, None] * delta[None, :], 1.0)
        out[out >= 1.0] = 0.0  # np.mod of tiny negatives rounds up to 1.0
        out[ts == 0.0] = a
        out[ts == 1.0] = b
        return out
