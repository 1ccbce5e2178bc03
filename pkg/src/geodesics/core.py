"""Domain types and the geodesic-space contract.

A space backend provides a metric, a uniqueness radius ``epsilon``, and
constant-speed interpolation along the unique shortest path between any two
points closer than ``epsilon``.  Curves are uniform-in-index discretizations:
sample ``i`` of a closed curve with ``m`` points sits at parameter ``i/m``
(``i/(m-1)`` for open paths), and intermediate parameter values are realized
on demand through shortest-path interpolation.

Points, curves, and backends are immutable values; nothing here mutates
shared state, so concurrent readers need no coordination.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    GapTooWide,
    InvalidCurve,
    InvalidPoint,
    MixedBackends,
    TooFar,
)

COORD_TOL = 1e-12  # coordinate validity (norms, barycentric sums)


@dataclass(frozen=True)
class Point:
    """A location in one backend: unit 3-vector (sphere), pair in [0,1)^2
    (torus), or [face, b0, b1, b2] (mesh)."""

    backend_tag: str
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __eq__(self, other):
        return (
            isinstance(other, Point)
            and self.backend_tag == other.backend_tag
            and np.array_equal(self.coords, other.coords)
        )

    def __hash__(self):
        return hash((self.backend_tag, self.coords.tobytes()))


@dataclass(frozen=True)
class PolyCurve:
    """Discretized curve: ordered samples with an implicit constant-speed
    parametrization convention.

    Parameters
    ----------
    backend_tag : str
        Name of the owning backend; all samples belong to it.
    coords : ndarray, shape (m, d)
        Per-sample backend coordinates.
    closed : bool
        Closed curves need m >= 3, open ones m >= 2.
    """

    backend_tag: str
    coords: np.ndarray
    closed: bool

    def __post_init__(self):
        c = np.ascontiguousarray(self.coords, dtype=float)
        if c.ndim != 2:
            raise InvalidCurve("PolyCurve coords must be a 2-d array")
        m = c.shape[0]
        if self.closed and m < 3:
            raise InvalidCurve(f"closed curve needs >= 3 samples, got {m}")
        if not self.closed and m < 2:
            raise InvalidCurve(f"open path needs >= 2 samples, got {m}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def m(self) -> int:
        return self.coords.shape[0]

    def point(self, i: int) -> Point:
        return Point(self.backend_tag, self.coords[i])

    @property
    def points(self) -> list[Point]:
        return [self.point(i) for i in range(self.m)]

    @staticmethod
    def from_points(points: Sequence[Point], closed: bool) -> "PolyCurve":
        tags = {p.backend_tag for p in points}
        if len(tags) != 1:
            raise MixedBackends(f"curve mixes backends {sorted(tags)}")
        coords = np.stack([p.coords for p in points])
        return PolyCurve(points[0].backend_tag, coords, closed)


class OpenPath(PolyCurve):
    """PolyCurve with closed = False whose endpoints are first/last samples."""

    def __init__(self, backend_tag: str, coords: np.ndarray):
        super().__init__(backend_tag=backend_tag, coords=coords, closed=False)

    @property
    def source(self) -> Point:
        return self.point(0)

    @property
    def target(self) -> Point:
        return self.point(self.m - 1)


class SpaceBackend:
    """Contract every space implements: a metric plus unique shortest paths
    below the radius ``epsilon``.

    Subclasses fill in the coordinate-level hooks; the module-level
    operations (`distance`, `shortest_path`, ...) add tag checking and
    error handling on top.  Backends are read-only after construction.
    """

    name: str = "abstract"
    epsilon: float = 0.0
    dimension_hint: int = 0
    vectorized_rows: bool = True  # rows_distance is cheap to call in bulk

    # -- coordinate-level hooks --------------------------------------------
    def validate_coords(self, coords: np.ndarray) -> None:
        raise NotImplementedError

    def pair_distance(self, a: np.ndarray, b: np.ndarray) -> float:
        """Raw metric value; never raises uniqueness diagnostics."""
        raise NotImplementedError

    def rows_distance(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Row-paired distances; default loops over pair_distance."""
        return np.array(
            [self.pair_distance(a, b) for a, b in zip(A, B)], dtype=float
        )

    def check_unique(self, a: np.ndarray, b: np.ndarray, d: float) -> None:
        """Raise NotUnique when the shortest path between a, b is ambiguous."""

    def interpolate(self, a: np.ndarray, b: np.ndarray,
                    ts: np.ndarray) -> np.ndarray:
        """Points on the unique shortest path a->b at arc-length fractions ts.

        ts = 0 must return a exactly and ts = 1 must return b exactly.
        """
        raise NotImplementedError

    # -- derived helpers -----------------------------------------------------
    def validate_point(self, p: Point) -> None:
        if p.backend_tag != self.name:
            raise MixedBackends(
                f"point tagged '{p.backend_tag}' used with backend '{self.name}'"
            )
        self.validate_coords(p.coords)

    def check_curve(self, c: PolyCurve) -> None:
        if c.backend_tag != self.name:
            raise MixedBackends(
                f"curve tagged '{c.backend_tag}' used with backend '{self.name}'"
            )
        for row in c.coords:
            self.validate_coords(row)

    def gap_lengths(self, c: PolyCurve) -> np.ndarray:
        """Consecutive sample distances (cyclic for closed curves).

        Raises GapTooWide when a gap reaches epsilon, since interpolation
        across such a gap has no unique meaning.
        """
        A = c.coords
        B = np.roll(c.coords, -1, axis=0) if c.closed else c.coords[1:]
        if c.closed:
            gaps = self.rows_distance(A, B)
        else:
            gaps = self.rows_distance(A[:-1], B)
        worst = int(np.argmax(gaps))
        if gaps[worst] >= self.epsilon:
            raise GapTooWide(
                f"gap {worst} has length {gaps[worst]:.6g} >= epsilon "
                f"{self.epsilon:.6g}"
            )
        return gaps


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def _check_pair(space: SpaceBackend, a: Point, b: Point) -> None:
    if a.backend_tag != b.backend_tag:
        raise MixedBackends(
            f"distance: points tagged '{a.backend_tag}' and '{b.backend_tag}'"
        )
    space.validate_point(a)
    space.validate_point(b)


def distance(space: SpaceBackend, a: Point, b: Point) -> float:
    """Metric distance between two points of one backend.

    Symmetric, non-negative, zero iff the points coincide (within backend
    tolerance).  Raises NotUnique on cut-locus diagnostics (antipodal pairs,
    tied torus translates).
    """
    _check_pair(space, a, b)
    d = space.pair_distance(a.coords, b.coords)
    space.check_unique(a.coords, b.coords, d)
    return d


def shortest_path(space: SpaceBackend, a: Point, b: Point,
                  samples: int) -> OpenPath:
    """The unique shortest path from a to b, sampled uniformly in arc length.

    Requires distance(a, b) <= epsilon; raises TooFar otherwise so the
    caller knows to subdivide.
    """
    if samples < 2:
        raise InvalidCurve(f"shortest_path: needs samples >= 2, got {samples}")
    _check_pair(space, a, b)
    d = space.pair_distance(a.coords, b.coords)
    if d > space.epsilon:
        raise TooFar(
            f"shortest_path: d(a,b) = {d:.6g} exceeds epsilon "
            f"{space.epsilon:.6g}"
        )
    space.check_unique(a.coords, b.coords, d)
    ts = np.linspace(0.0, 1.0, samples)
    coords = space.interpolate(a.coords, b.coords, ts)
    return OpenPath(space.name, coords)


def curve_length(space: SpaceBackend, c: PolyCurve) -> float:
    """Sum of consecutive geodesic gap distances (cyclic when closed)."""
    space.check_curve(c)
    return float(np.sum(space.gap_lengths(c)))


def resample_constant_speed(space: SpaceBackend, c: PolyCurve, m_out: int,
                            tol_spread: float = 1e-6,
                            max_passes: int = 12) -> PolyCurve:
    """Redistribute samples uniformly in arc length, keeping sample 0 fixed.

    Interpolation happens along the unique shortest path of each consecutive
    gap, so every input gap must be shorter than epsilon (GapTooWide
    otherwise).  Passes repeat until consecutive output gaps agree within
    ``tol_spread`` relative or ``max_passes`` is hit; on piecewise-geodesic
    input one pass is exact.
    """
    space.check_curve(c)
    if c.closed and m_out < 3:
        raise InvalidCurve(f"resample: closed output needs m >= 3, got {m_out}")
    if not c.closed and m_out < 2:
        raise InvalidCurve(f"resample: open output needs m >= 2, got {m_out}")

    cur = c
    for _ in range(max_passes):
        gaps = space.gap_lengths(cur)
        total = float(np.sum(gaps))
        if total <= 1e-300:
            coords = np.repeat(c.coords[:1], m_out, axis=0)
            break
        if cur.closed:
            targets = np.arange(m_out) * (total / m_out)
        else:
            targets = np.arange(m_out) * (total / (m_out - 1))
            targets[-1] = total
        cum = np.concatenate(([0.0], np.cumsum(gaps)))
        seg = np.clip(np.searchsorted(cum, targets, side="right") - 1,
                      0, len(gaps) - 1)
        frac = np.where(gaps[seg] > 0.0,
                        (targets - cum[seg]) / np.where(gaps[seg] > 0.0,
                                                        gaps[seg], 1.0),
                        0.0)
        frac = np.clip(frac, 0.0, 1.0)
        coords = np.empty((m_out, c.coords.shape[1]))
        A = cur.coords
        B = np.roll(cur.coords, -1, axis=0) if cur.closed else cur.coords[1:]
        for s in np.unique(seg):
            sel = seg == s
            coords[sel] = space.interpolate(A[s], B[s], frac[sel])
        out = PolyCurve(c.backend_tag, coords, c.closed) if c.closed \
            else OpenPath(c.backend_tag, coords)
        new_gaps = space.gap_lengths(out)
        mean = float(np.mean(new_gaps))
        if mean <= 0.0 or (np.max(new_gaps) - np.min(new_gaps)) / mean \
                < tol_spread:
            return out
        cur = out
    return PolyCurve(c.backend_tag, coords, c.closed) if c.closed \
        else OpenPath(c.backend_tag, coords)


def constant_curve(space: SpaceBackend, p: Point, m: int,
                   closed: bool = True) -> PolyCurve:
    """Degenerate curve sitting at one point."""
    space.validate_point(p)
    coords = np.repeat(p.coords[None, :], m, axis=0)
    return PolyCurve(space.name, coords, closed)


# ---------------------------------------------------------------------------
# Curve serialization (shared JSON format)
# ---------------------------------------------------------------------------

def curve_to_json(c: PolyCurve) -> dict:
    """{"backend": name, "closed": bool, "points": [[...], ...]}"""
    pts = []
    for row in c.coords:
        if c.backend_tag == "mesh":
            pts.append([int(round(row[0]))] + [float(x) for x in row[1:]])
        else:
            pts.append([float(x) for x in row])
    return {"backend": c.backend_tag, "closed": bool(c.closed), "points": pts}


def curve_from_json(doc: dict, space: SpaceBackend) -> PolyCurve:
    """Parse and validate a curve document against the given backend."""
    try:
        backend = doc["backend"]
        closed = bool(doc["closed"])
        pts = doc["points"]
    except (KeyError, TypeError) as exc:
        raise InvalidCurve(f"curve document missing field: {exc}") from exc
    if backend != space.name:
        raise MixedBackends(
            f"curve document for backend '{backend}' loaded into "
            f"'{space.name}'"
        )
    coords = np.asarray(pts, dtype=float)
    curve = PolyCurve(backend, coords, closed) if closed \
        else OpenPath(backend, coords)
    space.check_curve(curve)
    return curve


def curve_dumps(c: PolyCurve) -> str:
    return json.dumps(curve_to_json(c))


def curve_loads(text: str, space: SpaceBackend) -> PolyCurve:
    return curve_from_json(json.loads(text), space)
