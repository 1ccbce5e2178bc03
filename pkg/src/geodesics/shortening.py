"""Two-stage curve shortening by shortest-path replacement.

One step splits a closed curve into k arcs, replaces each arc by the unique
shortest path between its endpoints, then repeats on the half-shifted arcs.
The step is admissible once every parameter window of width 1/k has diameter
below epsilon/2, which also bounds the output's speed by k * epsilon / 2.

All functions are pure: they consume immutable curves and return new ones,
so concurrent invocations on different curves need no coordination.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .core import (
    PolyCurve,
    SpaceBackend,
    curve_length,
    resample_constant_speed,
)
from .errors import (
    CannotSatisfy,
    DiameterViolation,
    GeodesicError,
    InvalidCurve,
    TooFar,
)

DEFAULT_M_MAX = 4096
PREP_SAMPLES_PER_ARC = 8  # resample target m = max(m, 8k), so m >= 4k holds


@dataclass(frozen=True)
class ShorteningParams:
    """Knobs of the shortening iteration.

    k = None lets the driver pick the smallest admissible arc count.
    tol_move = None resolves to 1e-7 * epsilon of the backend at run time.
    """

    k: int | None = None
    tol_length: float = 1e-7
    tol_move: float | None = None
    max_iter: int = 10000
    m_max: int = DEFAULT_M_MAX

    def __post_init__(self):
        if self.k is not None and self.k < 2:
            raise ValueError(f"arc count k must be >= 2, got {self.k}")
        if self.tol_length <= 0:
            raise ValueError("tol_length must be positive")
        if self.tol_move is not None and self.tol_move <= 0:
            raise ValueError("tol_move must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def resolved_tol_move(self, space: SpaceBackend) -> float:
        return self.tol_move if self.tol_move is not None \
            else 1e-7 * space.epsilon


@dataclass
class ShorteningTrace:
    """Per-iteration record: curve lengths, sup sample displacements, and
    the terminal status (Converged | MaxIter | DiameterViolation)."""

    lengths: list = field(default_factory=list)
    moves: list = field(default_factory=list)
    status: str = "MaxIter"
    k: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,length,sup_move\n")
        for i, L in enumerate(self.lengths):
            move = "" if i == 0 else f"{self.moves[i - 1]:.17g}"
            buf.write(f"{i},{L:.17g},{move}\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Window diameter checks
# ---------------------------------------------------------------------------

def _cyclic_arcs(gaps: np.ndarray, span: int) -> np.ndarray:
    """Arc length from sample i to sample i+span, cyclically."""
    cum = np.concatenate(([0.0], np.cumsum(np.concatenate((gaps, gaps)))))
    m = len(gaps)
    return cum[span:span + m] - cum[:m]


def _pairs_below(space: SpaceBackend, coords: np.ndarray, gaps: np.ndarray,
                 span: int, limit: float) -> bool:
    """True iff every sample pair at index offset <= span is closer than
    `limit`.  Equivalent to all width-(span/m) windows having diameter below
    `limit`, because each such pair sits in the window starting at its first
    index.

    The sub-arc length bounds each pair's distance from above, so exact
    distances are only evaluated where the arc bound is inconclusive.
    """
    m = coords.shape[0]
    vectorized = getattr(space, "vectorized_rows", True)
    if vectorized:
        for off in range(span, 0, -1):
            d = space.rows_distance(coords, np.roll(coords, -off, axis=0))
            if np.max(d) >= limit:
                return False
        return True
    cum = np.concatenate(([0.0], np.cumsum(np.concatenate((gaps, gaps)))))
    for off in range(span, 0, -1):
        for i in range(m):
            if cum[i + off] - cum[i] < limit:
                continue  # arc bound certifies the pair
            try:
                d = space.pair_distance(coords[i], coords[(i + off) % m])
            except TooFar:
                return False
            if d >= limit:
                return False
    return True


def choose_k(space: SpaceBackend, c: PolyCurve,
             m_max: int = DEFAULT_M_MAX) -> int:
    """Smallest arc count k whose width-1/k parameter windows all have
    sample diameter below epsilon/2.

    Windows are evaluated on the constant-speed sampling that
    prepare_for_step will hand to the stepping routine (a multiple of 2k
    with at least max(m, 8k) samples), so the choice and the step's own
    precondition check agree.  Since a window's diameter is bounded by its
    arc length, L/k, any k with L/k safely below the limit is accepted
    without pairwise checks.  CannotSatisfy when k would exceed m_max.
    """
    if not c.closed:
        raise InvalidCurve("choose_k: curve must be closed")
    space.check_curve(c)
    limit = space.epsilon / 2.0
    total = float(np.sum(space.gap_lengths(c)))
    for k in range(2, m_max + 1):
        if total / k < limit * (1.0 - 1e-6):
            return k
        work = prepare_for_step(space, c, k)
        gaps = space.gap_lengths(work)
        span = work.m // k
        if _pairs_below(space, work.coords, gaps, span, limit):
            return k
    raise CannotSatisfy(
        f"choose_k: no admissible arc count up to m_max = {m_max}; curve is "
        "too wild at this resolution"
    )


def prepare_for_step(space: SpaceBackend, c: PolyCurve, k: int) -> PolyCurve:
    """Constant-speed resampling to the smallest multiple of 2k that is at
    least max(m, 8k), so every stage boundary lands exactly on a sample."""
    target = max(c.m, PREP_SAMPLES_PER_ARC * k)
    target = ((target + 2 * k - 1) // (2 * k)) * (2 * k)
    return resample_constant_speed(space, c, target)


# ---------------------------------------------------------------------------
# The shortening step
# ---------------------------------------------------------------------------

def _replace_arcs(space: SpaceBackend, coords: np.ndarray, k: int,
                  offset: int) -> np.ndarray:
    """Replace the k arcs starting at sample offsets (offset + 2*i*h) by
    shortest paths, keeping the arc endpoints fixed."""
    m = coords.shape[0]
    h = m // (2 * k)
    ts = np.linspace(0.0, 1.0, 2 * h + 1)
    out = np.empty_like(coords)
    for i in range(k):
        s = (offset + 2 * i * h) % m
        e = (s + 2 * h) % m
        try:
            seg = space.interpolate(coords[s], coords[e], ts)
        except TooFar as exc:  # precondition guarantees d < epsilon/2
            raise GeodesicError(
                f"birkhoff_step: arc {i} endpoints unexpectedly farther than "
                f"epsilon ({exc})"
            ) from exc
        for j in range(2 * h):
            out[(s + j) % m] = seg[j]
    return out


def birkhoff_step(space: SpaceBackend, c: PolyCurve, k: int) -> PolyCurve:
    """One two-stage shortening step D on a closed constant-speed curve.

    Requires the sample count to be divisible by 2k and every width-1/k
    window to have diameter below epsilon/2 (DiameterViolation otherwise).
    The output keeps the arc endpoints of each stage fixed and is
    constant-speed on each replaced arc; its length never exceeds the
    input's.
    """
    if not c.closed:
        raise InvalidCurve("birkhoff_step: curve must be closed")
    if k < 2:
        raise InvalidCurve(f"birkhoff_step: k must be >= 2, got {k}")
    m = c.m
    if m % (2 * k) != 0:
        raise InvalidCurve(
            f"birkhoff_step: sample count {m} is not divisible by 2k = {2 * k}"
        )
    space.check_curve(c)
    gaps = space.gap_lengths(c)
    span = m // k
    limit = space.epsilon / 2.0
    if float(np.max(_cyclic_arcs(gaps, span))) >= limit:
        # arc bound inconclusive; fall back to exact pairwise diameters
        if not _pairs_below(space, c.coords, gaps, span, limit):
            raise DiameterViolation(
                f"birkhoff_step: some width-1/{k} window has diameter >= "
                f"epsilon/2 = {limit:.6g}"
            )
    h = m // (2 * k)
    stage1 = _replace_arcs(space, c.coords, k, 0)
    stage2 = _replace_arcs(space, stage1, k, h)
    return PolyCurve(c.backend_tag, stage2, True)


def lipschitz_bound(space: SpaceBackend, c: PolyCurve, k: int) -> float:
    """Speed bound of the replaced curve: k times the largest distance
    between consecutive stage-1 arc endpoints.  For admissible curves this
    is at most k * epsilon / 2."""
    m = c.m
    if m % (2 * k) != 0:
        raise InvalidCurve(
            f"lipschitz_bound: sample count {m} not divisible by 2k = {2 * k}"
        )
    h = m // (2 * k)
    starts = (2 * np.arange(k) * h) % m
    ends = (starts + 2 * h) % m
    d = space.rows_distance(c.coords[starts], c.coords[ends])
    return float(k * np.max(d))


def sup_displacement(space: SpaceBackend, a: PolyCurve,
                     b: PolyCurve) -> float:
    """Largest sample-wise distance between two equally sampled curves."""
    if a.m != b.m:
        raise InvalidCurve(
            f"sup_displacement: sample counts differ ({a.m} vs {b.m})"
        )
    return float(np.max(space.rows_distance(a.coords, b.coords)))


def shorten_to_limit(space: SpaceBackend, c: PolyCurve,
                     params: ShorteningParams | None = None
                     ) -> tuple[PolyCurve, ShorteningTrace]:
    """Iterate the shortening step until both the relative length decrease
    and the sup sample displacement fall below their tolerances.

    Length stagnation alone is not trusted: a curve can stop shortening
    while still sliding along a family of geodesics, so convergence also
    requires displacement control.  A DiameterViolation mid-run re-runs
    choose_k once (k may only grow); a second violation aborts with that
    status in the trace.
    """
    if params is None:
        params = ShorteningParams()
    if not c.closed:
        raise InvalidCurve("shorten_to_limit: curve must be closed")
    k = params.k if params.k is not None else choose_k(space, c, params.m_max)
    tol_move = params.resolved_tol_move(space)
    cur = prepare_for_step(space, c, k)
    trace = ShorteningTrace(k=k)
    trace.lengths.append(curve_length(space, cur))
    rechosen = False
    for _ in range(params.max_iter):
        try:
            stepped = birkhoff_step(space, cur, k)
        except DiameterViolation:
            if rechosen:
                trace.status = "DiameterViolation"
                return cur, trace
            rechosen = True
            new_k = choose_k(space, cur, params.m_max)
            k = new_k if new_k > k else k + 1
            trace.k = k
            cur = prepare_for_step(space, cur, k)
            continue
        move = sup_displacement(space, cur, stepped)
        length = curve_length(space, stepped)
        prev = trace.lengths[-1]
        trace.lengths.append(length)
        trace.moves.append(move)
        rel = (prev - length) / max(prev, 1e-300)
        cur = resample_constant_speed(space, stepped, stepped.m)
        if rel < params.tol_length and move < tol_move:
            trace.status = "Converged"
            return cur, trace
    trace.status = "MaxIter"
    return cur, trace
