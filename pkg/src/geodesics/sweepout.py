"""Sweep-out families, the minimax driver, and geodesic certification.

A sweep-out discretizes a map from the n-sphere by restricting it to the
standard foliation of S^n by circles: one closed curve per base parameter in
the unit disk B^{n-1}, degenerate at the disk boundary.  Iterating the
shortening step over the whole family drives the per-iteration maximum
length down to a minimax level; the maximizing curve is the candidate
periodic geodesic and is certified by checking that short sub-arcs realize
distance.

Whether the swept map is actually non-contractible is a topological input
this module cannot check; reports carry the caller's assertion verbatim.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    OpenPath,
    Point,
    PolyCurve,
    SpaceBackend,
    constant_curve,
    curve_length,
    curve_to_json,
    resample_constant_speed,
)
from .errors import (
    ContinuityViolation,
    FamilyCollapsed,
    InvalidCurve,
    NoneConverged,
    OutsideDisk,
    WindowTooWide,
)
from .shortening import (
    ShorteningParams,
    ShorteningTrace,
    birkhoff_step,
    choose_k,
    prepare_for_step,
    shorten_to_limit,
    sup_displacement,
)

R_MIN_DEGENERATE = 1e-3
DEFAULT_CERTIFY_TOL = 1e-4


def foliation_circle(n: int, x, t) -> np.ndarray:
    """Point of the circle foliation of S^n ⊂ R^{n+1}.

    Base parameters x (length n-1) select the circle; t in [0, 1] runs
    around it.  The circle of radius r = sqrt(1 - |x|^2) lives in the last
    two coordinates as (r sin 2 pi t, r cos 2 pi t), so t = 0 gives the base
    point (x, 0, r).  Scalar or array t is accepted.
    """
    if n < 2:
        raise ValueError(f"foliation_circle: n must be >= 2, got {n}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (n - 1,):
        raise ValueError(
            f"foliation_circle: expected {n - 1} base parameters, got "
            f"{x.shape}"
        )
    s2 = float(x @ x)
    if s2 > 1.0 + 1e-12:
        raise OutsideDisk(
            f"foliation_circle: |x|^2 = {s2:.12g} exceeds 1"
        )
    r = np.sqrt(max(1.0 - s2, 0.0))
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty((t.size, n + 1))
    out[:, : n - 1] = x
    out[:, n - 1] = r * np.sin(2.0 * np.pi * t)
    out[:, n] = r * np.cos(2.0 * np.pi * t)
    return out[0] if scalar else out


@dataclass
class SweepFamily:
    """Finite sweep-out: one closed curve per base-disk grid point.

    grid holds the base parameters (rows), lattice the integer grid indices
    used for adjacency, degenerate flags near-boundary point circles stored
    as constant curves.
    """

    n: int
    grid_res: int
    grid: np.ndarray
    lattice: np.ndarray
    curves: list
    degenerate: np.ndarray

    @property
    def size(self) -> int:
        return len(self.curves)

    def base_points(self) -> np.ndarray:
        return np.stack([c.coords[0] for c in self.curves])

    def neighbor_pairs(self) -> list:
        """Index pairs of lattice-adjacent grid points."""
        index = {tuple(row): i for i, row in enumerate(self.lattice)}
        pairs = []
        dim = self.lattice.shape[1]
        for i, row in enumerate(self.lattice):
            for d in range(dim):
                nb = list(row)
                nb[d] += 1
                j = index.get(tuple(nb))
                if j is not None:
                    pairs.append((i, j))
        return pairs


def build_family(space: SpaceBackend, f: Callable[[np.ndarray], Point],
                 n: int, grid_res: int, m: int,
                 r_min: float = R_MIN_DEGENERATE) -> SweepFamily:
    """Evaluate f over the circle foliation on a base-disk lattice.

    The lattice has spacing 2/grid_res, clipped to the closed unit disk.
    Circles with radius below r_min are flagged degenerate and stored as
    constant curves at their base point.  Discrete continuity is enforced:
    consecutive samples along each curve and base points of lattice
    neighbors must stay within epsilon/2 (ContinuityViolation suggests
    doubling m or grid_res).
    """
    if grid_res < 1:
        raise ValueError(f"build_family: grid_res must be >= 1, got {grid_res}")
    if m < 3:
        raise ValueError(f"build_family: m must be >= 3, got {m}")
    dim = n - 1
    axes = [np.arange(grid_res + 1) for _ in range(dim)]
    mesh_idx = np.stack(np.meshgrid(*axes, indexing="ij"),
                        axis=-1).reshape(-1, dim)
    params = -1.0 + 2.0 * mesh_idx / grid_res
    keep = np.einsum("ij,ij->i", params, params) <= 1.0 + 1e-12
    mesh_idx = mesh_idx[keep]
    params = params[keep]

    ts = np.arange(m) / m
    curves = []
    degenerate = np.zeros(len(params), dtype=bool)
    half_eps = space.epsilon / 2.0
    for g, x in enumerate(params):
        r = np.sqrt(max(1.0 - float(x @ x), 0.0))
        if r < r_min:
            base = f(foliation_circle(n, x, 0.0))
            space.validate_point(base)
            curves.append(constant_curve(space, base, m))
            degenerate[g] = True
            continue
        pts = foliation_circle(n, x, ts)
        rows = []
        for u in pts:
            p = f(u)
            space.validate_point(p)
            rows.append(p.coords)
        curve = PolyCurve(space.name, np.stack(rows), closed=True)
        gaps = space.rows_distance(curve.coords,
                                   np.roll(curve.coords, -1, axis=0))
        worst = int(np.argmax(gaps))
        if gaps[worst] > half_eps:
            raise ContinuityViolation(
                f"build_family: curve at grid point {g} has sample gap "
                f"{gaps[worst]:.6g} > epsilon/2 = {half_eps:.6g} between "
                f"samples {worst} and {(worst + 1) % m}; double m or refine f"
            )
        curves.append(curve)

    family = SweepFamily(n=n, grid_res=grid_res, grid=params,
                         lattice=mesh_idx, curves=curves,
                         degenerate=degenerate)
    bases = family.base_points()
    for i, j in family.neighbor_pairs():
        d = float(space.rows_distance(bases[i][None, :], bases[j][None, :])[0])
        if d > half_eps:
            raise ContinuityViolation(
                f"build_family: base points of adjacent grid points {i} and "
                f"{j} are {d:.6g} apart > epsilon/2 = {half_eps:.6g}; double "
                "grid_res"
            )
    return family


@dataclass
class CertificationResult:
    """Outcome of the local distance-equals-length check."""

    passed: bool
    max_defect: float
    window: float

    def to_dict(self) -> dict:
        return {"passed": bool(self.passed),
                "max_defect": float(self.max_defect),
                "window": float(self.window)}


def certify_geodesic(space: SpaceBackend, c: PolyCurve,
                     tol: float = DEFAULT_CERTIFY_TOL,
                     window: float | None = None) -> CertificationResult:
    """Check that every sub-arc of the given parameter width realizes the
    distance between its endpoints, up to relative defect `tol`.

    The default window keeps sub-arcs shorter than epsilon/2; wider windows
    whose sub-arc length exceeds epsilon raise WindowTooWide, since distance
    comparison is only meaningful below the uniqueness radius.
    """
    if not c.closed:
        raise InvalidCurve("certify_geodesic: curve must be closed")
    space.check_curve(c)
    gaps = space.gap_lengths(c)
    total = float(np.sum(gaps))
    m = c.m
    if total < 1e-12:
        w = window if window is not None else 1.0 / 8.0
        return CertificationResult(True, 0.0, w)
    if window is None:
        window = min(space.epsilon / (2.0 * total), 1.0 / 8.0)
    h = max(1, int(round(window * m)))
    cum = np.concatenate(([0.0], np.cumsum(np.concatenate((gaps, gaps)))))
    arcs = cum[h:h + m] - cum[:m]
    worst = int(np.argmax(arcs))
    if arcs[worst] > space.epsilon:
        raise WindowTooWide(
            f"certify_geodesic: window {h}/{m} spans arc {arcs[worst]:.6g} > "
            f"epsilon {space.epsilon:.6g} at sample {worst}"
        )
    dists = space.rows_distance(c.coords, np.roll(c.coords, -h, axis=0))
    defects = np.where(arcs > 1e-300, (arcs - dists) / np.maximum(arcs, 1e-300),
                       0.0)
    max_defect = float(np.max(defects))
    return CertificationResult(max_defect < tol, max_defect, h / m)


@dataclass
class MinimaxReport:
    """Result of a minimax sweep: the per-iteration maxima, the maximizing
    curve, and its certification."""

    c_seq: list
    argmax_index: int
    candidate: PolyCurve
    certified: CertificationResult
    epsilon_check: bool
    status: str
    k: int
    iterations: int
    argmax_moves: list = field(default_factory=list)
    noncontractible_asserted: bool = True
    ambiguity_events: int = 0

    def to_dict(self) -> dict:
        return {
            "c_seq": [float(v) for v in self.c_seq],
            "argmax_index": int(self.argmax_index),
            "candidate": curve_to_json(self.candidate),
            "candidate_length": float(self.c_seq[-1]),
            "certified": self.certified.to_dict(),
            "epsilon_check": bool(self.epsilon_check),
            "status": self.status,
            "k": int(self.k),
            "iterations": int(self.iterations),
            "noncontractible_asserted": bool(self.noncontractible_asserted),
            "ambiguity_events": int(self.ambiguity_events),
        }

    def c_seq_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,c,argmax_sup_move\n")
        for i, v in enumerate(self.c_seq):
            move = "" if i == 0 else f"{self.argmax_moves[i - 1]:.17g}"
            buf.write(f"{i},{v:.17g},{move}\n")
        return buf.getvalue()


def minimax_run(space: SpaceBackend, family: SweepFamily,
                params: ShorteningParams | None = None,
                max_sweep_iters: int = 200,
                certify_tol: float = DEFAULT_CERTIFY_TOL,
                noncontractible_asserted: bool = True) -> MinimaxReport:
    """Drive the whole family down by repeated shortening steps and return
    the maximizing curve once the maxima stagnate.

    One global arc count k (the maximum of choose_k over the family) is
    fixed for the entire run so per-iteration maxima stay comparable.  The
    candidate is the raw arg-max curve at termination; shortening it
    further would move it off the minimax level.  FamilyCollapsed is raised
    the moment every curve is shorter than epsilon: for an essential
    sweep-out that cannot happen, so reaching it diagnoses a contractible
    family or a too-coarse grid.
    """
    if params is None:
        params = ShorteningParams()
    tol_move = params.resolved_tol_move(space)
    live = [g for g in range(family.size) if not family.degenerate[g]]

    amb_before = getattr(space, "ambiguity_events", 0)
    if params.k is not None:
        k = params.k
    else:
        k = 2
        for g in live:
            k = max(k, choose_k(space, family.curves[g], params.m_max))
    curves = list(family.curves)
    for g in live:
        curves[g] = prepare_for_step(space, family.curves[g], k)
    m_run = max(c.m for c in curves) if live else family.curves[0].m
    for g in live:
        if curves[g].m != m_run:
            curves[g] = resample_constant_speed(space, curves[g], m_run)

    lengths = np.array([curve_length(space, c) for c in curves])
    c_seq = [float(lengths.max())]
    moves = []
    if bool(np.all(lengths < space.epsilon)):
        raise FamilyCollapsed(0)

    status = "MaxIter"
    argmax = int(np.argmax(lengths))
    iterations = 0
    for it in range(1, max_sweep_iters + 1):
        iterations = it
        argmax_move = 0.0
        for g in live:
            work = resample_constant_speed(space, curves[g], curves[g].m)
            stepped = birkhoff_step(space, work, k)
            lengths[g] = curve_length(space, stepped)
            curves[g] = stepped
            if g == argmax:
                argmax_move = sup_displacement(space, work, stepped)
        c_new = float(lengths.max())
        argmax = int(np.argmax(lengths))
        c_prev = c_seq[-1]
        c_seq.append(c_new)
        moves.append(argmax_move)
        if bool(np.all(lengths < space.epsilon)):
            raise FamilyCollapsed(it)
        rel = (c_prev - c_new) / max(c_prev, 1e-300)
        if rel < params.tol_length and argmax_move < tol_move:
            status = "Converged"
            break

    candidate = curves[argmax]
    certified = certify_geodesic(space, candidate, tol=certify_tol)
    amb_after = getattr(space, "ambiguity_events", 0)
    return MinimaxReport(
        c_seq=c_seq,
        argmax_index=argmax,
        candidate=candidate,
        certified=certified,
        epsilon_check=c_seq[-1] >= space.epsilon,
        status=status,
        k=k,
        iterations=iterations,
        argmax_moves=moves,
        noncontractible_asserted=noncontractible_asserted,
        ambiguity_events=int(amb_after - amb_before),
    )


@dataclass
class SeedOutcome:
    """Terminal state of one systole seed."""

    length: float
    status: str
    contractible: bool
    trace: ShorteningTrace

    def to_dict(self) -> dict:
        return {"length": float(self.length), "status": self.status,
                "contractible": bool(self.contractible)}


@dataclass
class SystoleReport:
    """Shortest converged non-contractible limit over the given seeds."""

    curve: PolyCurve | None
    length: float | None
    certified: CertificationResult | None
    seeds: list
    warnings: list
    noncontractible_asserted: bool = True

    def to_dict(self) -> dict:
        return {
            "curve": None if self.curve is None else curve_to_json(self.curve),
            "length": None if self.length is None else float(self.length),
            "certified": None if self.certified is None
            else self.certified.to_dict(),
            "seeds": [s.to_dict() for s in self.seeds],
            "warnings": list(self.warnings),
            "noncontractible_asserted": bool(self.noncontractible_asserted),
        }


def systole_search(space: SpaceBackend, seeds: Sequence[PolyCurve],
                   params: ShorteningParams | None = None,
                   certify_tol: float = DEFAULT_CERTIFY_TOL,
                   noncontractible_asserted: bool = True) -> SystoleReport:
    """Shorten every seed to its limit and return the shortest converged
    one of length at least epsilon (shorter limits are contractible and
    excluded with a ContractibleSeed warning).

    Callers assert the seeds are non-contractible; nothing here verifies
    that topological input.  NoneConverged is raised only when no seed
    converges at all.
    """
    if not seeds:
        raise ValueError("systole_search: need at least one seed")
    outcomes = []
    limits: list[PolyCurve] = []
    warnings: list[str] = []
    for idx, seed in enumerate(seeds):
        limit, trace = shorten_to_limit(space, seed, params)
        length = trace.lengths[-1]
        contractible = trace.status == "Converged" and length < space.epsilon
        if contractible:
            warnings.append(
                f"ContractibleSeed: seed {idx} shrank to length "
                f"{length:.6g} < epsilon; excluded from the systole"
            )
        outcomes.append(SeedOutcome(length=length, status=trace.status,
                                    contractible=contractible, trace=trace))
        limits.append(limit)

    eligible = [i for i, o in enumerate(outcomes)
                if o.status == "Converged" and not o.contractible]
    if not eligible:
        if any(o.contractible for o in outcomes):
            return SystoleReport(None, None, None, outcomes, warnings,
                                 noncontractible_asserted)
        raise NoneConverged(
            "systole_search: no seed converged "
            f"(statuses: {[o.status for o in outcomes]})"
        )
    best = min(eligible, key=lambda i: outcomes[i].length)
    curve = limits[best]
    certified = certify_geodesic(space, curve, tol=certify_tol)
    return SystoleReport(curve, outcomes[best].length, certified, outcomes,
                         warnings, noncontractible_asserted)
