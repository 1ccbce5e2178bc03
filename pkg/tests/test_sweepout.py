"""Foliation families, the minimax driver, systole search, certification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geodesics import (
    Point,
    PolyCurve,
    ShorteningParams,
    birkhoff_step,
    build_family,
    certify_geodesic,
    choose_k,
    curve_length,
    foliation_circle,
    lipschitz_bound,
    minimax_run,
    prepare_for_step,
    shorten_to_limit,
    sup_displacement,
    systole_search,
)
from geodesics.errors import (
    ContinuityViolation,
    FamilyCollapsed,
    NoneConverged,
    OutsideDisk,
    WindowTooWide,
)

from helpers import sphere_circle, sphere_equator, torus_loop


def identity_map(u):
    return Point("sphere", u / np.linalg.norm(u))


# ---------------------------------------------------------------------------
# foliation_circle
# ---------------------------------------------------------------------------

def test_foliation_base_point():
    assert np.allclose(foliation_circle(2, [0.0], 0.0), [0, 0, 1], atol=0)


def test_foliation_quarter_turn():
    got = foliation_circle(2, [0.0], 0.25)
    assert np.allclose(got, [0, 1, 0], atol=1e-15)


def test_foliation_degenerate_circle():
    for t in (0.0, 0.3, 0.9):
        assert np.allclose(foliation_circle(2, [1.0], t), [1, 0, 0],
                           atol=1e-15)


def test_foliation_outside_disk():
    with pytest.raises(OutsideDisk):
        foliation_circle(2, [1.1], 0.0)


def test_foliation_higher_dimension():
    got = foliation_circle(4, [0.5, 0.1, 0.2], 0.0)
    assert got.shape == (5,)
    assert abs(np.linalg.norm(got) - 1.0) < 1e-12
    assert np.allclose(got[:3], [0.5, 0.1, 0.2])
    assert got[3] == 0.0


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-1, 1), t=st.floats(0, 1))
def test_foliation_stays_on_sphere(x, t):
    got = foliation_circle(2, [x], t)
    assert abs(np.linalg.norm(got) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# build_family
# ---------------------------------------------------------------------------

def test_identity_family_structure(sphere):
    fam = build_family(sphere, identity_map, 2, 16, 128)
    assert fam.size == 17  # lattice -1, -7/8, ..., 7/8, 1
    assert fam.degenerate.sum() == 2  # both poles of the base interval
    center = int(np.argmin(np.abs(fam.grid[:, 0])))
    assert abs(curve_length(sphere, fam.curves[center]) - 2 * np.pi) < 1e-9
    # base points move continuously across the grid
    bases = fam.base_points()
    for i, j in fam.neighbor_pairs():
        d = sphere.pair_distance(bases[i], bases[j])
        assert d <= sphere.epsilon / 2


def test_family_isometry_invariance(sphere):
    fam = build_family(sphere, identity_map, 2, 8, 64)
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta), 0],
                    [np.sin(theta), np.cos(theta), 0],
                    [0, 0, 1.0]])

    def rotated(u):
        v = rot @ (u / np.linalg.norm(u))
        return Point("sphere", v / np.linalg.norm(v))

    fam2 = build_family(sphere, rotated, 2, 8, 64)
    lens1 = sorted(curve_length(sphere, c) for c in fam.curves)
    lens2 = sorted(curve_length(sphere, c) for c in fam2.curves)
    assert np.allclose(lens1, lens2, atol=1e-9)


def test_family_continuity_violation(sphere):
    with pytest.raises(ContinuityViolation):
        build_family(sphere, identity_map, 2, 16, 6)  # m far too coarse


# ---------------------------------------------------------------------------
# minimax_run
# ---------------------------------------------------------------------------

def test_sphere_minimax_finds_great_circle(sphere):
    fam = build_family(sphere, identity_map, 2, 16, 128)
    rep = minimax_run(sphere, fam, ShorteningParams(), max_sweep_iters=50)
    assert rep.status == "Converged"
    assert abs(rep.c_seq[-1] - 2 * np.pi) <= 0.01 * 2 * np.pi
    assert rep.certified.passed
    assert rep.epsilon_check
    assert all(a >= b - 1e-12 for a, b in zip(rep.c_seq, rep.c_seq[1:]))
    # certified minimax curves are fixed points of one more step
    cand = rep.candidate
    out = birkhoff_step(sphere, cand, rep.k)
    L = curve_length(sphere, cand)
    assert sup_displacement(sphere, cand, out) < 10 * 1e-4 * L


def test_minimax_family_speed_bound_after_first_sweep(sphere):
    fam = build_family(sphere, identity_map, 2, 16, 128)
    k = max(choose_k(sphere, fam.curves[g]) for g in range(fam.size)
            if not fam.degenerate[g])
    for g in range(fam.size):
        if fam.degenerate[g]:
            continue
        work = prepare_for_step(sphere, fam.curves[g], k)
        out = birkhoff_step(sphere, work, k)
        assert lipschitz_bound(sphere, out, k) \
            <= k * sphere.epsilon / 2 + 1e-9


def test_cap_family_collapses(sphere):
    center = np.array([0.0, 0.0, 1.0])
    scale = sphere.epsilon / (4.0 * np.pi)

    def cap(u):
        v = sphere.interpolate(center, u / np.linalg.norm(u),
                               np.array([scale]))[0]
        return Point("sphere", v)

    fam = build_family(sphere, cap, 2, 8, 64)
    with pytest.raises(FamilyCollapsed) as info:
        minimax_run(sphere, fam, ShorteningParams(), max_sweep_iters=10)
    assert info.value.iteration == 0


def test_argmax_tie_breaks_to_lowest_index(sphere):
    from geodesics.sweepout import SweepFamily
    eq = sphere_equator(64)
    fam = SweepFamily(n=2, grid_res=2,
                      grid=np.array([[-1.0], [0.0], [1.0]]),
                      lattice=np.array([[0], [1], [2]]),
                      curves=[eq, eq, eq],
                      degenerate=np.zeros(3, dtype=bool))
    rep = minimax_run(sphere, fam, ShorteningParams(), max_sweep_iters=5)
    assert rep.argmax_index == 0


# ---------------------------------------------------------------------------
# systole_search
# ---------------------------------------------------------------------------

def test_torus_systole_two_classes(torus):
    seeds = [torus_loop(64, 1, 0, amp=0.1), torus_loop(64, 1, 1)]
    rep = systole_search(torus, seeds)
    assert abs(rep.seeds[0].length - 1.0) < 1e-6
    assert abs(rep.seeds[1].length - np.sqrt(2)) < 1e-6
    assert abs(rep.length - 1.0) < 1e-6
    assert rep.certified.passed
    assert not rep.warnings


def test_systole_geodesic_seed_returned_unchanged(torus):
    m = 72  # multiple of 2k for the chosen k, so no resampling happens
    seed = torus_loop(m, 1, 0, base=(0.0, 0.3))
    rep = systole_search(torus, [seed])
    assert abs(rep.length - 1.0) < 1e-9
    assert rep.curve.m == m
    assert np.max(np.abs(rep.curve.coords[:, 1] - 0.3)) < 1e-9


def test_contractible_only_seed_warns_without_error(torus):
    t = np.arange(48) / 48
    small = PolyCurve("torus", np.mod(np.stack([
        0.5 + 0.02 * np.cos(2 * np.pi * t),
        0.5 + 0.02 * np.sin(2 * np.pi * t)], axis=1), 1.0), True)
    rep = systole_search(torus, [small])
    assert rep.curve is None
    assert rep.length is None
    assert any("ContractibleSeed" in w for w in rep.warnings)


def test_none_converged(torus):
    params = ShorteningParams(max_iter=1, tol_length=1e-16, tol_move=1e-16)
    with pytest.raises(NoneConverged):
        systole_search(torus, [torus_loop(64, 1, 0, amp=0.1)], params)


# ---------------------------------------------------------------------------
# certify_geodesic
# ---------------------------------------------------------------------------

def test_certify_equator(sphere):
    res = certify_geodesic(sphere, sphere_equator(256))
    assert res.passed
    assert res.max_defect < 1e-9


def test_certify_rejects_latitude(sphere):
    res = certify_geodesic(sphere, sphere_circle(256, colat=np.pi / 4))
    assert not res.passed
    assert res.max_defect > 1e-3  # bounded away from zero


def test_certify_torus_circle(torus):
    res = certify_geodesic(torus, torus_loop(64, 1, 0, base=(0.0, 0.25)))
    assert res.passed
    assert res.max_defect < 1e-12


def test_certify_window_too_wide(sphere):
    with pytest.raises(WindowTooWide):
        certify_geodesic(sphere, sphere_equator(256), window=0.5)


def test_certified_limit_is_step_fixed(torus):
    lim, tr = shorten_to_limit(torus, torus_loop(64, 1, 0, amp=0.1))
    res = certify_geodesic(torus, lim)
    assert res.passed
    out = birkhoff_step(torus, lim, tr.k)
    L = curve_length(torus, lim)
    assert sup_displacement(torus, lim, out) < 10 * 1e-4 * L


# ---------------------------------------------------------------------------
# coverage of the sphere by the sampled family
# ---------------------------------------------------------------------------

def test_family_samples_cover_the_sphere(sphere, rng):
    fam = build_family(sphere, identity_map, 2, 16, 128)
    samples = np.concatenate([c.coords for c in fam.curves])
    # the family's own mesh size: largest adjacent sample spacing
    spacing = 0.0
    for c in fam.curves:
        spacing = max(spacing, float(np.max(sphere.gap_lengths(c))))
    bases = fam.base_points()
    for i, j in fam.neighbor_pairs():
        spacing = max(spacing, sphere.pair_distance(bases[i], bases[j]))
    u = rng.normal(size=(10_000, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    dots = np.clip(u @ samples.T, -1.0, 1.0)
    nearest = np.arccos(np.max(dots, axis=1))
    assert float(np.max(nearest)) <= spacing
