"""Projection, attractor sampling, box counting, geometric checks."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from subaffine import geometry as G
from subaffine.errors import (
    NonContractive,
    ScaleTooFine,
    TooFewPoints,
    ValidationError,
)
from subaffine.symbolic import SubshiftSpec, compile_subshift, full_shift

from conftest import random_contractive

CANTOR_DIM = math.log(2) / math.log(3)


@pytest.fixture(scope="module")
def cantor_ifs():
    return G.AffineIFS([[[1 / 3]], [[1 / 3]]], [[0.0], [2 / 3]])


@pytest.fixture(scope="module")
def square_ifs():
    return G.AffineIFS([0.5 * np.eye(2)] * 4,
                       [[0, 0], [0.5, 0], [0, 0.5], [0.5, 0.5]])


@pytest.fixture(scope="module")
def not_unique_ifs():
    return G.AffineIFS([np.diag([0.5, 0.25]), np.diag([0.25, 0.5])],
                       [[0.0, 0.0], [0.75, 0.5]])


@pytest.fixture(scope="module")
def tractable_ifs(tractable_system):
    mats, trs = tractable_system
    return G.AffineIFS(mats, trs)


def test_ifs_validation():
    with pytest.raises(NonContractive):
        G.AffineIFS([np.diag([1.1, 0.5])], [[0.0, 0.0]])
    with pytest.raises(ValidationError):
        G.AffineIFS([0.5 * np.eye(2)], [[0.0]])


def test_r0_bounds_attractor(not_unique_ifs):
    # both fixed points lie inside the a-priori ball
    assert np.linalg.norm([1.0, 1.0]) <= not_unique_ifs.r0 + 1e-12


def test_project_fixed_points(not_unique_ifs):
    assert_allclose(G.project((0,) * 40, not_unique_ifs), [0.0, 0.0],
                    atol=1e-12)
    assert_allclose(G.project((1,) * 60, not_unique_ifs), [1.0, 1.0],
                    atol=1e-12)


def test_project_tail_distance_bound(not_unique_ifs):
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        w = tuple(rng.integers(0, 2, n))
        tail = tuple(rng.integers(0, 2, 6))
        gap = np.linalg.norm(G.project(w, not_unique_ifs)
                             - G.project(w + tail, not_unique_ifs))
        assert gap <= 0.5 ** n * not_unique_ifs.r0 + 1e-12


def test_tractable_maps_preserve_line(tractable_ifs):
    for x in (-0.4, 0.2, 0.9):
        pt = np.array([x, 1.0 - x])
        for i in (0, 1):
            img = tractable_ifs.apply(i, pt)
            assert img.sum() == pytest.approx(1.0, abs=1e-12)


def test_cylinder_nesting(not_unique_ifs):
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(1, 12))
        w = tuple(rng.integers(0, 2, n))
        child = w + (int(rng.integers(0, 2)),)
        ci_w = G.cylinder_image(w, not_unique_ifs)
        ci_c = G.cylinder_image(child, not_unique_ifs)
        gap = np.linalg.norm(ci_c.anchor - ci_w.anchor)
        assert gap + ci_c.radius <= 2 * ci_w.radius + ci_w.radius + 1e-12
        assert ci_c.radius <= ci_w.radius + 1e-15


def test_cylinder_radius_decay(not_unique_ifs):
    for n in (1, 5, 10):
        ci = G.cylinder_image((0, 1) * n, not_unique_ifs)
        bound = not_unique_ifs.alpha_bar ** (2 * n) * not_unique_ifs.r0
        assert ci.radius <= bound + 1e-15


def test_attractor_sample_counts(cantor_ifs, not_unique_ifs):
    shift = full_shift(2)
    cloud = G.attractor_sample(10, cantor_ifs, shift)
    assert cloud.size == 1024
    two = compile_subshift(SubshiftSpec(2, ((0, 1), (1, 0))))
    cloud2 = G.attractor_sample(12, not_unique_ifs, two)
    assert cloud2.size == 2
    assert_allclose(cloud2.points[0], [0, 0], atol=1e-12)
    assert_allclose(cloud2.points[1], [1, 1], atol=1e-3)


def test_attractor_sample_depth_one_is_translations(not_unique_ifs):
    cloud = G.attractor_sample(1, not_unique_ifs, full_shift(2))
    assert_allclose(cloud.points,
                    np.stack(not_unique_ifs.translations), atol=1e-15)


def test_cantor_middle_third_gaps(cantor_ifs):
    cloud = G.attractor_sample(6, cantor_ifs, full_shift(2))
    xs = np.sort(cloud.points[:, 0])
    # the central gap of length 1/3 survives at every depth
    assert np.all((xs <= 1 / 3 + 1e-12) | (xs >= 2 / 3 - 1e-12))


def test_box_count_cantor(cantor_ifs):
    cloud = G.attractor_sample(10, cantor_ifs, full_shift(2))
    rep = G.box_count(cloud)
    assert rep.slope == pytest.approx(CANTOR_DIM, abs=0.05)
    assert np.all(np.diff(rep.counts) >= 0)  # finer scale, more cells
    assert 0.0 <= rep.slope <= 1.0
    assert rep.r_squared > 0.99


def test_box_count_square(square_ifs):
    cloud = G.attractor_sample(7, square_ifs, full_shift(4))
    rep = G.box_count(cloud)
    assert rep.slope == pytest.approx(2.0, abs=0.1)


def test_box_count_rigid_motion_invariance():
    # needs many octaves: with few scales, grid-alignment wobble and
    # coarse-scale boundary cells dominate the fit
    ifs = G.AffineIFS([[[0.25]], [[0.25]]], [[0.0], [0.75]])
    cloud = G.attractor_sample(12, ifs, full_shift(2))
    pts = np.hstack([cloud.points, np.zeros_like(cloud.points)])
    embedded = G.PointCloud(pts, cloud.resolution, cloud.depth)
    scales = 2.0 ** -np.arange(2, 22).astype(float)
    base = G.box_count(embedded, scales=scales)
    for ang in (0.3, 0.61, 1.0, 1.9):
        rot = np.array([[math.cos(ang), -math.sin(ang)],
                        [math.sin(ang), math.cos(ang)]])
        moved = G.PointCloud(pts @ rot.T + np.array([2.2, -0.7]),
                             cloud.resolution, cloud.depth)
        rep = G.box_count(moved, scales=scales)
        assert rep.slope == pytest.approx(base.slope, abs=0.02)


def test_box_count_scale_too_fine(cantor_ifs):
    cloud = G.attractor_sample(6, cantor_ifs, full_shift(2))
    with pytest.raises(ScaleTooFine):
        G.box_count(cloud, scales=[0.5, cloud.resolution])


def test_hyperplane_checks(tractable_ifs, not_unique_ifs):
    line_cloud = G.attractor_sample(12, tractable_ifs, full_shift(2))
    rep = G.hyperplane_check(line_cloud)
    assert rep.contained and rep.rank == 1
    full_cloud = G.attractor_sample(10, not_unique_ifs, full_shift(2))
    rep2 = G.hyperplane_check(full_cloud)
    assert not rep2.contained and rep2.rank == 2
    single = G.hyperplane_check(np.array([[0.3, 0.4]]))
    assert single.rank == 0 and single.contained
    with pytest.raises(TooFewPoints):
        G.hyperplane_check(np.zeros((0, 2)))


def test_inclusion_self_affine(not_unique_ifs):
    cloud = G.attractor_sample(10, not_unique_ifs, full_shift(2))
    rep = G.inclusion_check(cloud, not_unique_ifs)
    assert rep.ok
    assert rep.defect <= 2 * cloud.resolution + 1e-12


def test_inclusion_two_point_set(not_unique_ifs):
    two = compile_subshift(SubshiftSpec(2, ((0, 1), (1, 0))))
    cloud = G.attractor_sample(14, not_unique_ifs, two)
    rep = G.inclusion_check(cloud, not_unique_ifs)
    assert rep.defect <= 1e-3


def test_inclusion_flags_corrupted_cloud(not_unique_ifs):
    cloud = G.attractor_sample(8, not_unique_ifs, full_shift(2))
    pts = cloud.points.copy()
    pts[0] = pts[0] + np.array([1.0, 0.0])
    bad = G.PointCloud(pts, cloud.resolution, cloud.depth)
    rep = G.inclusion_check(bad, not_unique_ifs)
    assert not rep.ok
    # the outlier's own images are candidates, so the defect is the
    # (1 - alpha_bar) fraction of the displacement, not the full unit
    assert 0.35 <= rep.defect <= 1.0


def test_random_translation_slopes_cluster():
    rng = np.random.default_rng(20260810)
    mats = [np.diag([0.5, 0.25]), np.diag([0.25, 0.5])]
    shift = full_shift(2)
    slopes = []
    for _ in range(3):
        ifs = G.AffineIFS(mats, list(rng.uniform(0.1, 0.9, size=(2, 2))))
        rep = G.box_count(G.attractor_sample(14, ifs, shift))
        slopes.append(rep.slope)
    assert max(slopes) - min(slopes) < 0.15


def test_default_scales_window(cantor_ifs):
    cloud = G.attractor_sample(8, cantor_ifs, full_shift(2))
    scales = G.default_scales(cloud)
    assert np.all(scales >= 4 * cloud.resolution)
    assert np.all(scales <= 1.0)
    assert np.all(np.diff(scales) < 0)
