"""
supervision 패키지 테스트 (복셀 분류, 라벨 피라미드, VLBL 파서)
"""

import numpy as np
import pytest

from sayou.voxmae.errors import ConfigurationError, FormatError
from sayou.voxmae.geometry import EPSILON, GridConfig, point_segment_distances, voxel_centers
from sayou.voxmae.lidar import Box, LidarFrame, Scene, SensorModel, random_scene, simulate, solid_voxels, to_points
from sayou.voxmae.lidar import uniform_inclinations
from sayou.voxmae.supervision import (
    Categorizer,
    LabelMap,
    LabelParser,
    LabelPyramid,
    VoxelCategory,
    build_pyramid,
    categorize,
    coarsen,
    distance_weight,
    lookup,
)

UNKNOWN, EMPTY, OCCUPIED = VoxelCategory.UNKNOWN, VoxelCategory.EMPTY, VoxelCategory.OCCUPIED


def single_beam_frame(origin, point) -> LidarFrame:
    return LidarFrame(
        points=np.asarray([point], dtype=np.float64),
        sensor_ids=np.zeros(1, dtype=np.int64),
        sensor_origins={0: np.asarray(origin, dtype=np.float64)},
    )


def all_voxels(grid: GridConfig) -> np.ndarray:
    axes = [np.arange(e) for e in grid.extent]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)


def brute_force_labels(frame: LidarFrame, grid: GridConfig) -> dict[tuple, tuple[int, float]]:
    """모든 복셀 × 모든 빔의 AABB 교차 검사로 만든 (category, weight)"""
    voxels = all_voxels(grid)
    lower = voxels.astype(np.float64)
    centers = voxel_centers(voxels, grid)
    min_dist = np.full(voxels.shape[0], np.inf)

    for point, sensor_id in zip(frame.points, frame.sensor_ids):
        origin = frame.sensor_origins[int(sensor_id)]
        a = (origin - grid.origin_array) / grid.voxel_size_array
        d = (point - grid.origin_array) / grid.voxel_size_array - a
        t_enter = np.zeros(voxels.shape[0])
        t_exit = np.ones(voxels.shape[0])
        for axis in range(3):
            if d[axis] == 0.0:
                inside = (lower[:, axis] <= a[axis]) & (a[axis] < lower[:, axis] + 1.0)
                t_exit = np.where(inside, t_exit, -np.inf)
                continue
            ta = (lower[:, axis] - a[axis]) / d[axis]
            tb = (lower[:, axis] + 1.0 - a[axis]) / d[axis]
            t_enter = np.maximum(t_enter, np.minimum(ta, tb))
            t_exit = np.minimum(t_exit, np.maximum(ta, tb))
        crossed = (t_exit - t_enter) > EPSILON
        dist = point_segment_distances(centers[crossed], origin[None, :], point[None, :])
        min_dist[crossed] = np.minimum(min_dist[crossed], dist)

    occupied = set()
    unit = np.floor((frame.points - grid.origin_array) / grid.voxel_size_array).astype(np.int64)
    for row in unit:
        if np.all((row >= 0) & (row < np.asarray(grid.extent))):
            occupied.add(tuple(int(v) for v in row))

    labels = {}
    for voxel, dist in zip(voxels, min_dist):
        key = tuple(int(v) for v in voxel)
        if key in occupied:
            labels[key] = (OCCUPIED, 1.0)
        elif np.isfinite(dist):
            labels[key] = (EMPTY, float(np.clip(1.0 - 2.0 * dist / grid.diagonal(), 0.0, 1.0)))
    return labels


def beam_sensor(translation) -> SensorModel:
    """8 × 24 = 192 빔"""
    return SensorModel(
        translation=np.asarray(translation, dtype=np.float64),
        inclinations=uniform_inclinations(8, 0.0, -50.0),
        n_cols=24,
        azimuth_step=2.0 * np.pi / 24,
        max_range=3.0,
    )


class TestCategorize:

    def test_single_axis_aligned_beam(self, unit_grid):
        label_map = categorize(single_beam_frame((0.0, 0.5, 0.5), (3.0, 0.5, 0.5)), unit_grid)
        np.testing.assert_array_equal(label_map.coords_of(EMPTY), [[0, 0, 0], [1, 0, 0], [2, 0, 0]])
        np.testing.assert_array_equal(label_map.coords_of(OCCUPIED), [[3, 0, 0]])
        assert label_map.count(UNKNOWN) == 16 ** 3 - 4

    def test_beam_through_center_has_full_weight(self, unit_grid):
        label_map = categorize(single_beam_frame((0.0, 0.5, 0.5), (3.0, 0.5, 0.5)), unit_grid)
        np.testing.assert_allclose(label_map.weight, 1.0)

    def test_empty_frame_is_all_unknown(self, unit_grid):
        label_map = categorize(LidarFrame(), unit_grid)
        assert len(label_map) == 0
        assert label_map.count(UNKNOWN) == 16 ** 3

    def test_occupied_wins_over_empty(self, unit_grid):
        frame = single_beam_frame((0.0, 0.5, 0.5), (3.0, 0.5, 0.5)).merge(
            LidarFrame(np.array([[1.5, 0.5, 0.5]]), np.zeros(1, dtype=np.int64), {0: np.array([0.0, 0.5, 0.5])})
        )
        label_map = categorize(frame, unit_grid)
        assert label_map.label_at((1, 0, 0)).category == OCCUPIED

    def test_misses_only_clear_space(self, unit_grid):
        frame = LidarFrame(
            sensor_origins={0: np.array([0.0, 0.5, 0.5])},
            miss_points=np.array([[4.0, 0.5, 0.5]]),
            miss_sensor_ids=np.zeros(1, dtype=np.int64),
        )
        label_map = categorize(frame, unit_grid, include_misses=True)
        assert label_map.count(OCCUPIED) == 0
        assert label_map.count(EMPTY) == 4
        assert len(categorize(frame, unit_grid, include_misses=False)) == 0

    def test_matches_brute_force(self, small_grid):
        rng = np.random.default_rng(21)
        for _ in range(50):
            origin = rng.uniform([-0.6, -0.6, 0.3], [-0.2, 0.6, 1.2])
            sensor = beam_sensor(origin)
            scene = random_scene(rng, small_grid, origin, n_boxes=(1, 3), size_range=(0.2, 0.5))
            frame = to_points(simulate(scene, sensor))

            label_map = categorize(frame, small_grid)
            expected = brute_force_labels(frame, small_grid)

            got = {tuple(int(v) for v in c): (int(k), float(w))
                   for c, k, w in zip(label_map.coords, label_map.category, label_map.weight)}
            assert set(got) == set(expected)
            for key, (category, weight) in expected.items():
                assert got[key][0] == category
                assert got[key][1] == pytest.approx(weight, abs=1e-6)

            # 박스 내부와 겹치는 복셀은 Empty가 아님
            solid = small_grid.keys(solid_voxels(scene, small_grid))
            assert not np.isin(label_map.keys_of(EMPTY), solid).any()

    def test_occluder_never_reveals_unknown(self, box_scene, small_sensor, small_grid):
        occluded = Scene(
            boxes=[*box_scene.boxes, Box(center=(-0.35, -0.25, 0.2), size=(0.2, 0.2, 0.4))],
            ground_z=box_scene.ground_z,
        )
        before = categorize(to_points(simulate(box_scene, small_sensor)), small_grid)
        after = categorize(to_points(simulate(occluded, small_sensor)), small_grid)
        # after에서 알려진 복셀은 before에서도 알려져 있어야 함
        assert np.isin(after.keys, before.keys).all()
        assert len(after) < len(before)

    def test_second_sensor_only_reduces_unknown(self, box_scene, small_sensor, small_grid):
        second = SensorModel.from_dict({**small_sensor.to_dict(), "translation": [-0.5, 0.5, 0.9], "sensor_id": 1})
        first_frame = to_points(simulate(box_scene, small_sensor))
        merged_frame = first_frame.merge(to_points(simulate(box_scene, second)))

        single = categorize(first_frame, small_grid)
        merged = categorize(merged_frame, small_grid)
        assert np.isin(single.keys, merged.keys).all()
        assert len(merged) > len(single)

    def test_weight_properties(self, box_frame, small_grid):
        label_map = categorize(box_frame, small_grid)
        assert np.all((label_map.weight >= 0.0) & (label_map.weight <= 1.0))
        assert np.all(label_map.weight[label_map.category == OCCUPIED] == 1.0)
        category, weight, _ = label_map.lookup_arrays(np.array([[15, 15, 15]]))
        if category[0] == UNKNOWN:
            assert weight[0] == 0.0

    def test_distance_weight_endpoints(self):
        diagonal = 0.3
        assert distance_weight(0.0, diagonal) == 1.0
        assert distance_weight(diagonal / 2.0, diagonal) == 0.0
        assert distance_weight(diagonal, diagonal) == 0.0


def random_base(rng: np.random.Generator, grid: GridConfig) -> LabelMap:
    voxels = all_voxels(grid)
    category = rng.integers(0, 3, size=voxels.shape[0])
    known = category != UNKNOWN
    min_dist = np.where(category == EMPTY, rng.uniform(0.0, 1.0, size=voxels.shape[0]), 0.0)
    keys = grid.keys(voxels[known])
    return LabelMap(
        grid=grid,
        keys=keys,
        category=category[known],
        weight=np.where(category[known] == OCCUPIED, 1.0, distance_weight(min_dist[known], grid.diagonal())),
        min_dist=min_dist[known],
    )


class TestPyramid:

    def test_all_empty_children(self):
        grid = GridConfig(voxel_size=(1.0, 1.0, 1.0), extent=(2, 2, 2))
        keys = grid.keys(all_voxels(grid))
        base = LabelMap(grid=grid, keys=keys, category=np.full(8, EMPTY), weight=np.ones(8), min_dist=np.zeros(8))
        parent = coarsen(base, (2, 2, 2))
        assert parent.label_at((0, 0, 0)).category == EMPTY
        assert parent.label_at((0, 0, 0)).weight == 1.0

    def test_one_occupied_child(self):
        grid = GridConfig(voxel_size=(1.0, 1.0, 1.0), extent=(2, 2, 2))
        keys = grid.keys(all_voxels(grid))
        category = np.full(8, EMPTY)
        category[5] = OCCUPIED
        base = LabelMap(grid=grid, keys=keys, category=category, weight=np.ones(8), min_dist=np.zeros(8))
        assert coarsen(base, (2, 2, 2)).label_at((0, 0, 0)).category == OCCUPIED

    def test_matches_rule_oracle(self):
        grid = GridConfig(voxel_size=(0.5, 0.5, 1.0), extent=(9, 8, 7))
        coarse = (2, 2, 2)
        rng = np.random.default_rng(4)
        n_checked = 0
        while n_checked < 10_000:
            base = random_base(rng, grid)
            parent = coarsen(base, coarse)

            children_of: dict[tuple, list] = {}
            category, _, min_dist = base.lookup_arrays(all_voxels(grid))
            for voxel, k, d in zip(all_voxels(grid), category, min_dist):
                children_of.setdefault(tuple(int(v) for v in voxel // 2), []).append((k, d))

            for key, children in children_of.items():
                label = parent.label_at(key)
                kinds = [k for k, _ in children]
                if OCCUPIED in kinds:
                    assert label.category == OCCUPIED
                elif UNKNOWN in kinds:
                    assert label.category == UNKNOWN
                    assert label.weight == 0.0
                else:
                    assert label.category == EMPTY
                    expected = max(0.0, 1.0 - 2.0 * min(d for _, d in children) / grid.diagonal(coarse))
                    assert label.weight == pytest.approx(expected, abs=1e-12)
                n_checked += 1

    def test_build_pyramid_strides(self, box_frame, small_grid):
        base = categorize(box_frame, small_grid)
        pyramid = build_pyramid(base, small_grid, [(1, 1, 1), (4, 4, 4), (2, 2, 2)])
        assert pyramid.strides == [(1, 1, 1), (2, 2, 2), (4, 4, 4)]
        for fine, coarse in [((1, 1, 1), (2, 2, 2)), ((2, 2, 2), (4, 4, 4))]:
            occupied = np.unique(small_grid.keys(pyramid[fine].coords_of(OCCUPIED) // 2, coarse))
            np.testing.assert_array_equal(pyramid[coarse].keys_of(OCCUPIED), occupied)

    def test_bad_stride_ratio(self, small_grid):
        base = LabelMap.empty(small_grid)
        with pytest.raises(ConfigurationError):
            build_pyramid(base, small_grid, [(2, 2, 2), (1, 4, 4), (2, 2, 8)])

    def test_lookup(self, box_frame, small_grid):
        pyramid = Categorizer(small_grid, strides=[(1, 1, 1), (2, 2, 2)]).pyramid(box_frame)
        occupied = pyramid[(1, 1, 1)].coords_of(OCCUPIED)
        labels = lookup(pyramid, (1, 1, 1), occupied[:3])
        assert all(label.category == OCCUPIED and label.weight == 1.0 for label in labels)

        queried = np.concatenate([occupied[:2], [[15, 15, 15]]])
        batch = lookup(pyramid, (1, 1, 1), queried)
        single = [lookup(pyramid, (1, 1, 1), row[None, :])[0] for row in queried]
        assert batch == single

        with pytest.raises(ConfigurationError):
            lookup(pyramid, (8, 8, 8), occupied[:1])

    def test_lookup_empty_pyramid(self, small_grid):
        pyramid = build_pyramid(LabelMap.empty(small_grid), small_grid, [(1, 1, 1), (2, 2, 2)])
        label = lookup(pyramid, (2, 2, 2), np.array([[0, 0, 0]]))[0]
        assert label.category == UNKNOWN
        assert label.weight == 0.0


class TestLabelParser:

    def test_file_round_trip(self, tmp_path, box_frame, small_grid):
        pyramid = Categorizer(small_grid, strides=[(1, 1, 1), (2, 2, 2)]).pyramid(box_frame)
        parser = LabelParser()
        restored = parser.parse(parser.save(pyramid, tmp_path / "frame.vlbl"), small_grid)
        assert restored.strides == pyramid.strides
        for stride in pyramid.strides:
            np.testing.assert_array_equal(restored[stride].keys, pyramid[stride].keys)
            np.testing.assert_array_equal(restored[stride].category, pyramid[stride].category)
            np.testing.assert_allclose(restored[stride].weight, pyramid[stride].weight, atol=1e-6)

    def test_corrupt_file(self, tmp_path, small_grid):
        path = tmp_path / "broken.vlbl"
        path.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(FormatError) as info:
            LabelParser().parse(path, small_grid)
        assert info.value.field == "magic"
        assert LabelParser().parse_or_none(path, small_grid) is None

    def test_pyramid_type(self, small_grid):
        pyramid = LabelParser().from_bytes(LabelParser().to_bytes(LabelPyramid(small_grid)), small_grid)
        assert pyramid.strides == []
