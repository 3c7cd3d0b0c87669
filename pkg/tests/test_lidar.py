"""
lidar 패키지 테스트 (시뮬레이터, spherical masking, 파서)
"""

import math

import numpy as np
import pytest
from scipy import stats

from sayou.voxmae.errors import ConfigurationError, FormatError
from sayou.voxmae.geometry import GridConfig
from sayou.voxmae.lidar import (
    NO_RETURN,
    Box,
    HorizontalPlane,
    LidarFrame,
    LidarSimulator,
    RangeImage,
    RangeImageParser,
    Scene,
    SceneParser,
    SensorModel,
    SensorParser,
    expected_keep_fraction,
    intersect_box,
    intersect_plane,
    project_ranges,
    random_scene,
    sample_mask_params,
    simulate,
    solid_voxels,
    spherical_mask,
    to_points,
)


def forward_sensor(max_range: float = 10.0) -> SensorModel:
    """+x 방향 빔 하나"""
    return SensorModel(
        translation=np.array([0.0, 0.0, 1.0]),
        inclinations=np.array([0.0]),
        azimuth_start=0.0,
        azimuth_step=0.1,
        n_cols=1,
        max_range=max_range,
    )


def dense_image(rows: int, cols: int) -> RangeImage:
    sensor = SensorModel(
        inclinations=np.linspace(0.1, -0.5, rows),
        n_cols=cols,
        azimuth_step=2.0 * math.pi / cols,
    )
    return RangeImage(sensor, np.full((rows, cols), 2.0))


class TestSimulate:

    def test_empty_scene_without_ground(self):
        sensor = SensorModel()
        image = simulate(Scene(ground_z=None), sensor)
        assert image.is_empty
        assert np.all(image.ranges == NO_RETURN)

    def test_box_face_distance(self):
        scene = Scene(boxes=[Box(center=(5.5, 0.0, 1.0), size=(1.0, 2.0, 2.0))], ground_z=None)
        image = simulate(scene, forward_sensor())
        assert image.ranges[0, 0] == pytest.approx(5.0, abs=1e-6)

    def test_beyond_max_range_is_sentinel(self):
        scene = Scene(boxes=[Box(center=(5.5, 0.0, 1.0), size=(1.0, 2.0, 2.0))], ground_z=None)
        image = simulate(scene, forward_sensor(max_range=4.0))
        assert image.ranges[0, 0] == NO_RETURN

    def test_sensor_below_ground(self):
        sensor = SensorModel(translation=np.array([0.0, 0.0, -0.5]))
        with pytest.raises(ConfigurationError):
            simulate(Scene(ground_z=0.0), sensor)

    def test_matches_per_primitive_minimum(self):
        grid = GridConfig()
        sensor = SensorModel(translation=np.array([0.2, 1.6, 1.0]))
        scene = random_scene(np.random.default_rng(11), grid, sensor.translation, n_boxes=(5, 5))
        image = simulate(scene, sensor)

        directions = sensor.directions()
        candidates = [intersect_box(sensor.translation, directions, box) for box in scene.boxes]
        candidates.append(intersect_plane(sensor.translation, directions, HorizontalPlane(scene.ground_z)))
        expected = np.min(np.stack(candidates), axis=0)
        valid = image.valid_mask
        assert valid.any()
        np.testing.assert_allclose(image.ranges[valid], expected[valid], atol=1e-6)
        assert np.all(expected[~valid] > sensor.max_range)

    def test_noise_is_deterministic_per_seed(self, box_scene, small_sensor):
        noisy = SensorModel.from_dict({**small_sensor.to_dict(), "range_noise": 0.01})
        a = simulate(box_scene, noisy, seed=5)
        b = simulate(box_scene, noisy, seed=5)
        c = simulate(box_scene, noisy, seed=6)
        np.testing.assert_array_equal(a.ranges, b.ranges)
        assert not np.array_equal(a.ranges, c.ranges)


class TestToPoints:

    def test_all_sentinel_is_empty(self):
        sensor = SensorModel()
        assert to_points(RangeImage.empty(sensor)).is_empty

    def test_single_forward_pixel(self):
        sensor = forward_sensor()
        sensor.translation = np.zeros(3)
        frame = to_points(RangeImage(sensor, np.array([[2.5]])))
        np.testing.assert_allclose(frame.points, [[2.5, 0.0, 0.0]], atol=1e-12)
        np.testing.assert_array_equal(frame.sensor_origins[0], [0.0, 0.0, 0.0])

    def test_reprojection(self, box_scene, small_sensor):
        image = simulate(box_scene, small_sensor)
        frame = to_points(image)
        assert frame.n_points == image.n_returns
        np.testing.assert_allclose(project_ranges(frame, small_sensor), image.ranges[image.valid_mask], atol=1e-6)

    def test_misses_at_max_range(self):
        frame = to_points(RangeImage.empty(forward_sensor(max_range=3.0)), include_misses=True)
        assert frame.n_points == 0
        np.testing.assert_allclose(frame.miss_points, [[3.0, 0.0, 1.0]])

    def test_simulator_frames(self, box_scene, small_sensor):
        simulator = LidarSimulator(box_scene, small_sensor)
        images = list(simulator.images(3, seed=1))
        assert len(images) == 3
        assert simulator.frame().n_points == images[0].n_returns


class TestLidarFrame:

    def test_merge_keeps_sensor_ids(self):
        a = LidarFrame(np.ones((2, 3)), np.zeros(2, dtype=np.int64), {0: np.zeros(3)})
        b = LidarFrame(np.ones((1, 3)), np.ones(1, dtype=np.int64), {1: np.array([1.0, 0.0, 0.0])})
        merged = a.merge(b)
        assert merged.n_points == 3
        assert sorted(merged.sensor_origins) == [0, 1]

    def test_missing_origin(self):
        with pytest.raises(ConfigurationError):
            LidarFrame(np.ones((1, 3)), np.array([3]), {0: np.zeros(3)})


class TestSphericalMask:

    def test_identity(self):
        image = dense_image(8, 8)
        np.testing.assert_array_equal(spherical_mask(image, 1, 1).ranges, image.ranges)

    def test_every_second_row_and_column(self):
        masked = spherical_mask(dense_image(8, 8), 2, 2)
        assert masked.n_returns == 16
        rows, cols = np.nonzero(masked.valid_mask)
        assert np.all(rows % 2 == 0) and np.all(cols % 2 == 0)
        assert np.all(masked.ranges[masked.valid_mask] == 2.0)

    def test_out_of_range_parameter(self):
        with pytest.raises(ConfigurationError):
            spherical_mask(dense_image(8, 8), 5, 1)

    def test_expected_fraction(self):
        image = dense_image(24, 48)
        rng = np.random.default_rng(0)
        fractions = []
        for _ in range(10_000):
            m_r, m_c = sample_mask_params(rng)
            fractions.append(spherical_mask(image, m_r, m_c).n_returns / image.ranges.size)
        assert expected_keep_fraction() == pytest.approx(0.2713, abs=1e-4)
        assert np.mean(fractions) == pytest.approx(0.2713, abs=0.01)

    def test_sample_params_reproducible(self):
        first = sample_mask_params(np.random.default_rng(42))
        second = sample_mask_params(np.random.default_rng(42))
        assert first == second
        assert all(1 <= m <= 4 for m in first)

    def test_mask_is_idempotent_and_only_removes(self, box_scene, small_sensor):
        image = simulate(box_scene, small_sensor)
        rng = np.random.default_rng(8)
        for _ in range(20):
            m_r, m_c = sample_mask_params(rng)
            masked = spherical_mask(image, m_r, m_c)
            np.testing.assert_array_equal(spherical_mask(masked, m_r, m_c).ranges, masked.ranges)
            assert not np.any(masked.valid_mask & ~image.valid_mask)
            np.testing.assert_array_equal(masked.ranges[masked.valid_mask], image.ranges[masked.valid_mask])

    def test_sample_params_uncorrelated(self):
        rng = np.random.default_rng(1)
        draws = np.array([sample_mask_params(rng) for _ in range(50_000)])
        assert abs(np.corrcoef(draws[:, 0], draws[:, 1])[0, 1]) < 0.02

    def test_sample_params_uniform(self):
        rng = np.random.default_rng(0)
        draws = np.array([sample_mask_params(rng) for _ in range(4000)])
        for column in draws.T:
            counts = np.bincount(column, minlength=5)[1:]
            assert stats.chisquare(counts).pvalue > 1e-3


class TestScenes:

    def test_random_scene_snapped(self):
        grid = GridConfig()
        scene = random_scene(np.random.default_rng(2), grid, (0.2, 1.6, 1.0))
        assert 2 <= len(scene.boxes) <= 5
        for box in scene.boxes:
            lower = (np.asarray(box.center) - box.half_size - grid.origin_array) / grid.voxel_size_array
            np.testing.assert_allclose(lower, np.round(lower), atol=1e-6)
            assert box.center[2] - box.half_size[2] == pytest.approx(0.0)

    def test_voxel_resting_on_snapped_box_is_not_solid(self):
        grid = GridConfig()
        # 0.1 * 3.5 == 0.35000000000000003
        scene = Scene(boxes=[Box(center=(1.0, 1.0, 0.1 * 3.5), size=(0.5, 0.5, 0.7))])
        coords = solid_voxels(scene, grid)
        assert coords[:, 2].max() == 6
        assert coords.shape[0] == 10 * 10 * 7

    def test_solid_voxels_of_aligned_box(self):
        grid = GridConfig(voxel_size=(1.0, 1.0, 1.0), extent=(8, 8, 8))
        scene = Scene(boxes=[Box(center=(3.0, 3.0, 1.0), size=(2.0, 2.0, 2.0))])
        coords = solid_voxels(scene, grid)
        expected = np.array([[x, y, z] for x in (2, 3) for y in (2, 3) for z in (0, 1)])
        np.testing.assert_array_equal(coords, expected)


class TestParsers:

    def test_range_image_file(self, tmp_path, box_scene, small_sensor):
        parser = RangeImageParser()
        image = simulate(box_scene, small_sensor)
        path = parser.save(image, tmp_path / "frame.vrim")
        restored = parser.parse(path)
        np.testing.assert_array_equal(restored.ranges, image.ranges)
        np.testing.assert_array_equal(restored.sensor.inclinations, image.sensor.inclinations)
        np.testing.assert_array_equal(restored.sensor.rotation, image.sensor.rotation)
        np.testing.assert_array_equal(restored.sensor.translation, image.sensor.translation)
        assert restored.sensor.azimuth_step == image.sensor.azimuth_step

    def test_noisy_frame_file_matches_memory(self, tmp_path, box_scene, small_sensor):
        noisy = SensorModel.from_dict({**small_sensor.to_dict(), "range_noise": 0.01})
        image = simulate(box_scene, noisy, seed=3)
        restored = RangeImageParser().parse(RangeImageParser().save(image, tmp_path / "noisy.vrim"))
        np.testing.assert_array_equal(to_points(restored).points, to_points(image).points)

    def test_range_image_bad_magic(self, box_scene, small_sensor):
        parser = RangeImageParser()
        data = bytearray(parser.to_bytes(simulate(box_scene, small_sensor)))
        data[:4] = b"XXXX"
        with pytest.raises(FormatError) as info:
            parser.from_bytes(bytes(data))
        assert info.value.field == "magic"

    def test_range_image_truncated(self, box_scene, small_sensor):
        parser = RangeImageParser()
        data = parser.to_bytes(simulate(box_scene, small_sensor))
        with pytest.raises(FormatError) as info:
            parser.from_bytes(data[:-3])
        assert info.value.field == "payload"

    def test_range_image_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            RangeImageParser().parse(tmp_path / "missing.vrim")

    def test_scene_toml(self, tmp_path, box_scene):
        parser = SceneParser()
        path = parser.save(box_scene, tmp_path / "scene.toml")
        restored = parser.parse(path)
        assert restored.ground_z == box_scene.ground_z
        assert len(restored.boxes) == 1
        np.testing.assert_allclose(restored.boxes[0].center, box_scene.boxes[0].center)

    def test_scene_unknown_key(self):
        with pytest.raises(ConfigurationError):
            SceneParser().from_dict({"ground_z": 0.0, "cones": []})

    def test_sensor_toml(self, tmp_path, small_sensor):
        parser = SensorParser()
        restored = parser.parse(parser.save(small_sensor, tmp_path / "sensor.toml"))
        np.testing.assert_allclose(restored.inclinations, small_sensor.inclinations)
        np.testing.assert_allclose(restored.translation, small_sensor.translation)
        assert restored.shape == small_sensor.shape
