"""
training 패키지 테스트 (가중 BCE, gradient 검사, 옵티마이저/스케줄, 증강, 체크포인트, 학습 루프)
"""

import math

import numpy as np
import pytest

from sayou.voxmae.errors import CheckpointError, ConfigurationError, FormatError
from sayou.voxmae.evalsuite import ReconstructionEvaluator, ReportWriter
from sayou.voxmae.geometry import GridConfig, voxel_centers
from sayou.voxmae.lidar import LidarFrame, RangeImage, SensorModel, random_scene, simulate, uniform_inclinations
from sayou.voxmae.model import DecoderConfig, StrideRecord, VoxelReconstructionNetwork
from sayou.voxmae.sparsenn import Parameter, Tape
from sayou.voxmae.supervision import Categorizer, LabelMap, LabelPyramid, VoxelCategory
from sayou.voxmae.training import (
    IDENTITY,
    Adam,
    Augmentation,
    CheckpointParser,
    OneCycleSchedule,
    Pretrainer,
    TrainConfig,
    TrainingFrame,
    augment_frame,
    augmentation_pivot,
    load_checkpoint,
    sample_augmentation,
    save_checkpoint,
    weighted_bce,
)

UNIT_GRID = GridConfig(voxel_size=(1.0, 1.0, 1.0), extent=(4, 4, 4))


def one_voxel_pyramid(category: VoxelCategory, weight: float = 1.0) -> LabelPyramid:
    label_map = LabelMap(
        grid=UNIT_GRID,
        keys=UNIT_GRID.keys(np.array([[1, 1, 1]])),
        category=[category],
        weight=[weight],
        min_dist=[0.0],
    )
    return LabelPyramid(UNIT_GRID, {(1, 1, 1): label_map})


def record(logits, coords=((1, 1, 1),)) -> StrideRecord:
    return StrideRecord(stride=(1, 1, 1), coords=np.asarray(coords), logits=np.asarray(logits, dtype=np.float64))


class TestWeightedBce:

    def test_single_occupied_at_half(self):
        loss = weighted_bce([record([0.0])], one_voxel_pyramid(VoxelCategory.OCCUPIED))
        assert loss.total == pytest.approx(0.6931, abs=1e-4)
        assert loss.total == pytest.approx(math.log(2.0), abs=1e-6)
        assert loss.normalizer == 1

    def test_unknown_only(self):
        loss = weighted_bce([record([1.3], coords=((2, 2, 2),))], one_voxel_pyramid(VoxelCategory.OCCUPIED))
        assert loss.is_degenerate
        assert loss.total == 0.0
        np.testing.assert_array_equal(loss.logit_grads[0], 0.0)

    def test_zero_weight_empty(self):
        loss = weighted_bce([record([2.0])], one_voxel_pyramid(VoxelCategory.EMPTY, weight=0.0))
        assert loss.normalizer == 1
        assert loss.total == pytest.approx(0.0, abs=1e-12)

    def test_unknown_logit_has_no_effect(self):
        pyramid = one_voxel_pyramid(VoxelCategory.OCCUPIED)
        coords = ((1, 1, 1), (3, 3, 3))
        base = weighted_bce([record([0.4, -2.0], coords)], pyramid)
        moved = weighted_bce([record([0.4, 7.5], coords)], pyramid)
        assert base.total == moved.total
        assert base.logit_grads[0][1] == 0.0

    def test_unknown_as_empty_without_lidar_awareness(self):
        pyramid = one_voxel_pyramid(VoxelCategory.OCCUPIED)
        coords = ((1, 1, 1), (3, 3, 3))
        loss = weighted_bce([record([0.0, 0.0], coords)], pyramid, lidar_aware=False)
        assert loss.normalizer == 2
        assert loss.total == pytest.approx(math.log(2.0), abs=1e-9)

    def test_distance_weighting_toggle(self):
        pyramid = one_voxel_pyramid(VoxelCategory.EMPTY, weight=0.0)
        loss = weighted_bce([record([0.0])], pyramid, distance_weighting=False)
        assert loss.total == pytest.approx(math.log(2.0), abs=1e-9)

    def test_saturated_loss(self):
        coords = ((1, 1, 1), (2, 1, 1))
        label_map = LabelMap(
            grid=UNIT_GRID,
            keys=UNIT_GRID.keys(np.array(coords)),
            category=[VoxelCategory.OCCUPIED, VoxelCategory.EMPTY],
            weight=[1.0, 0.7],
            min_dist=[0.0, 0.1],
        )
        pyramid = LabelPyramid(UNIT_GRID, {(1, 1, 1): label_map})
        loss = weighted_bce([record([40.0, -40.0], coords)], pyramid)
        assert 0.0 <= loss.total < 1e-5

    def test_gradient_matches_finite_difference(self):
        pyramid = one_voxel_pyramid(VoxelCategory.EMPTY, weight=0.6)
        loss = weighted_bce([record([0.3])], pyramid)
        h = 1e-6
        plus = weighted_bce([record([0.3 + h])], pyramid).total
        minus = weighted_bce([record([0.3 - h])], pyramid).total
        assert loss.logit_grads[0][0] == pytest.approx((plus - minus) / (2 * h), rel=1e-6)

    def test_missing_stride(self):
        with pytest.raises(ConfigurationError):
            weighted_bce([StrideRecord((2, 2, 2), np.zeros((1, 3), dtype=np.int64), np.zeros(1))],
                         one_voxel_pyramid(VoxelCategory.OCCUPIED))


def wall_frame(grid: GridConfig) -> LidarFrame:
    """x index 11의 벽 12개 복셀 중심과 센서 하나"""
    coords = np.array([[11, y, z] for y in range(6, 10) for z in range(3, 6)])
    return LidarFrame(
        points=voxel_centers(coords, grid),
        sensor_ids=np.zeros(coords.shape[0], dtype=np.int64),
        sensor_origins={0: np.array([-0.55, 0.05, 0.45])},
    )


class TestNetworkGradient:

    def test_parameter_gradients(self, small_grid, tiny_encoder, tiny_decoder):
        network = VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=1, dtype=np.float64)
        rng = np.random.default_rng(5)
        for block in network.decoder.blocks:
            block.head.weight.data = rng.normal(scale=0.1, size=block.head.weight.shape)
            block.head.bias.data = np.full(1, 5.0)

        frame = wall_frame(small_grid)
        pyramid = Categorizer(small_grid, network.supervision_strides).pyramid(frame)
        inputs = network.prepare_input(frame.points)
        assert len(inputs) <= 50

        def evaluate(with_grads: bool = False):
            tape = Tape()
            x = inputs.with_features(inputs.features)
            result = network.forward(x, np.random.default_rng(0), training=True, tape=tape)
            loss = weighted_bce(result.records, pyramid)
            masks = [node.saved["mask"].copy() for node in tape.nodes_of("relu")]
            if with_grads:
                network.zero_grad()
                tape.backward({r.logit_id: g[:, None] for r, g in zip(result.records, loss.logit_grads)})
            return loss.total, masks, result

        _, base_masks, result = evaluate(with_grads=True)
        assert all(r.kept.all() for r in result.records)
        analytic = {p.name: p.grad.copy() for p in network.parameters()}

        h = 1e-3
        checked = 0
        for param in network.parameters():
            flat = param.data.reshape(-1)
            for index in rng.choice(flat.size, size=min(3, flat.size), replace=False):
                original = flat[index]
                flat[index] = original + h
                plus, plus_masks, _ = evaluate()
                flat[index] = original - h
                minus, minus_masks, _ = evaluate()
                flat[index] = original

                stable = all(
                    np.array_equal(a, b) and np.array_equal(a, c)
                    for a, b, c in zip(base_masks, plus_masks, minus_masks)
                )
                if not stable:
                    continue
                numeric = (plus - minus) / (2 * h)
                assert analytic[param.name].reshape(-1)[index] == pytest.approx(numeric, rel=1e-4, abs=1e-6)
                checked += 1
        assert checked > len(network.parameters())


class TestOptim:

    def test_schedule_endpoints(self):
        schedule = OneCycleSchedule(0.003, total_steps=100)
        assert schedule.lr(0) == pytest.approx(0.003 / 25)
        assert schedule.lr(40) == pytest.approx(0.003)
        assert schedule.lr(99) == pytest.approx(0.003 / 1e4)

    def test_warm_up_boundary_rounds_half_up(self):
        schedule = OneCycleSchedule(0.01, total_steps=5, warmup_fraction=0.5)
        assert schedule.warm_end == 3
        assert schedule.lr(3) == pytest.approx(0.01)

    def test_schedule_continuous_single_peak(self):
        schedule = OneCycleSchedule(0.01, total_steps=250)
        values = np.array([schedule(step) for step in range(250)])
        assert np.count_nonzero(values == values.max()) == 1
        assert values.max() == pytest.approx(0.01)
        assert np.max(np.abs(np.diff(values))) < 0.01 / 50

    def test_adam_descends(self):
        param = Parameter("w", np.array([3.0, -2.0]))
        optimizer = Adam([param])
        for _ in range(200):
            param.zero_grad()
            param.accumulate(2.0 * param.data)
            optimizer.step(0.05)
        assert optimizer.step_count == 200
        assert np.all(np.abs(param.data) < 0.5)

    def test_adam_moments_round_trip(self):
        param = Parameter("w", np.ones(3))
        optimizer = Adam([param])
        param.accumulate(np.array([1.0, 2.0, 3.0]))
        optimizer.step(0.1)
        restored = Adam([Parameter("w", np.ones(3))])
        restored.load_moments(optimizer.moments(), optimizer.step_count)
        np.testing.assert_array_equal(restored.m["w"], optimizer.m["w"])
        assert restored.step_count == 1

    def test_total_steps(self):
        assert TrainConfig(epochs=3, batch_size=2).total_steps(5) == 9
        assert TrainConfig(max_steps=7).total_steps(100) == 7

    def test_unknown_section_key(self):
        with pytest.raises(ConfigurationError) as info:
            TrainConfig.from_sections({"epochs": 2, "lr": 0.1}, {}, {})
        assert info.value.key == "train.lr"


class TestAugment:

    def test_sampled_ranges(self):
        rng = np.random.default_rng(0)
        samples = [sample_augmentation(rng) for _ in range(500)]
        assert all(abs(a.angle) <= math.pi / 4 for a in samples)
        assert all(0.95 <= a.scale <= 1.05 for a in samples)
        assert 0.4 < np.mean([a.flip_x for a in samples]) < 0.6

    def test_identity_is_noop(self, box_frame):
        assert augment_frame(box_frame, IDENTITY, np.zeros(3)) is box_frame

    def test_points_and_origins_move_together(self, box_frame, small_grid):
        augmentation = Augmentation(flip_x=True, angle=0.3, scale=1.02)
        pivot = augmentation_pivot(small_grid, 0.0)
        moved = augment_frame(box_frame, augmentation, pivot)
        before = np.linalg.norm(box_frame.points - box_frame.sensor_origins[0], axis=1)
        after = np.linalg.norm(moved.points - moved.sensor_origins[0], axis=1)
        np.testing.assert_allclose(after, 1.02 * before, rtol=1e-12)
        np.testing.assert_allclose(moved.points[:, 2] - pivot[2], 1.02 * (box_frame.points[:, 2] - pivot[2]))


def training_frames(box_scene, small_sensor, n: int = 1) -> list[TrainingFrame]:
    image = simulate(box_scene, small_sensor)
    return [TrainingFrame(images=[image], scene=box_scene, frame_id=i) for i in range(n)]


def quick_config(**overrides) -> TrainConfig:
    values = dict(epochs=1, max_steps=3, max_lr=0.01, keep_fraction=0.8)
    values.update(overrides)
    return TrainConfig(**values)


class TestCheckpoint:

    def test_round_trip_forward(self, tmp_path, tiny_network, small_grid, tiny_encoder, tiny_decoder, box_frame):
        path = save_checkpoint(tmp_path / "model.vckp", tiny_network, step=4, seed=2)
        restored = VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=99)
        checkpoint = load_checkpoint(path, restored)
        assert checkpoint.step == 4 and checkpoint.seed == 2
        np.testing.assert_array_equal(tiny_network.reconstruct(box_frame), restored.reconstruct(box_frame))
        for a, b in zip(tiny_network.parameters(), restored.parameters()):
            np.testing.assert_array_equal(a.data, b.data)

    def test_round_trip_after_training(self, tmp_path, small_grid, tiny_encoder, tiny_decoder, box_scene, small_sensor,
                                       box_frame):
        network = VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=0)
        trainer = Pretrainer(network, quick_config(max_steps=5))
        trainer.fit(training_frames(box_scene, small_sensor))
        assert any(np.any(state.running_mean != 0) for state in network.batch_norms().values())

        path = save_checkpoint(tmp_path / "model.vckp", network, trainer.optimizer, trainer.step)
        restored = VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=99)
        load_checkpoint(path, restored)
        for name, state in network.batch_norms().items():
            np.testing.assert_array_equal(restored.batch_norms()[name].running_mean, state.running_mean)
            np.testing.assert_array_equal(restored.batch_norms()[name].running_var, state.running_var)

        before = network.forward(network.prepare_input(box_frame.points), np.random.default_rng(0), training=False)
        after = restored.forward(restored.prepare_input(box_frame.points), np.random.default_rng(0), training=False)
        assert len(before.records) == len(after.records)
        for a, b in zip(before.records, after.records):
            np.testing.assert_array_equal(a.coords, b.coords)
            np.testing.assert_array_equal(a.logits, b.logits)

    def test_truncated_file(self, tmp_path, tiny_network):
        path = save_checkpoint(tmp_path / "model.vckp", tiny_network)
        path.write_bytes(path.read_bytes()[:-11])
        with pytest.raises(FormatError):
            CheckpointParser().parse(path)

    def test_bad_magic(self, tmp_path, tiny_network):
        path = save_checkpoint(tmp_path / "model.vckp", tiny_network)
        path.write_bytes(b"XXXX" + path.read_bytes()[4:])
        with pytest.raises(FormatError) as info:
            CheckpointParser().parse(path)
        assert info.value.field == "magic"

    def test_other_decoder_rejected(self, tmp_path, tiny_network, small_grid, tiny_encoder):
        path = save_checkpoint(tmp_path / "model.vckp", tiny_network)
        other = VoxelReconstructionNetwork(
            small_grid,
            tiny_encoder,
            DecoderConfig(channels=(8, 8), kernels=((2, 2, 2), (2, 2, 2)), strides=((2, 2, 2), (2, 2, 2))),
        )
        with pytest.raises(CheckpointError):
            load_checkpoint(path, other)

    def test_shape_mismatch(self, tiny_network):
        checkpoint = Pretrainer(tiny_network).checkpoint()
        checkpoint.tensors["decoder.1.head.weight"] = np.zeros((1, 5, 1), dtype=np.float32)
        with pytest.raises(CheckpointError):
            checkpoint.check_shapes({p.name: p.shape for p in tiny_network.parameters()})


class TestPretrainer:

    def test_identical_frames_identical_losses(self, tiny_network, box_scene, small_sensor):
        frame = training_frames(box_scene, small_sensor)[0]
        trainer = Pretrainer(tiny_network, quick_config(batch_size=2))
        result = trainer.train_step([frame, frame])
        assert not result.skipped
        assert result.frame_losses[0].total == result.frame_losses[1].total
        assert result.lr == pytest.approx(0.01 / 25)
        assert trainer.step == 1

    def test_degenerate_batch_skipped(self, tiny_network, small_sensor):
        empty = TrainingFrame(images=[RangeImage.empty(small_sensor)], frame_id=0)
        trainer = Pretrainer(tiny_network, quick_config())
        before = [p.data.copy() for p in tiny_network.parameters()]
        result = trainer.train_step([empty])
        assert result.skipped
        assert trainer.step == 0
        for a, p in zip(before, tiny_network.parameters()):
            np.testing.assert_array_equal(a, p.data)

    def test_empty_batch(self, tiny_network):
        with pytest.raises(ValueError):
            Pretrainer(tiny_network, quick_config()).train_step([])

    def test_fit_is_deterministic(self, tmp_path, small_grid, tiny_encoder, tiny_decoder, box_scene, small_sensor):
        frames = training_frames(box_scene, small_sensor, n=2)
        paths = []
        for run in range(2):
            network = VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=0)
            trainer = Pretrainer(network, quick_config(seed=4))
            results = trainer.fit(frames, checkpoint_path=tmp_path / f"run{run}.vckp")
            assert len(results) == 3
            paths.append(tmp_path / f"run{run}.vckp")
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_resume(self, tiny_network, small_grid, tiny_encoder, tiny_decoder, box_scene, small_sensor):
        frames = training_frames(box_scene, small_sensor)
        trainer = Pretrainer(tiny_network, quick_config())
        trainer.fit(frames)
        resumed = Pretrainer(VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=7), quick_config())
        resumed.resume(trainer.checkpoint())
        assert resumed.step == 3
        assert resumed.optimizer.step_count == trainer.optimizer.step_count

    def test_resume_matches_uninterrupted_run(self, small_grid, tiny_encoder, tiny_decoder, box_scene, small_sensor):
        frames = training_frames(box_scene, small_sensor, n=3)
        config = quick_config(max_steps=4, spherical=False, seed=2)
        parser = CheckpointParser()
        saved = {}

        def keep_second(result):
            if trainer.step == 2:
                saved["bytes"] = parser.to_bytes(trainer.checkpoint())

        trainer = Pretrainer(VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=0), config)
        trainer.fit(frames, callback=keep_second)
        assert trainer.step == 4

        resumed = Pretrainer(VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=5), config)
        resumed.resume(parser.from_bytes(saved["bytes"]))
        results = resumed.fit(frames)
        assert [result.step for result in results] == [2, 3]
        assert parser.to_bytes(resumed.checkpoint()) == parser.to_bytes(trainer.checkpoint())

    @pytest.mark.slow
    def test_single_frame_overfit(self, small_grid, tiny_encoder, tiny_decoder, box_scene):
        sensor = SensorModel(
            translation=np.array([0.0, 0.0, 0.6]),
            inclinations=uniform_inclinations(32, 5.0, -45.0),
            n_cols=64,
            azimuth_step=2.0 * np.pi / 64,
            max_range=3.0,
        )
        frames = training_frames(box_scene, sensor)
        network = VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, seed=0)
        config = TrainConfig(max_steps=2000, max_lr=0.01, augment=False, spherical=False, keep_fraction=1.0)
        losses = [r.loss for r in Pretrainer(network, config).fit(frames)]
        assert losses[-1] < 0.1 * losses[0]

        metrics = ReconstructionEvaluator(network).evaluate(frames[0])
        assert metrics.occupied_recall >= 0.95
        assert metrics.empty_false_positive_rate <= 0.05

    @pytest.mark.slow
    def test_occlusion_completion_beats_untrained(self):
        grid = GridConfig()
        sensor = SensorModel(translation=np.array([0.2, 1.6, 1.0]))
        rng = np.random.default_rng(0)
        frames = []
        for frame_id in range(550):
            scene = random_scene(rng, grid, sensor.translation)
            frames.append(TrainingFrame(images=[simulate(scene, sensor)], scene=scene, frame_id=frame_id))
        train, held_out = frames[:500], frames[500:]

        network = VoxelReconstructionNetwork(grid, seed=0)
        Pretrainer(network, TrainConfig(epochs=30, seed=0)).fit(train)

        writer = ReportWriter()
        trained = writer.summary(ReconstructionEvaluator(network).evaluate_all(held_out))
        untrained = writer.summary(ReconstructionEvaluator(VoxelReconstructionNetwork(grid, seed=0)).evaluate_all(held_out))
        assert trained["unknown_completion_recall"] > 0.3
        assert trained["unknown_completion_recall"] - (untrained["unknown_completion_recall"] or 0.0) >= 0.2
