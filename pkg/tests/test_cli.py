"""
cli 패키지 테스트 (명령 종료 코드, 설정/manifest/PLY 파서, 명령 파이프라인)
"""

import numpy as np
import pytest

from sayou.voxmae.cli import build_parser, main
from sayou.voxmae.cli.commands import frame_seed, load_frames
from sayou.voxmae.cli.models import FrameRecord
from sayou.voxmae.cli.parsers import ConfigParser, ManifestParser, PlyWriter
from sayou.voxmae.errors import ConfigurationError, FormatError
from sayou.voxmae.evalsuite import ReportWriter
from sayou.voxmae.supervision import LabelParser

RUN_TOML = """
seed = 0

[grid]
origin = [-0.8, -0.8, -0.2]
voxel_size = [0.1, 0.1, 0.1]
extent = [16, 16, 16]

[sensor]
translation = [0.0, 0.0, 0.6]
n_rows = 12
fov_up_deg = 5.0
fov_down_deg = -45.0
n_cols = 24
max_range = 3.0
range_noise = 0.01

[scene]
ground_z = 0.0

[[scene.box]]
center = [0.45, 0.05, 0.2]
size = [0.3, 0.3, 0.4]

[encoder]
channels = [4, 8]
strides = [[2, 2, 2], [2, 2, 2]]

[decoder]
channels = [8, 4]
kernels = [[2, 2, 2], [2, 2, 2]]
strides = [[2, 2, 2], [2, 2, 2]]

[limits]
max_voxels = 20000

[train]
epochs = 1
augment = false

[masking]
keep_fraction = 0.6
"""


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("VOXMAE_SEED", raising=False)


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(RUN_TOML, encoding="utf-8")
    return path


@pytest.fixture
def data_dir(tmp_path, run_config):
    out = tmp_path / "data"
    assert main(["simulate", "--config", str(run_config), "--frames", "2", "--seed", "0", "--out", str(out)]) == 0
    return out


@pytest.fixture
def checkpoint(tmp_path, run_config, data_dir):
    path = tmp_path / "model.vckp"
    args = ["pretrain", "--config", str(run_config), "--frames", str(data_dir), "--out", str(path), "--steps", "1"]
    assert main(args) == 0
    return path


class TestParser:

    def test_eval_defaults(self):
        args = build_parser().parse_args(["eval", "--ckpt", "m.vckp", "--frames", "data"])
        assert args.keep_fraction == 1.0
        assert args.baseline is None
        assert args.report is None

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestExitCodes:

    def test_missing_scene_file(self, tmp_path):
        args = ["simulate", "--scene", str(tmp_path / "missing.toml"), "--out", str(tmp_path / "out")]
        assert main(args) == 2

    def test_missing_config(self, tmp_path):
        assert main(["pretrain", "--config", str(tmp_path / "missing.toml")]) == 2

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[grid]\nvoxel = 0.1\n", encoding="utf-8")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "out")]) == 2

    def test_zero_frames(self, tmp_path, run_config):
        assert main(["simulate", "--config", str(run_config), "--frames", "0", "--out", str(tmp_path / "o")]) == 2

    def test_bad_thread_count(self, tmp_path, run_config):
        args = ["--threads", "0", "simulate", "--config", str(run_config), "--out", str(tmp_path / "o")]
        assert main(args) == 2

    def test_checkpoint_from_other_architecture(self, tmp_path, checkpoint, data_dir):
        other = tmp_path / "other.toml"
        other.write_text(RUN_TOML.replace("channels = [8, 4]", "channels = [8, 8]"), encoding="utf-8")
        args = [
            "reconstruct", "--ckpt", str(checkpoint), "--frame", str(data_dir / "frame_000000.vrim"),
            "--config", str(other), "--out", str(tmp_path / "recon.ply"),
        ]
        assert main(args) == 1


class TestSimulate:

    def test_outputs(self, data_dir):
        names = sorted(path.name for path in data_dir.iterdir())
        assert names == ["frame_000000.vrim", "frame_000001.vrim", "manifest.json", "scene.toml"]

        records = ManifestParser().parse(data_dir)
        assert [record.frame for record in records] == ["frame_000000", "frame_000001"]
        assert all(record.scene == "scene.toml" for record in records)
        assert records[0].seed == frame_seed(0, 0)
        assert records[0].n_returns > 0

    def test_reproducible(self, tmp_path, run_config, data_dir):
        again = tmp_path / "again"
        assert main(["simulate", "--config", str(run_config), "--frames", "2", "--seed", "0", "--out", str(again)]) == 0
        for name in ("frame_000000.vrim", "frame_000001.vrim", "scene.toml"):
            assert (again / name).read_bytes() == (data_dir / name).read_bytes()

    def test_seed_changes_noise(self, tmp_path, run_config, data_dir):
        other = tmp_path / "other"
        assert main(["simulate", "--config", str(run_config), "--frames", "1", "--seed", "1", "--out", str(other)]) == 0
        assert (other / "frame_000000.vrim").read_bytes() != (data_dir / "frame_000000.vrim").read_bytes()

    def test_frame_seed(self):
        assert frame_seed(0, 0) == frame_seed(0, 0)
        assert frame_seed(0, 0) != frame_seed(0, 1)
        assert frame_seed(0, 1) != frame_seed(1, 0)

    def test_load_frames_uses_manifest(self, data_dir):
        frames = load_frames(data_dir)
        assert [name for name, _ in frames] == ["frame_000000", "frame_000001"]
        assert all(frame.scene is not None for _, frame in frames)
        assert [frame.frame_id for _, frame in frames] == [0, 1]

    def test_load_frames_skips_broken_image(self, caplog, data_dir):
        (data_dir / "frame_000001.vrim").write_bytes(b"XXXX")
        with caplog.at_level("WARNING", logger="sayou.voxmae.cli.commands"):
            frames = load_frames(data_dir)
        assert [name for name, _ in frames] == ["frame_000000"]
        warnings = [record for record in caplog.records if record.name == "sayou.voxmae.cli.commands"]
        assert warnings and warnings[0].args[0] == "frame_000001"
        assert "frame_000001" in warnings[0].getMessage()


class TestPipeline:

    def test_labelgen(self, tmp_path, run_config, data_dir):
        out = tmp_path / "labels"
        assert main(["labelgen", "--frames", str(data_dir), "--grid", str(run_config), "--out", str(out)]) == 0

        config = ConfigParser().parse(run_config)
        pyramid = LabelParser().parse(out / "frame_000000.vlbl", config.grid)
        assert (1, 1, 1) in pyramid
        assert len(pyramid[(1, 1, 1)]) > 0

    def test_pretrain_writes_checkpoint(self, checkpoint):
        assert checkpoint.exists()
        assert checkpoint.stat().st_size > 0

    def test_reconstruct_ply(self, tmp_path, run_config, data_dir, checkpoint):
        out = tmp_path / "recon.ply"
        args = [
            "reconstruct", "--ckpt", str(checkpoint), "--frame", str(data_dir / "frame_000000.vrim"),
            "--config", str(run_config), "--scene", str(data_dir / "scene.toml"), "--out", str(out),
        ]
        assert main(args) == 0

        points, colors = PlyWriter().parse(out)
        assert points.shape[1] == 3
        assert colors.shape == points.shape
        if points.shape[0]:
            assert points.min() >= -0.8
            assert points.max() <= 1.4

    def test_eval_report(self, tmp_path, run_config, data_dir, checkpoint):
        report = tmp_path / "report.csv"
        args = [
            "eval", "--ckpt", str(checkpoint), "--frames", str(data_dir), "--config", str(run_config),
            "--report", str(report), "--baseline", "untrained",
        ]
        assert main(args) == 0

        metrics = ReportWriter().parse(report)
        assert [item.frame for item in metrics] == ["frame_000000", "frame_000001"]
        assert all(item.n_occupied > 0 for item in metrics)
        assert (tmp_path / "report.untrained.csv").exists()

    def test_eval_to_stdout(self, capsys, run_config, data_dir, checkpoint):
        args = ["eval", "--ckpt", str(checkpoint), "--frames", str(data_dir), "--config", str(run_config)]
        assert main(args) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3


class TestConfigParser:

    def test_defaults(self):
        config = ConfigParser().loads("")
        assert config.seed == 0
        assert config.train.keep_fraction == 0.6

    def test_unknown_section(self):
        with pytest.raises(ConfigurationError) as exc:
            ConfigParser().loads("[optimizer]\nlr = 1\n")
        assert exc.value.key == "optimizer"

    def test_unknown_train_key(self):
        with pytest.raises(ConfigurationError) as exc:
            ConfigParser().loads("[train]\nlearning_rate = 0.1\n")
        assert exc.value.key == "train.learning_rate"

    def test_bad_toml(self):
        with pytest.raises(FormatError):
            ConfigParser().loads("[grid\n")

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv("VOXMAE_SEED", "7")
        config = ConfigParser().loads("seed = 3\n")
        assert config.seed == 7
        assert config.train.seed == 7

    def test_bad_env_seed(self, monkeypatch):
        monkeypatch.setenv("VOXMAE_SEED", "seven")
        with pytest.raises(ConfigurationError) as exc:
            ConfigParser().loads("")
        assert exc.value.key == "VOXMAE_SEED"

    def test_relative_paths(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('[paths]\nframes = "data"\n', encoding="utf-8")
        config = ConfigParser().parse(path)
        assert config.path("frames") == tmp_path / "data"
        with pytest.raises(ConfigurationError):
            config.path("checkpoint")


class TestManifestParser:

    def test_save_and_parse(self, tmp_path):
        records = [
            FrameRecord(frame="frame_000000", image="frame_000000.vrim", scene="a.toml", seed=11, ground_z=0.0,
                        n_returns=5),
            FrameRecord(frame="frame_000001", image="frame_000001.vrim", scene="", seed=12, ground_z=None),
        ]
        parser = ManifestParser()
        parser.save(records, tmp_path)
        assert parser.parse(tmp_path) == records

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ManifestParser().parse(tmp_path)
        assert ManifestParser().parse_or_none(tmp_path) is None


class TestPlyWriter:

    def test_empty_cloud(self, tmp_path):
        writer = PlyWriter()
        path = writer.save(np.zeros((0, 3)), tmp_path / "empty.ply")
        assert "element vertex 0" in path.read_text(encoding="ascii")
        points, colors = writer.parse(path)
        assert points.shape == (0, 3)
        assert colors.shape == (0, 3)

    def test_points(self, tmp_path):
        points = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
        parsed, colors = PlyWriter().parse(PlyWriter().save(points, tmp_path / "p.ply"))
        np.testing.assert_allclose(parsed, points)
        assert colors.dtype == np.uint8

    def test_ascii_header(self, tmp_path):
        path = PlyWriter().save(np.array([[0.0, 0.0, 0.0], [1.0, 0.5, 0.25]]), tmp_path / "p.ply")
        header = path.read_text(encoding="ascii").split("end_header")[0]
        assert "format ascii 1.0" in header
        assert "property uchar red" in header

    def test_truncated_body(self, tmp_path):
        path = PlyWriter().save(np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]), tmp_path / "p.ply")
        lines = path.read_text(encoding="ascii").splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n", encoding="ascii")
        with pytest.raises(FormatError) as exc:
            PlyWriter().parse(path)
        assert exc.value.field == "payload"

    def test_not_ply(self, tmp_path):
        path = tmp_path / "x.ply"
        path.write_text("hello\n", encoding="ascii")
        with pytest.raises(FormatError) as exc:
            PlyWriter().parse(path)
        assert exc.value.field == "magic"
