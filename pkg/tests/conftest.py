"""
voxmae 테스트 공통 fixture
"""

import sys

from pathlib import Path

import numpy as np
import pytest

# 상위 디렉토리를 path에 추가
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from sayou.voxmae.geometry import GridConfig
from sayou.voxmae.lidar import Box, Scene, SensorModel, simulate, to_points, uniform_inclinations
from sayou.voxmae.model import DecoderConfig, EncoderConfig, SafetyLimits, VoxelReconstructionNetwork


@pytest.fixture
def unit_grid() -> GridConfig:
    """1m 복셀 16³ 그리드"""
    return GridConfig(origin=(0.0, 0.0, 0.0), voxel_size=(1.0, 1.0, 1.0), extent=(16, 16, 16))


@pytest.fixture
def small_grid() -> GridConfig:
    """x, y ∈ [-0.8, 0.8], z ∈ [-0.2, 1.4]"""
    return GridConfig(origin=(-0.8, -0.8, -0.2), voxel_size=(0.1, 0.1, 0.1), extent=(16, 16, 16))


@pytest.fixture
def small_sensor() -> SensorModel:
    return SensorModel(
        translation=np.array([0.0, 0.0, 0.6]),
        inclinations=uniform_inclinations(12, 5.0, -45.0),
        n_cols=24,
        azimuth_step=2.0 * np.pi / 24,
        max_range=3.0,
    )


@pytest.fixture
def box_scene() -> Scene:
    """격자면에 맞춘 박스 하나와 지면"""
    return Scene(boxes=[Box(center=(0.45, 0.05, 0.2), size=(0.3, 0.3, 0.4))], ground_z=0.0)


@pytest.fixture
def box_frame(box_scene, small_sensor):
    return to_points(simulate(box_scene, small_sensor))


@pytest.fixture
def tiny_encoder() -> EncoderConfig:
    return EncoderConfig(channels=(4, 8), strides=((2, 2, 2), (2, 2, 2)))


@pytest.fixture
def tiny_decoder() -> DecoderConfig:
    return DecoderConfig(channels=(8, 4), kernels=((2, 2, 2), (2, 2, 2)), strides=((2, 2, 2), (2, 2, 2)))


@pytest.fixture
def tiny_network(small_grid, tiny_encoder, tiny_decoder) -> VoxelReconstructionNetwork:
    return VoxelReconstructionNetwork(small_grid, tiny_encoder, tiny_decoder, SafetyLimits(max_voxels=20000), seed=0)
