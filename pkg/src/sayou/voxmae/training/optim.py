# Copyright (c) 2025-2026, Sayouzone
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Adam 옵티마이저와 one-cycle 학습률 스케줄
"""

import logging
import math

import numpy as np

from ..sparsenn import Parameter

logger = logging.getLogger(__name__)


class Adam:
    """
    Adam 옵티마이저

    계산은 float64로 하고 moment와 갱신 결과는 파라미터 dtype으로 저장합니다.
    """

    def __init__(self, parameters: list[Parameter], beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.parameters = list(parameters)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {p.name: np.zeros(p.shape, dtype=p.data.dtype) for p in self.parameters}
        self.v = {p.name: np.zeros(p.shape, dtype=p.data.dtype) for p in self.parameters}

    def step(self, lr: float):
        """누적된 gradient로 한 번 갱신"""
        self.step_count += 1
        correction1 = 1.0 - self.beta1 ** self.step_count
        correction2 = 1.0 - self.beta2 ** self.step_count
        for param in self.parameters:
            grad = param.grad.astype(np.float64)
            dtype = param.data.dtype
            m = self.m[param.name] = (self.beta1 * self.m[param.name] + (1.0 - self.beta1) * grad).astype(dtype)
            v = self.v[param.name] = (self.beta2 * self.v[param.name] + (1.0 - self.beta2) * grad * grad).astype(dtype)
            m, v = m.astype(np.float64), v.astype(np.float64)
            update = lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            param.data = (param.data.astype(np.float64) - update).astype(param.data.dtype)

    def moments(self) -> dict[str, np.ndarray]:
        """체크포인트용 moment ("m/<이름>", "v/<이름>")"""
        result = {}
        for param in self.parameters:
            result[f"m/{param.name}"] = self.m[param.name]
            result[f"v/{param.name}"] = self.v[param.name]
        return result

    def load_moments(self, moments: dict[str, np.ndarray], step_count: int):
        for param in self.parameters:
            if f"m/{param.name}" in moments:
                self.m[param.name] = np.asarray(moments[f"m/{param.name}"], dtype=param.data.dtype).reshape(param.shape)
                self.v[param.name] = np.asarray(moments[f"v/{param.name}"], dtype=param.data.dtype).reshape(param.shape)
        self.step_count = int(step_count)


class OneCycleSchedule:
    """
    one-cycle 학습률

    - step 0 ~ warm_end: max_lr/div_factor에서 max_lr까지 선형 증가
    - 이후 마지막 step까지: max_lr에서 max_lr/final_div_factor로 cosine 감소
    """

    def __init__(
        self,
        max_lr: float,
        total_steps: int,
        warmup_fraction: float = 0.4,
        div_factor: float = 25.0,
        final_div_factor: float = 1e4,
    ):
        self.max_lr = max_lr
        self.total_steps = max(1, int(total_steps))
        self.initial_lr = max_lr / div_factor
        self.final_lr = max_lr / final_div_factor
        self.warm_end = max(1, int(np.floor(warmup_fraction * self.total_steps + 0.5)))
        self.anneal_steps = max(1, self.total_steps - 1 - self.warm_end)

    def lr(self, step: int) -> float:
        if step <= self.warm_end:
            return self.initial_lr + (self.max_lr - self.initial_lr) * step / self.warm_end
        progress = min(1.0, (step - self.warm_end) / self.anneal_steps)
        return self.final_lr + (self.max_lr - self.final_lr) * 0.5 * (1.0 + math.cos(math.pi * progress))

    def __call__(self, step: int) -> float:
        return self.lr(step)
