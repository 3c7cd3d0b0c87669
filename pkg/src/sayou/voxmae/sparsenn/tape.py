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
reverse-mode 자동 미분 Tape

forward 연산마다 Node(연산 이름, 출력 값 id, 입력 값 id, backward 함수)를 기록하고,
backward에서 기록의 역순으로 gradient를 전파합니다.
파라미터 gradient는 각 연산의 backward 함수가 Parameter.grad에 직접 누적합니다.
"""

import logging

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import TapeError

logger = logging.getLogger(__name__)

BackwardFn = Callable[[np.ndarray], tuple[Optional[np.ndarray], ...]]


@dataclass
class Node:
    """
    Tape 노드

    Attributes:
        op: 연산 이름
        output: 출력 값 id
        inputs: 입력 값 id (gradient가 필요 없는 입력은 None)
        backward: 출력 gradient → 입력별 gradient
        saved: 디버깅/검증용 저장 값 (ReLU 마스크, prune 마스크 등)
    """
    op: str
    output: int
    inputs: tuple[Optional[int], ...]
    backward: BackwardFn
    saved: dict = field(default_factory=dict)


class Tape:
    """
    한 프레임의 forward 기록

    한 Tape는 단일 스레드에서만 사용합니다. 프레임별로 별도의 Tape를 만듭니다.
    """

    def __init__(self):
        self.nodes: list[Node] = []
        self.visited: list[str] = []
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def new_value(self) -> int:
        """새 값 id 발급 (leaf 입력용)"""
        value_id = self._next_id
        self._next_id += 1
        return value_id

    def record(
        self,
        op: str,
        inputs: tuple[Optional[int], ...],
        backward: BackwardFn,
        **saved,
    ) -> int:
        """연산 기록 후 출력 값 id 반환"""
        output = self.new_value()
        self.nodes.append(Node(op=op, output=output, inputs=inputs, backward=backward, saved=saved))
        return output

    def nodes_of(self, op: str) -> list[Node]:
        return [node for node in self.nodes if node.op == op]

    def backward(self, seeds: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
        """
        역순 gradient 전파

        Args:
            seeds: 값 id → 그 값에 대한 손실 gradient

        Returns:
            값 id → gradient (leaf 입력 포함)
        """
        if not self.nodes:
            raise TapeError("기록된 forward 연산이 없습니다")

        grads: dict[int, np.ndarray] = {key: np.asarray(value) for key, value in seeds.items()}
        self.visited = []
        for node in reversed(self.nodes):
            self.visited.append(node.op)
            grad = grads.pop(node.output, None)
            if grad is None:
                continue
            input_grads = node.backward(grad)
            for value_id, input_grad in zip(node.inputs, input_grads):
                if value_id is None or input_grad is None:
                    continue
                if value_id in grads:
                    grads[value_id] = grads[value_id] + input_grad
                else:
                    grads[value_id] = input_grad

        logger.debug("backward: %d nodes", len(self.nodes))
        return grads
