# Copyright 2025 kermits
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
Counter-based random streams.

A stream is addressed by (seed, path); children are derived by appending an
index to the path, so replica i of experiment s always sees the same draws
no matter which worker runs it.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by a master seed and a stream index."""
    seed: int
    index: int = 0
    parent: Tuple[int, ...] = ()

    @property
    def path(self) -> Tuple[int, ...]:
        return self.parent + (self.index,)

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream; distinct indices never share draws."""
        return RngStream(self.seed, int(index), self.path)

    def generator(self) -> np.random.Generator:
        """Fresh Philox generator positioned at the start of this stream."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(sequence))


RngLike = Union[RngStream, np.random.Generator, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    """
    Resolve an RngStream, Generator or None into a Generator.

    None maps to stream (0, 0), so calls without an explicit stream stay
    deterministic.
    """
    if rng is None:
        return RngStream(0).generator()
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"Expected RngStream or numpy Generator, got {type(rng).__name__}")
