from __future__ import annotations

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


class ScriptedStream:
    """Stand-in stream that replays a fixed list of uniforms."""

    def __init__(self, values):
        self.values = list(values)
        self.position = 0

    def uniform(self) -> float:
        value = self.values[self.position]
        self.position += 1
        return value

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])

    def integer(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)


@pytest.fixture
def scripted():
    return ScriptedStream
