import numpy as np
import pytest

from hypertda.curves import Curve, generate_sarw


def polygon(k: int, side: float = 1.0) -> Curve:
    r = side / (2 * np.sin(np.pi / k))
    t = 2 * np.pi * np.arange(k) / k
    return Curve(np.column_stack([r * np.cos(t), r * np.sin(t), np.zeros(k)]))


def helix(n: int, pitch: float = 1.0, step: float = np.pi / 2) -> Curve:
    t = step * np.arange(n)
    return Curve(np.column_stack([np.cos(t), np.sin(t), pitch * t / step]))


@pytest.fixture
def square() -> Curve:
    return Curve(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float))


@pytest.fixture
def hexagon() -> Curve:
    return polygon(6)


@pytest.fixture(scope="session")
def sarws_100():
    return [generate_sarw(100, s) for s in range(20)]
