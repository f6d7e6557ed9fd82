import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.fpos import OrderStatSpec  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def small_specs():
    """Все допустимые тройки (k, n, N) при N <= 8"""
    return [OrderStatSpec(k, n, N)
            for N in range(1, 9) for n in range(1, N + 1) for k in range(1, n + 1)]


@st.composite
def specs(draw, max_population=60):
    """Случайная допустимая тройка (k, n, N)"""
    N = draw(st.integers(min_value=1, max_value=max_population))
    n = draw(st.integers(min_value=1, max_value=N))
    k = draw(st.integers(min_value=1, max_value=n))
    return OrderStatSpec(k, n, N)
