import sys
from pathlib import Path

import numpy as np
import pytest

# 与 cli.py 一样把仓库根目录放到路径上
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
