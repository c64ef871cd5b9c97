# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Shared fixtures. Solved profiles and leaves are session-scoped; leaves use a reduced r schedule and tolerance so the
suite stays at desk scale.
"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]  # minleaf root directory
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))  # add ROOT to PATH

from models.ambient import SchwarzschildMetric
from utils.foliation import build_leaf, geometric_schedule
from utils.shooting import ShootingProblem, solve_plateau

LEAF_SCHEDULE = geometric_schedule(60.0, 2.0, 12)  # r <= 60·2^11
LEAF_TOL = 1e-4  # leaf iterates differ by O(1/r), 1e-6 needs r ~ 1e6


@pytest.fixture(scope='session')
def schwarzschild4():
    return SchwarzschildMetric(4)


@pytest.fixture(scope='session')
def plateau4(schwarzschild4):
    # Plateau solution r=100, z=1 in Schwarzschild n=4
    return solve_plateau(ShootingProblem(schwarzschild4, 100.0, 1.0))


@pytest.fixture(scope='session')
def leaf4(schwarzschild4):
    return build_leaf(schwarzschild4, 1.0, LEAF_SCHEDULE, T_view=25.0, tol=LEAF_TOL)


@pytest.fixture(scope='session')
def leaf4_high(schwarzschild4):
    return build_leaf(schwarzschild4, 4.0, LEAF_SCHEDULE, T_view=25.0, tol=LEAF_TOL)


@pytest.fixture(scope='session')
def data_dir():
    return ROOT / 'data'
