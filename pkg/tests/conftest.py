import sys
from pathlib import Path

import numpy as np
import pytest

# Add backend to path
backend_path = Path(__file__).parent.parent / "backend"
sys.path.insert(0, str(backend_path))

from modules.Mesh_Module.mesh import EdgeTag, build_structured_unit_square, unit_square_boundary  # noqa: E402
from modules.Problems_Module.model_problems import model_problem_1, model_problem_2  # noqa: E402


@pytest.fixture
def mp1():
    return model_problem_1()


@pytest.fixture
def mp2():
    return model_problem_2()


@pytest.fixture
def mp1_mesh(mp1):
    return build_structured_unit_square(2, mp1.boundary)


@pytest.fixture
def free_boundary():
    """Clamped at x = 0 and y = 0, traction elsewhere, no contact."""
    return unit_square_boundary(
        bottom=EdgeTag.DIRICHLET, right=EdgeTag.NEUMANN, top=EdgeTag.NEUMANN, left=EdgeTag.DIRICHLET,
        contact_normal=(0.0, -1.0),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
