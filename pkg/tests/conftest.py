import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from geodesics import MeshBackend, SphereBackend, TorusBackend, TriMesh
from geodesics import meshgen


@pytest.fixture(scope="session")
def sphere():
    return SphereBackend()


@pytest.fixture(scope="session")
def torus():
    return TorusBackend()


@pytest.fixture(scope="session")
def cube_mesh():
    return TriMesh(*meshgen.cube())


@pytest.fixture(scope="session")
def cube_backend(cube_mesh):
    return MeshBackend(cube_mesh)


@pytest.fixture(scope="session")
def cube_belt_backend(cube_mesh):
    # wide uniqueness override: the mid-height band is vertex-free
    return MeshBackend(cube_mesh, epsilon=0.8)


@pytest.fixture(scope="session")
def ico2_backend():
    return MeshBackend(TriMesh(*meshgen.icosphere(2)))


@pytest.fixture(scope="session")
def ico3_backend():
    return MeshBackend(TriMesh(*meshgen.icosphere(3)), epsilon=1.2)


@pytest.fixture(scope="session")
def patch_backend():
    return MeshBackend(TriMesh(*meshgen.flat_patch()))


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
