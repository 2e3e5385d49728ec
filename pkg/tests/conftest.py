import pytest

from vfalgebra.geometry import ManifoldSpec, build_basis
from vfalgebra.theorems import assemble_bracket_table

CONFORMAL = {"c:1,0": 0.1}


@pytest.fixture(scope="session")
def flat2():
    return build_basis(ManifoldSpec("torus", 2))


@pytest.fixture(scope="session")
def flat4():
    return build_basis(ManifoldSpec("torus", 4))


@pytest.fixture(scope="session")
def sphere3():
    return build_basis(ManifoldSpec("sphere", 3))


@pytest.fixture(scope="session")
def sphere4():
    return build_basis(ManifoldSpec("sphere", 4))


@pytest.fixture(scope="session")
def ctorus2():
    return build_basis(ManifoldSpec("ctorus", 2, CONFORMAL))


@pytest.fixture(scope="session")
def table_flat2(flat2):
    return assemble_bracket_table(flat2)


@pytest.fixture(scope="session")
def table_flat4(flat4):
    return assemble_bracket_table(flat4)


@pytest.fixture(scope="session")
def table_sphere3(sphere3):
    return assemble_bracket_table(sphere3)


@pytest.fixture(scope="session")
def table_sphere4(sphere4):
    return assemble_bracket_table(sphere4)


@pytest.fixture(scope="session")
def table_ctorus2(ctorus2):
    return assemble_bracket_table(ctorus2)
