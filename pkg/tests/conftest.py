import numpy as np
import pytest

from nlsfv.mesh import DomainSpec, generate_mesh, mesh_from_polygons


def square(x0, y0, size=1.0):
    return np.array([[x0, y0], [x0 + size, y0], [x0 + size, y0 + size], [x0, y0 + size]], float)


@pytest.fixture
def one_cell():
    """Unit square with its center as cell point: four boundary faces with tau = 2."""
    return mesh_from_polygons(np.array([[0.5, 0.5]]), [square(0, 0)])


@pytest.fixture
def two_cells():
    """Two unit squares sharing the edge x = 1."""
    return mesh_from_polygons(np.array([[0.5, 0.5], [1.5, 0.5]]), [square(0, 0), square(1, 0)])


@pytest.fixture
def five_cells():
    """Plus-shaped arrangement of five unit squares."""
    origins = [(1, 1), (0, 1), (2, 1), (1, 0), (1, 2)]
    points = np.array([(x + 0.5, y + 0.5) for x, y in origins])
    return mesh_from_polygons(points, [square(x, y) for x, y in origins])


@pytest.fixture(scope="session")
def disk_mesh_small():
    return generate_mesh(DomainSpec.disk(10), 200, seed=0)


@pytest.fixture(scope="session")
def disk_mesh_2000():
    return generate_mesh(DomainSpec.disk(10), 2000, seed=0)


@pytest.fixture(scope="session")
def annulus_mesh_5000():
    return generate_mesh(DomainSpec.annulus(5, 20), 5000, seed=0)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
