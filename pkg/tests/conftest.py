from __future__ import annotations

import time

import numpy as np
import pytest

from asydim.heat import LaplacianModel, ProductLaplacianModel
from asydim.spaces import cycle_graph, path_graph

# Heat-trace windows used by the large fixtures.
T_GRID = np.geomspace(10.0, 1e4, 40)


def _spectral_model(graph):
    t0 = time.perf_counter()
    model = LaplacianModel(graph)
    model.spectrum()
    model.build_seconds = time.perf_counter() - t0
    return model


@pytest.fixture(scope="session")
def path4096():
    return _spectral_model(path_graph(4096))


@pytest.fixture(scope="session")
def cycle4096():
    return _spectral_model(cycle_graph(4096))


@pytest.fixture(scope="session")
def path_product512():
    factor = LaplacianModel(path_graph(512))
    return ProductLaplacianModel(factor, factor)


@pytest.fixture
def line21():
    from asydim.metric import MetricSpace
    return MetricSpace(np.arange(21, dtype=float)[:, None], "euclidean", basepoint=0)
