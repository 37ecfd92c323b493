import warnings

import pytest

import curlmg as cm

# the calibrated edge damping exceeds the guaranteed-admissible bound by
# design; keep the advisory warning out of test noise
warnings.filterwarnings("ignore", category=cm.AdmissibilityWarning)


_HIERARCHY_CACHE: dict = {}


def get_hierarchy(domain, variant, levels, coeffs=None, eta=None, steps=1):
    """Session-wide hierarchy cache; building k=3 operators is expensive
    enough that tests share them."""
    if coeffs is None:
        coeffs = cm.CoefficientField(1.0, 1.0, 1.0, 1.0)
    key = (domain, variant, levels, coeffs, eta, steps)
    if key not in _HIERARCHY_CACHE:
        smoother = cm.SmootherConfig(variant, eta=eta)
        _HIERARCHY_CACHE[key] = cm.build_hierarchy(
            domain, levels, coeffs, smoother, steps=steps
        )
    return _HIERARCHY_CACHE[key]


@pytest.fixture(scope="session")
def cube_edge_k1():
    return get_hierarchy(cm.Domain.CUBE, cm.SmootherVariant.EDGE, 1)


@pytest.fixture(scope="session")
def cube_vertex_k1():
    return get_hierarchy(cm.Domain.CUBE, cm.SmootherVariant.VERTEX, 1)


@pytest.fixture(scope="session")
def cube_edge_k2():
    return get_hierarchy(cm.Domain.CUBE, cm.SmootherVariant.EDGE, 2)


@pytest.fixture(scope="session")
def fichera_edge_k1():
    return get_hierarchy(cm.Domain.FICHERA, cm.SmootherVariant.EDGE, 1)


@pytest.fixture(scope="session")
def fichera_vertex_k1():
    return get_hierarchy(cm.Domain.FICHERA, cm.SmootherVariant.VERTEX, 1)
