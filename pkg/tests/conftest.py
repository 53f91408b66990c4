import os

import numpy as np
import pytest

from qmhd import FlowState, make_grid

EXTENDED = os.environ.get("QMHD_EXTENDED", "") not in ("", "0", "false", "no")


def pytest_collection_modifyitems(config, items):
    if EXTENDED:
        return
    skip = pytest.mark.skip(reason="extended benchmark; set QMHD_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


def state_from(grid, u1=0.0, u2=0.0, p=0.0, T=0.0):
    """FlowState from callables of the mesh (X1, X2) or constants."""
    X1, X2 = grid.mesh()

    def ev(f):
        v = f(X1, X2) if callable(f) else f
        return np.broadcast_to(np.asarray(v, dtype=float), grid.shape).copy()

    return FlowState.from_arrays(grid, ev(u1), ev(u2), ev(p), ev(T))


@pytest.fixture
def planar12():
    return make_grid("planar", 12, 12)


@pytest.fixture
def cyl12():
    return make_grid("cylindrical", 12, 22)
