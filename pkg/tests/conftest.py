import numpy as np
import pytest

from spincm import random_state


@pytest.fixture
def state32():
    """Generic desk-scale instance: 3 particles, spin dimension 2."""
    return random_state(3, 2, seed=7)


def offgrid_points(state, count, seed=1234, margin=0.3):
    """Deterministic evaluation points away from every pole."""
    rng = np.random.default_rng(seed)
    span = max(2.0, float(np.max(np.abs(state.x))) + 1.0)
    pts = []
    while len(pts) < count:
        cand = complex(rng.uniform(-span, span), rng.uniform(-span, span))
        if np.min(np.abs(cand - state.x)) > margin:
            pts.append(cand)
    return np.array(pts)
