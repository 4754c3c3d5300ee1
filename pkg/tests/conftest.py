import numpy as np
import pytest

from quasicomb.construction import run_stages


@pytest.fixture(scope="session")
def built_state():
    """Three-stage construction at the default configuration, shared by the
    construction, measure, and acceptance tests (it is the expensive part)."""
    return run_stages(stages=3)


@pytest.fixture(scope="session")
def warm_kernels():
    """Touch the jitted kernels once so compile time stays out of timings."""
    from quasicomb import _kernels
    from quasicomb.envelopes import Envelope

    env = Envelope(0.1, s=2)
    table = env.build_table(64.0)
    xs = np.linspace(-5, 5, 32)
    nodes = np.array([-1.0, 0.0, 1.0])
    coeffs = np.array([0.1, 1.0, 0.1])
    _kernels.kernel_batch(xs, 0.5, [], [], 2)
    _kernels.gram_matrix(nodes, 0.5, [], [])
    _kernels.windowed_eval(xs, nodes, coeffs, 0.5, [], [], table, 1)
    _kernels.windowed_eval_all(xs, nodes, coeffs, 0.5, [], [], table, 3)
    _kernels.cosine_sum(xs, nodes, coeffs)
    return True
