import numpy as np
import pytest

from obcs.model import generate_instance
from obcs.reduction import build_reduced_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def instance():
    """(signal, ensemble) with m=400, n=100, s=5."""
    return generate_instance(400, 100, 5, seed=7)


@pytest.fixture
def planted_reduction(instance):
    """Reduced problem built around a true support index, plus the truth."""
    signal, ensemble = instance
    j0 = int(signal.support[0])
    rp = build_reduced_problem(ensemble.A, ensemble.y, j0)
    return signal, ensemble, rp


def small_config_text(output_path, **extra):
    lines = [
        "n = 40",
        "sweep = m_over_n",
        "sweep_values = 1, 2",
        "s = 2",
        "trials = 2",
        "base_seed = 99",
        "algorithms = strmp, biht",
        f"output_path = {output_path}",
    ]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    return "\n".join(lines) + "\n"
