import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from obcs.errors import DimensionError
from obcs.metrics import CSV_COLUMNS, evaluate, hamming_error, misidentified_count, missed_count, snr
from obcs.model import support_of
from obcs.strmp import StrmpConfig, run_strmp

E1 = np.array([1.0, 0.0, 0.0])


def test_snr_examples():
    assert snr(E1, E1) == math.inf
    assert snr(np.zeros(3), E1) == -math.inf
    assert snr(-E1, E1) == pytest.approx(10 * math.log10(1 / 4))
    estimate = np.array([math.sqrt(1 - 0.1 ** 2), 0.1, 0.0])
    shifted = estimate - np.array([0.0, 0.1, 0.0])
    assert snr(estimate, shifted) == pytest.approx(20.0)
    with pytest.raises(DimensionError):
        snr(E1, np.ones(2))


def test_support_counts():
    truth = np.array([1.0, 2.0, 0.0, 0.0, 0.0])
    assert missed_count(truth, truth) == 0
    assert missed_count(np.zeros(5), truth) == 2
    assert missed_count(np.array([0.0, 0.0, 1.0, 1.0, 0.0]), truth) == 2
    assert misidentified_count(np.ones(5), truth) == 3
    assert misidentified_count(np.array([0.0, 0.0, 1.0, 1.0, 0.0]), truth) == 2


sparse_vectors = arrays(np.float64, 8, elements=st.sampled_from([0.0, 0.0, 1.0, -2.5]))


@settings(max_examples=100, deadline=None)
@given(estimate=sparse_vectors, truth=sparse_vectors)
def test_counts_partition_symmetric_difference(estimate, truth):
    est = set(support_of(estimate).tolist())
    true = set(support_of(truth).tolist())
    assert missed_count(estimate, truth) + misidentified_count(estimate, truth) == len(est ^ true)


def test_hamming_error_examples(instance):
    signal, ensemble = instance
    assert hamming_error(signal.values, ensemble.A, ensemble.y) == 0
    assert hamming_error(-signal.values, ensemble.A, ensemble.y) == 1
    flipped = ensemble.y.copy()
    flipped[3] *= -1
    assert hamming_error(signal.values, ensemble.A, flipped) == pytest.approx(1 / ensemble.m)
    with pytest.raises(DimensionError):
        hamming_error(signal.values[:-1], ensemble.A, ensemble.y)


def test_evaluate_row(instance):
    signal, ensemble = instance
    result = run_strmp(ensemble.A, ensemble.y, StrmpConfig(s=signal.s))
    record = evaluate(result, signal, ensemble, trial_seed=42)
    row = record.to_row()
    assert list(row) == CSV_COLUMNS
    assert row["trial_seed"] == 42 and row["algorithm"] == "strmp"
    assert record.missed <= signal.s and record.misidentified <= ensemble.n - signal.s
    assert record.hamming_error * ensemble.m == pytest.approx(round(record.hamming_error * ensemble.m), abs=1e-9)
    assert record.l2_error_unit == pytest.approx(np.linalg.norm(result.x_unit - signal.values))
