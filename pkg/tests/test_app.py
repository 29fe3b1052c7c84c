from pathlib import Path

import pytest

from obcs.config import ExperimentConfig
from obcs.harness import run_consistency_sweep

AppTest = pytest.importorskip("streamlit.testing.v1").AppTest

ROOT = Path(__file__).resolve().parents[1]


def test_results_page_without_results(tmp_path):
    at = AppTest.from_file(str(ROOT / "app.py")).run(timeout=30)
    at.sidebar.text_input[0].set_value(str(tmp_path / "none.csv")).run(timeout=30)
    assert not at.exception
    assert "No results" in at.info[0].value


def test_results_page_with_results(tmp_path):
    cfg = ExperimentConfig(n=30, sweep_values=(1.0, 2.0), s=2, trials=2, algorithms=("strmp", "biht"),
                           output_path=str(tmp_path / "rows.csv"))
    run_consistency_sweep(cfg)
    at = AppTest.from_file(str(ROOT / "app.py")).run(timeout=30)
    at.sidebar.text_input[0].set_value(cfg.output_path).run(timeout=30)
    at.sidebar.selectbox[0].set_value("consistency").run(timeout=30)
    assert not at.exception
    assert not at.error
    assert at.metric[0].value == "8"
    assert len(at.dataframe) >= 1


def test_single_recovery_page():
    at = AppTest.from_file(str(ROOT / "pages" / "1_Single_Recovery.py")).run(timeout=30)
    at.number_input[0].set_value(60)
    at.number_input[1].set_value(120)
    at.number_input[2].set_value(3)
    at.button[0].click().run(timeout=60)
    assert not at.exception
    assert not at.error
    assert [m.label for m in at.metric][:2] == ["SNR", "Hamming error"]


def test_first_index_page():
    at = AppTest.from_file(str(ROOT / "pages" / "2_First_Index_Study.py")).run(timeout=30)
    at.number_input[0].set_value(200)
    at.number_input[2].set_value(10)
    at.button[0].click().run(timeout=60)
    assert not at.exception
    assert not at.error
    assert len(at.dataframe) == 1
