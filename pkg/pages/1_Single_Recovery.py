import logging

import pandas as pd
import streamlit as st

from obcs.config import KNOWN_ALGORITHMS, ExperimentConfig
from obcs.formatters import format_db, format_number, format_percent, format_seconds
from obcs.harness import run_algorithm
from obcs.metrics import evaluate
from obcs.model import generate_instance
from obcs.reduction import certify_solution

logger = logging.getLogger(__name__)

# Page configuration
st.set_page_config(
    page_title="Single Recovery",
    page_icon="🎯",
    layout="wide",
    initial_sidebar_state="expanded"
)

st.title("🎯 Single Recovery")
st.markdown("Generate one seeded instance, recover it and inspect the certificate and the iteration trace. "
            "Use a `trial_seed` from a results CSV to replay that trial.")

col1, col2, col3, col4, col5 = st.columns(5)
with col1:
    n = st.number_input("n", min_value=2, max_value=2000, value=200, step=10)
with col2:
    m = st.number_input("m", min_value=1, max_value=4000, value=400, step=10)
with col3:
    s = st.number_input("s", min_value=1, max_value=int(n), value=min(5, int(n)), step=1)
with col4:
    seed = st.number_input("Seed", min_value=0, value=0, step=1)
with col5:
    algorithm = st.selectbox("Algorithm", options=list(KNOWN_ALGORITHMS))


@st.cache_data(ttl=600)
def recover(m, n, s, seed, algorithm):
    signal, ensemble = generate_instance(m, n, s, seed)
    cfg = ExperimentConfig(n=n, sweep_values=(1.0,), s=s, algorithms=(algorithm,))
    result = run_algorithm(algorithm, ensemble.A, ensemble.y, s, cfg)
    cert = certify_solution(result.x_raw, ensemble.A, ensemble.y, s=s)
    record = evaluate(result, signal, ensemble, trial_seed=seed)
    trace = pd.DataFrame(
        [{"iteration": step.iteration, "indices": ", ".join(str(i + 1) for i in step.indices),
          "residual": step.residual} for step in result.trace]
    )
    comparison = pd.DataFrame({
        "index": [i + 1 for i in sorted(set(signal.support.tolist()) | set(result.support))],
    })
    comparison["true"] = [signal.values[i - 1] for i in comparison["index"]]
    comparison["recovered"] = [result.x_unit[i - 1] for i in comparison["index"]]
    return result, cert, record, trace, comparison


if st.button("Recover"):
    with st.spinner("Recovering..."):
        try:
            result, cert, record, trace, comparison = recover(int(m), int(n), int(s), int(seed), algorithm)
        except Exception as e:
            logger.exception("recovery failed")
            st.error(f"Recovery failed: {str(e)}")
            st.stop()

    st.subheader("Metrics")
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("SNR", format_db(record.snr_db))
    with col2:
        st.metric("Hamming error", format_percent(record.hamming_error, 2))
    with col3:
        st.metric("Missed / misidentified", f"{record.missed} / {record.misidentified}")
    with col4:
        st.metric("Wall time", format_seconds(record.wall_time))

    st.subheader("Certificate")
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("Consistent", "yes" if cert.consistent else "no")
    with col2:
        st.metric("Sparsity", f"{cert.sparsity} / {int(s)}")
    with col3:
        st.metric("‖Ax‖₁", format_number(cert.l1_of_Ax, 6))
    with col4:
        st.metric("Stop reason", result.stop_reason)

    col1, col2 = st.columns(2)
    with col1:
        st.subheader("Trace")
        st.dataframe(trace, use_container_width=True, hide_index=True)
    with col2:
        st.subheader("Coefficients")
        st.dataframe(comparison, use_container_width=True, hide_index=True)
