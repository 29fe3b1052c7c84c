import logging

import streamlit as st

from obcs.formatters import format_number, format_percent
from obcs.harness import first_index_trend, run_first_index_study

logger = logging.getLogger(__name__)

# Page configuration
st.set_page_config(
    page_title="First Index Study",
    page_icon="🔎",
    layout="wide",
    initial_sidebar_state="expanded"
)

st.title("🔎 First Index Study")
st.markdown("How often does the largest |A_iᵀy| fall inside the true support? "
            "Each m gets its own seeded trials; the bound column is the sufficient number of measurements "
            "at ε = 1.")

col1, col2, col3, col4 = st.columns(4)
with col1:
    n = st.number_input("n", min_value=10, max_value=5000, value=1000, step=100)
with col2:
    s = st.number_input("s", min_value=1, max_value=int(n) - 1, value=15, step=1)
with col3:
    trials = st.number_input("Trials per m", min_value=1, max_value=1000, value=50, step=10)
with col4:
    seed = st.number_input("Seed", min_value=0, value=0, step=1)

m_text = st.text_input("m values", value="30, 60, 90, 120, 150, 200")


@st.cache_data(ttl=600)
def get_study(n, s, m_values, trials, seed):
    return run_first_index_study(n, s, m_values, trials, seed)


if st.button("Run study"):
    try:
        m_values = tuple(int(v) for v in m_text.split(",") if v.strip())
        with st.spinner("Sampling..."):
            study = get_study(int(n), int(s), m_values, int(trials), int(seed))
    except Exception as e:
        logger.exception("first index study failed")
        st.error(f"Error running study: {str(e)}")
        st.stop()

    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Best success rate", format_percent(study["success_rate"].max()))
    with col2:
        st.metric("Measurement bound", format_number(study["bound"].iloc[0], 0))
    with col3:
        st.metric("Spearman(rate, m)", format_number(first_index_trend(study), 3))

    st.dataframe(study, use_container_width=True, hide_index=True)
