import io
import logging
from pathlib import Path

import pandas as pd
import streamlit as st

from obcs.config import BENCH_KINDS
from obcs.formatters import format_db, format_number, format_percent, format_seconds
from obcs.harness import aggregate, load_results

logger = logging.getLogger(__name__)

DEFAULT_RESULTS = "results/accuracy.csv"

# Page configuration
st.set_page_config(
    page_title="Benchmark Results",
    page_icon="📊",
    layout="wide",
    initial_sidebar_state="expanded"
)

# Sidebar
with st.sidebar:
    st.title("One-bit CS")
    st.caption("Single Recovery and First Index Study are in the page list above")
    st.divider()
    results_path = st.text_input("Results CSV", value=DEFAULT_RESULTS)
    uploaded_file = st.file_uploader("...or upload one", type=["csv"])
    kind = st.selectbox("Aggregate as", options=list(BENCH_KINDS))

# Header
st.title("Benchmark Results")
st.caption("Rows written by `python -m obcs bench`, one per trial and algorithm")


@st.cache_data(ttl=600)
def get_results(path):
    return load_results(path)


def read_rows():
    try:
        if uploaded_file is not None:
            return load_results(uploaded_file)
        if not Path(results_path).exists():
            st.info(f"No results at `{results_path}` yet. Run `python -m obcs bench accuracy` first.")
            return None
        return get_results(results_path)
    except Exception as e:
        logger.exception("could not load results")
        st.error(f"Error loading results: {str(e)}")
        return None


rows = read_rows()

if rows is not None:
    summary = aggregate(rows, kind)
    ok = rows[rows["status"] == "ok"]

    # ---- SUMMARY METRICS SECTION ----
    st.subheader("Summary")
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("Rows", format_number(len(rows), 0))
    with col2:
        st.metric("Algorithms", ", ".join(sorted(rows["algorithm"].unique())))
    with col3:
        exact = int((ok["snr_db"] == float("inf")).sum())
        st.metric("Exact recoveries", format_number(exact, 0), delta=format_percent(exact / max(len(ok), 1)),
                  delta_color="off")
    with col4:
        st.metric("Mean Hamming error", format_percent(ok["hamming_error"].mean(), 2))

    # ---- PER-ALGORITHM SNAPSHOT ----
    st.subheader("By algorithm")
    columns = st.columns(max(ok["algorithm"].nunique(), 1))
    for col, (algorithm, group) in zip(columns, ok.groupby("algorithm")):
        finite = group["snr_db"][group["snr_db"].abs() != float("inf")]
        with col:
            st.metric(algorithm, format_db(finite.mean() if len(finite) else float("nan")))
            st.caption(f"median time {format_seconds(group['wall_time'].median())}")

    # ---- AGGREGATE TABLE ----
    st.subheader(f"{kind.capitalize()} aggregate")
    st.dataframe(summary, use_container_width=True, hide_index=True)

    output = io.BytesIO()
    with pd.ExcelWriter(output, engine="openpyxl") as writer:
        summary.to_excel(writer, sheet_name="aggregate", index=False)
        rows.to_excel(writer, sheet_name="rows", index=False)
    output.seek(0)
    st.download_button(
        label="Download as Excel",
        data=output,
        file_name=f"{kind}_results.xlsx",
        mime="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet"
    )

    with st.expander("All rows"):
        st.dataframe(rows, use_container_width=True, hide_index=True)

    failed = rows[rows["status"] != "ok"]
    if len(failed):
        st.warning(f"{len(failed)} rows recorded an error")
        st.dataframe(failed[["algorithm", "sweep_value", "trial", "trial_seed", "status"]], hide_index=True)
