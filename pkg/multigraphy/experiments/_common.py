import json
import logging
import os

import pandas as pd

logger = logging.getLogger(__name__)

PLOT_COLUMNS = ["sweep", "x", "y", "series"]


def with_defaults(defaults, params):
    """Copy of ``defaults`` updated with ``params``; unknown keys are kept."""
    merged = dict(defaults)
    merged.update(params or {})
    return merged


def as_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def emit_results(params, metrics, summary, plot):
    """Write ``metrics.csv``, ``summary.json`` and ``plot.csv`` into
    ``params["output"]`` (nothing is written when it is None)."""
    output = params.get("output")
    params["metrics"] = metrics
    params["summary"] = summary
    params["plot"] = plot
    if output is None:
        return
    os.makedirs(output, exist_ok=True)
    metrics.to_csv(
        os.path.join(output, "metrics.csv"), index=False, float_format="%.10g"
    )
    plot.to_csv(
        os.path.join(output, "plot.csv"), index=False, float_format="%.10g"
    )
    with open(os.path.join(output, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    logger.info("results written to %s", output)


def plot_frame(rows):
    return pd.DataFrame(rows, columns=PLOT_COLUMNS)
