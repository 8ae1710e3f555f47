from src.config.env import env_config
from src.models.report import AnalysisReport
from src.models.study import StudyResult
from pathlib import Path
from typing import Any, Optional
import io
import json
import logging
import math
import pandas as pd

logger = logging.getLogger(__name__)


def round_sig(value: float, digits: int) -> float:
    if not math.isfinite(value) or value == 0.0:
        return value
    return float(f"{value:.{digits}g}")


def _round_tree(obj: Any, digits: int) -> Any:
    if isinstance(obj, float):
        return round_sig(obj, digits)
    if isinstance(obj, dict):
        return {k: _round_tree(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v, digits) for v in obj]
    return obj


def _csv(frame: pd.DataFrame, digits: int) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=f"%.{digits}g", lineterminator="\n")
    return buffer.getvalue()


def analysis_to_json(report: AnalysisReport, digits: Optional[int] = None) -> str:
    digits = digits or env_config.SIG_DIGITS
    payload = _round_tree(report.model_dump(mode="json"), digits)
    return json.dumps(payload, indent=2) + "\n"


def analysis_to_frame(report: AnalysisReport) -> pd.DataFrame:
    """One row per (event, method)."""
    rows = []
    for event in report.events:
        base = {
            "event_name": event.event_name,
            "n": event.n,
            "ipw_mean": event.ipw_mean,
            "complete_case_mean": event.complete_case_mean,
            "p_obs": event.summary.p_obs if event.summary else None,
            "sd_y": event.summary.sd_y if event.summary else None,
        }
        if event.skipped:
            rows.append({**base, "method": None, "level": report.level, "lower": None, "upper": None,
                         "warning": event.warning})
            continue
        for interval in event.intervals:
            rows.append({**base, "method": interval.method.value, "level": interval.level,
                         "lower": interval.lower, "upper": interval.upper, "warning": interval.warning})
    columns = ["event_name", "n", "ipw_mean", "complete_case_mean", "p_obs", "sd_y",
               "method", "level", "lower", "upper", "warning"]
    return pd.DataFrame(rows, columns=columns)


def analysis_to_csv(report: AnalysisReport, digits: Optional[int] = None) -> str:
    return _csv(analysis_to_frame(report), digits or env_config.SIG_DIGITS)


def study_to_frame(result: StudyResult) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "method": cell.method.value,
                "k": cell.k,
                "coverage": cell.coverage,
                "mean_width": cell.mean_width,
                "n_ok": cell.n_ok,
                "n_failed": cell.n_failed,
            }
            for cell in result.cells
        ],
        columns=["method", "k", "coverage", "mean_width", "n_ok", "n_failed"],
    )


def study_to_csv(result: StudyResult, digits: Optional[int] = None) -> str:
    return _csv(study_to_frame(result), digits or env_config.SIG_DIGITS)


def frame_to_csv(frame: pd.DataFrame, digits: Optional[int] = None) -> str:
    return _csv(frame, digits or env_config.SIG_DIGITS)


def emit(text: str, output: Optional[str], stream) -> None:
    """Write to the output path, or to stream when no path is given."""
    if output:
        Path(output).write_text(text)
        logger.info(f"Report written to {output}")
    else:
        stream.write(text)
