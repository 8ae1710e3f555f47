from src.models.missing_data import BenchmarkPair, MissingDataBatch
from src.models.study import StudyConfig
from src.utils.errors import DataError, UsageError
from dotenv import dotenv_values
from pydantic import ValidationError as PydanticValidationError
from pathlib import Path
from typing import Dict, List, Union
import json
import logging
import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

UNIT_COLUMNS = ["event_name", "y", "r", "propensity"]
BENCHMARK_COLUMNS = ["event_name", "mu_source1", "mu_source2"]
MAX_DIAGNOSTICS = 10

PathLike = Union[str, Path]


def _read_csv(path: PathLike, columns: List[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=columns)
    except FileNotFoundError:
        raise DataError(f"{path}: file not found")
    except pd.errors.ParserError as e:
        raise DataError(f"{path}: malformed CSV: {str(e)}")
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        logger.error(f"{path}: missing columns {missing}")
        raise DataError(f"{path}: line 1: missing columns: {', '.join(missing)} (expected header {','.join(columns)})")
    return frame[columns]


def _numeric(frame: pd.DataFrame, column: str) -> pd.Series:
    return pd.to_numeric(frame[column].str.strip().replace("", np.nan), errors="coerce")


def _raise_diagnostics(path: PathLike, problems: List[str]):
    if problems:
        shown = problems[:MAX_DIAGNOSTICS]
        more = len(problems) - len(shown)
        suffix = f"\n... and {more} more" if more else ""
        logger.error(f"{path}: {len(problems)} schema violation(s)")
        raise DataError(f"{path}: schema violations:\n" + "\n".join(shown) + suffix)


def load_units(path: PathLike) -> Dict[str, MissingDataBatch]:
    """Unit CSV (event_name,y,r,propensity) grouped by event in first-appearance order."""
    frame = _read_csv(path, UNIT_COLUMNS)
    y = _numeric(frame, "y")
    r = _numeric(frame, "r")
    pi = _numeric(frame, "propensity")
    problems = []
    for i in range(len(frame)):
        line = i + 2
        if frame["event_name"].iat[i].strip() == "":
            problems.append(f"line {line}: event_name is empty")
        if r.iat[i] not in (0.0, 1.0):
            problems.append(f"line {line}: r must be 0 or 1, got {frame['r'].iat[i]!r}")
        if not (0.0 < pi.iat[i] <= 1.0):
            problems.append(f"line {line}: propensity must lie in (0, 1], got {frame['propensity'].iat[i]!r}")
        if r.iat[i] == 1.0 and not np.isfinite(y.iat[i]):
            problems.append(f"line {line}: observed y must be a finite number, got {frame['y'].iat[i]!r}")
    _raise_diagnostics(path, problems)

    names = frame["event_name"].str.strip()
    groups: Dict[str, MissingDataBatch] = {}
    for name in pd.unique(names):
        mask = (names == name).to_numpy()
        groups[name] = MissingDataBatch(y=y[mask].to_numpy(), r=r[mask].to_numpy(), pi=pi[mask].to_numpy())
    logger.info(f"Loaded {len(frame)} units in {len(groups)} event(s) from {path}")
    return groups


def load_benchmarks(path: PathLike) -> List[BenchmarkPair]:
    """Benchmark CSV (event_name,mu_source1,mu_source2), one row per group."""
    frame = _read_csv(path, BENCHMARK_COLUMNS)
    first = _numeric(frame, "mu_source1")
    second = _numeric(frame, "mu_source2")
    problems = []
    seen: Dict[str, int] = {}
    pairs = []
    for i in range(len(frame)):
        line = i + 2
        name = frame["event_name"].iat[i].strip()
        if name == "":
            problems.append(f"line {line}: event_name is empty")
            continue
        if name in seen:
            problems.append(f"line {line}: duplicate event_name {name!r} (first on line {seen[name]})")
            continue
        seen[name] = line
        try:
            pairs.append(BenchmarkPair(group_id=name, mu_source1=first.iat[i], mu_source2=second.iat[i], line=line))
        except PydanticValidationError:
            problems.append(f"line {line}: mu_source1 and mu_source2 must be finite numbers")
    _raise_diagnostics(path, problems)
    logger.info(f"Loaded {len(pairs)} benchmark group(s) from {path}")
    return pairs


def _parse_value(key: str, raw: str):
    """Text config values: comma lists become lists, delta_cov becomes a 2x2 matrix."""
    raw = raw.strip()
    if key in ("k_multipliers", "delta_mean", "delta_cov"):
        values = [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
        if key == "k_multipliers":
            return [int(v) for v in values]
        if key == "delta_cov":
            if len(values) != 4:
                raise ValueError("delta_cov needs 4 comma-separated values")
            return [[values[0], values[1]], [values[2], values[3]]]
        return values
    return raw


def load_study_config(path: PathLike, overrides: Dict = None) -> StudyConfig:
    """StudyConfig from JSON or KEY=value text; keys are case-insensitive, fit_* keys go to FitConfig."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{path}: config file not found")
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(path.read_text())
            if not isinstance(raw, dict):
                raise ValueError("top-level JSON value must be an object")
        else:
            raw = {k.lower(): _parse_value(k.lower(), v or "") for k, v in dotenv_values(path).items()}
    except ValueError as e:
        logger.error(f"{path}: unreadable config: {str(e)}")
        raise UsageError(f"{path}: unreadable config: {str(e)}")
    raw = {k.lower(): v for k, v in raw.items()}
    fit = dict(raw.pop("fit", {}) or {})
    for key in [k for k in raw if k.startswith("fit_")]:
        fit[key[len("fit_"):]] = raw.pop(key)
    if fit:
        raw["fit"] = fit
    raw.update(overrides or {})
    try:
        return StudyConfig(**raw)
    except PydanticValidationError as e:
        logger.error(f"{path}: invalid study config")
        raise UsageError(f"{path}: invalid study config: {e}")
