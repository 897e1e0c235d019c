"""Helper utilities for hyperbreg."""

import json
import math
from typing import Dict, Any, List, Sequence

import numpy as np
import yaml
from scipy.special import comb

from .exceptions import ValidationError


VALIDATION_SAMPLES = 19


def sample_times(horizon: float, count: int = VALIDATION_SAMPLES) -> np.ndarray:
    """Deterministic uniform sample of [0, horizon] including both endpoints."""
    return np.linspace(0.0, horizon, count)


def binomial(n: int, k: int) -> int:
    """Binomial coefficient, zero for out-of-range arguments."""
    if n < 0 or k < 0 or k > n:
        return 0
    return int(comb(n, k, exact=True))


def format_float(value: float) -> str:
    """Fixed scientific notation with 12 significant digits."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.11e}"


def observed_orders(errors: Sequence[float], widths: Sequence[float]) -> List[float]:
    """Observed convergence orders between consecutive refinement levels."""
    orders = [float("nan")]
    for i in range(1, len(errors)):
        prev, cur = errors[i - 1], errors[i]
        if prev <= 0.0 or cur <= 0.0:
            orders.append(float("nan"))
            continue
        orders.append(math.log(prev / cur) / math.log(widths[i - 1] / widths[i]))
    return orders


def format_duration(seconds: float) -> str:
    """Format duration in human-readable format."""
    if seconds < 1:
        return f"{seconds * 1000:.1f}ms"
    elif seconds < 60:
        return f"{seconds:.2f}s"
    else:
        minutes = int(seconds // 60)
        remaining_seconds = seconds % 60
        return f"{minutes}m {remaining_seconds:.1f}s"


def safe_yaml_load(data: str) -> Dict[str, Any]:
    """Load a flat YAML mapping with error handling."""
    try:
        loaded = yaml.safe_load(data)
    except yaml.YAMLError as e:
        raise ValidationError(f"Invalid config file: {e}")

    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ValidationError("Config file must contain a key-value mapping")
    return loaded


def _json_safe(data: Any) -> Any:
    if isinstance(data, float) and not math.isfinite(data):
        return None
    if isinstance(data, dict):
        return {key: _json_safe(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_json_safe(value) for value in data]
    if isinstance(data, np.generic):
        return _json_safe(data.item())
    return data


def safe_json_dumps(data: Any, pretty: bool = False) -> str:
    """Dump data to JSON, non-finite floats become null."""
    try:
        if pretty:
            return json.dumps(_json_safe(data), indent=2, ensure_ascii=False)
        return json.dumps(_json_safe(data), ensure_ascii=False)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Cannot serialize to JSON: {e}")


def extract_error_details(error: Exception) -> Dict[str, Any]:
    """Extract detailed error information."""
    return {
        'type': type(error).__name__,
        'message': str(error),
        'details': getattr(error, 'details', {})
    }


def merge_dicts(dict1: Dict[str, Any], dict2: Dict[str, Any]) -> Dict[str, Any]:
    """Merge two dictionaries, with dict2 taking precedence."""
    result = dict1.copy()
    result.update(dict2)
    return result
