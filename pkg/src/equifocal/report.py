"""Report format: deterministic JSON where each numeric travels with its tolerance."""
from __future__ import annotations

import json
import math
from pathlib import Path

SCHEMA_VERSION = "1.0"

# CSV columns of focal profiles: radius, multiplicity, min_singular_value
FOCAL_CSV_COLUMNS = ("radius", "multiplicity", "min_singular_value")


def _clean(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.10g}")
    return x


def measure(value, tol=None, relation: str = "<=") -> dict:
    """A numeric value with its tolerance.

    ``relation`` is "<=" or ">=" for bounds, "+-" for a value known to within
    ``tol`` and "==" for exact integers.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are reported directly, not as measurements")
    if isinstance(value, int):
        return {"value": value, "tol": 0 if tol is None else tol, "relation": "==" if tol is None else relation}
    return {"value": _clean(float(value)), "tol": _clean(float(tol)) if tol is not None else 0.0,
            "relation": relation}


def check_entry(name: str, outcomes: dict, metrics: dict, expect: dict, details=None) -> dict:
    """Combine observed boolean outcomes with declared expectations.

    A check passes when every outcome equals its expectation (default True).
    """
    mismatched = []
    rows = {}
    for key, observed in outcomes.items():
        want = expect.get(f"{name}.{key}", True)
        rows[key] = {"observed": bool(observed), "expected": bool(want)}
        if bool(observed) != bool(want):
            mismatched.append(key)
    entry = {"name": name, "passed": not mismatched, "outcomes": rows, "mismatched": mismatched,
             "metrics": metrics}
    if details is not None:
        entry["details"] = details
    return entry


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _sanitize(obj.tolist())
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return int(obj)
    if isinstance(obj, float):
        return _clean(obj)
    return str(obj)


def dumps(report: dict) -> str:
    return json.dumps(_sanitize(report), sort_keys=True, indent=2) + "\n"


def write(report: dict, csvs: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json"]
    paths[0].write_text(dumps(report))
    for name, text in sorted(csvs.items()):
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths


def summary_lines(report: dict) -> list[str]:
    lines = [f"scenario {report['scenario']} (seed {report['seed']['value']})"]
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        extra = f" mismatched: {', '.join(c['mismatched'])}" if c["mismatched"] else ""
        lines.append(f"  {status} {c['name']}{extra}")
    lines.append("all checks passed" if report["passed"] else "some checks failed")
    return lines
