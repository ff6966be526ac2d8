"""
JSON reports. Gamma values are decimal strings so no consumer rounds them;
see docs/CACHE_FORMAT.md for the schema.
"""

import json

REPORT_VERSION = 1


def render(rows):
    payload = {
        "report_version": REPORT_VERSION,
        "rows": [{**row, "gamma": str(row["gamma"])} for row in rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def parse(text):
    """Rows from a JSON report, with gamma back as an integer."""
    payload = json.loads(text)
    if payload.get("report_version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {payload.get('report_version')!r}")
    return [{**row, "gamma": int(row["gamma"])} for row in payload["rows"]]
