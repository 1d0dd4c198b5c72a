"""Deterministic CSV/JSON emission for traces, ledgers and reports.

Byte-determinism matters: fixed header, fixed column order, floats through
repr-stable formatting, JSON with sorted keys and no whitespace drift.
"""

from __future__ import annotations

import json

ROUND_CSV_HEADER = "phase,round,n_in,n_out,ones_in,ones_out,bias_emp,bias_pred,steps"


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def records_to_csv(records):
    """Round trace as CSV with the fixed header; empty trace is header-only."""
    lines = [ROUND_CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.phase,
                    r.round,
                    r.n_in,
                    r.n_out,
                    r.ones_in,
                    r.ones_out,
                    r.bias_emp,
                    r.bias_pred,
                    r.steps,
                )
            )
        )
    return "\n".join(lines) + "\n"


def to_json(payload):
    """Canonical JSON: sorted keys, compact separators, trailing newline."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def orbit_to_csv(name, values):
    """Two-column orbit CSV: (i, value)."""
    lines = [f"i,{name}"]
    for i, v in enumerate(values):
        lines.append(f"{i},{_fmt(float(v))}")
    return "\n".join(lines) + "\n"


def write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)
