"""Result-table formatting: ID, inequality, value with error, significance."""

from __future__ import annotations

import json
import math

from .tables import BellResult

INEQUALITY_LABELS = {
    "chsh": "S <= 2",
    "steering": "S16 <= 0.511",
    "bilocal": "B <= 1",
    "timebin": "K <= 0",
    "mdl": "I0 > 0",
}

HEADER = ("ID", "Inequality", "Result", "Stat. Sig.")


def format_sigma(sigma: float) -> str:
    if math.isinf(sigma):
        return "inf"
    if abs(sigma) >= 10:
        return f"{sigma:.0f}σ"
    return f"{sigma:.1f}σ"


def format_value(kind: str, result: BellResult) -> str:
    symbol = {"chsh": "S", "steering": "S16", "bilocal": "B",
              "timebin": "K", "mdl": "I0"}[kind]
    if kind == "timebin":
        scale = 1e-4
        return (f"{symbol} = ({result.value / scale:.2f} "
                f"± {result.stderr / scale:.2f})e-4")
    digits = {"chsh": 4, "steering": 3, "bilocal": 4, "mdl": 3}[kind]
    return (f"{symbol} = {result.value:.{digits}f} "
            f"± {result.stderr:.{digits}f}")


def format_row(lab_id: str, kind: str, result: BellResult) -> str:
    return "\t".join([
        lab_id, INEQUALITY_LABELS[kind], format_value(kind, result),
        format_sigma(result.sigma),
    ])


def format_table(rows: list[tuple[str, str, BellResult]]) -> str:
    lines = ["\t".join(HEADER)]
    for lab_id, kind, result in rows:
        lines.append(format_row(lab_id, kind, result))
    return "\n".join(lines)


def format_json_lines(rows: list[tuple[str, str, BellResult]]) -> str:
    lines = []
    for lab_id, kind, result in rows:
        lines.append(json.dumps({
            "id": lab_id, "inequality": kind, "value": result.value,
            "bound": result.bound, "stderr": result.stderr, "sigma": result.sigma,
        }, separators=(",", ":")))
    return "\n".join(lines)
