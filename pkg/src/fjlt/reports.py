"""Report rendering: commented key=value header plus CSV body.

Every report opens with the re-runnable command line and the full
configuration, so any row can be reproduced by re-running with the echoed
arguments. Floats are rendered with repr() (shortest round-trip), which
makes reports byte-stable across runs with the same seeds.
"""

import numpy as np

__all__ = ["format_value", "render_report", "write_report"]


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (tuple, list, np.ndarray)):
        return ";".join(format_value(x) for x in v)
    return str(v)


def render_report(config: dict, columns: list[str], rows: list[tuple]) -> str:
    lines = ["# fjlt report v1"]
    for key, value in config.items():
        lines.append(f"# {key} = {format_value(value)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_report(path, config: dict, columns: list[str], rows: list[tuple]) -> None:
    text = render_report(config, columns, rows)
    with open(path, "w", newline="\n") as f:
        f.write(text)


def parse_report_header(path) -> dict:
    """Recover the key=value header of a report (for re-run checks)."""
    config = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                config[key.strip()] = value.strip()
    return config
