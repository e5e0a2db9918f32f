"""Collects the one-line verdicts of the acceptance suite for the terminal summary."""

LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})"
    LINES.append(line)
    print(line)
    return line
