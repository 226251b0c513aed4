"""Result lines for the acceptance suite, printed in the terminal summary."""

import time

LINES: list[str] = []


def timed(fn, repeats=1):
    """Run ``fn`` ``repeats`` times; return its last result and the fastest wall time."""
    best = float("inf")
    out = None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return out, best


def record(number: int, title: str, checks: dict, seconds: float, budget: float) -> None:
    """Store one PASS/FAIL line and fail the calling test when a check or the budget fails."""
    checks = dict(checks)
    checks[f"runtime {seconds:.3g}s < {budget:g}s"] = seconds < budget
    failed = [k for k, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    detail = "; ".join(failed) if failed else f"{len(checks)} checks, {seconds:.3g}s"
    LINES.append(f"[{status}] criterion {number:2d}: {title} ({detail})")
    assert not failed, f"criterion {number} failed: {failed}"
