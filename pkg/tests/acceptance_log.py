"""Verdicts of the acceptance checks, collected for the terminal summary."""
from collections import OrderedDict
from contextlib import contextmanager

RESULTS = OrderedDict()     # criterion number -> {part: passed}


@contextmanager
def criterion(num, part="main"):
    """Record whether the enclosed block raised, then re-raise."""
    try:
        yield
    except BaseException:
        RESULTS.setdefault(num, OrderedDict())[part] = False
        print(f"criterion {num} [{part}]: FAIL")
        raise
    RESULTS.setdefault(num, OrderedDict())[part] = True
    print(f"criterion {num} [{part}]: PASS")


def summary_lines():
    lines = []
    for num in sorted(RESULTS):
        parts = RESULTS[num]
        verdict = "PASS" if all(parts.values()) else "FAIL"
        failed = [p for p, ok in parts.items() if not ok]
        detail = f" (failed: {', '.join(failed)})" if failed else f" ({len(parts)} checks)"
        lines.append(f"criterion {num:2d}: {verdict}{detail}")
    return lines
