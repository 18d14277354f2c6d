import time
from contextlib import contextmanager

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from localncg.graph import Network

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA: dict[int, tuple[bool, float, str]] = {}


@contextmanager
def criterion(number: int, title: str):
    """Record a pass/fail line for an acceptance criterion; failures re-raise."""
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        _CRITERIA[number] = (ok, elapsed, title)
        print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {title}", flush=True)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, elapsed, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {title}")


@st.composite
def networks(draw, min_n=2, max_n=7, connected=True):
    """Random ownership-annotated networks, optionally forced connected by a spanning tree."""
    n = draw(st.integers(min_n, max_n))
    pairs = set()
    if connected:
        for v in range(1, n):
            pairs.add((draw(st.integers(0, v - 1)), v))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    pairs |= {(min(a, b), max(a, b)) for a, b in extra if a != b}
    flips = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Network(n, [(v, u) if f else (u, v) for (u, v), f in zip(sorted(pairs), flips)])
