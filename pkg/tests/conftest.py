from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hvseg.core import SegInstance

settings.register_profile(
    "default",
    max_examples=150,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def fix_1() -> SegInstance:
    return SegInstance(("h1",), ("v1",), {("h1", "v1")}, ("h1",))


def fix_cross(sigma_v=None) -> SegInstance:
    return SegInstance(
        ("h1", "h2", "h3"),
        ("a", "b", "c"),
        {("h1", "b"), ("h2", "a"), ("h2", "c"), ("h3", "b")},
        ("h1", "h2", "h3"),
        sigma_v,
    )


def fix_triangle() -> SegInstance:
    hs = ("h1", "h2", "h3", "h4", "h5")
    rows = {"h1": "abc", "h2": "ab", "h3": "bc", "h4": "ac", "h5": "abc"}
    return SegInstance(hs, ("a", "b", "c"), {(h, v) for h, vs in rows.items() for v in vs}, hs)


FIX_PQ_GROUND = ("a", "b", "c", "d", "e")
FIX_PQ_CONSTRAINTS = ({"a", "b"}, {"a", "b", "c"}, {"c", "d"}, {"d", "e"})


@st.composite
def seg_instances(draw, max_h=4, max_v=4):
    n_h = draw(st.integers(1, max_h))
    n_v = draw(st.integers(1, max_v))
    hs = tuple(f"h{i}" for i in range(1, n_h + 1))
    vs = tuple(f"v{j}" for j in range(1, n_v + 1))
    cells = [(h, v) for h in hs for v in vs]
    edges = draw(st.sets(st.sampled_from(cells)))
    sigma_h = tuple(draw(st.permutations(hs)))
    return SegInstance(hs, vs, frozenset(edges), sigma_h)


@pytest.fixture
def one():
    return fix_1()


@pytest.fixture
def cross():
    return fix_cross()


@pytest.fixture
def triangle():
    return fix_triangle()


# One summary line per acceptance criterion, pass or fail.
_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[number] = (title, "PASS" if report.outcome == "passed" else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, verdict = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
