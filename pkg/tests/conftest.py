import numpy as np
import pytest

from slicecalc import algebra, unit_structure, random_unit_imaginary


# -- independent oracles ----------------------------------------------------

def hamilton(a, b):
    """Quaternion product written out by hand, (w, x, y, z) order."""
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return np.array([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])


def hpow(q, k):
    out = np.array([1.0, 0, 0, 0])
    for _ in range(k):
        out = hamilton(out, q)
    return out


@pytest.fixture
def H():
    return algebra("quaternion")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_units(spec, rng, k):
    return [unit_structure(random_unit_imaginary(spec, rng), spec) for _ in range(k)]


# -- acceptance reporting ---------------------------------------------------

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        num, title = mark.args
        entry = _CRITERIA.setdefault(num, {"title": title, "parts": []})
        entry["parts"].append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        parts = entry["parts"]
        ok = all(p for _, p in parts)
        failed = [n for n, p in parts if not p]
        extra = "" if ok else "  failing: " + ", ".join(failed)
        tr.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {entry['title']}"
                      f" ({sum(p for _, p in parts)}/{len(parts)} parts){extra}")
