import numpy as np
import pytest

from qudit_cnc.field import SymplecticSpace


@pytest.fixture
def e1():
    return SymplecticSpace(1, 3)


@pytest.fixture
def e2():
    return SymplecticSpace(2, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    k = np.flatnonzero(np.abs(b) > atol)
    if k.size == 0:
        return np.allclose(a, 0, atol=atol)
    c = a.flat[k[0]] / b.flat[k[0]]
    return abs(abs(c) - 1) < atol and np.allclose(a, c * b, atol=atol)


def random_label(space, rng, nonzero=True):
    while True:
        a = tuple(int(x) for x in rng.integers(0, space.d, space.dim))
        if any(a) or not nonzero:
            return a


@pytest.fixture(scope="session")
def n2_orbits():
    from qudit_cnc.analysis import cnc_set_orbits

    return cnc_set_orbits(SymplecticSpace(2, 3))


def sample_points(space, rng, count):
    """Random phase points: enumerated seeds moved by random Clifford elements."""
    import itertools

    from qudit_cnc.clifford import act_on_phase_point, random_clifford
    from qudit_cnc.cnc import enumerate_phase_points

    base = list(itertools.islice(enumerate_phase_points(space), 0, 40000, 37))
    out = []
    for _ in range(count):
        p = base[int(rng.integers(len(base)))]
        out.append(act_on_phase_point(random_clifford(space, rng, depth=6), p))
    return out


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report_criterion():
    """Record one pass/fail line per acceptance criterion; printed at session end."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
