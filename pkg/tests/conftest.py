import numpy as np
import pytest

from corrbandit.scenarios import example2


@pytest.fixture
def ex2():
    return example2()


@pytest.fixture
def ex2_point():
    """Example-2 rewards with all mass on the first outcome."""
    return example2((1.0, 0.0, 0.0))


def random_model_args(rng: np.random.Generator, max_k: int = 5, max_j: int = 30):
    """Random K x J table on a coarse lattice so preimages collide often."""
    K = int(rng.integers(2, max_k + 1))
    J = int(rng.integers(1, max_j + 1))
    pmf = rng.random(J) * (rng.random(J) > 0.2)
    if pmf.sum() == 0:
        pmf[0] = 1.0
    rewards = rng.integers(0, 6, size=(K, J)) * 0.25
    return pmf, rewards


_criteria: dict[int, list[tuple[str, bool]]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    _criteria.setdefault(crit, []).append((report.nodeid.split("::")[-1], report.passed))


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_criteria):
        parts = _criteria[crit]
        ok = all(p for _, p in parts)
        failed = [name for name, p in parts if not p]
        tail = "" if ok else "  (failing: " + ", ".join(failed) + ")"
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}{tail}")
