import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from duhl import Dataset, ProblemSpec, SyntheticSpec, gen_synthetic
from duhl.data import CLASSIFICATION

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ridge_fixture():
    """A = I_2, b = (1, 1), lambda = 1: optimum alpha = (1/3, 1/3), O* = 1/3."""
    data = Dataset(np.eye(2), np.array([1.0, 1.0]), "regression")
    return ProblemSpec.for_data("ridge", data, 1.0), data


def random_instance(family, seed, d=None, n=None, lam=None, eta=None):
    """Small random instance of any family; sizes and lambda drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(3, 12)) if d is None else d
    n = int(rng.integers(3, 12)) if n is None else n
    lam = float(10 ** rng.uniform(-2, 0)) if lam is None else lam
    kind = CLASSIFICATION if family == "svm" else "regression"
    data = gen_synthetic(SyntheticSpec(d, n, density=0.5, noise_std=0.1,
                                       column_scale_spread=float(rng.uniform(0, 3)),
                                       seed=int(rng.integers(2**31)), kind=kind))
    if family == "elastic-net" and eta is None:
        eta = float(rng.uniform(0.1, 0.9))
    return ProblemSpec.for_data(family, data, lam, eta), data


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion; printed in the terminal summary."""
    state = {}

    def record(number, ok, detail):
        state["line"] = (number, f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    yield record
    if "line" in state:
        number, line = state["line"]
        failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else False
        if failed and "PASS" in line:
            line = line.replace("PASS", "FAIL", 1)
        ACCEPTANCE_LINES[number] = line
    else:
        ACCEPTANCE_LINES[request.node.name] = f"{request.node.name}: FAIL  (errored before reporting)"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: (isinstance(k, str), k)):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
