import numpy as np
import pytest

from qspecnoise import _kernels


def random_density(dim, rng, rank=None):
    rank = rank or dim
    a = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def embed(op, qubit, n):
    """Dense ``I ⊗ op ⊗ I`` with qubit q as bit q of the basis index."""
    return np.kron(np.kron(np.eye(1 << (n - 1 - qubit)), op), np.eye(1 << qubit))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BACKENDS = {
    "numpy": dict(apply_kraus_1q=_kernels.apply_kraus_1q_numpy,
                  conjugate_diagonal=_kernels.conjugate_diagonal_numpy,
                  popcount_table=_kernels.popcount_table_numpy),
    "numba": dict(apply_kraus_1q=_kernels.apply_kraus_1q_numba,
                  conjugate_diagonal=_kernels.conjugate_diagonal_numba,
                  popcount_table=_kernels.popcount_table_numba),
}


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run a test once per kernel backend by patching the dispatch names."""
    for name, fn in BACKENDS[request.param].items():
        monkeypatch.setattr(_kernels, name, fn)
    return request.param


# -- acceptance reporting ----------------------------------------------------
# Tests marked ``criterion(k)`` get one PASS/FAIL line each, printed in the
# terminal summary.  A test can attach a detail string via ``criterion_detail``.

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.fixture
def criterion_detail(request):
    def note(text):
        request.node.user_properties.append(("detail", text))
        print(text)
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    k = mark.args[0]
    detail = "; ".join(v for key, v in item.user_properties if key == "detail")
    if rep.failed and rep.when == "call":
        detail = (detail + "; " if detail else "") + str(rep.longrepr.reprcrash.message).splitlines()[0]
    status = "PASS" if rep.passed else "FAIL"
    _CRITERIA[k] = f"criterion {k:2d}: {status}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
