import pytest
from hypothesis import HealthCheck, settings

from tawcet.corpus import corpus_dir
from tawcet.fmt import load_model

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def corpus():
    return corpus_dir()


@pytest.fixture(scope="session")
def load(corpus):
    def _load(name):
        return load_model(corpus / name)
    return _load


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the summary hook prints them all at the end."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, title, ok, detail):
        lines.append((number, f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})"))
        return ok
    return record


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
