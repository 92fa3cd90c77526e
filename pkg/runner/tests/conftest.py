import psutil
import pytest


@pytest.fixture(autouse=True)
def no_orphan_workers():
    """Every test must reap its workers; leftover children fail the test."""
    yield
    me = psutil.Process()
    stragglers = [
        child
        for child in me.children(recursive=True)
        if any("mapforge_runner.worker" in part for part in child.cmdline())
    ]
    for child in stragglers:
        child.kill()
    assert not stragglers, f"orphan worker processes left behind: {stragglers}"
