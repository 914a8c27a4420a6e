import sys

import pytest


@pytest.fixture(autouse=True)
def vvc_bin_env(monkeypatch):
    """Point the adapter at the server in the current interpreter's env."""
    monkeypatch.setenv("VVC_BIN", f"{sys.executable} -m voltvar.cli")
