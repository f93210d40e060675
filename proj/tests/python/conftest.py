import os
import subprocess
from pathlib import Path

import pytest

SOURCE_DIR = Path(os.environ.get("XRSIM_SOURCE_DIR", Path(__file__).resolve().parents[2]))

# Short runs keep the smoke suite fast.
SHORT = ["duration_ms=2000", "warmup_ms=500"]


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("XRSIM_CLI")
    if not exe or not Path(exe).exists():
        pytest.skip("XRSIM_CLI not set")

    def invoke(*args, env=None, cwd=None):
        full_env = dict(os.environ)
        full_env.pop("XRSIM_OUT_DIR", None)
        if env:
            full_env.update(env)
        return subprocess.run([exe, *map(str, args)], capture_output=True, text=True, env=full_env, cwd=cwd)

    return invoke


def overrides(*extra):
    args = []
    for item in [*SHORT, *extra]:
        args += ["--set", item]
    return args
