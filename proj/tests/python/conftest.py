import json
import math
import os
import pathlib
import subprocess

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]

CANTOR = {"family": "power_log", "d": math.log(2) / math.log(3), "b": 0.0, "n": 1}


def geometric(s):
    return {"family": "power_log", "s": s, "kappa": 0.0}


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("FRACTRACE_CLI", str(ROOT / "build" / "tools" / "fractrace"))
    if not os.path.exists(path):
        pytest.skip("fractrace CLI not built")

    def call(*args, cwd=None):
        return subprocess.run([path, *map(str, args)], capture_output=True, text=True, cwd=cwd)

    return call


@pytest.fixture(scope="session")
def schemas():
    base = pathlib.Path(os.environ.get("FRACTRACE_SCHEMAS", ROOT / "schemas"))
    return {p.name[: -len(".schema.json")]: json.loads(p.read_text()) for p in base.glob("*.schema.json")}
