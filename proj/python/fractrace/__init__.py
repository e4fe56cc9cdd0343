"""Python front end for the fractrace command layer.

Every helper takes plain dicts for gauge and sequence specs and returns the
command's JSON document as a dict.
"""

import json

from ._core import (
    HypothesisRejected,
    InfeasibleInput,
    InvalidSpec,
    ResolutionError,
    commands,
    version,
)
from ._core import run as _run

__all__ = [
    "HypothesisRejected",
    "InfeasibleInput",
    "InvalidSpec",
    "ResolutionError",
    "Result",
    "commands",
    "run",
    "version",
    "analyze",
    "indices",
    "gauge_check",
    "build_set",
    "verify_measure",
    "cover",
    "atom_check",
    "moment_correct",
    "density_curve",
    "couple",
]


class Result(dict):
    """Command document plus the CSV table, resolved parameters and exit code."""

    csv = ""
    parameters = None
    exit_code = 0


def run(command, **args):
    """Run any command; keyword names use underscores for dashes (k_lo -> k-lo)."""
    payload = {k.replace("_", "-"): v for k, v in args.items()}
    doc, csv, params, code = _run(command, json.dumps(payload))
    out = Result(json.loads(doc))
    out.csv = csv
    out.parameters = json.loads(params)
    out.exit_code = code
    return out


def analyze(gauge, sigma, p, q, porosity="auto"):
    return run("analyze", gauge=gauge, sigma=sigma, p=p, q=q, porosity=porosity)


def indices(sigma, v=(), jmax=64):
    return run("indices", sigma=sigma, v=list(v), jmax=jmax)


def gauge_check(gauge, **kw):
    return run("gauge-check", gauge=gauge, **kw)


def build_set(gauge, depth=12):
    return run("build-set", gauge=gauge, depth=depth)


def verify_measure(gauge, depth=12, samples=200, seed=0, **kw):
    return run("verify-measure", gauge=gauge, depth=depth, samples=samples, seed=seed, **kw)


def cover(gauge, depth=12, **kw):
    return run("cover", gauge=gauge, depth=depth, **kw)


def atom_check(sigma, p, **kw):
    return run("atom-check", sigma=sigma, p=p, **kw)


def moment_correct(gauge, sigma, p, **kw):
    return run("moment-correct", gauge=gauge, sigma=sigma, p=p, **kw)


def density_curve(mode, sigma, **kw):
    return run("density-curve", mode=mode, sigma=sigma, **kw)


def couple(gauge, p, q=None):
    return run("couple", gauge=gauge, p=p, q=q)
