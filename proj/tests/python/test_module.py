import math

import pytest

import fractrace
from conftest import CANTOR, geometric


def test_version_and_commands():
    assert fractrace.version()
    names = {c["name"] if isinstance(c, dict) else c for c in fractrace.commands()}
    assert {"analyze", "cover", "density-curve", "couple"} <= names


def test_analyze_trace_and_dense():
    assert fractrace.analyze(CANTOR, geometric(0.5), 2, 2)["outcome"] == "TraceExists"
    assert fractrace.analyze(CANTOR, geometric(0.0), 2, 2)["outcome"] == "Dense"


def test_counterexample_class():
    h = {"family": "log_only", "b": -0.5, "n": 1}
    trace = fractrace.analyze(h, {"family": "power_log", "s": 0, "kappa": 0.75}, 0.5, 1)
    conj = fractrace.analyze(h, {"family": "power_log", "s": 0, "kappa": 0.3}, 0.5, 1)
    assert trace["outcome"] == "TraceExists"
    assert conj["outcome"] == "ConjecturedDense"


def test_blocks_closed_form():
    res = fractrace.density_curve("blocks", geometric(0), q=2, blocks=100)
    rows = [line.split(",") for line in res.csv.strip().splitlines()[1:]]
    assert len(rows) == 100
    for row in rows:
        k, bound = float(row[0]), float(row[4])
        assert abs(bound - k ** -0.5) <= 1e-12 * k ** -0.5


def test_build_set_counts():
    res = fractrace.build_set(CANTOR, depth=10)
    assert res["counts"][10] == 79
    assert res.exit_code == 0


def test_run_replays_from_parameters():
    first = fractrace.run("verify-measure", gauge=CANTOR, depth=10, samples=30, seed=4)
    again = fractrace.run("verify-measure", **{k.replace("-", "_"): v for k, v in first.parameters.items()})
    assert first == again
    assert first.csv == again.csv


def test_errors_are_typed():
    with pytest.raises(fractrace.InvalidSpec):
        fractrace.run("analyze", gauge=CANTOR, sigma=geometric(0), p=2)
    with pytest.raises(fractrace.InfeasibleInput):
        fractrace.build_set({"family": "power_log", "d": 2.0, "b": 0.0, "n": 1})
    with pytest.raises(fractrace.HypothesisRejected):
        fractrace.couple(CANTOR, 0.5)
    assert issubclass(fractrace.InvalidSpec, ValueError)


def test_couple_classical():
    res = fractrace.couple(CANTOR, 2)
    d = math.log(2) / math.log(3)
    assert abs(res["classical_s"] - (1 - d) / 2) < 1e-15
    assert res["q_D"] == 1
