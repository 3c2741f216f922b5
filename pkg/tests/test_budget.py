import pandas as pd
import pytest

from sympcool.core.budget import budget_table, parse_sweep, write_budget


def test_parse_sweep():
    axes = parse_sweep(["eta=0.1, 0.2", "cycles=0,10"])
    assert axes == {"eta": [0.1, 0.2], "cycles": [0.0, 10.0]}
    assert parse_sweep([]) == {}


@pytest.mark.parametrize(
    "spec, message",
    [("eta", "must read"), ("temperature=1", "unknown sweep axis"), ("eta=", "is empty"), ("eta=0.1,x", "non-numeric")],
)
def test_parse_sweep_errors(spec, message):
    with pytest.raises(ValueError, match=f"config_error: .*{message}"):
        parse_sweep([spec])


def test_default_table_reports_both_loss_regimes():
    frame = budget_table({})
    assert list(frame.columns) == ["eta", "nbar", "cycles", "eps", "gamma_thermal", "gamma_bound"]
    assert len(frame) == 2

    measured, target = frame.iloc[0], frame.iloc[1]
    assert measured["gamma_thermal"] == pytest.approx(5.922e-4, rel=1e-3)
    assert measured["gamma_bound"] == pytest.approx(5.922e-4 + 0.33, rel=1e-3)
    assert target["gamma_bound"] == pytest.approx(5.922e-4 + 1e-3, rel=1e-3)


def test_table_is_cartesian_product():
    frame = budget_table({"eta": [0.1, 0.14], "nbar": [0.05, 0.5, 1.0], "cycles": [0, 10], "eps": [1e-4]})
    assert len(frame) == 12
    zero_cycles = frame[frame["cycles"] == 0]
    assert (zero_cycles["gamma_bound"] == zero_cycles["gamma_thermal"]).all()


def test_elastic_fraction_axis_needs_scatter_block(scatter):
    with pytest.raises(ValueError, match="config_error"):
        budget_table({"elastic_fraction": [0.0, 0.5]})

    frame = budget_table({"elastic_fraction": [0.0, 0.5, 1.0]}, scatter)
    assert len(frame) == 6
    rows = frame[frame["eps"] == frame["eps"].iloc[0]]
    assert rows["r_decohering"].tolist() == pytest.approx([0.01639, 0.01639 / 2, 0.0], rel=2e-3)


def test_empty_axis_rejected():
    with pytest.raises(ValueError, match="config_error"):
        budget_table({"nbar": []})


def test_write_budget(tmp_path):
    path = write_budget(budget_table({}), tmp_path, {"config_hash": "abc", "seed": "1"})
    assert path.name == "budget.csv"
    assert pd.read_csv(path, comment="#").shape == (2, 6)
