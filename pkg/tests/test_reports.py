import pytest

from cohpurify.reports import SCENARIOS, SweepSpec, compare, grid_values, sweep


def test_grid_values():
    assert grid_values(0, 5, 1) == [0, 1, 2, 3, 4, 5]
    g = grid_values(0, 5, 0.1)
    assert len(g) == 51 and g[10] == 1.0 and g[30] == 3.0 and g[-1] == 5.0
    with pytest.raises(ValueError):
        grid_values(0, 1, 0)
    with pytest.raises(ValueError):
        grid_values(2, 1, 0.1)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(quantities=("nope",))
    with pytest.raises(ValueError):
        SweepSpec(mode="grid")


def test_default_sweep_spot_values():
    header, rows = sweep(SweepSpec(quantities=("n_apd", "s_apd", "n_det", "n_tailored", "n_pmp")))
    spot = {tuple(r[:2]): dict(zip(header, r)) for r in rows}[1.0, 3.0]
    assert spot["n_apd"] == pytest.approx(5 / 6, rel=1e-15)
    assert spot["n_tailored"] == 0.75


@pytest.mark.parametrize("name", ["two-copy-apd", "multicopy-M4-symmetric", "classical-pmp", "tailored"])
def test_compare_scenarios_pass(name):
    report = compare([name], samples=200_000, seed=3)
    assert report.passed, [c for c in report.cases if not c.passed] + report.errors
    assert report.max_abs_z() <= 4


def test_multicopy_symmetric_success_oracle():
    report = compare(["multicopy-M4-symmetric"], samples=200_000, seed=3)
    succ = [c for c in report.cases if c.quantity == "success"]
    for c in succ:
        n = float(c.case.split("=")[1])
        assert c.analytic == pytest.approx((1 / (1 + n)) ** 3)


def test_compare_unknown_scenario():
    with pytest.raises(ValueError):
        compare(["bogus"])


def test_all_scenarios_registered():
    assert {"two-copy-apd", "phase-locked-hom", "multicopy-M4-symmetric"} <= set(SCENARIOS)
