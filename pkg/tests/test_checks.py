"""Check orchestration: configs, recipes, reports, canonical JSON."""

import json

import pytest

from ellrmx.checks import (
    CHECK_NAMES,
    CheckConfig,
    CheckReport,
    ConfigError,
    render_json,
    run_check,
    run_dict,
)

FAST = CheckConfig(check="fay", trials=3)


def run_one(name: str, **kw) -> CheckReport:
    defaults = dict(check=name, n=2, m=2, trials=3)
    defaults.update(kw)
    run = run_check(CheckConfig(**defaults))
    assert len(run.reports) == 1
    return run.reports[0]


class TestConfigValidation:
    def test_unknown_check_rejected(self):
        with pytest.raises(ConfigError, match="unknown check"):
            CheckConfig(check="frobnicate").validate()

    def test_site_budget_enforced(self):
        with pytest.raises(ConfigError, match="exceeds"):
            CheckConfig(check="ybe", n=5, m=3).validate()

    def test_tau_floor_enforced(self):
        with pytest.raises(ConfigError, match="convergence floor"):
            CheckConfig(check="ybe", tau=0.5 + 0.1j).validate()

    def test_positive_tolerance_required(self):
        with pytest.raises(ConfigError, match="positive"):
            CheckConfig(check="ybe", tol=0.0).validate()

    def test_at_least_one_trial(self):
        with pytest.raises(ConfigError, match="trial"):
            CheckConfig(check="ybe", trials=0).validate()

    def test_default_tolerances_split_by_kind(self):
        cfg = CheckConfig(check="all")
        assert cfg.effective_tol("ybe") == 1e-9
        assert cfg.effective_tol("rll") == 1e-8
        assert cfg.effective_tol("tv-reduce") == 1e-8

    def test_explicit_tolerance_wins(self):
        cfg = CheckConfig(check="rll", tol=1e-3)
        assert cfg.effective_tol("rll") == 1e-3


class TestResidualChecks:
    def test_fay_passes(self):
        rep = run_one("fay")
        assert rep.passed and rep.max_residual < 1e-12

    def test_ybe_passes(self):
        rep = run_one("ybe", n=3)
        assert rep.passed and rep.max_residual < 1e-12

    def test_dybe_felder_passes(self):
        rep = run_one("dybe-felder", m=3)
        assert rep.passed and rep.max_residual < 1e-12

    def test_dybe_slnm_passes(self):
        rep = run_one("dybe-slnm")
        assert rep.passed and rep.max_residual < 1e-12

    def test_sklyanin_rep_passes(self):
        rep = run_one("sklyanin-rep", n=3)
        assert rep.passed and rep.max_residual < 1e-12

    def test_fixed_hbar_is_used(self):
        rep = run_one("ybe", hbar=0.21 + 0.13j)
        assert rep.passed


class TestSpanChecks:
    def test_rll_matches_reference_span(self):
        rep = run_one("rll", trials=2)
        assert rep.passed and rep.max_residual < 1e-10
        assert rep.rank == 120

    def test_rll_small_sizes_rank(self):
        assert run_one("rll", n=2, m=1, trials=2).rank == 6
        assert run_one("rll", n=1, m=2, trials=2).rank == 6

    def test_rll_trivial_size_passes_vacuously(self):
        rep = run_one("rll", n=1, m=1, trials=2)
        assert rep.passed and rep.rank == 0

    def test_rll_without_exp_factor_fails(self):
        rep = run_one("rll", n=2, m=1, trials=2, l_exp_factor=False)
        assert not rep.passed
        assert rep.max_residual > 1e-3

    def test_relations_rank_is_flat_count(self):
        rep = run_one("relations", trials=2)
        assert rep.passed and rep.rank == 120


class TestReductionChecks:
    def test_tv_reduce_pins_n(self):
        rep = run_one("tv-reduce", n=3, m=2)
        assert rep.n == 1 and rep.m == 2
        assert rep.passed and rep.rank == 6

    def test_bb_reduce_pins_m(self):
        rep = run_one("bb-reduce", n=3, m=3)
        assert rep.n == 3 and rep.m == 1
        assert rep.passed

    def test_tv_reduce_trivial_m(self):
        rep = run_one("tv-reduce", m=1)
        assert rep.passed and rep.rank == 0


class TestAllAndReports:
    def test_all_runs_every_check_in_order(self):
        run = run_check(CheckConfig(check="all", trials=1))
        assert tuple(r.check for r in run.reports) == CHECK_NAMES
        assert run.passed

    def test_subcheck_of_all_matches_standalone(self):
        whole = run_check(CheckConfig(check="all", trials=2))
        solo = run_check(CheckConfig(check="dybe-slnm", trials=2))
        inside = next(r for r in whole.reports if r.check == "dybe-slnm")
        assert inside.residuals == solo.reports[0].residuals

    def test_report_aggregates(self):
        rep = CheckReport(
            check="ybe", n=2, m=1, tol=1e-9,
            residuals=(1e-12, 3e-12, None), rank=None, runtime_ms=5.0,
        )
        assert rep.max_residual == 3e-12
        assert rep.mean_residual == pytest.approx(2e-12)
        assert not rep.passed  # the None trial taints the run

    def test_render_json_is_canonical(self):
        run = run_check(FAST)
        text = render_json(run)
        assert text.endswith("\n")
        data = json.loads(text)
        assert data["schema"] == "ellrmx-report/1"
        assert data["generator"] == "numpy-pcg64"
        assert data["runtime_ms"] is None
        assert data["checks"][0]["runtime_ms"] is None
        assert len(data["checks"][0]["residuals"]) == FAST.trials
        assert json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n" == text

    def test_config_echo_round_trip(self):
        cfg = CheckConfig(check="ybe", n=3, m=1, hbar=0.2 + 0.1j, trials=2, seed=9)
        data = run_dict(run_check(cfg))
        echo = data["config"]
        assert echo["n"] == 3 and echo["m"] == 1
        assert echo["hbar"] == [0.2, 0.1]
        assert echo["seed"] == 9
        assert data["check"] == "ybe"

    def test_repeat_runs_identical(self):
        cfg = CheckConfig(check="dybe-felder", trials=3, seed=5)
        assert run_dict(run_check(cfg)) == run_dict(run_check(cfg))
