"""Condensation classifier for the weight series sum 1/(n w(n))."""

import numpy as np
import pytest

from franklinlab.multipliers import (MULTIPLIER_FAMILIES, MultiplierReport,
                                     check_multiplier_condition)


def test_log_diverges():
    rep = check_multiplier_condition("log")
    assert rep.verdict == "diverges"
    assert rep.depth == 1
    assert rep.passed


def test_log_loglog_diverges_at_depth_two():
    rep = check_multiplier_condition("log-loglog")
    assert rep.verdict == "diverges"
    assert rep.depth == 2


def test_log_loglog_squared_converges():
    rep = check_multiplier_condition("log-loglog-squared")
    assert rep.verdict == "converges"
    assert rep.passed


def test_delta_form_is_same_series():
    for name in MULTIPLIER_FAMILIES:
        rep = check_multiplier_condition(name, sample_max=2 ** 14)
        assert rep.partial_sum == rep.partial_sum_delta
        assert rep.partial_sum > 0
        assert rep.ratio_increasing


def test_partial_sums_order():
    # heavier weights give smaller partial sums
    s = {name: check_multiplier_condition(name, sample_max=2 ** 14).partial_sum
         for name in MULTIPLIER_FAMILIES}
    assert s["log"] > s["log-loglog"] > s["log-loglog-squared"]


def test_custom_callable_quadratic_weight():
    rep = check_multiplier_condition(lambda n: np.log2(n) ** 2)
    assert rep.verdict == "converges"
    assert rep.name in ("<lambda>", "custom")


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        check_multiplier_condition(lambda n: -np.ones_like(np.asarray(n, dtype=float)))
    with pytest.raises(ValueError):
        check_multiplier_condition(lambda n: 1.0 / np.asarray(n, dtype=float))
    with pytest.raises(ValueError):
        check_multiplier_condition("powerlog")


def test_report_json_dict():
    rep = check_multiplier_condition("log")
    d = rep.to_json_dict()
    assert d["verdict"] == "diverges"
    assert "depth1_div_stat" in d["detail"]
    assert d["detail"]["depth1_div_stat"] >= 0.1
