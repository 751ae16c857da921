"""Smoke tests for the compiled extension: import, a short optimization run,
determinism, and spot values with pencil-and-paper answers."""

import math

import pytest

import zoflat


def test_bilinear_run_reduces_loss_and_is_deterministic():
    p = zoflat.BilinearProblem(2)  # packed dimension 4
    x0 = zoflat.RngStream(7, 2**32).gaussian_vector(4)

    runs = [
        zoflat.run_zo(p, eta=0.01, lambda_=0.1, iterations=400, seed=3, x0=x0,
                      record_trace=True, record_balance=True)
        for _ in range(2)
    ]
    for t in runs:
        assert t.steps == 400
        assert t.records[-1].loss < t.records[0].loss
        assert t.records[-1].hessian_trace is not None
        assert t.records[-1].balance is not None
    assert runs[0].final_x == runs[1].final_x
    assert [r.loss for r in runs[0].records] == [r.loss for r in runs[1].records]


def test_gd_matches_hand_quadratic():
    # f = (2 x0^2 + x1^2)/2, eta = 0.25: coordinates scale by 0.5 and 0.75.
    p = zoflat.QuadraticProblem.diagonal([2.0, 1.0])
    t = zoflat.run_gd(p, eta=0.25, iterations=1, x0=[1.0, 1.0])
    assert t.final_x == [0.5, 0.75]


def test_parameter_schedule_spot_value():
    inputs = zoflat.ParameterInputs(epsilon=0.01, dim=4.0, l1=1.0, l2=1.0,
                                    l3=1.0, radius=1.0)
    assert zoflat.select_parameters_main(inputs).eta == 1.0 / 80.0
    regime = zoflat.rate_regime("L1,L2,L3")
    assert regime.eta_order == "1/d"


def test_gaussian_moment_anchor():
    assert zoflat.gaussian_moment([0] * 8, 1) == 105.0
    assert zoflat.pairing_count(6) == 15


def test_libsvm_round_trip():
    text = "1 2:0.25\n-1 1:2\n"
    ds = zoflat.parse_libsvm(text)
    assert ds.labels == [1.0, -1.0]
    assert ds.max_index == 1  # 0-based internally
    assert zoflat.serialize_libsvm(ds) == text
    with pytest.raises(zoflat.ParseError):
        zoflat.parse_libsvm("1 0:2\n")


def test_balance_and_regularized_loss():
    p = zoflat.BilinearProblem(1)
    x = [1.0, 1.0]  # y'z = 1: an optimum with trace 2
    assert zoflat.balance_metric(x) == 0.0
    assert math.isclose(zoflat.regularized_loss(p, x, 0.1), 0.01)
    report = zoflat.flatness_report(p, x, 0.1)
    assert report.loss_gap == 0.0
    assert report.trace_gap == 0.0
