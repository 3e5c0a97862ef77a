"""Smoke tests for the python bindings: one probe per exported operation."""
import math

import pytest

import corrspec

BSS = [[0.375, 0.125], [0.125, 0.375]]
BSC = [[0.9, 0.1], [0.1, 0.9]]


def test_lambda2_bss():
    assert corrspec.lambda2(BSS) == pytest.approx(0.5, abs=1e-12)


def test_correlation_spectrum():
    sigma = corrspec.correlation_spectrum(BSS)
    assert sigma[0] == pytest.approx(1.0, abs=1e-12)
    assert sigma[1] == pytest.approx(0.5, abs=1e-12)


def test_dpi_cascade_is_tight():
    report = corrspec.check_dpi(BSS, BSC)
    assert report["holds"]
    assert report["lambda_xz"][0] == pytest.approx(0.4, abs=1e-12)
    assert abs(report["min_slack"]) <= 1e-8


def test_necc_rejects_common_information():
    report = corrspec.necc_check([[0.5, 0.0], [0.0, 0.5]], 0.5)
    assert not report["pass"]
    assert report["worst_margin"] == pytest.approx(-0.5, abs=1e-9)


def test_necc_accepts_processed_pair():
    assert corrspec.necc_check(BSS, 0.5)["pass"]


def test_nletter_spectrum_multiplicity():
    values = corrspec.nletter_spectrum([1.0, 0.5], 2, 4)
    assert list(values) == pytest.approx([1.0, 0.5, 0.5, 0.25], abs=1e-12)


def test_witsenhausen_certificate():
    w = corrspec.witsenhausen([0.3, 0.7], [0.5, 0.5], 4, [0])
    assert w["pass"]
    assert w["gap"] == pytest.approx(0.0125, abs=1e-12)
    assert w["lambda2"] >= w["certified_lower"] - 1e-8


def test_binary_bounds_nested():
    b = corrspec.binary_bounds(0.5, 0.5, 0.5)
    assert b["outer1"][0] <= b["outer2"][0] <= b["inner"][0] <= 0
    assert 0 <= b["inner"][1] <= b["outer2"][1] <= b["outer1"][1]
    assert b["inner"][1] == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_oracle_frontier_copy_encoders():
    r = corrspec.oracle_frontier(BSS, n=1)
    assert r["clean"]
    assert r["samples_evaluated"] == 16
    assert r["best_lambda"][1] == pytest.approx(0.5, abs=1e-12)


def test_rd_region_hierarchy():
    hamming = [[0.0, 1.0], [1.0, 0.0]]
    r = corrspec.rd_region_sample(BSS, hamming, hamming, 0.5, 0.5, set="sout4",
                                  budget=16, seed=4)
    assert r["hierarchy_ok"]
    assert r["counts"]["sin"] <= r["counts"]["sout4"]
    assert all(rates[0] >= -1e-10 for rates in r["region"])


def test_errors_surface_as_valueerror():
    with pytest.raises(ValueError):
        corrspec.lambda2([[0.7, 0.7], [0.1, 0.1]])


def test_entropy_reference():
    # h(0.25) in bits, sanity anchor for the rate probes above
    h = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    assert h == pytest.approx(0.8112781244591328, abs=1e-15)
