"""Randomized equivalence against brute-force reference implementations."""
import time

from oracles import run_alignment_suite, run_localize_suite, run_prediction_suite, run_support_suite


def test_localize_vs_exhaustive_replacement():
    assert run_localize_suite(250, seed=11) >= 200


def test_support_vs_brute_force_chains():
    assert run_support_suite(200, seed=12) >= 200


def test_matching_vs_alignment_enumeration():
    assert run_alignment_suite(300, seed=13) >= 200


def test_incremental_vs_naive_prediction():
    done, hits = run_prediction_suite(300, seed=14)
    assert done >= 200
    # the comparison is only meaningful if predictions actually happen
    assert hits >= 20


def test_suites_are_fast():
    start = time.perf_counter()
    run_localize_suite(200, seed=1)
    run_support_suite(200, seed=2)
    run_alignment_suite(200, seed=3)
    run_prediction_suite(200, seed=4)
    assert time.perf_counter() - start < 60
