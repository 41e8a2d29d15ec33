import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from duhl import (Dataset, DuhlConfig, ProblemSpec, RoundTrace, SelectionPolicy, SyntheticSpec,
                  gen_synthetic, run_block_cd)
from duhl.data import CLASSIFICATION
from duhl.metrics import (CSV_COLUMNS, attach_suboptimality, check_descent_step, check_linear_rate,
                          descent_report, epochs_to, eta_hat, improvement_rates, linear_rate_envelope,
                          max_block_sigma, reference_optimum, reference_solution, rounds_to,
                          speedup_rho_deviation, speedup_vs_rho, step_size_s, sublinear_envelope,
                          sublinear_gamma, write_compare_csv, write_csv)
from duhl.problems import lambda_max

from conftest import random_instance
from oracles import fista

# hand-checked: coordinate 0 first gives alpha = (1/3, 0), O = 5/12, remaining gap 1/8
GOLDEN_FIXTURE_CSV = """\
round,epochs,objective,gap,suboptimality,rho,swaps,gap_updates
0,0,0.5,0.25,0.16666666666666669,nan,0,0
1,1.5,0.41666666666666674,0.125,0.083333333333333426,1,1,2
2,3,0.33333333333333337,0,5.5511151231257827e-17,2,1,2
"""


def _fixture_run(p, data, m, rounds=3):
    tr = run_block_cd(p, data, DuhlConfig(SelectionPolicy("gap-oracle", m), exact=True,
                                          max_rounds=rounds))
    return attach_suboptimality(tr, reference_optimum(p, data))


class TestReferenceOptimum:
    def test_ridge_fixture(self, ridge_fixture):
        assert reference_optimum(*ridge_fixture, use_cache=False) == pytest.approx(1 / 3, abs=1e-12)

    def test_svm_single_point(self):
        data = Dataset(np.ones((1, 1)), np.array([1.0]), CLASSIFICATION)
        p = ProblemSpec.for_data("svm", data, 1.0)
        obj, alpha, _ = reference_solution(p, data, use_cache=False)
        assert obj == pytest.approx(-0.5, abs=1e-12) and alpha[0] == 1.0

    def test_lasso_above_lambda_max_is_zero(self):
        data = gen_synthetic(SyntheticSpec(12, 9, density=0.5, noise_std=0.1, seed=1))
        p = ProblemSpec.for_data("elastic-net", data, 1.5 * lambda_max(data), 0.0)
        obj, alpha, _ = reference_solution(p, data, use_cache=False)
        assert np.all(alpha == 0)
        assert obj == pytest.approx(data.labels @ data.labels / (2 * data.d), rel=1e-14)

    @pytest.mark.parametrize("family,seed", [("ridge", 1), ("elastic-net", 2), ("elastic-net", 3),
                                             ("svm", 4), ("svm", 5)])
    def test_matches_accelerated_gradient(self, family, seed):
        p, data = random_instance(family, seed, d=8, n=6, lam=0.2)
        ref = reference_optimum(p, data, use_cache=False)
        best, _ = fista(family, data.A, data.labels, p.lam, p.eta, 20000)
        assert ref <= best + 1e-10
        assert ref == pytest.approx(best, abs=1e-8)

    def test_cached_by_content(self, ridge_fixture):
        p, data = ridge_fixture
        a = reference_solution(p, data)
        b = reference_solution(p, Dataset(data.A.copy(), data.labels.copy(), data.kind))
        assert a[0] == b[0]


class TestDescentBound:
    def test_fixture_equality(self, ridge_fixture):
        p, data = ridge_fixture
        tr = _fixture_run(p, data, 2, rounds=1)
        row = descent_report(p, data, tr)[0]
        assert row.s == pytest.approx(2 / 3)
        assert row.measured == pytest.approx(1 / 6, abs=1e-15)
        assert row.required == pytest.approx(1 / 6, abs=1e-15)
        assert row.satisfied

    def test_underestimated_sigma_is_flagged(self, ridge_fixture):
        p, data = ridge_fixture
        tr = _fixture_run(p, data, 2, rounds=1)
        assert not descent_report(p, data, tr, sigma_scale=0.1)[0].satisfied

    def test_zero_gap_bound(self, ridge_fixture):
        p, _ = ridge_fixture
        a = RoundTrace(0, 0.0, 1.0, 0.0)
        b = RoundTrace(1, 1.0, 1.0, 0.0, block=(0,), block_gap=0.0)
        row = check_descent_step(a, b, p, 1.0)
        assert row.required == 0.0 and row.satisfied

    def test_needs_strong_convexity(self):
        p, _ = random_instance("svm", 0)
        with pytest.raises(ValueError):
            check_descent_step(RoundTrace(0, 0, 0, 0), RoundTrace(1, 0, 0, 0), p, 1.0)

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("family", ["ridge", "elastic-net"])
    def test_exact_oracle_runs_satisfy_bounds(self, family, seed):
        p, data = random_instance(family, 100 + seed)
        m = max(1, data.n // 3)
        tr = run_block_cd(p, data, DuhlConfig(SelectionPolicy("gap-oracle", m), exact=True,
                                              max_rounds=30))
        attach_suboptimality(tr, reference_optimum(p, data))
        assert all(r.satisfied for r in descent_report(p, data, tr))
        sigma = max_block_sigma(data, tr)
        assert all(r.satisfied for r in check_linear_rate(tr, p, sigma, eta_hat(tr), m))


class TestEnvelopes:
    def test_full_block_factor(self, ridge_fixture):
        p, _ = ridge_fixture
        s = step_size_s(p, 1.0)
        for t in range(5):
            assert linear_rate_envelope(t, 2.0, p, 2, 2, 1.0, 1.0) == pytest.approx(2.0 * (1 - s) ** t)

    def test_gamma_example(self):
        assert sublinear_gamma(1.0, 2.0, 1.5) == 12.0

    def test_sublinear_limits(self):
        n, m, eta, L, B, sigma, eps0 = 100, 10, 1.0, 1.0, 2.0, 1.5, 1e4
        gamma = sublinear_gamma(L, B, sigma)
        t0 = (n / m) * math.log(2 * eta * m * eps0 / (n * gamma))
        assert sublinear_envelope(t0 - 1e-9, n, m, eta, L, B, sigma, eps0) == math.inf
        assert sublinear_envelope(t0, n, m, eta, L, B, sigma, eps0) == pytest.approx(gamma * n / (eta * m))
        assert sublinear_envelope(1e15, n, m, eta, L, B, sigma, eps0) < 1e-8

    @given(t=st.integers(0, 10_000), eps0=st.floats(1e-6, 1e6))
    @settings(max_examples=40)
    def test_sublinear_non_increasing(self, t, eps0):
        args = (50, 5, 0.7, 0.3, 4.0, 2.0, eps0)
        assert sublinear_envelope(t + 1, *args) <= sublinear_envelope(t, *args)

    def test_linear_rate_flags_violation(self):
        tr = [RoundTrace(0, 0, 1.0, 1.0, suboptimality=1.0),
              RoundTrace(1, 1, 1.0, 1.0, suboptimality=1.0, block=(0,))]
        p = ProblemSpec.for_data("ridge", Dataset(np.eye(2), np.ones(2), "regression"), 1.0)
        rows = check_linear_rate(tr, p, 1.0, 1.0, 2)
        assert rows[0].satisfied and not rows[1].satisfied

    def test_eta_hat_skips_degenerate(self):
        tr = [RoundTrace(0, 0, 0, 0), RoundTrace(1, 0, 0, 0, rho=2.0),
              RoundTrace(2, 0, 0, 0, rho=1.0, rho_degenerate=True), RoundTrace(3, 0, 0, 0, rho=1.5)]
        assert eta_hat(tr) == 1.5
        assert eta_hat(tr[:1]) == 1.0


class TestSpeedup:
    @staticmethod
    def _geometric(q, rho, rounds=10):
        return [RoundTrace(t, t, 0, 0, rho=rho, suboptimality=q ** t) for t in range(rounds + 1)]

    def test_rates(self):
        np.testing.assert_allclose(improvement_rates(self._geometric(0.5, 1.0, 3)), [0.5] * 3)

    def test_consistent_prediction(self):
        g = self._geometric(0.5, 2.0)
        r = [self._geometric(0.75, 1.0), self._geometric(0.75, 1.0)]
        measured, predicted = speedup_vs_rho(g, r)
        np.testing.assert_allclose(measured, 2.0)
        np.testing.assert_allclose(predicted, 2.0)
        assert speedup_rho_deviation(g, r) == pytest.approx(0.0, abs=1e-12)

    def test_floor_cuts_horizon(self):
        g = self._geometric(0.1, 1.0, 20)
        measured, _ = speedup_vs_rho(g, [self._geometric(0.5, 1.0, 20)], rel_floor=2e-4)
        assert measured.size == 4


class TestTargets:
    def test_rounds_and_epochs_to(self):
        tr = [RoundTrace(t, 2.5 * t, 0, 10.0 ** -t, suboptimality=None) for t in range(5)]
        assert rounds_to(tr, 1e-2) == 2 and epochs_to(tr, 1e-2) == 5.0
        assert rounds_to(tr, 1e-9) is None
        assert rounds_to(tr, 1e-2, field="suboptimality") is None


class TestCsv:
    def test_empty_trace_header_only(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv([], path)
        assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_golden_fixture(self, ridge_fixture, tmp_path):
        p, data = ridge_fixture
        tr = run_block_cd(p, data, DuhlConfig(SelectionPolicy("gap-oracle", 1), exact=True, max_rounds=3))
        attach_suboptimality(tr, 1 / 3)
        write_csv(tr, tmp_path / "t.csv")
        assert (tmp_path / "t.csv").read_text() == GOLDEN_FIXTURE_CSV

    def test_reruns_byte_identical(self, tmp_path):
        p, data = random_instance("elastic-net", 9, d=20, n=30)
        out = []
        for k in range(2):
            tr = run_block_cd(p, data, DuhlConfig(SelectionPolicy("random", 5), max_rounds=20, seed=3))
            path = tmp_path / f"{k}.csv"
            write_csv(tr, path)
            out.append(path.read_bytes())
        assert out[0] == out[1]

    def test_bound_columns(self, ridge_fixture, tmp_path):
        p, data = ridge_fixture
        tr = _fixture_run(p, data, 2, rounds=1)
        path = tmp_path / "b.csv"
        write_csv(tr, path, descent_report(p, data, tr), check_linear_rate(tr, p, 1.0, 1.0, 2))
        lines = path.read_text().splitlines()
        assert lines[0].endswith("step_improvement,step_bound,step_ok,envelope,envelope_ok")
        assert lines[1].split(",")[-5:-2] == ["", "", ""]
        assert lines[2].split(",")[-3] == "1" and lines[2].split(",")[-1] == "1"

    def test_compare_csv(self, ridge_fixture, tmp_path):
        p, data = ridge_fixture
        runs = {"a": _fixture_run(p, data, 2, 1), "b": _fixture_run(p, data, 1, 1)}
        write_compare_csv(runs, tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "policy," + ",".join(CSV_COLUMNS)
        assert [l.split(",")[0] for l in lines[1:]] == ["a", "a", "b", "b"]
