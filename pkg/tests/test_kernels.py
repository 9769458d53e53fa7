import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jobrisk import _kernels


def brute_concordance(s, lab):
    pos, neg = s[lab == 1], s[lab == 0]
    diff = pos[:, None] - neg[None, :]
    return int((diff > 0).sum()), int((diff == 0).sum())


class TestBernoulliTerms:
    def test_matches_direct_formula(self, kernel_path):
        rng = np.random.default_rng(1)
        X = np.column_stack([np.ones(40), rng.standard_normal((40, 3))])
        y = rng.random(40)
        beta = rng.standard_normal(4)
        mu = 1.0 / (1.0 + np.exp(-X @ beta))
        ll, score, info = _kernels.bernoulli_terms(X, y, beta)
        np.testing.assert_allclose(ll, np.sum(y * np.log(mu) + (1 - y) * np.log(1 - mu)), rtol=1e-12)
        np.testing.assert_allclose(score, X.T @ (y - mu), rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(info, X.T @ (X * (mu * (1 - mu))[:, None]), rtol=1e-10)

    def test_extreme_eta_is_finite(self, kernel_path):
        X = np.array([[1.0, 800.0], [1.0, -800.0]])
        ll, score, info = _kernels.bernoulli_terms(X, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert np.isfinite(ll) and np.all(np.isfinite(score)) and np.all(np.isfinite(info))
        assert ll == pytest.approx(0.0, abs=1e-300)

    def test_paths_agree(self):
        if not _kernels.HAVE_NUMBA:
            pytest.skip("numba unavailable")
        rng = np.random.default_rng(2)
        X = rng.standard_normal((200, 6))
        y = (rng.random(200) < 0.5).astype(float)
        b = rng.standard_normal(6)
        a = _kernels.bernoulli_terms_numpy(X, y, b)
        c = _kernels.bernoulli_terms_numba(X, y, b)
        np.testing.assert_allclose(a[0], c[0], rtol=1e-12)
        np.testing.assert_allclose(a[1], c[1], rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(a[2], c[2], rtol=1e-10)


class TestConcordance:
    def test_small_example(self, kernel_path):
        s = np.array([0.9, 0.8, 0.3, 0.2])
        assert _kernels.concordance_counts(s, np.array([1, 0, 1, 0])) == (3, 0)

    def test_all_ties(self, kernel_path):
        s = np.full(6, 0.4)
        assert _kernels.concordance_counts(s, np.array([1, 0, 1, 0, 0, 1])) == (0, 9)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 8), st.booleans()), min_size=1, max_size=60))
    def test_matches_brute_force(self, pairs):
        s = np.array([p[0] / 8 for p in pairs])
        lab = np.array([int(p[1]) for p in pairs])
        want = brute_concordance(s, lab)
        assert _kernels.concordance_counts_numpy(s, lab) == want
        if _kernels.HAVE_NUMBA:
            assert _kernels.concordance_counts_numba(s, lab) == want


class TestMomentsAndHistogram:
    def test_central_moments(self, kernel_path):
        x = np.random.default_rng(3).random(500)
        m, m2, m3, m4 = _kernels.central_moments(x)
        d = x - x.mean()
        np.testing.assert_allclose([m, m2, m3, m4],
                                   [x.mean(), np.mean(d**2), np.mean(d**3), np.mean(d**4)],
                                   rtol=1e-12, atol=1e-15)

    def test_histogram_matches_numpy(self, kernel_path):
        x = np.random.default_rng(4).random(1000)
        want, _ = np.histogram(x, bins=20, range=(0.0, 1.0))
        np.testing.assert_array_equal(_kernels.histogram_counts(x, 20), want)

    def test_histogram_endpoints(self, kernel_path):
        counts = _kernels.histogram_counts(np.array([0.0, 1.0, 0.5]), 20)
        assert counts[0] == 1 and counts[-1] == 1 and counts[10] == 1 and counts.sum() == 3


def test_env_flag_forces_numpy():
    env = dict(os.environ, JOBRISK_DISABLE_NUMBA="1")
    r = subprocess.run([sys.executable, "-c", "from jobrisk import _kernels as k; print(k.USE_NUMBA)"],
                       env=env, capture_output=True, text=True)
    assert r.stdout.strip() == "False"
