"""Hot numeric kernels.

Each kernel has a numba ``@njit`` implementation and a pure-numpy fallback with
identical semantics. The numba path is used when numba imports cleanly and the
environment variable ``JOBRISK_DISABLE_NUMBA`` is unset (or ``0``). Set it to
``1`` to force the numpy path, e.g. for debugging or on platforms without an
LLVM toolchain.

Kernels
-------
bernoulli_terms(X, y, beta)
    Bernoulli (quasi-)log-likelihood, score ``X'(y - mu)`` and information
    ``X' diag(mu (1 - mu)) X`` at ``beta`` for the logistic mean.
concordance_counts(scores, labels)
    Number of concordant and tied positive/negative pairs, computed by a
    sort-and-sweep in O(n log n). Both counts are exact integers.
central_moments(x)
    Mean and 2nd-4th central (population) moments.
histogram_counts(x, nbins)
    Equal-width bin counts on [0, 1].
"""
import os

import numpy as np

__all__ = [
    "USE_NUMBA",
    "bernoulli_terms",
    "concordance_counts",
    "central_moments",
    "histogram_counts",
]


def _numba_requested():
    flag = os.environ.get("JOBRISK_DISABLE_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by JOBRISK_DISABLE_NUMBA")
    import numba as nb
    HAVE_NUMBA = True
except ImportError:
    nb = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _softplus(x):
    return np.logaddexp(0.0, x)


def bernoulli_terms_numpy(X, y, beta):
    eta = X @ beta
    a = np.exp(-np.abs(eta))
    mu = np.where(eta >= 0, 1.0 / (1.0 + a), a / (1.0 + a))
    w = a / (1.0 + a) ** 2
    # y * log(mu) + (1 - y) * log(1 - mu); 0 * finite = 0 covers the y in {0,1} case
    ll = -(np.dot(y, _softplus(-eta)) + np.dot(1.0 - y, _softplus(eta)))
    score = X.T @ (y - mu)
    info = X.T @ (X * w[:, None])
    return float(ll), score, info


def concordance_counts_numpy(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    _, inverse = np.unique(scores, return_inverse=True)
    n_groups = inverse.max() + 1 if inverse.size else 0
    pos = np.bincount(inverse, weights=labels, minlength=n_groups).astype(np.int64)
    tot = np.bincount(inverse, minlength=n_groups).astype(np.int64)
    neg = tot - pos
    neg_below = np.concatenate(([0], np.cumsum(neg)[:-1]))
    concordant = int(np.dot(pos, neg_below))
    ties = int(np.dot(pos, neg))
    return concordant, ties


def central_moments_numpy(x):
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean()
    d = x - mean
    d2 = d * d
    return float(mean), float(d2.mean()), float((d2 * d).mean()), float((d2 * d2).mean())


def histogram_counts_numpy(x, nbins):
    x = np.asarray(x, dtype=np.float64)
    idx = np.floor(x * nbins).astype(np.int64)
    idx = np.clip(idx, 0, nbins - 1)
    return np.bincount(idx, minlength=nbins).astype(np.int64)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @nb.njit(cache=True)
    def bernoulli_terms_numba(X, y, beta):
        n, k = X.shape
        score = np.zeros(k)
        info = np.zeros((k, k))
        ll = 0.0
        for i in range(n):
            eta = 0.0
            for j in range(k):
                eta += X[i, j] * beta[j]
            if eta >= 0.0:
                a = np.exp(-eta)
                mu = 1.0 / (1.0 + a)
                sp_pos = eta + np.log1p(a)
                sp_neg = np.log1p(a)
            else:
                a = np.exp(eta)
                mu = a / (1.0 + a)
                sp_pos = np.log1p(a)
                sp_neg = -eta + np.log1p(a)
            w = a / ((1.0 + a) * (1.0 + a))
            yi = y[i]
            ll -= yi * sp_neg + (1.0 - yi) * sp_pos
            r = yi - mu
            for p in range(k):
                xp = X[i, p]
                score[p] += xp * r
                xw = xp * w
                for q in range(p + 1):
                    info[p, q] += xw * X[i, q]
        for p in range(k):
            for q in range(p):
                info[q, p] = info[p, q]
        return ll, score, info

    @nb.njit(cache=True)
    def _concordance_sorted(s, lab):
        n = s.shape[0]
        concordant = 0
        ties = 0
        neg_below = 0
        i = 0
        while i < n:
            j = i
            pos = 0
            neg = 0
            while j < n and s[j] == s[i]:
                if lab[j] == 1:
                    pos += 1
                else:
                    neg += 1
                j += 1
            concordant += pos * neg_below
            ties += pos * neg
            neg_below += neg
            i = j
        return concordant, ties

    def concordance_counts_numba(scores, labels):
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels).astype(np.int64)
        order = np.argsort(scores, kind="mergesort")
        c, t = _concordance_sorted(scores[order], labels[order])
        return int(c), int(t)

    @nb.njit(cache=True)
    def _central_moments_nb(x):
        n = x.shape[0]
        s = 0.0
        for i in range(n):
            s += x[i]
        mean = s / n
        m2 = 0.0
        m3 = 0.0
        m4 = 0.0
        for i in range(n):
            d = x[i] - mean
            d2 = d * d
            m2 += d2
            m3 += d2 * d
            m4 += d2 * d2
        return mean, m2 / n, m3 / n, m4 / n

    def central_moments_numba(x):
        mean, m2, m3, m4 = _central_moments_nb(np.asarray(x, dtype=np.float64))
        return float(mean), float(m2), float(m3), float(m4)

    @nb.njit(cache=True)
    def _histogram_nb(x, nbins):
        counts = np.zeros(nbins, dtype=np.int64)
        for i in range(x.shape[0]):
            b = int(np.floor(x[i] * nbins))
            if b < 0:
                b = 0
            elif b > nbins - 1:
                b = nbins - 1
            counts[b] += 1
        return counts

    def histogram_counts_numba(x, nbins):
        return _histogram_nb(np.asarray(x, dtype=np.float64), int(nbins))


def bernoulli_terms(X, y, beta):
    """Return ``(loglik, score, information)`` for the logistic mean at beta."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    beta = np.ascontiguousarray(beta, dtype=np.float64)
    if USE_NUMBA:
        ll, score, info = bernoulli_terms_numba(X, y, beta)
        return float(ll), score, info
    return bernoulli_terms_numpy(X, y, beta)


def concordance_counts(scores, labels):
    if USE_NUMBA:
        return concordance_counts_numba(scores, labels)
    return concordance_counts_numpy(scores, labels)


def central_moments(x):
    if USE_NUMBA:
        return central_moments_numba(x)
    return central_moments_numpy(x)


def histogram_counts(x, nbins):
    if USE_NUMBA:
        return histogram_counts_numba(x, nbins)
    return histogram_counts_numpy(x, nbins)
