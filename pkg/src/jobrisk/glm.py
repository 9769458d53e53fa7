"""Binary logit, fractional logit (Bernoulli quasi-ML) and two-class LDA.

Both logistic models maximise the same objective,

    sum_i  y_i log mu_i + (1 - y_i) log(1 - mu_i),   mu_i = 1 / (1 + exp(-x_i'b)),

with y_i in {0, 1} (logit) or y_i in [0, 1] (fractional). They differ only in
the reported covariance: inverse information for the logit, the robust
sandwich ``A^-1 B A^-1`` for the fractional model.

Estimation is Newton-Raphson (equivalently IRLS for the canonical link) with
step halving. A fit is converged when the score ``X'(y - mu)`` has
infinity-norm below ``tol`` and the next Newton step is negligible.
"""
import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import _kernels
from .data import ResponseKind
from .errors import (
    FeatureMismatch,
    NoConvergence,
    OneClassOnly,
    Separation,
    Singular,
    SingularCovariance,
)

TOL = 1e-8
MAX_ITER = 100
SEPARATION_CAP = 30.0
PROB_CLAMP = 1e-15


class GlmKind(enum.Enum):
    LOGIT = "logit"
    FRACTIONAL = "fractional"


@dataclass(frozen=True)
class FittedGlm:
    kind: GlmKind
    feature_names: tuple
    coefficients: np.ndarray
    covariance: np.ndarray
    log_likelihood: float
    aic: float
    n: int
    converged: bool = True
    iterations: int = 0
    score_norm: float = 0.0

    @property
    def std_errors(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def z_values(self):
        se = self.std_errors
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(se > 0, self.coefficients / se, np.nan)

    @property
    def p_values(self):
        """Two-sided normal p-values."""
        return np.array([math.erfc(abs(z) / math.sqrt(2.0)) if np.isfinite(z) else np.nan
                         for z in self.z_values])


@dataclass(frozen=True)
class LdaModel:
    feature_names: tuple
    # class order is (0, 1)
    priors: np.ndarray
    class_means: np.ndarray
    pooled_covariance: np.ndarray
    ridge: float
    n: int
    used_features: tuple = field(default=())

    def discriminant(self):
        """Weights ``w`` and offset ``b`` with log-odds(class 1) = x'w + b."""
        mu0, mu1 = self.class_means
        c = linalg.cho_factor(self.pooled_covariance, lower=True)
        w = linalg.cho_solve(c, mu1 - mu0)
        b = -0.5 * float((mu1 + mu0) @ w) + math.log(self.priors[1] / self.priors[0])
        return w, b


# ---------------------------------------------------------------------------
# likelihood pieces
# ---------------------------------------------------------------------------

def logistic(eta):
    eta = np.asarray(eta, dtype=np.float64)
    a = np.exp(-np.abs(eta))
    return np.where(eta >= 0, 1.0 / (1.0 + a), a / (1.0 + a))


def bernoulli_loglik(X, y, beta):
    """Bernoulli (quasi-)log-likelihood with the ``0 log 0 = 0`` convention."""
    return _kernels.bernoulli_terms(X, y, beta)[0]


def bernoulli_score(X, y, beta):
    return _kernels.bernoulli_terms(X, y, beta)[1]


def aic(model):
    return 2.0 * len(model.coefficients) - 2.0 * model.log_likelihood


# ---------------------------------------------------------------------------
# Newton-Raphson
# ---------------------------------------------------------------------------

def _newton_step(info, score):
    try:
        c = linalg.cho_factor(info, lower=True, check_finite=True)
        step = linalg.cho_solve(c, score)
    except (linalg.LinAlgError, ValueError):
        raise Singular("information matrix is not positive definite") from None
    if not np.all(np.isfinite(step)):
        raise Singular("non-finite Newton step")
    return step


def newton_bernoulli(X, y, tol=TOL, max_iter=MAX_ITER, cap=SEPARATION_CAP):
    """Maximise the Bernoulli objective; return ``(beta, loglik, info, iterations, score_norm)``."""
    n, k = X.shape
    if n <= k:
        raise Singular(f"need more rows than coefficients (n={n}, k={k})")
    beta = np.zeros(k)
    ll, score, info = _kernels.bernoulli_terms(X, y, beta)
    prev_norm = None
    streak = 0
    it = 0
    while True:
        step = _newton_step(info, score)
        snorm = float(np.max(np.abs(score)))
        if snorm < tol and np.max(np.abs(step)) <= 1e-6 * (1.0 + np.max(np.abs(beta))):
            # one polishing step: quadratic convergence takes the score to rounding level
            ll_c, score_c, info_c = _kernels.bernoulli_terms(X, y, beta + step)
            snorm_c = float(np.max(np.abs(score_c)))
            if math.isfinite(ll_c) and ll_c >= ll - 1e-12 * (1.0 + abs(ll)) and snorm_c <= snorm:
                return beta + step, ll_c, info_c, it, snorm_c
            return beta, ll, info, it, snorm
        if it >= max_iter:
            raise NoConvergence(
                f"no convergence after {max_iter} iterations (score norm {snorm:.3g})"
            )
        it += 1
        t = 1.0
        slack = 1e-12 * (1.0 + abs(ll))
        for _ in range(60):
            cand = beta + t * step
            ll_c, score_c, info_c = _kernels.bernoulli_terms(X, y, cand)
            if math.isfinite(ll_c) and ll_c >= ll - slack:
                break
            t *= 0.5
        else:
            if snorm < tol:
                # objective flat to machine precision; accept current point
                return beta, ll, info, it, snorm
            raise NoConvergence("step halving failed to improve the objective")

        rel_gain = (ll_c - ll) / max(-ll_c, 1e-300)
        step_norm = float(np.max(np.abs(t * step)))
        # Unbounded likelihood: coefficients past the cap while Newton steps
        # stop shrinking and the deviance keeps falling.
        if (np.max(np.abs(cand)) > cap and rel_gain > 1e-10
                and prev_norm is not None and step_norm > 0.5 * prev_norm):
            streak += 1
            if streak >= 3:
                raise Separation(
                    f"coefficients diverge (|beta|max={np.max(np.abs(cand)):.1f}); "
                    "the classes are (quasi-)separated"
                )
        else:
            streak = 0
        prev_norm = step_norm
        beta, ll, score, info = cand, ll_c, score_c, info_c


def _check_design(design, kinds):
    if design.response is None or design.response_kind not in kinds:
        raise ValueError(f"design response must be one of {[k.value for k in kinds]}")


def fit_logit(design, tol=TOL, max_iter=MAX_ITER):
    """Binary logit by maximum likelihood; covariance is the inverse information."""
    _check_design(design, (ResponseKind.BINARY,))
    X, y = design.rows, design.response
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("binary response must be 0/1")
    beta, ll, info, it, snorm = newton_bernoulli(X, y, tol, max_iter)
    cov = linalg.inv(info)
    cov = 0.5 * (cov + cov.T)
    return _make_glm(GlmKind.LOGIT, design, beta, cov, ll, it, snorm)


def fit_fractional(design, tol=TOL, max_iter=MAX_ITER):
    """Fractional logit by Bernoulli quasi-ML with robust sandwich covariance."""
    _check_design(design, (ResponseKind.FRACTIONAL, ResponseKind.BINARY))
    X, y = design.rows, design.response
    if np.any((y < 0) | (y > 1)):
        raise ValueError("fractional response must lie in [0, 1]")
    beta, ll, info, it, snorm = newton_bernoulli(X, y, tol, max_iter)
    a_inv = linalg.inv(info)
    resid = y - logistic(X @ beta)
    meat = X.T @ (X * (resid * resid)[:, None])
    cov = a_inv @ meat @ a_inv
    cov = 0.5 * (cov + cov.T)
    return _make_glm(GlmKind.FRACTIONAL, design, beta, cov, ll, it, snorm)


def _make_glm(kind, design, beta, cov, ll, it, snorm):
    k = len(beta)
    return FittedGlm(
        kind=kind,
        feature_names=tuple(design.feature_names),
        coefficients=beta,
        covariance=cov,
        log_likelihood=float(ll),
        aic=2.0 * k - 2.0 * float(ll),
        n=design.n,
        converged=True,
        iterations=it,
        score_norm=snorm,
    )


def glm_from_coefficients(kind, feature_names, coefficients):
    """A model with given coefficients and no fit statistics (for scoring)."""
    beta = np.asarray(coefficients, dtype=np.float64)
    return FittedGlm(
        kind=GlmKind(kind) if isinstance(kind, str) else kind,
        feature_names=tuple(feature_names),
        coefficients=beta,
        covariance=np.zeros((beta.size, beta.size)),
        log_likelihood=float("nan"),
        aic=float("nan"),
        n=0,
        converged=False,
    )


# ---------------------------------------------------------------------------
# LDA
# ---------------------------------------------------------------------------

def fit_lda(design):
    """Two-class Gaussian LDA with empirical priors and pooled covariance.

    The intercept column carries no information and is dropped. A ridge of
    ``1e-8 * trace(S) / p`` is always added to the pooled covariance ``S``.
    """
    _check_design(design, (ResponseKind.BINARY,))
    used = tuple(n for n in design.feature_names if n != "intercept")
    idx = [design.feature_names.index(n) for n in used]
    X = design.rows[:, idx]
    y = design.response
    n, p = X.shape
    n1 = int(np.sum(y == 1))
    n0 = int(np.sum(y == 0))
    if n0 == 0 or n1 == 0:
        raise OneClassOnly("LDA needs observations from both classes")
    if n <= 2:
        raise SingularCovariance("LDA needs more than two rows")
    means = np.vstack([X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)])
    centered = X - means[(y == 1).astype(int)]
    S = centered.T @ centered / (n - 2)
    ridge = 1e-8 * np.trace(S) / p
    S = S + ridge * np.eye(p)
    S = 0.5 * (S + S.T)
    try:
        linalg.cho_factor(S, lower=True)
    except linalg.LinAlgError:
        raise SingularCovariance("pooled covariance is singular after ridge") from None
    return LdaModel(
        feature_names=tuple(design.feature_names),
        priors=np.array([n0 / n, n1 / n]),
        class_means=means,
        pooled_covariance=S,
        ridge=float(ridge),
        n=n,
        used_features=used,
    )


def lda_class_posteriors(model, design):
    """``(n, 2)`` posterior matrix, columns for classes 0 and 1."""
    _check_features(model, design)
    idx = [design.feature_names.index(f) for f in model.used_features]
    w, b = model.discriminant()
    eta = design.rows[:, idx] @ w + b
    return np.column_stack([logistic(-eta), logistic(eta)])


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------

def _check_features(model, design):
    if tuple(model.feature_names) != tuple(design.feature_names):
        raise FeatureMismatch(
            f"model features {list(model.feature_names)} != design features "
            f"{list(design.feature_names)}"
        )


def linear_predictor(model, design):
    _check_features(model, design)
    if isinstance(model, LdaModel):
        idx = [design.feature_names.index(f) for f in model.used_features]
        w, b = model.discriminant()
        return design.rows[:, idx] @ w + b
    return design.rows @ model.coefficients


def predict_proba(model, design):
    """P(y = 1 | x) per row, clamped to ``[1e-15, 1 - 1e-15]``."""
    p = logistic(linear_predictor(model, design))
    return np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def model_to_dict(model):
    if isinstance(model, LdaModel):
        return {
            "kind": "lda",
            "feature_names": list(model.feature_names),
            "used_features": list(model.used_features),
            "priors": model.priors.tolist(),
            "class_means": model.class_means.tolist(),
            "pooled_covariance": model.pooled_covariance.ravel().tolist(),
            "ridge": model.ridge,
            "n": model.n,
        }
    return {
        "kind": model.kind.value,
        "feature_names": list(model.feature_names),
        "coefficients": model.coefficients.tolist(),
        "covariance": model.covariance.ravel().tolist(),
        "log_likelihood": model.log_likelihood,
        "aic": model.aic,
        "n": model.n,
        "converged": model.converged,
        "iterations": model.iterations,
        "score_norm": model.score_norm,
    }


def model_from_dict(d):
    names = tuple(d["feature_names"])
    if d["kind"] == "lda":
        p = len(d["used_features"])
        return LdaModel(
            feature_names=names,
            priors=np.array(d["priors"], dtype=np.float64),
            class_means=np.array(d["class_means"], dtype=np.float64),
            pooled_covariance=np.array(d["pooled_covariance"], dtype=np.float64).reshape(p, p),
            ridge=float(d["ridge"]),
            n=int(d["n"]),
            used_features=tuple(d["used_features"]),
        )
    k = len(names)
    return FittedGlm(
        kind=GlmKind(d["kind"]),
        feature_names=names,
        coefficients=np.array(d["coefficients"], dtype=np.float64),
        covariance=np.array(d["covariance"], dtype=np.float64).reshape(k, k),
        log_likelihood=float(d["log_likelihood"]),
        aic=float(d["aic"]),
        n=int(d["n"]),
        converged=bool(d["converged"]),
        iterations=int(d["iterations"]),
        score_norm=float(d.get("score_norm", 0.0)),
    )


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1, allow_nan=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
