import numpy as np
import pytest

from jobrisk import _kernels
from jobrisk.data import DesignMatrix, FrequencyAnswer, ResponseKind, WorkerRecord
from jobrisk.synth import SynthConfig, generate_population, run_pipeline

KERNEL_PATHS = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])


@pytest.fixture(params=KERNEL_PATHS)
def kernel_path(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    monkeypatch.setattr(_kernels, "USE_NUMBA", request.param == "numba")
    return request.param


def make_design(X, y, kind=ResponseKind.BINARY, names=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    names = names or tuple(f"x{j}" for j in range(X.shape[1]))
    return DesignMatrix(
        feature_names=tuple(names),
        rows=X,
        response=None if y is None else np.asarray(y, dtype=np.float64),
        response_kind=kind if y is not None else None,
        row_ids=tuple(str(i) for i in range(X.shape[0])),
        isco4=tuple("4110" for _ in range(X.shape[0])),
    )


def random_logit_design(rng, n, k, beta_scale=0.5):
    X = np.column_stack([np.ones(n), rng.standard_normal((n, k - 1))])
    beta = rng.normal(scale=beta_scale, size=k)
    p = 1.0 / (1.0 + np.exp(-X @ beta))
    y = (rng.random(n) < p).astype(float)
    names = ("intercept",) + tuple(f"x{j}" for j in range(1, k))
    return make_design(X, y, names=names)


def worker(i="w1", country="DE", isco4="4110", **kw):
    base = dict(
        age_group=3, gender="female", education_years=12.0, firm_sector="private",
        firm_size=2, job_responsibility=False, job_experience=2, job_education=1,
        skill_ps=280.0, skill_num=270.0, skill_lit=275.0,
        tasks=tuple([FrequencyAnswer.WEEKLY_TO_DAILY] * 39),
    )
    base.update(kw)
    return WorkerRecord(id=i, country=country, isco4=isco4, **base)


@pytest.fixture(scope="session")
def default_population():
    return generate_population(SynthConfig())


@pytest.fixture(scope="session")
def default_pipeline(default_population):
    votes, records = default_population
    return run_pipeline(votes, records, seed=SynthConfig().seed)
