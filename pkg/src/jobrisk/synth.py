"""Calibrated synthetic expert votes and worker microdata.

One hidden quantity per occupation, its routine intensity ``r`` in [0, 1],
drives everything: each expert votes "yes" with probability ``r``, and the
workers of that occupation get task profiles and covariates shifted by
``routine_effect * (r - 0.5)`` plus individual noise. With
``routine_effect = 0`` the worker data carry no information about the labels.

Randomness comes from numpy's ``PCG64`` bit generator
(``numpy.random.default_rng(seed)``); draws happen in a fixed order, so a
seed fully determines the output.

Occupation intensities are Beta draws around a per-major-group mean, taken at
stratified quantiles so that the spread across occupations varies little
between seeds. Occupation sizes follow a Zipf-like law (weight ``1 / rank**zipf_exponent``).
That skew is an arbitrary stand-in for the unknown real size distribution.
Occupations with extreme intensity are additionally shrunk by the factor
``(4 r (1 - r)) ** extreme_size_damping`` so that consensus occupations hold a
minority of workers.
"""
from dataclasses import dataclass, fields

import numpy as np
from scipy import stats

from .data import (
    TASK_CODES,
    FrequencyAnswer,
    ResponseKind,
    WorkerRecord,
    build_design_matrix,
    impute_means,
)
from .errors import InvalidConfig
from .labeling import ExpertVoteSet, aggregate_labels, attach_labels

# 4-digit codes of the 100 most common Austrian occupations used as the default
# occupation universe (one code appears twice in the source list; 9211 fills in).
DEFAULT_OCCUPATIONS = (
    "5311", "5120", "3255", "2652", "5141", "3412", "5412", "2341", "2635", "3355",
    "5321", "6113", "2161", "6130", "7421", "2212", "2310", "5131", "7126", "7512",
    "1349", "7412", "1323", "1411", "3221", "2330", "7411", "3259", "5151", "2142",
    "2149", "2642", "1321", "2611", "2359", "2144", "3251", "3256", "2166", "2631",
    "7233", "7522", "2512", "5414", "9112", "7119", "2421", "5153", "7112", "9412",
    "3257", "7231", "2431", "7212", "1324", "3359", "5223", "7543", "3115", "2262",
    "9629", "7214", "7523", "8219", "3353", "3352", "8212", "9332", "7223", "3322",
    "3323", "3334", "4120", "2411", "7321", "9329", "9333", "8160", "9334", "9621",
    "3118", "3313", "4110", "8322", "8131", "8332", "8121", "8122", "4321", "4412",
    "3324", "4322", "4312", "5230", "3321", "4222", "4323", "4311", "3411", "9211",
)

# Mean routine intensity by ISCO major group (first digit).
GROUP_ROUTINE_MEAN = {
    "1": 0.35, "2": 0.22, "3": 0.55, "4": 0.88, "5": 0.40,
    "6": 0.30, "7": 0.48, "8": 0.82, "9": 0.60,
}

# Task loadings on routine intensity: > 0 more frequent in routine-intense
# occupations, < 0 less frequent (physical work, complex reading, etc.).
TASK_LOADINGS = {
    "human_share": 0.2, "human_train": -0.6, "human_speech": -0.8,
    "human_sell": 0.3, "human_advise": -0.5, "human_influence": -0.6,
    "human_negotiate": -0.3,
    "itusage_email": 0.8, "itusage_internet": 0.4, "itusage_buy": 0.5,
    "itusage_excel": 1.0, "itusage_word": 0.6, "itusage_code": -0.5,
    "itusage_discuss": 0.1,
    "physical_long": -1.0, "physical_accurate": -0.6,
    "planning_own": -0.3, "planning_others": -0.6, "planning_time": -0.3,
    "problem_simple": 0.4, "problem_complex": -0.7,
    "reading_instruction": 0.3, "reading_letter": 0.7, "reading_news": -0.2,
    "reading_article": -0.7, "reading_book": -0.9, "reading_manual": 0.1,
    "reading_bill": 1.0, "reading_graph": -0.2,
    "wricalc_letter": 0.5, "wricalc_news": -0.3, "wricalc_report": -0.6,
    "wricalc_form": 0.9, "wricalc_budget": 0.5, "wricalc_fraction": 0.4,
    "wricalc_calculator": 0.9, "wricalc_chart": 0.2, "wricalc_simple": 0.2,
    "wricalc_advanced": -0.4,
}
TASK_BASELINE = {
    "human_share": 0.9, "human_advise": 0.3, "itusage_email": 0.3,
    "itusage_internet": 0.2, "planning_own": 0.6, "planning_time": 0.6,
    "problem_simple": 0.5, "reading_instruction": 0.3, "reading_letter": 0.2,
    "wricalc_news": -1.6, "itusage_code": -1.2, "itusage_discuss": -1.2,
    "wricalc_advanced": -1.1, "reading_article": -0.6, "reading_book": -0.7,
    "human_speech": -0.9,
}
# cut points of the latent task propensity -> never/rarely/monthly/weekly/daily
TASK_CUTS = (-0.9, -0.35, 0.2, 0.75)
_ANSWERS = (
    FrequencyAnswer.NEVER, FrequencyAnswer.LESS_THAN_MONTHLY,
    FrequencyAnswer.MONTHLY_TO_WEEKLY, FrequencyAnswer.WEEKLY_TO_DAILY,
    FrequencyAnswer.DAILY,
)

# marginal shares of the ordinal covariates
AGE_GROUP_SHARES = (104, 195, 255, 255, 273, 309, 267, 242, 119, 32)
EXPERIENCE_SHARES = (585, 282, 157, 472, 555)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 7
    n_experts: int = 35
    n_occupations: int = 100
    n_workers: int = 4438
    country_split: float = 2051 / 4438
    missing_rate: float = 0.15
    routine_effect: float = 1.0
    noise_sd: float = 0.3
    covariate_noise_sd: float = 0.5
    task_scale: float = 2.2
    skip_rate: float = 0.15
    zipf_exponent: float = 0.5
    routine_concentration: float = 4.0
    extreme_size_damping: float = 0.7

    def validate(self):
        for name in ("n_experts", "n_occupations", "n_workers"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v <= 0:
                raise InvalidConfig(f"{name} must be a positive integer, got {v!r}")
        if self.n_occupations > 9000:
            raise InvalidConfig("n_occupations exceeds the 4-digit code space")
        if not 0.0 <= self.country_split <= 1.0:
            raise InvalidConfig("country_split must lie in [0, 1]")
        if not 0.0 <= self.missing_rate < 1.0:
            raise InvalidConfig("missing_rate must lie in [0, 1)")
        if not 0.0 <= self.skip_rate < 1.0:
            raise InvalidConfig("skip_rate must lie in [0, 1)")
        if self.routine_effect < 0.0:
            raise InvalidConfig("routine_effect must be non-negative")
        for name in ("noise_sd", "covariate_noise_sd", "task_scale", "routine_concentration"):
            if not getattr(self, name) > 0.0:
                raise InvalidConfig(f"{name} must be positive")
        if self.zipf_exponent < 0.0 or self.extreme_size_damping < 0.0:
            raise InvalidConfig("zipf_exponent and extreme_size_damping must be non-negative")
        return self

    @classmethod
    def from_mapping(cls, mapping):
        """Build from string values (e.g. a ``key=value`` config file)."""
        known = {f.name: f.type for f in fields(cls)}
        kw = {}
        for key, raw in mapping.items():
            key = key.replace("-", "_")
            if key not in known:
                raise InvalidConfig(f"unknown synth setting {key!r}")
            typ = known[key]
            try:
                kw[key] = int(raw) if typ in (int, "int") else float(raw)
            except (TypeError, ValueError):
                raise InvalidConfig(f"bad value for {key}: {raw!r}") from None
        return cls(**kw).validate()


@dataclass(frozen=True)
class LatentOccupation:
    isco4: str
    routine_intensity: float


def occupation_codes(n, rng):
    codes = list(DEFAULT_OCCUPATIONS[:n])
    taken = set(codes)
    while len(codes) < n:
        c = str(int(rng.integers(1000, 10000)))
        if c not in taken:
            taken.add(c)
            codes.append(c)
    return codes


def draw_occupations(config, rng):
    codes = occupation_codes(config.n_occupations, rng)
    kappa = config.routine_concentration
    means = np.array([GROUP_ROUTINE_MEAN[c[0]] for c in codes])
    # stratified quantiles: one per 1/n slice, randomly assigned to occupations
    n = len(codes)
    q = (rng.permutation(n) + rng.random(n)) / n
    r = stats.beta.ppf(q, kappa * means, kappa * (1.0 - means))
    return [LatentOccupation(c, float(x)) for c, x in zip(codes, r)]


def draw_votes(occupations, n_experts, skip_rate, rng):
    r = np.array([o.routine_intensity for o in occupations])
    u = rng.random((len(occupations), n_experts))
    skip = rng.random((len(occupations), n_experts)) < skip_rate
    votes = []
    for i in range(len(occupations)):
        yes = u[i] < r[i]
        votes.append(tuple(None if skip[i, j] else bool(yes[j]) for j in range(n_experts)))
    return ExpertVoteSet(tuple(o.isco4 for o in occupations), tuple(votes))


def _expit(x):
    return 1.0 / (1.0 + np.exp(-x))


def _ordinal(rng, shares, size):
    p = np.asarray(shares, dtype=float)
    return rng.choice(p.size, size=size, p=p / p.sum())


def draw_workers(occupations, config, rng):
    n = config.n_workers
    g = config.routine_effect
    n_occ = len(occupations)

    # Zipf-like occupation sizes over a random rank order
    ranks = rng.permutation(n_occ) + 1
    r_occ = np.array([o.routine_intensity for o in occupations])
    # occupations with extreme intensity are smaller (few labelled workers)
    w = (4.0 * r_occ * (1.0 - r_occ)) ** config.extreme_size_damping / ranks ** config.zipf_exponent
    occ_idx = rng.choice(n_occ, size=n, p=w / w.sum())
    r = np.array([occupations[i].routine_intensity for i in occ_idx])

    n_at = int(round(config.country_split * n))
    country = np.array(["DE"] * n, dtype=object)
    country[rng.permutation(n)[:n_at]] = "AT"

    # worker-level routine exposure seen by tasks / covariates
    s_task = g * (r - 0.5 + config.noise_sd * rng.standard_normal(n))
    s_cov = g * (r - 0.5 + config.covariate_noise_sd * rng.standard_normal(n))

    age = _ordinal(rng, AGE_GROUP_SHARES, n)
    female = rng.random(n) < _expit(0.05 - 0.8 * s_cov)
    edu_mu = 14.3 - 3.0 * s_cov
    # low-routine occupations mix short and long schooling
    edu_sd = 2.0 + 2.5 * np.clip(-s_cov, 0.0, None)
    education = np.clip(np.round(edu_mu + edu_sd * rng.standard_normal(n)), 4, 20)
    private = rng.random(n) < _expit(0.7 + 2.5 * s_cov)
    firm_size = np.clip(np.round(1.8 + 0.8 * s_cov + 1.2 * rng.standard_normal(n)), 0, 4).astype(int)
    responsibility = rng.random(n) < _expit(0.3 - 1.5 * s_cov)
    experience = _ordinal(rng, EXPERIENCE_SHARES, n)
    job_edu_latent = (education - 14.3) / 2.5 - 0.6 * s_cov + 0.6 * rng.standard_normal(n)
    job_education = np.digitize(job_edu_latent, (-0.9, 0.8))
    skill_base = 285.0 + 7.0 * (education - 14.3) + 30.0 * rng.standard_normal(n)
    skills = []
    for shift in (-10.0 * s_cov, 15.0 * s_cov, 0.0 * s_cov):
        v = skill_base + shift + 18.0 * rng.standard_normal(n)
        skills.append(np.round(np.clip(v, 0.0, 500.0), 1))

    loads = np.array([TASK_LOADINGS[c] for c in TASK_CODES])
    base = np.array([TASK_BASELINE.get(c, 0.0) for c in TASK_CODES])
    latent = (base[None, :] + config.task_scale * s_task[:, None] * loads[None, :]
              + rng.standard_normal((n, len(TASK_CODES))))
    task_idx = np.digitize(latent, TASK_CUTS)

    m = config.missing_rate
    miss_num = rng.random((n, 5)) < m              # education, 3 skills, responsibility
    miss_cat = rng.random((n, 6)) < m / 5.0        # demographic categoricals
    miss_task = rng.random((n, len(TASK_CODES))) < m

    records = []
    width = len(str(n))
    for i in range(n):
        tasks = tuple(
            FrequencyAnswer.NO_RESPONSE if miss_task[i, j] else _ANSWERS[task_idx[i, j]]
            for j in range(len(TASK_CODES))
        )
        records.append(WorkerRecord(
            id=f"W{i + 1:0{width}d}",
            country=str(country[i]),
            isco4=occupations[occ_idx[i]].isco4,
            age_group=None if miss_cat[i, 0] else int(age[i]),
            gender=None if miss_cat[i, 1] else ("female" if female[i] else "male"),
            education_years=None if miss_num[i, 0] else float(education[i]),
            firm_sector=None if miss_cat[i, 2] else ("private" if private[i] else "public"),
            firm_size=None if miss_cat[i, 3] else int(firm_size[i]),
            job_responsibility=None if miss_num[i, 4] else bool(responsibility[i]),
            job_experience=None if miss_cat[i, 4] else int(experience[i]),
            job_education=None if miss_cat[i, 5] else int(job_education[i]),
            skill_ps=None if miss_num[i, 1] else float(skills[0][i]),
            skill_num=None if miss_num[i, 2] else float(skills[1][i]),
            skill_lit=None if miss_num[i, 3] else float(skills[2][i]),
            tasks=tasks,
        ))
    return records


def generate_population(config=None, return_latent=False):
    """Expert votes and raw worker records for ``config``.

    With ``return_latent=True`` the hidden occupations are returned as a third
    element.
    """
    config = (config or SynthConfig()).validate()
    rng = np.random.default_rng(config.seed)
    occupations = draw_occupations(config, rng)
    votes = draw_votes(occupations, config.n_experts, config.skip_rate, rng)
    workers = draw_workers(occupations, config, rng)
    if return_latent:
        return votes, workers, occupations
    return votes, workers


# ---------------------------------------------------------------------------
# end-to-end scenario
# ---------------------------------------------------------------------------

def run_pipeline(votes, records, tier=6, train_fraction=0.4, seed=0,
                 threshold=0.7, fit_country="DE", predict_country="AT"):
    """Label, impute, fit logit/LDA/fractional, score the prediction sample.

    Returns a dict with the labels, imputed records, designs, fitted models,
    split models, population predictions and the comparison table.
    """
    from .diagnostics import predict_population
    from .evaluation import compare_models, train_test_split
    from .glm import fit_fractional, fit_lda, fit_logit

    labels = aggregate_labels(votes)
    imputed = impute_means(records)
    join = attach_labels(imputed, labels)
    binary = build_design_matrix(imputed, join, ResponseKind.BINARY, tier, country=fit_country)
    frac = build_design_matrix(imputed, join, ResponseKind.FRACTIONAL, tier, country=fit_country)

    fits = {
        "logit": fit_logit(binary),
        "lda": fit_lda(binary),
        "fractional": fit_fractional(frac),
    }
    train, test = train_test_split(binary, train_fraction, seed)
    split_fits = {"logit": fit_logit(train), "lda": fit_lda(train)}

    predictions = {
        name: predict_population(m, imputed, country=predict_country)
        for name, m in fits.items()
    }
    population = build_design_matrix(
        [r for r in imputed if predict_country is None or r.country == predict_country],
        tier=tier,
    )
    comparison = compare_models(
        fits, test, threshold, population=population, auc_models=split_fits,
        metadata={
            "auc_sample": f"held-out {1 - train_fraction:.0%} of labelled {fit_country} rows",
            "auc_train_fraction": train_fraction,
            "split_seed": seed,
            "distribution_sample": f"all {predict_country} workers" if predict_country else "all workers",
            "n_binary": binary.n,
            "n_fractional": frac.n,
            "n_population": population.n,
            "tier": tier,
            "threshold": threshold,
        },
    )
    return {
        "labels": labels,
        "records": imputed,
        "join": join,
        "binary": binary,
        "fractional": frac,
        "fits": fits,
        "split_fits": split_fits,
        "train": train,
        "test": test,
        "predictions": predictions,
        "comparison": comparison,
    }


def scenario_table4(config=None, tier=6, train_fraction=0.4, threshold=0.7):
    """Three-row logit / LDA / fractional comparison on synthetic data."""
    config = (config or SynthConfig()).validate()
    votes, records = generate_population(config)
    out = run_pipeline(votes, records, tier=tier, train_fraction=train_fraction,
                       seed=config.seed, threshold=threshold)
    return out["comparison"]


def expert_mean_error(config, n_experts):
    """Max |vote share - routine intensity| across occupations (diagnostic)."""
    rng = np.random.default_rng(config.seed)
    occ = draw_occupations(config, rng)
    votes = draw_votes(occ, n_experts, config.skip_rate, rng)
    labels = aggregate_labels(votes)
    return max(abs(lab.mean - o.routine_intensity) for lab, o in zip(labels, occ))


__all__ = [
    "SynthConfig", "LatentOccupation", "generate_population", "run_pipeline",
    "scenario_table4", "draw_occupations", "draw_votes", "draw_workers",
    "DEFAULT_OCCUPATIONS",
]
