"""Population scoring and shape diagnostics of predicted probabilities."""
import enum
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .data import TIERS, build_design_matrix, tier_features
from .errors import FeatureMismatch, TooFewPoints
from .glm import predict_proba

DEFAULT_THRESHOLD = 0.7
DEFAULT_BINS = 20
BC_BENCHMARK = 5.0 / 9.0

ISCO_MAJOR_GROUPS = {
    "1": "Managers",
    "2": "Professionals",
    "3": "Technicians and associate professionals",
    "4": "Clerical support workers",
    "5": "Service and sales workers",
    "6": "Skilled agricultural, forestry and fishery workers",
    "7": "Craft and related trades workers",
    "8": "Plant and machine operators and assemblers",
    "9": "Elementary occupations",
}


class Shape(enum.Enum):
    BIMODAL = "Bimodal"
    UNIMODAL = "Unimodal"


@dataclass(frozen=True)
class RiskDistribution:
    probabilities: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    mean: float
    bimodality_coefficient: float
    shape: Shape
    high_risk_share: float
    threshold: float

    @property
    def n(self):
        return self.probabilities.size


@dataclass(frozen=True)
class IscoAggregate:
    level: int
    # prefix -> (mean probability, worker count), sorted by descending mean
    groups: dict


@dataclass(frozen=True)
class PopulationPrediction:
    ids: tuple
    isco4: tuple
    probabilities: np.ndarray


def bimodality_coefficient(probabilities):
    """Sarle's bimodality coefficient with bias-corrected skewness and excess
    kurtosis. ``nan`` for a sample without spread."""
    x = np.asarray(probabilities, dtype=np.float64)
    n = x.size
    if n < 4:
        raise TooFewPoints(f"bimodality coefficient needs n >= 4, got {n}")
    _, m2, m3, m4 = _kernels.central_moments(x)
    # rounding leaves m2 ~ 1e-33 for a constant sample; treat as no spread
    scale = float(np.max(np.abs(x)))
    if m2 <= (64.0 * np.finfo(np.float64).eps * scale) ** 2:
        return float("nan")
    g1 = m3 / m2 ** 1.5
    g2 = m4 / (m2 * m2) - 3.0
    skew = g1 * math.sqrt(n * (n - 1)) / (n - 2)
    kurt = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0)
    return (skew * skew + 1.0) / (kurt + 3.0 * (n - 1) ** 2 / ((n - 2) * (n - 3)))


def classify_shape(bc):
    return Shape.BIMODAL if bc > BC_BENCHMARK else Shape.UNIMODAL


def high_risk_share(probabilities, threshold=DEFAULT_THRESHOLD):
    """Share of probabilities strictly above ``threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    p = np.asarray(probabilities, dtype=np.float64)
    return int(np.count_nonzero(p > threshold)) / p.size


def risk_distribution(probabilities, threshold=DEFAULT_THRESHOLD, nbins=DEFAULT_BINS):
    p = np.asarray(probabilities, dtype=np.float64)
    bc = bimodality_coefficient(p)
    return RiskDistribution(
        probabilities=p,
        bin_edges=np.linspace(0.0, 1.0, nbins + 1),
        counts=_kernels.histogram_counts(p, nbins),
        mean=math.fsum(p) / p.size,
        bimodality_coefficient=bc,
        shape=classify_shape(bc),
        high_risk_share=high_risk_share(p, threshold),
        threshold=threshold,
    )


def tier_of(feature_names):
    for tier in TIERS:
        if tuple(feature_names) == tier_features(tier):
            return tier
    raise FeatureMismatch(f"features {list(feature_names)} match no covariate tier")


def predict_population(model, records, design_builder=None, country=None):
    """Score every (imputed) record, labelled occupation or not.

    ``design_builder`` turns the record list into a prediction design; by
    default the tier is inferred from the model's feature names.
    """
    recs = [r for r in records if country is None or r.country == country]
    if design_builder is None:
        tier = tier_of(model.feature_names)

        def design_builder(rs):
            return build_design_matrix(rs, tier=tier)

    design = design_builder(recs)
    p = predict_proba(model, design)
    return PopulationPrediction(ids=design.row_ids, isco4=design.isco4, probabilities=p)


def aggregate_isco(probabilities, isco_codes, level):
    """Mean probability and worker count per ISCO prefix of length ``level``.

    ``isco_codes`` may be worker records or plain 4-digit codes.
    """
    if level not in (1, 2):
        raise ValueError("level must be 1 or 2")
    codes = [c if isinstance(c, str) else c.isco4 for c in isco_codes]
    p = np.asarray(probabilities, dtype=np.float64)
    if len(codes) != p.size:
        raise ValueError("probabilities and codes differ in length")
    members = defaultdict(list)
    for code, prob in zip(codes, p):
        members[code[:level]].append(float(prob))
    stats = {k: (math.fsum(v) / len(v), len(v)) for k, v in members.items()}
    ordered = sorted(stats.items(), key=lambda kv: (-kv[1][0], kv[0]))
    return IscoAggregate(level=level, groups=dict(ordered))
