"""Holdout splits, ROC/AUC and the cross-model comparison table."""
import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .data import ResponseKind
from .diagnostics import DEFAULT_THRESHOLD, risk_distribution
from .errors import DegenerateSplit, OneClassOnly
from .glm import FittedGlm, GlmKind, LdaModel, predict_proba

DEFAULT_TRAIN_FRACTION = 0.4
COMPARISON_COLUMNS = ("model", "input", "auc", "aic", "high_risk_share", "shape")


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    # thresholds[i] is the score cutoff (predict positive if score >= cutoff)
    thresholds: np.ndarray

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def area(self):
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2.0))


@dataclass(frozen=True)
class ComparisonRow:
    model: str
    kind: str
    input: str
    auc: Optional[float]
    aic: Optional[float]
    high_risk_share: float
    shape: str
    bimodality_coefficient: float
    mean: float
    n: int


@dataclass(frozen=True)
class ModelComparison:
    rows: tuple
    metadata: dict = field(default_factory=dict)

    def row(self, name):
        for r in self.rows:
            if r.model == name:
                return r
        raise KeyError(name)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COMPARISON_COLUMNS)
            for r in self.rows:
                w.writerow([
                    r.model, r.input, _num(r.auc), _num(r.aic),
                    repr(r.high_risk_share), r.shape,
                ])

    def to_dict(self):
        return {
            "metadata": self.metadata,
            "rows": [r.__dict__ for r in self.rows],
        }

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def _num(x):
    return "" if x is None else repr(float(x))


def read_comparison_csv(path):
    """Read the CSV back as a list of dicts with numbers parsed."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append({
                "model": row["model"],
                "input": row["input"],
                "auc": float(row["auc"]) if row["auc"] else None,
                "aic": float(row["aic"]) if row["aic"] else None,
                "high_risk_share": float(row["high_risk_share"]),
                "shape": row["shape"],
            })
    return out


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

def train_test_split(design, train_fraction=DEFAULT_TRAIN_FRACTION, seed=0):
    """Uniform random partition of rows; ``round(train_fraction * n)`` go to train."""
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplit("train_fraction must lie in (0, 1)")
    n = design.n
    n_train = int(math.floor(train_fraction * n + 0.5))
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"split of {n} rows leaves one side empty")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    train, test = design.subset(train_idx), design.subset(test_idx)
    if design.response_kind is ResponseKind.BINARY:
        for name, part in (("train", train), ("test", test)):
            if np.unique(part.response).size < 2:
                raise DegenerateSplit(f"{name} side holds a single class")
    return train, test


def holdout_splits(design, train_fraction=DEFAULT_TRAIN_FRACTION, seed=0, repeats=1):
    """Yield ``repeats`` independent holdout splits (seeds ``seed, seed+1, ...``)."""
    for r in range(repeats):
        yield train_test_split(design, train_fraction, seed + r)


# ---------------------------------------------------------------------------
# ROC / AUC
# ---------------------------------------------------------------------------

def roc_auc(scores, labels):
    """ROC curve and AUC; AUC = P(s_pos > s_neg) + P(tie) / 2."""
    s = np.asarray(scores, dtype=np.float64)
    lab = np.asarray(labels)
    if s.shape != lab.shape:
        raise ValueError("scores and labels differ in shape")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not np.all((lab == 0) | (lab == 1)):
        raise ValueError("labels must be 0/1")
    lab = lab.astype(np.int64)
    n_pos = int(lab.sum())
    n_neg = lab.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly("ROC needs both classes")

    concordant, ties = _kernels.concordance_counts(s, lab)
    auc = (concordant + 0.5 * ties) / (n_pos * n_neg)

    uniq, inverse = np.unique(s, return_inverse=True)
    pos = np.bincount(inverse, weights=lab, minlength=uniq.size)
    tot = np.bincount(inverse, minlength=uniq.size)
    # sweep from the highest score down
    tp = np.concatenate(([0.0], np.cumsum(pos[::-1])))
    fp = np.concatenate(([0.0], np.cumsum((tot - pos)[::-1])))
    curve = RocCurve(
        fpr=fp / n_neg,
        tpr=tp / n_pos,
        thresholds=np.concatenate(([np.inf], uniq[::-1])),
    )
    return curve, float(auc)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

def describe_model(model):
    """(kind label, input label, binary-response?) for a fitted model."""
    if isinstance(model, LdaModel):
        return "LDA", "Binary", True
    if model.kind is GlmKind.LOGIT:
        return "Logit", "Binary", True
    return "Fractional", "Discrete", False


def compare_models(fits, test, threshold=DEFAULT_THRESHOLD, population=None, metadata=None,
                   auc_models=None):
    """One comparison row per model.

    ``fits`` is a mapping (or list of pairs) name -> fitted model. AUC is
    computed on ``test`` for binary-response models when ``test`` carries a
    binary response. The predicted distribution (shape, high-risk share) is
    taken over ``population`` when given, else over ``test``.
    ``auc_models`` optionally maps a name to a different model (e.g. one fitted
    on the training split) whose test-set AUC is reported for that row.
    """
    items = list(fits.items()) if isinstance(fits, dict) else list(fits)
    target = population if population is not None else test
    rows = []
    for name, model in items:
        kind, inp, binary = describe_model(model)
        auc = None
        if binary and test.response_kind is ResponseKind.BINARY:
            scorer = (auc_models or {}).get(name, model)
            _, auc = roc_auc(predict_proba(scorer, test), test.response)
        aic = None
        if isinstance(model, FittedGlm) and math.isfinite(model.aic):
            aic = float(model.aic)
        dist = risk_distribution(predict_proba(model, target), threshold)
        rows.append(ComparisonRow(
            model=name,
            kind=kind,
            input=inp,
            auc=auc,
            aic=aic,
            high_risk_share=dist.high_risk_share,
            shape=dist.shape.value,
            bimodality_coefficient=dist.bimodality_coefficient,
            mean=dist.mean,
            n=dist.n,
        ))
    return ModelComparison(rows=tuple(rows), metadata=dict(metadata or {}))
