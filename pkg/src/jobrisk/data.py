"""Worker microdata: CSV ingestion, task-frequency encoding, imputation and
design-matrix assembly.

Worker CSV schema (UTF-8, comma separated, ``.`` decimal point)::

    id,country,isco4,age_group,gender,education_years,firm_sector,firm_size,
    job_responsibility,job_experience,job_education,skill_ps,skill_num,
    skill_lit,<39 task codes>

``country`` is ``AT`` or ``DE``; ``gender`` is ``male``/``female``;
``firm_sector`` is ``public``/``private``; ``job_responsibility`` is ``1``/``0``;
ordinals are integers; task cells hold ``daily``, ``weekly``, ``monthly``,
``rarely``, ``never`` or nothing (non-response). Only ``id``, ``country`` and
``isco4`` are mandatory.
"""
import csv
import dataclasses
import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    AllMissingField,
    BadEnumValue,
    BadIscoCode,
    DataError,
    EmptyDesign,
    MissingColumn,
    RankDeficient,
    TooFewPoints,
    ZeroVariance,
)

TASK_CODES = (
    "human_share", "human_train", "human_speech", "human_sell", "human_advise",
    "human_influence", "human_negotiate",
    "itusage_email", "itusage_internet", "itusage_buy", "itusage_excel",
    "itusage_word", "itusage_code", "itusage_discuss",
    "physical_long", "physical_accurate",
    "planning_own", "planning_others", "planning_time",
    "problem_simple", "problem_complex",
    "reading_instruction", "reading_letter", "reading_news", "reading_article",
    "reading_book", "reading_manual", "reading_bill", "reading_graph",
    "wricalc_letter", "wricalc_news", "wricalc_report", "wricalc_form",
    "wricalc_budget", "wricalc_fraction", "wricalc_calculator", "wricalc_chart",
    "wricalc_simple", "wricalc_advanced",
)
assert len(TASK_CODES) == 39

BASE_COLUMNS = (
    "id", "country", "isco4", "age_group", "gender", "education_years",
    "firm_sector", "firm_size", "job_responsibility", "job_experience",
    "job_education", "skill_ps", "skill_num", "skill_lit",
)
WORKER_COLUMNS = BASE_COLUMNS + TASK_CODES

COUNTRIES = ("AT", "DE")
GENDERS = ("male", "female")
SECTORS = ("public", "private")
ORDINAL_RANGES = {
    "age_group": (0, 9),
    "firm_size": (0, 4),
    "job_experience": (0, 4),
    "job_education": (0, 2),
}
NUMERIC_RANGES = {
    "education_years": (4.0, 20.0),
    "skill_ps": (0.0, 500.0),
    "skill_num": (0.0, 500.0),
    "skill_lit": (0.0, 500.0),
}
CATEGORICAL_FIELDS = (
    "age_group", "gender", "firm_sector", "firm_size", "job_responsibility",
    "job_experience", "job_education",
)
NUMERIC_FIELDS = ("education_years", "skill_ps", "skill_num", "skill_lit")
_NA_TOKENS = {"", "na", "nan", "."}


class FrequencyAnswer(enum.Enum):
    NEVER = "never"
    LESS_THAN_MONTHLY = "rarely"
    MONTHLY_TO_WEEKLY = "monthly"
    WEEKLY_TO_DAILY = "weekly"
    DAILY = "daily"
    NO_RESPONSE = ""

    @classmethod
    def from_token(cls, token):
        return cls(token.strip().lower())


# Share of working days on which the task is performed.
_FREQUENCY_VALUE = {
    FrequencyAnswer.DAILY: 1.0,
    FrequencyAnswer.WEEKLY_TO_DAILY: 1 / 2,
    FrequencyAnswer.MONTHLY_TO_WEEKLY: 1 / 7,
    FrequencyAnswer.LESS_THAN_MONTHLY: 1 / 30,
    FrequencyAnswer.NEVER: 0.0,
}
TASK_LEVELS = tuple(sorted(_FREQUENCY_VALUE.values()))


def encode_frequency(answer):
    """Map a frequency answer to its share of working days; ``None`` for
    non-response."""
    if answer is FrequencyAnswer.NO_RESPONSE:
        return None
    return _FREQUENCY_VALUE[answer]


@dataclass(frozen=True)
class WorkerRecord:
    id: str
    country: str
    isco4: str
    age_group: Optional[int] = None
    gender: Optional[str] = None
    education_years: Optional[float] = None
    firm_sector: Optional[str] = None
    firm_size: Optional[int] = None
    job_responsibility: Optional[bool] = None
    job_experience: Optional[int] = None
    job_education: Optional[int] = None
    skill_ps: Optional[float] = None
    skill_num: Optional[float] = None
    skill_lit: Optional[float] = None
    tasks: tuple = tuple([FrequencyAnswer.NO_RESPONSE] * 39)
    # encoded task shares; derived from ``tasks`` unless given (imputation)
    task_values: Optional[tuple] = None
    imputed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        validate_isco(self.isco4)
        if self.country not in COUNTRIES:
            raise BadEnumValue(f"country {self.country!r} not in {COUNTRIES}")
        if len(self.tasks) != len(TASK_CODES):
            raise DataError(f"expected {len(TASK_CODES)} tasks, got {len(self.tasks)}")
        if self.task_values is None:
            object.__setattr__(
                self, "task_values", tuple(encode_frequency(a) for a in self.tasks)
            )
        elif len(self.task_values) != len(TASK_CODES):
            raise DataError("task_values length mismatch")
        e = self.education_years
        if e is not None and not (4.0 <= e <= 20.0):
            raise DataError(f"education_years {e} outside [4, 20]")

    def missing_fields(self):
        out = [f for f in CATEGORICAL_FIELDS + NUMERIC_FIELDS if getattr(self, f) is None]
        out.extend(c for c, v in zip(TASK_CODES, self.task_values) if v is None)
        return out


def validate_isco(code):
    if not (isinstance(code, str) and len(code) == 4 and code.isdigit() and code[0] != "0"):
        raise BadIscoCode(f"isco4 {code!r} is not a 4-digit ISCO-08 code")
    return code


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

def _cell_error(exc_type, rowno, column, value, detail):
    return exc_type(f"row {rowno}, column {column!r}: {detail} (got {value!r})")


def _parse_choice(raw, choices, rowno, column):
    v = raw.strip().lower()
    if v in _NA_TOKENS:
        return None
    if v not in choices:
        raise _cell_error(BadEnumValue, rowno, column, raw, f"expected one of {choices}")
    return v


def _parse_ordinal(raw, rowno, column):
    v = raw.strip()
    if v.lower() in _NA_TOKENS:
        return None
    lo, hi = ORDINAL_RANGES[column]
    try:
        x = int(v)
    except ValueError:
        raise _cell_error(BadEnumValue, rowno, column, raw, f"expected integer {lo}-{hi}") from None
    if not lo <= x <= hi:
        raise _cell_error(BadEnumValue, rowno, column, raw, f"expected integer {lo}-{hi}")
    return x


def _parse_numeric(raw, column):
    # unparseable or out-of-range values are treated as non-response
    try:
        x = float(raw)
    except ValueError:
        return None
    lo, hi = NUMERIC_RANGES[column]
    if not (math.isfinite(x) and lo <= x <= hi):
        return None
    return x


def _parse_bool(raw, rowno, column):
    v = raw.strip().lower()
    if v in _NA_TOKENS:
        return None
    if v in ("1", "yes", "true"):
        return True
    if v in ("0", "no", "false"):
        return False
    raise _cell_error(BadEnumValue, rowno, column, raw, "expected 1 or 0")


def parse_worker_row(row, rowno):
    rid = (row["id"] or "").strip()
    if not rid:
        raise _cell_error(DataError, rowno, "id", row["id"], "empty id")
    country = (row["country"] or "").strip().upper()
    if country not in COUNTRIES:
        raise _cell_error(BadEnumValue, rowno, "country", row["country"], f"expected one of {COUNTRIES}")
    isco = (row["isco4"] or "").strip()
    try:
        validate_isco(isco)
    except BadIscoCode:
        raise _cell_error(BadIscoCode, rowno, "isco4", row["isco4"], "not a 4-digit ISCO-08 code") from None

    tasks = []
    for code in TASK_CODES:
        raw = row[code] or ""
        try:
            tasks.append(FrequencyAnswer.from_token(raw))
        except ValueError:
            raise _cell_error(
                BadEnumValue, rowno, code, raw, "expected daily|weekly|monthly|rarely|never or empty"
            ) from None

    return WorkerRecord(
        id=rid,
        country=country,
        isco4=isco,
        age_group=_parse_ordinal(row["age_group"] or "", rowno, "age_group"),
        gender=_parse_choice(row["gender"] or "", GENDERS, rowno, "gender"),
        education_years=_parse_numeric(row["education_years"] or "", "education_years"),
        firm_sector=_parse_choice(row["firm_sector"] or "", SECTORS, rowno, "firm_sector"),
        firm_size=_parse_ordinal(row["firm_size"] or "", rowno, "firm_size"),
        job_responsibility=_parse_bool(row["job_responsibility"] or "", rowno, "job_responsibility"),
        job_experience=_parse_ordinal(row["job_experience"] or "", rowno, "job_experience"),
        job_education=_parse_ordinal(row["job_education"] or "", rowno, "job_education"),
        skill_ps=_parse_numeric(row["skill_ps"] or "", "skill_ps"),
        skill_num=_parse_numeric(row["skill_num"] or "", "skill_num"),
        skill_lit=_parse_numeric(row["skill_lit"] or "", "skill_lit"),
        tasks=tuple(tasks),
    )


def parse_worker_csv(path):
    """Read a worker CSV into a list of :class:`WorkerRecord`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in WORKER_COLUMNS:
            if col not in header:
                raise MissingColumn(f"row 1 (header), column {col!r}: missing from {path}")
        # header is row 1
        return [parse_worker_row(row, i) for i, row in enumerate(reader, start=2)]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_worker_csv(records, path):
    """Write raw (un-imputed) records in the schema read by :func:`parse_worker_csv`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(WORKER_COLUMNS)
        for r in records:
            w.writerow(
                [_fmt(getattr(r, c)) for c in BASE_COLUMNS] + [a.value for a in r.tasks]
            )


# ---------------------------------------------------------------------------
# Imputation
# ---------------------------------------------------------------------------

def _mode(values):
    counts = Counter(values)
    top = max(counts.values())
    # ties resolve to the smallest level so the result is order-independent
    return min(v for v, c in counts.items() if c == top)


def impute_means(records):
    """Fill non-responses: numeric fields and encoded tasks get the mean of the
    observed values, categorical fields the modal level.

    Returns new records; untouched records are returned as-is. The names of
    filled cells are added to ``WorkerRecord.imputed``.
    """
    records = list(records)
    if not records:
        return []
    fill = {}
    for f in CATEGORICAL_FIELDS:
        obs = [getattr(r, f) for r in records if getattr(r, f) is not None]
        if not obs:
            raise AllMissingField(f"field {f!r} has no observed values")
        fill[f] = _mode(obs)
    for f in NUMERIC_FIELDS:
        obs = [getattr(r, f) for r in records if getattr(r, f) is not None]
        if not obs:
            raise AllMissingField(f"field {f!r} has no observed values")
        fill[f] = math.fsum(obs) / len(obs)
    task_fill = []
    for j, code in enumerate(TASK_CODES):
        obs = [r.task_values[j] for r in records if r.task_values[j] is not None]
        if not obs:
            raise AllMissingField(f"task {code!r} has no observed values")
        task_fill.append(math.fsum(obs) / len(obs))

    out = []
    for r in records:
        missing = r.missing_fields()
        if not missing:
            out.append(r)
            continue
        changes = {f: fill[f] for f in CATEGORICAL_FIELDS + NUMERIC_FIELDS if getattr(r, f) is None}
        if any(v is None for v in r.task_values):
            changes["task_values"] = tuple(
                task_fill[j] if v is None else v for j, v in enumerate(r.task_values)
            )
        changes["imputed"] = r.imputed | frozenset(missing)
        out.append(dataclasses.replace(r, **changes))
    return out


# ---------------------------------------------------------------------------
# Design matrix
# ---------------------------------------------------------------------------

class ResponseKind(enum.Enum):
    BINARY = "binary"
    FRACTIONAL = "fractional"


PERSONAL_BLOCK = ("age_group", "gender_female", "education", "education_sq")
FIRM_BLOCK = ("firm_private", "firm_size")
JOB_BLOCK = (
    "job_responsibility", "job_experience", "job_education",
    "skill_ps", "skill_num", "skill_lit",
)
TASK_BLOCK = TASK_CODES

TIERS = {
    1: PERSONAL_BLOCK,
    2: PERSONAL_BLOCK + FIRM_BLOCK,
    3: PERSONAL_BLOCK + FIRM_BLOCK + JOB_BLOCK,
    4: PERSONAL_BLOCK + TASK_BLOCK,
    5: TASK_BLOCK,
    6: PERSONAL_BLOCK + FIRM_BLOCK + JOB_BLOCK + TASK_BLOCK,
}


def tier_features(tier):
    if tier not in TIERS:
        raise ValueError(f"tier must be one of 1..6, got {tier!r}")
    return ("intercept",) + TIERS[tier]


def _feature_row(r):
    if r.missing_fields():
        raise DataError(f"worker {r.id} has missing values; run impute_means first")
    edu = float(r.education_years)
    vals = {
        "intercept": 1.0,
        "age_group": float(r.age_group),
        "gender_female": 1.0 if r.gender == "female" else 0.0,
        "education": edu,
        "education_sq": edu * edu,
        "firm_private": 1.0 if r.firm_sector == "private" else 0.0,
        "firm_size": float(r.firm_size),
        "job_responsibility": 1.0 if r.job_responsibility else 0.0,
        "job_experience": float(r.job_experience),
        "job_education": float(r.job_education),
        "skill_ps": float(r.skill_ps),
        "skill_num": float(r.skill_num),
        "skill_lit": float(r.skill_lit),
    }
    vals.update(zip(TASK_CODES, (float(v) for v in r.task_values)))
    return vals


@dataclass(frozen=True)
class DesignMatrix:
    feature_names: tuple
    rows: np.ndarray
    response: Optional[np.ndarray]
    response_kind: Optional[ResponseKind]
    row_ids: tuple
    isco4: tuple = ()

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if self.response is not None:
            y = np.array(self.response, dtype=np.float64)
            y.setflags(write=False)
            object.__setattr__(self, "response", y)
            if y.shape != (rows.shape[0],):
                raise DataError("response length does not match rows")
        if len(self.row_ids) != rows.shape[0]:
            raise DataError("row_ids length does not match rows")

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def k(self):
        return self.rows.shape[1]

    def column(self, name):
        return self.rows[:, self.feature_names.index(name)]

    def subset(self, index):
        index = np.asarray(index)
        return DesignMatrix(
            feature_names=self.feature_names,
            rows=self.rows[index],
            response=None if self.response is None else self.response[index],
            response_kind=self.response_kind,
            row_ids=tuple(self.row_ids[i] for i in index),
            isco4=tuple(self.isco4[i] for i in index) if self.isco4 else (),
        )


def build_design_matrix(records, labels=None, response_kind=None, tier=6, country=None):
    """Assemble the tier's covariates plus a response from occupation labels.

    ``labels`` maps worker id to an occupation label (or None), as returned by
    ``labeling.attach_labels``. With ``response_kind=None`` a prediction-only
    design is built for every record (no response, no rank check).
    """
    names = tier_features(tier)
    if isinstance(response_kind, str):
        response_kind = ResponseKind(response_kind)
    if response_kind is not None and labels is None:
        raise DataError("labels are required to build a design with a response")

    rows, ys, ids, iscos = [], [], [], []
    for r in records:
        if country is not None and r.country != country:
            continue
        if response_kind is not None:
            lab = labels.get(r.id)
            if lab is None:
                continue
            if response_kind is ResponseKind.BINARY:
                if lab.consensus is None:
                    continue
                ys.append(float(lab.consensus))
            else:
                ys.append(float(lab.mean))
        vals = _feature_row(r)
        rows.append([vals[n] for n in names])
        ids.append(r.id)
        iscos.append(r.isco4)

    if not rows:
        raise EmptyDesign("no rows survive the response/country filters")
    X = np.array(rows, dtype=np.float64)
    if response_kind is not None:
        flat = np.ptp(X[:, 1:], axis=0) == 0 if X.shape[1] > 1 else np.array([], bool)
        if flat.any():
            bad = [names[1 + j] for j in np.flatnonzero(flat)]
            raise RankDeficient(f"constant columns: {bad}")
    return DesignMatrix(
        feature_names=names,
        rows=X,
        response=np.array(ys) if response_kind is not None else None,
        response_kind=response_kind,
        row_ids=tuple(ids),
        isco4=tuple(iscos),
    )


# ---------------------------------------------------------------------------
# Descriptives
# ---------------------------------------------------------------------------

def summary_stats(records):
    """Level counts for categorical fields, min/25%/mean/75%/max for numeric
    ones (non-responses excluded and counted separately)."""
    records = list(records)
    if not records:
        raise TooFewPoints("summary_stats needs at least one record")
    out = {}
    for f in ("country",) + CATEGORICAL_FIELDS:
        vals = [getattr(r, f) for r in records]
        counts = Counter(v for v in vals if v is not None)
        out[f] = {
            "counts": dict(sorted(counts.items(), key=lambda kv: str(kv[0]))),
            "missing": sum(v is None for v in vals),
        }
    for f in NUMERIC_FIELDS:
        vals = np.array([getattr(r, f) for r in records if getattr(r, f) is not None], float)
        miss = len(records) - vals.size
        if vals.size == 0:
            out[f] = {"n": 0, "missing": miss}
            continue
        q25, q75 = np.percentile(vals, [25, 75])
        out[f] = {
            "n": int(vals.size),
            "missing": miss,
            "min": float(vals.min()),
            "q25": float(q25),
            "mean": float(vals.mean()),
            "q75": float(q75),
            "max": float(vals.max()),
        }
    return out


def correlation_matrix(design, columns=None):
    """Pearson correlations between the chosen design columns.

    Returns ``(names, matrix)``; the matrix is exactly symmetric with a unit
    diagonal.
    """
    names = tuple(columns) if columns is not None else design.feature_names[1:]
    if design.n < 3:
        raise TooFewPoints("correlation needs at least 3 rows")
    X = np.column_stack([design.column(c) for c in names])
    Xc = X - X.mean(axis=0)
    ss = np.sqrt((Xc * Xc).sum(axis=0))
    if np.any(ss == 0):
        bad = [c for c, s in zip(names, ss) if s == 0]
        raise ZeroVariance(f"zero-variance columns: {bad}")
    Z = Xc / ss
    M = Z.T @ Z
    M = 0.5 * (M + M.T)
    np.clip(M, -1.0, 1.0, out=M)
    np.fill_diagonal(M, 1.0)
    return names, M
