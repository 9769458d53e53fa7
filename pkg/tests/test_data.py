import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jobrisk.data import (
    TASK_CODES,
    WORKER_COLUMNS,
    FrequencyAnswer,
    ResponseKind,
    build_design_matrix,
    correlation_matrix,
    encode_frequency,
    impute_means,
    parse_worker_csv,
    summary_stats,
    tier_features,
    write_worker_csv,
)
from jobrisk.errors import (
    AllMissingField,
    BadEnumValue,
    BadIscoCode,
    EmptyDesign,
    MissingColumn,
    RankDeficient,
    TooFewPoints,
    ZeroVariance,
)
from jobrisk.labeling import OccupationLabel

from .conftest import make_design, worker


def _row(**over):
    row = {c: "" for c in WORKER_COLUMNS}
    row.update(id="a1", country="DE", isco4="4110", age_group="3", gender="male",
               education_years="12", firm_sector="public", firm_size="1",
               job_responsibility="0", job_experience="2", job_education="1",
               skill_ps="250", skill_num="260", skill_lit="270")
    for c in TASK_CODES:
        row[c] = "weekly"
    row.update(over)
    return row


def _write(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=WORKER_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


class TestEncodeFrequency:
    @pytest.mark.parametrize("answer,value", [
        (FrequencyAnswer.DAILY, 1.0),
        (FrequencyAnswer.WEEKLY_TO_DAILY, 0.5),
        (FrequencyAnswer.MONTHLY_TO_WEEKLY, 1 / 7),
        (FrequencyAnswer.LESS_THAN_MONTHLY, 1 / 30),
        (FrequencyAnswer.NEVER, 0.0),
    ])
    def test_values(self, answer, value):
        assert encode_frequency(answer) == value

    def test_no_response_is_absent(self):
        assert encode_frequency(FrequencyAnswer.NO_RESPONSE) is None

    def test_monotone_in_frequency(self):
        order = [FrequencyAnswer.NEVER, FrequencyAnswer.LESS_THAN_MONTHLY,
                 FrequencyAnswer.MONTHLY_TO_WEEKLY, FrequencyAnswer.WEEKLY_TO_DAILY,
                 FrequencyAnswer.DAILY]
        vals = [encode_frequency(a) for a in order]
        assert vals == sorted(vals)


class TestParseWorkerCsv:
    def test_daily_token(self, tmp_path):
        p = tmp_path / "w.csv"
        _write(p, [_row(human_share="daily")])
        (rec,) = parse_worker_csv(p)
        assert rec.tasks[0] is FrequencyAnswer.DAILY
        assert rec.task_values[0] == 1.0

    def test_empty_education_is_absent(self, tmp_path):
        p = tmp_path / "w.csv"
        _write(p, [_row(education_years="")])
        (rec,) = parse_worker_csv(p)
        assert rec.education_years is None
        assert "education_years" in rec.missing_fields()

    def test_three_digit_isco_rejected(self, tmp_path):
        p = tmp_path / "w.csv"
        _write(p, [_row(), _row(id="a2", isco4="411")])
        with pytest.raises(BadIscoCode, match="row 3.*isco4"):
            parse_worker_csv(p)

    def test_bad_task_token_names_cell(self, tmp_path):
        p = tmp_path / "w.csv"
        _write(p, [_row(reading_book="often")])
        with pytest.raises(BadEnumValue, match="row 2.*reading_book"):
            parse_worker_csv(p)

    def test_out_of_range_numeric_is_nonresponse(self, tmp_path):
        p = tmp_path / "w.csv"
        _write(p, [_row(education_years="35", skill_ps="abc")])
        (rec,) = parse_worker_csv(p)
        assert rec.education_years is None and rec.skill_ps is None

    def test_missing_column(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("id,country,isco4\na,DE,4110\n")
        with pytest.raises(MissingColumn):
            parse_worker_csv(p)

    def test_roundtrip(self, tmp_path, default_population):
        recs = default_population[1][:200]
        p = tmp_path / "w.csv"
        write_worker_csv(recs, p)
        assert parse_worker_csv(p) == recs


class TestImpute:
    def test_two_point_mean(self):
        recs = [worker("a", education_years=10.0), worker("b", education_years=14.0),
                worker("c", education_years=None)]
        out = impute_means(recs)
        assert out[2].education_years == 12.0
        assert out[2].imputed == frozenset({"education_years"})

    def test_complete_record_identical(self):
        recs = [worker("a"), worker("b", education_years=None)]
        out = impute_means(recs)
        assert out[0] is recs[0]

    def test_mean_of_69_observed(self):
        rng = np.random.default_rng(5)
        vals = rng.uniform(4, 20, 100)
        miss = set(rng.choice(100, 31, replace=False).tolist())
        recs = [worker(str(i), education_years=None if i in miss else float(v))
                for i, v in enumerate(vals)]
        observed = [float(v) for i, v in enumerate(vals) if i not in miss]
        assert len(observed) == 69
        brute = 0.0
        for v in observed:
            brute += v
        brute /= 69
        out = impute_means(recs)
        filled = [r.education_years for i, r in enumerate(out) if i in miss]
        assert len(filled) == 31
        np.testing.assert_allclose(filled, brute, rtol=1e-14)
        # every row is usable after imputation
        assert len(build_design_matrix(out, tier=1).row_ids) == 100

    def test_categorical_mode_tie_goes_to_smallest(self):
        recs = [worker("a", firm_size=3), worker("b", firm_size=1), worker("c", firm_size=None)]
        assert impute_means(recs)[2].firm_size == 1

    def test_task_imputation(self):
        t = list(worker().tasks)
        t[5] = FrequencyAnswer.NO_RESPONSE
        a = worker("a", tasks=tuple([FrequencyAnswer.DAILY] * 39))
        b = worker("b", tasks=tuple([FrequencyAnswer.NEVER] * 39))
        c = worker("c", tasks=tuple(t))
        out = impute_means([a, b, c])
        assert out[2].task_values[5] == 0.5
        assert TASK_CODES[5] in out[2].imputed

    def test_all_missing_field(self):
        with pytest.raises(AllMissingField):
            impute_means([worker("a", skill_ps=None), worker("b", skill_ps=None)])

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.one_of(st.none(), st.floats(4, 20)), min_size=2, max_size=15)
           .filter(lambda v: any(x is not None for x in v)))
    def test_idempotent(self, edu):
        recs = [worker(str(i), education_years=e) for i, e in enumerate(edu)]
        once = impute_means(recs)
        assert impute_means(once) == once
        assert all(not r.missing_fields() for r in once)


class TestDesign:
    def _labels(self, recs, consensus=1, mean=0.9):
        lab = OccupationLabel("4110", mean, 1, consensus, 20)
        return {r.id: lab for r in recs}

    def test_education_square(self):
        d = build_design_matrix([worker(education_years=14.0)], tier=1)
        assert d.column("education_sq")[0] == 196.0
        assert d.feature_names[0] == "intercept"

    def test_no_consensus_excluded_from_binary(self):
        recs = [worker(i, age_group=a, education_years=e, gender=g, isco4=c)
                for i, a, e, g, c in [("a", 1, 10.0, "male", "4110"), ("b", 2, 12.0, "female", "2262"),
                                      ("c", 3, 14.0, "female", "4110"), ("d", 4, 9.0, "male", "4110")]]
        joined = {r.id: OccupationLabel(r.isco4, 0.9, 1, 1, 10) for r in recs}
        joined["b"] = OccupationLabel("2262", 0.5, 0, None, 26)
        binary = build_design_matrix(recs, joined, ResponseKind.BINARY, tier=1)
        frac = build_design_matrix(recs, joined, ResponseKind.FRACTIONAL, tier=1)
        assert "b" not in binary.row_ids
        assert "b" in frac.row_ids and frac.n > binary.n

    def test_country_filter(self):
        recs = [worker("a", age_group=1, education_years=10.0),
                worker("b", age_group=2, gender="male", education_years=13.0),
                worker("c", country="AT")]
        d = build_design_matrix(recs, self._labels(recs), ResponseKind.BINARY, tier=1, country="DE")
        assert d.row_ids == ("a", "b")

    def test_constant_column_rank_deficient(self):
        recs = [worker("a"), worker("b")]
        with pytest.raises(RankDeficient):
            build_design_matrix(recs, self._labels(recs), ResponseKind.BINARY, tier=1)

    def test_empty(self):
        with pytest.raises(EmptyDesign):
            build_design_matrix([worker()], {"w1": None}, ResponseKind.BINARY, tier=1)

    @pytest.mark.parametrize("tier,k", [(1, 5), (2, 7), (3, 13), (4, 44), (5, 40), (6, 52)])
    def test_tier_sizes(self, tier, k):
        assert len(tier_features(tier)) == k


class TestDescriptives:
    def test_gender_counts(self):
        s = summary_stats([worker("a", gender="male"), worker("b", gender="female")])
        assert s["gender"]["counts"] == {"female": 1, "male": 1}

    def test_order_statistics(self):
        recs = [worker(str(i), education_years=e) for i, e in enumerate([4.0, 13.0, 16.0, 20.0])]
        s = summary_stats(recs)["education_years"]
        assert (s["min"], s["max"], s["mean"]) == (4.0, 20.0, 13.25)

    def test_self_and_negated(self):
        x = np.arange(10.0)
        d = make_design(np.column_stack([x, -x, x ** 2]), None, names=("a", "b", "c"))
        names, M = correlation_matrix(d, ("a", "b", "c"))
        assert M[0, 0] == 1.0
        np.testing.assert_allclose(M[0, 1], -1.0, atol=1e-15)
        np.testing.assert_array_equal(M, M.T)

    def test_education_vs_square(self):
        rng = np.random.default_rng(6)
        e = rng.integers(4, 21, 5000).astype(float)
        d = make_design(np.column_stack([e, e * e]), None, names=("education", "education_sq"))
        _, M = correlation_matrix(d, ("education", "education_sq"))
        brute = math.fsum((a - e.mean()) * (b - (e * e).mean()) for a, b in zip(e, e * e)) / math.sqrt(
            math.fsum((a - e.mean()) ** 2 for a in e) * math.fsum((b - (e * e).mean()) ** 2 for b in e * e))
        assert M[0, 1] == pytest.approx(brute, abs=1e-12)
        assert 0.98 < M[0, 1] < 1.0

    def test_zero_variance_and_too_few(self):
        d = make_design(np.column_stack([np.ones(5), np.arange(5.0)]), None, names=("a", "b"))
        with pytest.raises(ZeroVariance):
            correlation_matrix(d, ("a", "b"))
        with pytest.raises(TooFewPoints):
            correlation_matrix(d.subset([0, 1]), ("b",))
