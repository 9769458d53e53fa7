import xml.etree.ElementTree as ET

import numpy as np
import pytest

from jobrisk import report
from jobrisk.diagnostics import aggregate_isco, risk_distribution
from jobrisk.glm import fit_lda, fit_logit

from .conftest import random_logit_design

SVG = "{http://www.w3.org/2000/svg}"


class TestStars:
    @pytest.mark.parametrize("p,stars", [(0.001, "***"), (0.0099, "***"), (0.01, "**"),
                                         (0.049, "**"), (0.05, "*"), (0.099, "*"),
                                         (0.1, ""), (float("nan"), ""), (None, "")])
    def test_levels(self, p, stars):
        assert report.significance_stars(p) == stars


class TestCoefficientTable:
    def test_layout(self):
        m = fit_logit(random_logit_design(np.random.default_rng(0), 300, 3, beta_scale=1.5))
        text = report.format_coefficient_table(m)
        lines = text.splitlines()
        assert lines[0].startswith("intercept")
        assert lines[1].strip().startswith("(") and lines[1].strip().endswith(")")
        assert "AIC" in text and "*** p<0.01" in text

    def test_csv_and_lda(self, tmp_path):
        d = random_logit_design(np.random.default_rng(1), 200, 3)
        report.write_coefficient_csv(fit_lda(d), tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "term,estimate,std_error,p_value,stars" and len(lines) == 4


class TestCsvRoundtrips:
    def test_distribution(self, tmp_path):
        dist = risk_distribution(np.random.default_rng(2).random(300))
        report.write_distribution_csv(dist, tmp_path / "d.csv")
        edges, counts = report.read_distribution_csv(tmp_path / "d.csv")
        np.testing.assert_array_equal(edges, dist.bin_edges)
        np.testing.assert_array_equal(counts, dist.counts)

    def test_isco(self, tmp_path):
        agg = aggregate_isco([0.2, 0.9, 0.4], ["2111", "4110", "2221"], 2)
        report.write_isco_csv(agg, tmp_path / "i.csv")
        assert report.read_isco_csv(tmp_path / "i.csv") == agg


class TestSvg:
    def test_histogram(self):
        dist = risk_distribution(np.random.default_rng(3).random(500))
        text = report.histogram_svg(dist, "t & <x>")
        root = ET.fromstring(text.split("\n", 1)[1])
        assert (root.get("width"), root.get("height")) == ("800", "500")
        # background plus 20 bars
        assert len(root.findall(f"{SVG}rect")) == 21
        assert report.histogram_svg(dist, "t & <x>") == text

    def test_isco_bars_sorted(self):
        agg = aggregate_isco([0.1, 0.9, 0.5], ["2111", "4110", "7111"], 1)
        root = ET.fromstring(report.isco_bar_svg(agg, "x").split("\n", 1)[1])
        widths = [float(r.get("width")) for r in root.findall(f"{SVG}rect")[1:]]
        assert widths == sorted(widths, reverse=True) and len(widths) == 3
