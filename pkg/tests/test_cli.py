import hashlib
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from jobrisk.cli import main
from jobrisk.labeling import ExpertVoteSet, write_votes_csv
from jobrisk.report import read_distribution_csv

SVG = "{http://www.w3.org/2000/svg}"


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def local_maxima(counts):
    smooth = np.convolve(counts, np.ones(3) / 3, mode="same")
    return sum(1 for i in range(1, len(smooth) - 1)
               if smooth[i] > smooth[i - 1] and smooth[i] >= smooth[i + 1])


@pytest.fixture(scope="module")
def staged(tmp_path_factory):
    """synth -> label -> fit x3 -> evaluate -> predict x3 -> report, small data."""
    out = tmp_path_factory.mktemp("staged")
    o = str(out)
    assert main(["synth", "--seed", "7", "--out", o]) == 0
    assert main(["label", "--out", o]) == 0
    for m in ("logit", "lda", "fractional"):
        assert main(["fit", "--model", m, "--out", o]) == 0
        assert main(["predict", "--model-file", str(out / f"{m}.json"), "--out", o]) == 0
    assert main(["evaluate", "--out", o]) == 0
    preds = [str(out / f"predictions_{m}.csv") for m in ("logit", "lda", "fractional")]
    assert main(["report", "--predictions", *preds, "--model-dir", o,
                 "--evaluation", str(out / "evaluation.csv"), "--out", o]) == 0
    return out


class TestSynth:
    def test_outputs_and_digests(self, tmp_path):
        for d in ("a", "b"):
            assert main(["synth", "--seed", "7", "--n-workers", "300", "--out", str(tmp_path / d)]) == 0
        for f in ("workers.csv", "votes.csv"):
            assert digest(tmp_path / "a" / f) == digest(tmp_path / "b" / f)
        ma = json.loads((tmp_path / "a" / "manifest_synth.json").read_text())
        mb = json.loads((tmp_path / "b" / "manifest_synth.json").read_text())
        assert ma["config_digest"] != "" and ma["seed"] == 7
        assert sorted(ma["outputs"]) == ["votes.csv", "workers.csv"]
        assert "started" in ma and "finished" in ma
        # same flags and seed in another directory: same digest
        assert ma["config_digest"] == mb["config_digest"]

    def test_zero_experts_exit_2(self, tmp_path, capsys):
        assert main(["synth", "--n-experts", "0", "--out", str(tmp_path)]) == 2
        assert "n_experts" in capsys.readouterr().err

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# small run\nn_workers = 120\nseed = 5\n")
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        assert len((tmp_path / "workers.csv").read_text().splitlines()) == 121
        assert json.loads((tmp_path / "manifest_synth.json").read_text())["seed"] == 5

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path)]) == 2


class TestLabel:
    def test_table_rows(self, tmp_path):
        vs = ExpertVoteSet(("5311", "2262"),
                           (tuple([True] + [False] * 29), tuple([True] * 13 + [False] * 13)))
        write_votes_csv(vs, tmp_path / "votes.csv")
        assert main(["label", "--precision", "3", "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "labels.csv").read_text().splitlines()
        assert lines[1].startswith("5311,0.033,0,0,")
        assert lines[2] == "2262,0.500,0,,26"

    def test_empty_votes_exit_1(self, tmp_path, capsys):
        (tmp_path / "votes.csv").write_text("isco4,expert_id,vote\n")
        assert main(["label", "--out", str(tmp_path)]) == 1
        assert "no" in capsys.readouterr().err.lower()


class TestFit:
    def test_unknown_model_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--model", "probit", "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_missing_input_exit_1(self, tmp_path):
        assert main(["fit", "--model", "logit", "--out", str(tmp_path)]) == 1

    def test_tier6_logit(self, staged):
        m = json.loads((staged / "logit.json").read_text())
        assert m["converged"] and np.isfinite(m["aic"]) and len(m["coefficients"]) == 52
        assert "AIC" in (staged / "logit_coefficients.txt").read_text()


class TestReport:
    def test_comparison(self, staged):
        lines = (staged / "comparison.csv").read_text().splitlines()
        assert lines[0] == "model,input,auc,aic,high_risk_share,shape"
        assert [ln.split(",")[0] for ln in lines[1:]] == ["logit", "lda", "fractional"]

    def test_matches_reproduce(self, staged, tmp_path):
        assert main(["reproduce", "--seed", "7", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "comparison.csv").read_bytes() == (staged / "comparison.csv").read_bytes()
        for m in ("logit", "fractional"):
            assert digest(tmp_path / f"histogram_{m}.svg") == digest(staged / f"histogram_{m}.svg")

    def test_logit_histogram_two_concentrations(self, staged):
        _, c = read_distribution_csv(staged / "distribution_logit.csv")
        middle = c[5:15].max()
        assert c[0] > 2 * middle and c[-1] > 2 * middle

    def test_fractional_histogram_single_peak(self, staged):
        _, c = read_distribution_csv(staged / "distribution_fractional.csv")
        assert local_maxima(c) == 1
        assert c[0] < c.max() / 10 and c[-1] < c.max() / 10

    def test_level1_chart(self, staged):
        root = ET.parse(staged / "isco1_logit.svg").getroot()
        bars = root.findall(f"{SVG}rect")[1:]
        assert 1 <= len(bars) <= 9
        assert (root.get("width"), root.get("height")) == ("800", "500")


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "jobrisk", "synth", "--n-workers", "50",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "jobrisk", "nonsense"], capture_output=True, text=True)
    assert r.returncode == 2
