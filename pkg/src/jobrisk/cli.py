"""Command-line interface.

Stages communicate through files in the output directory, so each command
can be rerun on its own. ``reproduce`` chains every stage on synthetic data.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""
import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, fields
from datetime import datetime, timezone

from . import report
from .data import ResponseKind, build_design_matrix, impute_means, parse_worker_csv, write_worker_csv
from .diagnostics import aggregate_isco, predict_population, risk_distribution
from .errors import InvalidConfig, JobRiskError
from .evaluation import (
    ComparisonRow,
    ModelComparison,
    describe_model,
    holdout_splits,
    read_comparison_csv,
    roc_auc,
)
from .glm import FittedGlm, fit_fractional, fit_lda, fit_logit, load_model, predict_proba, save_model
from .labeling import (
    aggregate_labels,
    attach_labels,
    parse_labels_csv,
    parse_votes_csv,
    write_labels_csv,
    write_votes_csv,
)
from .synth import SynthConfig, generate_population, run_pipeline

MODELS = ("logit", "lda", "fractional")
FITTERS = {"logit": fit_logit, "lda": fit_lda, "fractional": fit_fractional}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def read_config_file(path):
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _digest(command, settings, inputs):
    # the output location does not change content, so it stays out of the digest
    payload = {
        "command": command,
        "settings": {k: v for k, v in settings.items() if k != "out"},
        "inputs": {k: _sha256_file(p) for k, p in sorted(inputs.items())},
    }
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir, command, settings, inputs, outputs, started):
    manifest = {
        "command": command,
        "config_digest": _digest(command, settings, inputs),
        "seed": settings.get("seed"),
        "settings": settings,
        "inputs": dict(sorted(inputs.items())),
        "outputs": sorted(os.path.relpath(p, out_dir) for p in outputs),
        "started": started,
        "finished": _now(),
    }
    path = os.path.join(out_dir, f"manifest_{command}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")
    return path


def _in_out(args, explicit, default_name):
    return explicit if explicit else os.path.join(args.out, default_name)


def _load_records(path):
    return impute_means(parse_worker_csv(path))


def _settings(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _synth_config(args):
    values = {}
    for f in fields(SynthConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return SynthConfig.from_mapping(values)


def cmd_synth(args):
    cfg = _synth_config(args)
    votes, workers = generate_population(cfg)
    w_path = os.path.join(args.out, "workers.csv")
    v_path = os.path.join(args.out, "votes.csv")
    write_worker_csv(workers, w_path)
    write_votes_csv(votes, v_path)
    return {}, [w_path, v_path], {"synth_config": asdict(cfg)}


def cmd_label(args):
    votes_path = _in_out(args, args.votes, "votes.csv")
    labels = aggregate_labels(parse_votes_csv(votes_path), args.threshold)
    path = os.path.join(args.out, "labels.csv")
    write_labels_csv(labels, path, precision=args.precision)
    n_cons = sum(lab.consensus is not None for lab in labels)
    print(f"{len(labels)} occupations labelled, {n_cons} with consensus")
    return {"votes": votes_path}, [path], {}


def _designs(args):
    workers_path = _in_out(args, args.workers, "workers.csv")
    labels_path = _in_out(args, args.labels, "labels.csv")
    records = _load_records(workers_path)
    join = attach_labels(records, parse_labels_csv(labels_path))
    return records, join, {"workers": workers_path, "labels": labels_path}


def cmd_fit(args):
    records, join, inputs = _designs(args)
    kind = ResponseKind.FRACTIONAL if args.model == "fractional" else ResponseKind.BINARY
    design = build_design_matrix(records, join, kind, args.tier, country=args.country)
    model = FITTERS[args.model](design)
    stem = os.path.join(args.out, args.model)
    save_model(model, stem + ".json")
    table = report.format_coefficient_table(model)
    report.write_text(table, stem + "_coefficients.txt")
    report.write_coefficient_csv(model, stem + "_coefficients.csv")
    sys.stdout.write(table)
    outputs = [stem + ".json", stem + "_coefficients.txt", stem + "_coefficients.csv"]
    return inputs, outputs, {}


def cmd_evaluate(args):
    records, join, inputs = _designs(args)
    design = build_design_matrix(records, join, ResponseKind.BINARY, args.tier, country=args.country)
    path = os.path.join(args.out, "evaluation.csv")
    outputs = [path]
    lines = ["model,repeat,auc,n_train,n_test"]
    splits = list(holdout_splits(design, args.train_fraction, args.seed, args.repeats))
    for name in args.models:
        if name not in ("logit", "lda"):
            raise UsageError(f"evaluate supports logit and lda, not {name!r}")
        for rep, (train, test) in enumerate(splits):
            model = FITTERS[name](train)
            curve, auc = roc_auc(predict_proba(model, test), test.response)
            lines.append(f"{name},{rep},{auc!r},{train.n},{test.n}")
            if rep == 0:
                roc_path = os.path.join(args.out, f"roc_{name}.csv")
                report.write_text(
                    "fpr,tpr\n" + "".join(f"{f!r},{t!r}\n" for f, t in curve.points), roc_path)
                outputs.append(roc_path)
            print(f"{name} repeat {rep}: AUC {auc:.4f} (train {train.n}, test {test.n})")
    report.write_text("\n".join(lines) + "\n", path)
    return inputs, outputs, {}


def cmd_predict(args):
    workers_path = _in_out(args, args.workers, "workers.csv")
    records = _load_records(workers_path)
    model = load_model(args.model_file)
    pred = predict_population(model, records, country=args.country)
    name = args.name or os.path.splitext(os.path.basename(args.model_file))[0]
    path = os.path.join(args.out, f"predictions_{name}.csv")
    report.write_predictions_csv(pred, path)
    return {"workers": workers_path, "model": args.model_file}, [path], {}


def _read_auc(path):
    if not path:
        return {}
    out = {}
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            name, rep, auc = line.strip().split(",")[:3]
            if rep == "0":
                out[name] = float(auc)
    return out


def write_charts(name, probabilities, isco_codes, threshold, out_dir):
    """Histogram, distribution CSV and both ISCO charts for one model."""
    dist = risk_distribution(probabilities, threshold)
    outputs = []
    p = os.path.join(out_dir, f"distribution_{name}.csv")
    report.write_distribution_csv(dist, p)
    outputs.append(p)
    p = os.path.join(out_dir, f"histogram_{name}.svg")
    report.write_text(report.histogram_svg(dist, f"Predicted probabilities: {name}"), p)
    outputs.append(p)
    for level in (1, 2):
        agg = aggregate_isco(probabilities, isco_codes, level)
        p = os.path.join(out_dir, f"isco{level}_{name}.csv")
        report.write_isco_csv(agg, p)
        outputs.append(p)
        p = os.path.join(out_dir, f"isco{level}_{name}.svg")
        report.write_text(report.isco_bar_svg(agg, f"Mean probability by ISCO level {level}: {name}"), p)
        outputs.append(p)
    return dist, outputs


def cmd_report(args):
    inputs, outputs, rows = {}, [], []
    aucs = _read_auc(args.evaluation)
    if args.evaluation:
        inputs["evaluation"] = args.evaluation
    for item in args.predictions:
        name, _, path = item.rpartition("=")
        if not name:
            name = os.path.splitext(os.path.basename(path))[0].removeprefix("predictions_")
        inputs[f"predictions:{name}"] = path
        _, codes, probs = report.read_predictions_csv(path)
        dist, outs = write_charts(name, probs, codes, args.threshold, args.out)
        outputs += outs
        kind, inp, aic = "", "", None
        model_path = os.path.join(args.model_dir, f"{name}.json") if args.model_dir else None
        if model_path and os.path.exists(model_path):
            inputs[f"model:{name}"] = model_path
            model = load_model(model_path)
            kind, inp, _ = describe_model(model)
            if isinstance(model, FittedGlm):
                aic = model.aic
        rows.append(ComparisonRow(
            model=name, kind=kind, input=inp, auc=aucs.get(name), aic=aic,
            high_risk_share=dist.high_risk_share, shape=dist.shape.value,
            bimodality_coefficient=dist.bimodality_coefficient, mean=dist.mean, n=dist.n,
        ))
    comp = ModelComparison(rows=tuple(rows), metadata={"threshold": args.threshold})
    path = os.path.join(args.out, "comparison.csv")
    comp.to_csv(path)
    outputs.append(path)
    _print_comparison(read_comparison_csv(path))
    return inputs, outputs, {}


def _print_comparison(rows):
    print(f"{'model':<12}{'input':<10}{'AUC':>8}{'AIC':>12}{'>0.7':>8}  shape")
    for r in rows:
        auc = "" if r["auc"] is None else f"{r['auc']:.3f}"
        aic = "" if r["aic"] is None else f"{r['aic']:.1f}"
        print(f"{r['model']:<12}{r['input']:<10}{auc:>8}{aic:>12}"
              f"{r['high_risk_share']:>8.1%}  {r['shape']}")


def cmd_reproduce(args):
    cfg = _synth_config(args)
    votes, workers = generate_population(cfg)
    out = args.out
    outputs = []

    def path(name):
        p = os.path.join(out, name)
        outputs.append(p)
        return p

    write_worker_csv(workers, path("workers.csv"))
    write_votes_csv(votes, path("votes.csv"))
    res = run_pipeline(votes, workers, tier=args.tier, train_fraction=args.train_fraction,
                       seed=cfg.seed, threshold=args.threshold)
    write_labels_csv(res["labels"], path("labels.csv"))
    for name, model in res["fits"].items():
        save_model(model, path(f"{name}.json"))
        report.write_text(report.format_coefficient_table(model), path(f"{name}_coefficients.txt"))
        report.write_coefficient_csv(model, path(f"{name}_coefficients.csv"))
        pred = res["predictions"][name]
        report.write_predictions_csv(pred, path(f"predictions_{name}.csv"))
        _, outs = write_charts(name, pred.probabilities, pred.isco4, args.threshold, out)
        outputs += outs
    comp = res["comparison"]
    comp.to_csv(path("comparison.csv"))
    comp.to_json(path("comparison.json"))
    _print_comparison(read_comparison_csv(os.path.join(out, "comparison.csv")))
    return {}, outputs, {"synth_config": asdict(cfg)}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _tier(s):
    v = int(s)
    if not 1 <= v <= 6:
        raise argparse.ArgumentTypeError("tier must be 1..6")
    return v


def _fraction(s):
    v = float(s)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return v


def _add_synth_options(p):
    for f in fields(SynthConfig):
        if f.name == "seed":
            continue
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=f.type, default=None,
                       help=f"default {f.default!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 7)")
    common.add_argument("--out", default=None, help="output directory (default .)")
    common.add_argument("--config", default=None, help="key=value file with option defaults")

    parser = argparse.ArgumentParser(prog="jobrisk", description=(
        "Expert-label aggregation, logit / LDA / fractional fits and "
        "automation-risk reports."))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic votes and workers")
    _add_synth_options(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("label", parents=[common], help="aggregate votes into labels.csv")
    p.add_argument("--votes", default=None, help="votes CSV (default OUT/votes.csv)")
    p.add_argument("--threshold", type=float, default=None, help="consensus share (default 0.75)")
    p.add_argument("--precision", type=int, default=None,
                   help="decimals for the mean column (default full precision)")
    p.set_defaults(func=cmd_label)

    data_opts = argparse.ArgumentParser(add_help=False)
    data_opts.add_argument("--workers", default=None, help="workers CSV (default OUT/workers.csv)")
    data_opts.add_argument("--labels", default=None, help="labels CSV (default OUT/labels.csv)")
    data_opts.add_argument("--tier", type=_tier, default=None, help="covariate tier 1..6 (default 6)")
    data_opts.add_argument("--country", default=None, help="fitting sample (default DE)")

    p = sub.add_parser("fit", parents=[common, data_opts], help="fit one model")
    p.add_argument("--model", choices=MODELS, required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", parents=[common, data_opts], help="holdout AUC")
    p.add_argument("--models", nargs="+", choices=("logit", "lda"), default=None)
    p.add_argument("--train-fraction", type=_fraction, default=None, help="default 0.4")
    p.add_argument("--repeats", type=int, default=None, help="independent splits (default 1)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", parents=[common], help="score the prediction sample")
    p.add_argument("--model-file", required=True)
    p.add_argument("--workers", default=None, help="workers CSV (default OUT/workers.csv)")
    p.add_argument("--country", default=None, help="prediction sample (default AT)")
    p.add_argument("--name", default=None, help="label for output files (default model file stem)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("report", parents=[common], help="histograms, ISCO charts, comparison.csv")
    p.add_argument("--predictions", nargs="+", required=True, metavar="[NAME=]CSV")
    p.add_argument("--model-dir", default=None, help="directory with NAME.json model files")
    p.add_argument("--evaluation", default=None, help="evaluation.csv for AUC values")
    p.add_argument("--threshold", type=_fraction, default=None, help="high-risk cutoff (default 0.7)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("reproduce", parents=[common], help="run every stage on synthetic data")
    _add_synth_options(p)
    p.add_argument("--tier", type=_tier, default=None, help="default 6")
    p.add_argument("--train-fraction", type=_fraction, default=None, help="default 0.4")
    p.add_argument("--threshold", type=_fraction, default=None, help="high-risk cutoff (default 0.7)")
    p.set_defaults(func=cmd_reproduce)
    return parser


DEFAULTS = {
    "seed": 7, "out": ".", "threshold": 0.7, "tier": 6, "train_fraction": 0.4,
    "repeats": 1, "models": ["logit", "lda"],
}
COMMAND_DEFAULTS = {
    "label": {"threshold": 0.75},
    "fit": {"country": "DE"},
    "evaluate": {"country": "DE"},
    "predict": {"country": "AT"},
}


def _apply_defaults(args, command_parser):
    """Fill unset options: command line, then config file, then defaults."""
    config = read_config_file(args.config) if args.config else {}
    actions = {a.dest: a for a in command_parser._actions}
    for key, raw in config.items():
        if key not in actions or key in ("help", "config"):
            raise UsageError(f"config key {key!r} is not an option of {args.command!r}")
        if getattr(args, key) is None:
            action = actions[key]
            try:
                value = action.type(raw) if action.type else raw
            except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
            setattr(args, key, value)
    defaults = {**DEFAULTS, **COMMAND_DEFAULTS.get(args.command, {})}
    for key, value in defaults.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    started = _now()
    try:
        _apply_defaults(args, sub)
        os.makedirs(args.out, exist_ok=True)
        inputs, outputs, extra = args.func(args)
        settings = {**_settings(args), **extra}
        write_manifest(args.out, args.command, settings, inputs, outputs, started)
    except (UsageError, InvalidConfig) as exc:
        print(f"jobrisk {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (JobRiskError, OSError, ValueError) as exc:
        print(f"jobrisk {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
