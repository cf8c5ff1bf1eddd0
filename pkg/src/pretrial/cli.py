"""Command-line entry point.

Machine-readable output (TSV tables) goes to stdout; diagnostics go to
stderr. Exit codes: 0 success, 1 validation/configuration error, 2 usage
error. All randomness flows from explicit seeds, so identical argv plus
identical input files produce identical output bytes.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import click

from . import fairness
from .datasets import (
    filter_training_eligible,
    infer_schema,
    load_population_spec,
    load_schema,
    parse_dataset,
    save_schema,
    write_dataset,
    synthesize_population,
)
from .errors import PretrialError
from .evaluation import (
    DetainAllPolicy,
    HandoffModelPolicy,
    ReleaseAllPolicy,
    baseline_release_all,
    compare_policies,
)
from .forest import HandoffForestClassifier
from .model_io import load_model
from .psa.config import (
    bundled_resource_path,
    default_config,
    load_config,
    load_exclusions,
    load_factors_file,
)
from .psa.engine import assess
from .psa.report import render_court_report
from .service import create_app
from .tree import HANDOFF, HandoffTreeClassifier


def wrap_errors(fn: Callable) -> Callable:
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any):
        try:
            return fn(*args, **kwargs)
        except (PretrialError, FileNotFoundError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _emit_table(rows: Sequence[dict[str, Any]], columns: Sequence[str]) -> None:
    click.echo("\t".join(columns))
    for row in rows:
        click.echo("\t".join(_fmt(row.get(column)) for column in columns))


def _load_psa_config(psa_config: str | None, exclusions: str | None):
    config = load_config(psa_config) if psa_config else default_config()
    if exclusions:
        config = config.with_exclusions(load_exclusions(exclusions))
    return config


def _resolve_spec_path(value: str) -> Path:
    if value.startswith("builtin:"):
        return bundled_resource_path(value.removeprefix("builtin:") + ".json")
    return Path(value)


@click.group()
def cli() -> None:
    """Pretrial risk-assessment toolkit."""


@cli.command()
@click.option("--factors", "factors_path", required=True, type=click.Path(), help="Factors JSON file (psa-factors/v1).")
@click.option("--psa-config", "psa_config", type=click.Path(), default=None, help="Scoring config (psa-config/v1); bundled default if omitted.")
@click.option("--exclusions", type=click.Path(), default=None, help="Enable step-two exclusions from this file (off by default).")
@click.option("--smoothing", is_flag=True, help="Smooth the age threshold into a linear ramp.")
@click.option("--format", "output_format", type=click.Choice(["table", "text"]), default="table")
@wrap_errors
def score(factors_path: str, psa_config: str | None, exclusions: str | None, smoothing: bool, output_format: str) -> None:
    """Score one defendant's factor responses."""
    config = _load_psa_config(psa_config, exclusions)
    factors, offenses, metadata = load_factors_file(factors_path)
    result = assess(factors, offenses, config, smoothing=smoothing)
    if output_format == "text":
        click.echo(render_court_report(result, factors, metadata, offenses))
        return
    data = result.as_dict()
    click.echo("field\tvalue")
    for key, value in data.items():
        click.echo(f"{key}\t{_fmt(value)}")


@cli.command()
@click.option("--factors", "factors_path", required=True, type=click.Path())
@click.option("--psa-config", "psa_config", type=click.Path(), default=None)
@click.option("--exclusions", type=click.Path(), default=None)
@click.option("--smoothing", is_flag=True)
@wrap_errors
def report(factors_path: str, psa_config: str | None, exclusions: str | None, smoothing: bool) -> None:
    """Render the plain-text court report."""
    config = _load_psa_config(psa_config, exclusions)
    factors, offenses, metadata = load_factors_file(factors_path)
    result = assess(factors, offenses, config, smoothing=smoothing)
    click.echo(render_court_report(result, factors, metadata, offenses))


@cli.command()
@click.option("--spec", required=True, help="Population spec path, or builtin:<name> (e.g. builtin:kentucky_like).")
@click.option("--n", "count", required=True, type=int)
@click.option("--seed", type=int, default=None, help="Overrides the spec's seed.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--schema-out", "schema_out", type=click.Path(), default=None)
@wrap_errors
def synth(spec: str, count: int, seed: int | None, out_path: str, schema_out: str | None) -> None:
    """Generate a seeded synthetic population CSV."""
    population = load_population_spec(_resolve_spec_path(spec))
    records = synthesize_population(population, count, seed=seed)
    schema = population.schema()
    write_dataset(records, out_path, schema)
    if schema_out:
        save_schema(schema, schema_out)
    click.echo(f"wrote {len(records)} records to {out_path}", err=True)


def _load_records(data_path: str, schema_path: str | None):
    schema = load_schema(schema_path) if schema_path else infer_schema(data_path)
    return parse_dataset(data_path, schema), schema


_COMMON_TREE_OPTIONS = [
    click.option("--data", "data_path", required=True, type=click.Path()),
    click.option("--schema", "schema_path", type=click.Path(), default=None, help="Dataset schema JSON; inferred when omitted."),
    click.option("--target", type=click.Choice(["fta", "nca", "nvca"], case_sensitive=False), default="fta"),
    click.option("--min-cluster", "min_cluster", type=int, default=50),
    click.option("--max-depth", "max_depth", type=int, default=8),
    click.option("--max-fpr", "max_fpr", type=float, default=0.6),
    click.option("--max-fnr", "max_fnr", type=float, default=0.15),
    click.option("--feature-priority", "feature_priority", default="", help="Comma-separated preferred split features."),
    click.option("--include-protected", is_flag=True),
    click.option("--tie-epsilon", "tie_epsilon", type=float, default=0.01),
    click.option("--seed", type=int, default=0),
    click.option("--out", "out_path", required=True, type=click.Path()),
]


def _apply_options(options: list) -> Callable:
    def decorate(fn: Callable) -> Callable:
        for option in reversed(options):
            fn = option(fn)
        return fn

    return decorate


@cli.command()
@_apply_options(_COMMON_TREE_OPTIONS)
@wrap_errors
def train(
    data_path: str,
    schema_path: str | None,
    target: str,
    min_cluster: int,
    max_depth: int,
    max_fpr: float,
    max_fnr: float,
    feature_priority: str,
    include_protected: bool,
    tie_epsilon: float,
    seed: int,
    out_path: str,
) -> None:
    """Fit a handoff tree on training-eligible records."""
    records, _ = _load_records(data_path, schema_path)
    eligible = filter_training_eligible(records, outcomes=(target.lower(),))
    tree = HandoffTreeClassifier(
        target_outcome=target.lower(),
        min_cluster_size=min_cluster,
        max_depth=max_depth,
        high_risk_max_fpr=max_fpr,
        very_low_max_fnr=max_fnr,
        feature_priority=tuple(p for p in feature_priority.split(",") if p),
        include_protected=include_protected,
        impurity_tie_epsilon=tie_epsilon,
        seed=seed,
    ).fit(eligible)
    Path(out_path).write_bytes(tree.serialize())
    click.echo(
        f"fitted tree on {len(eligible)} records: {len(tree.leaves_)} leaves, "
        f"{tree.handoff_training_count()} training records in handoff leaves",
        err=True,
    )


@cli.command(name="train-forest")
@_apply_options(_COMMON_TREE_OPTIONS)
@click.option("--trees", "tree_count", type=int, default=50)
@click.option("--no-bootstrap", is_flag=True)
@click.option("--feature-fraction", "feature_fraction", type=float, default=1.0)
@click.option("--pooled-max-fpr", "pooled_max_fpr", type=float, default=None)
@click.option("--pooled-max-fnr", "pooled_max_fnr", type=float, default=None)
@click.option("--disagreement-max", "disagreement_max", type=float, default=0.25)
@wrap_errors
def train_forest(
    data_path: str,
    schema_path: str | None,
    target: str,
    min_cluster: int,
    max_depth: int,
    max_fpr: float,
    max_fnr: float,
    feature_priority: str,
    include_protected: bool,
    tie_epsilon: float,
    seed: int,
    out_path: str,
    tree_count: int,
    no_bootstrap: bool,
    feature_fraction: float,
    pooled_max_fpr: float | None,
    pooled_max_fnr: float | None,
    disagreement_max: float,
) -> None:
    """Fit a bagged handoff forest."""
    records, _ = _load_records(data_path, schema_path)
    eligible = filter_training_eligible(records, outcomes=(target.lower(),))
    forest = HandoffForestClassifier(
        tree_count=tree_count,
        bootstrap=not no_bootstrap,
        feature_subsample_fraction=feature_fraction,
        pooled_high_risk_max_fpr=pooled_max_fpr,
        pooled_very_low_max_fnr=pooled_max_fnr,
        disagreement_max=disagreement_max,
        target_outcome=target.lower(),
        min_cluster_size=min_cluster,
        max_depth=max_depth,
        high_risk_max_fpr=max_fpr,
        very_low_max_fnr=max_fnr,
        feature_priority=tuple(p for p in feature_priority.split(",") if p),
        include_protected=include_protected,
        impurity_tie_epsilon=tie_epsilon,
        seed=seed,
    ).fit(eligible)
    Path(out_path).write_bytes(forest.serialize())
    click.echo(f"fitted forest of {tree_count} trees on {len(eligible)} records", err=True)


def _read_case_features(path: str) -> list[tuple[str, dict[str, float | str]]]:
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "case_id" not in reader.fieldnames:
            raise click.ClickException("case file needs a header row with a case_id column")
        cases = []
        for row in reader:
            features: dict[str, float | str] = {}
            for key, text in row.items():
                if key == "case_id" or text is None:
                    continue
                try:
                    value: float | str = float(text)
                    if float(value).is_integer():
                        value = int(value)
                except ValueError:
                    value = text
                features[key] = value
            cases.append((row["case_id"], features))
    return cases


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--case", "case_path", required=True, type=click.Path(), help="CSV of case_id plus feature columns.")
@wrap_errors
def predict(model_path: str, case_path: str) -> None:
    """Route cases through a serialized model; one line per case."""
    model = load_model(model_path)
    rows = []
    for case_id, features in _read_case_features(case_path):
        prediction = model.predict(features)
        detail = (
            " ; ".join(prediction.path)
            if hasattr(prediction, "path")
            else f"disagreement={prediction.disagreement:.3f}"
        )
        rows.append(
            {
                "case_id": case_id,
                "label": prediction.label,
                "error_rate": None if prediction.label == HANDOFF else prediction.error_rate,
                "n": prediction.n,
                "detail": detail,
            }
        )
    _emit_table(rows, ["case_id", "label", "error_rate", "n", "detail"])


@cli.command()
@click.option("--data", "data_path", required=True, type=click.Path(), help="CSV with score, outcome, group columns.")
@click.option("--threshold", type=float, default=None, help="Score threshold for FPR/FNR columns.")
@click.option("--calibration", is_flag=True, help="Emit per-bin calibration rows instead of group metrics.")
@wrap_errors
def audit(data_path: str, threshold: float | None, calibration: bool) -> None:
    """Group-fairness audit of scored cases."""
    cases = []
    with open(data_path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"score", "outcome", "group"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise click.ClickException("audit data needs score, outcome and group columns")
        for row in reader:
            cases.append(
                fairness.ScoredCase(
                    score=float(row["score"]),
                    outcome=row["outcome"] == "true",
                    group=row["group"],
                )
            )
    report_data = fairness.audit_scores(cases, threshold=threshold)
    if calibration:
        _emit_table(
            report_data.calibration_rows(),
            ["group", "bin", "low", "high", "count", "mean_score", "observed_rate"],
        )
        return
    _emit_table(
        report_data.to_rows(),
        ["group", "n", "auc", "fpr", "fnr", "abstention_rate", "max_calibration_gap"],
    )


@cli.command()
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", type=click.Path(), default=None)
@click.option("--target", type=click.Choice(["fta", "nca", "nvca"], case_sensitive=False), default="fta")
@click.option("--model", "model_path", type=click.Path(), default=None, help="Adds a handoff-model policy row.")
@click.option("--handoff-fallback", type=click.Choice(["release", "detain"]), default="release")
@wrap_errors
def evaluate(
    data_path: str,
    schema_path: str | None,
    target: str,
    model_path: str | None,
    handoff_fallback: str,
) -> None:
    """Compare trivial policies (and optionally a model) on one dataset."""
    records, _ = _load_records(data_path, schema_path)
    eligible = filter_training_eligible(records, outcomes=(target.lower(),))
    if not eligible:
        raise click.ClickException("no training-eligible records to evaluate")
    policies = [ReleaseAllPolicy(), DetainAllPolicy()]
    if model_path:
        policies.append(HandoffModelPolicy(model=load_model(model_path)))
    results = compare_policies(eligible, policies, handoff_fallback=handoff_fallback)
    baseline = baseline_release_all(eligible, target.lower())
    click.echo(f"release-all baseline accuracy ({target.lower()}): {baseline:.6g}", err=True)
    columns = ["policy", "n", "detention_rate", "handoff_rate"]
    for outcome in ("fta", "nca", "nvca"):
        columns += [f"released_{outcome}_rate", f"detained_non_{outcome}_rate"]
    _emit_table([result.to_row() for result in results], columns)


@cli.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--model", "model_path", type=click.Path(), default=None)
@click.option("--log-path", "log_path", type=click.Path(), default="decisions.log")
@click.option("--psa-config", "psa_config", type=click.Path(), default=None)
@click.option("--exclusions", type=click.Path(), default=None)
@click.option("--token", default=None, help="Require this bearer token on every request.")
@click.option("--console", "console_dir", type=click.Path(), default=None, help="Serve a built console from this directory.")
@wrap_errors
def serve(
    port: int,
    host: str,
    model_path: str | None,
    log_path: str,
    psa_config: str | None,
    exclusions: str | None,
    token: str | None,
    console_dir: str | None,
) -> None:
    """Run the HTTP decision service."""
    import uvicorn

    app = create_app(
        model=load_model(model_path) if model_path else None,
        psa_config=_load_psa_config(psa_config, exclusions),
        log_path=log_path,
        token=token,
        static_dir=console_dir,
    )
    uvicorn.run(app, host=host, port=port)


@cli.command(name="export-config")
@click.argument("name", type=click.Choice(["psa_default", "sf_exclusions", "appendix1_case", "kentucky_like", "figure2"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@wrap_errors
def export_config(name: str, out_path: str) -> None:
    """Copy a bundled config/fixture to a file for editing."""
    source = bundled_resource_path(f"{name}.json")
    Path(out_path).write_text(source.read_text(encoding="utf-8"), encoding="utf-8")
    click.echo(f"wrote {out_path}", err=True)


def main() -> None:
    try:
        cli(standalone_mode=True)
    except json.JSONDecodeError as exc:  # pragma: no cover - defensive
        print(f"error: malformed JSON input: {exc}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
