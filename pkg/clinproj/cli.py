"""
CLI entrypoint for clinproj.

Usage:
    clinproj synth --output data/psv --corrupt
    clinproj preprocess --input data/psv --output runs/latest
    clinproj project --output runs/latest
    clinproj trust --output runs/latest
    clinproj train --output runs/latest [--no-trust]
    clinproj predict --output runs/latest
    clinproj eval --output runs/latest --sofa-baseline
    clinproj e2e --seed 7 --iterations 5

Exit codes: 0 ok, 1 usage, 2 input/format, 3 solver failure, 4 training failure.
"""

import functools
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import click

from .errors import NodeQPError, PSVFormatError, RegistryError, SolverFailure, TrainingError

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_SOLVER = 3
EXIT_TRAINING = 4


def run_options(func):
    """Flags shared by every command; each overrides its config value when given."""
    options = [
        click.option("--config", "-c", "config_path", type=click.Path(exists=True), default=None,
                     help="Run config YAML (default: $CLINPROJ_CONFIG or config/run.yaml)"),
        click.option("--seed", type=int, default=None, help="Random seed"),
        click.option("--window", type=int, default=None, help="Window length in hours"),
        click.option("--stride", type=int, default=None, help="Hours between window starts"),
        click.option("--clusters", type=int, default=None, help="Number of k-means clusters"),
        click.option("--gap-tol", type=float, default=None, help="Branch-and-bound optimality gap"),
        click.option("--node-budget", type=int, default=None, help="Branch-and-bound node budget per window"),
        click.option("--workers", type=int, default=None, help="Projection worker processes"),
        click.option("--input", "-i", "input_dir", type=click.Path(), default=None, help="PSV input directory"),
        click.option("--output", "-o", "output_dir", type=click.Path(), default=None, help="Run directory"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _runner(config_path: Optional[str], input_dir: Optional[str], output_dir: Optional[str], **flags):
    from .settings import load_config
    from .workflow import PipelineRunner

    config = load_config(config_path).with_overrides(input=input_dir, output=output_dir, **flags)
    return PipelineRunner(config)


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=str))


def command(func):
    """Register ``func`` as a subcommand taking the shared run flags."""
    @functools.wraps(func)
    def wrapper(config_path, seed, window, stride, clusters, gap_tol, node_budget, workers,
                input_dir, output_dir, **kwargs):
        runner = _runner(
            config_path, input_dir, output_dir,
            seed=seed, window=window, stride=stride, clusters=clusters,
            gap_tol=gap_tol, node_budget=node_budget, workers=workers,
        )
        logger.info(f"Starting {func.__name__} command", extra={"command": func.__name__, **kwargs})
        return func(runner, **kwargs)

    return main.command(name=func.__name__.rstrip("_").replace("_", "-"))(run_options(wrapper))


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.version_option(version="0.1.0", prog_name="clinproj")
def main(debug):
    """clinproj - constraint projection and trust scores for ICU time series"""
    from .logging_config import setup_logging
    from .settings import get_log_level

    setup_logging(level=get_log_level(debug))


@click.option("--patients", type=int, default=None, help="Number of patients (default from config)")
@click.option("--corrupt", is_flag=True, help="Apply the configured corruption and write its mask")
@command
def synth(runner, patients: Optional[int], corrupt: bool):
    """Generate a synthetic cohort as PSV files under --output."""
    result = runner.synthesize(Path(runner.config.io.output), corrupt_records=corrupt, n_patients=patients)
    _echo_json(result)


@command
def preprocess(runner):
    """Impute, transform and window the PSV files under --input."""
    records, skipped = runner.load_cohort(Path(runner.config.io.input))
    subpatients = runner.preprocess(records)
    runner.store.save_batch(runner.to_batch(subpatients))
    _echo_json({"patients": len(records), "skipped": skipped, "subpatients": len(subpatients),
                "positive": sum(sp.label for sp in subpatients)})


@click.option("--export", "export_dir", type=click.Path(), default=None,
              help="Also write corrected windows as PSV files here")
@command
def project(runner, export_dir: Optional[str]):
    """Project every window of the preprocessed batch onto the physical set."""
    from .io import write_corrected
    from .schemas import SolveStatus

    subpatients, _ = runner.from_batch(runner.store.load_batch())
    results, summary = runner.project(subpatients, strict=False)
    runner.store.save_batch(runner.to_batch(subpatients, results))
    if export_dir:
        for sp, r in zip(subpatients, results):
            write_corrected(export_dir, runner.registry, sp, r.corrected, r.phys_dist)
    _echo_json(summary)
    failed = [sp.sub_id for sp, r in zip(subpatients, results) if r.status is not SolveStatus.OPTIMAL]
    if failed:
        raise SolverFailure(f"{len(failed)} windows not solved to optimality", failed)


def _projected(runner):
    subpatients, results = runner.from_batch(runner.store.load_batch())
    if results is None:
        raise PSVFormatError("batch has no projections; run `clinproj project` first")
    return subpatients, results


@click.option("--export", "export_dir", type=click.Path(), default=None,
              help="Also write corrected windows with trust columns as PSV files here")
@command
def trust(runner, export_dir: Optional[str]):
    """Score trust for every projected window (statistics from the training split)."""
    import numpy as np

    from .io import write_corrected

    subpatients, results = _projected(runner)
    table = runner.trust_table(subpatients, results)
    runner.store.save_trust(table)
    if export_dir:
        for sp, r, t in zip(subpatients, results, table.trust):
            write_corrected(export_dir, runner.registry, sp, r.corrected, r.phys_dist, np.asarray(t))
    mean_trust = np.asarray(table.trust).mean(axis=0)
    _echo_json({
        "subpatients": len(subpatients),
        "train_patients": len(table.train_patient_ids),
        "mean_trust": dict(zip(table.vitals, mean_trust.round(6).tolist())),
    })


@click.option("--no-trust", is_flag=True, help="Train on imputed uncorrected data without trust features")
@command
def train(runner, no_trust: bool):
    """Train the cluster-then-predict model on the training split.

    A trust table saved by `clinproj trust` fixes the split and the trust
    statistics; without one both are derived from --seed.
    """
    from .mlkit import patient_split

    subpatients, results = _projected(runner)
    saved = None if no_trust else runner.saved_trust(subpatients)
    if saved is not None:
        train_ids, scaler = saved
    else:
        train_sp, _ = patient_split(subpatients, runner.config.ml.train_ratio, runner.config.seed)
        train_ids, scaler = {sp.patient_id for sp in train_sp}, None
    model = runner.train(subpatients, results, train_ids, use_trust=not no_trust, scaler=scaler)
    runner.store.save_model(model.to_artifact())
    _echo_json({
        "clusters": model.k,
        "fallback_clusters": sum(c.fallback for c in model.classifiers),
        "features": len(model.feature_names),
        "use_trust": model.use_trust,
        "manifest_hash": model.manifest_hash(),
    })


def _model(runner):
    from .mlkit import PipelineModel

    return PipelineModel.from_artifact(runner.store.load_model())


@command
def predict(runner):
    """Predict every projected window with the saved model; writes predictions.psv."""
    import pandas as pd

    subpatients, results = _projected(runner)
    probs, labels, clusters = runner.predict(_model(runner), subpatients, results)
    frame = pd.DataFrame({
        "sub_id": [sp.sub_id for sp in subpatients],
        "probability": probs,
        "label": labels,
        "cluster": clusters,
    })
    path = Path(runner.config.io.output) / "predictions.psv"
    frame.to_csv(path, sep="|", index=False)
    _echo_json({"subpatients": len(frame), "positive": int(labels.sum()), "output": str(path)})


@click.option("--sofa-baseline", is_flag=True, help="Add SOFA >= 2 baseline rows")
@command
def eval_(runner, sofa_baseline: bool):
    """Evaluate the saved model on its train and test patients."""
    from .mlkit import curves, sofa_baseline as sofa_metrics
    from .schemas import EvaluationReport

    subpatients, results = _projected(runner)
    model = _model(runner)
    report = EvaluationReport(manifest=runner.manifest("eval", k=model.k))
    for part, ids in (("train", model.train_patient_ids), ("test", model.test_patient_ids)):
        metrics, scores, truth = runner.evaluate(model, subpatients, results, set(ids))
        report.rows[f"model/{part}"] = metrics
        if part == "test":
            report.curves["model"] = curves(scores, truth)
        if sofa_baseline:
            subset = [sp for sp in subpatients if sp.patient_id in set(ids)]
            report.rows[f"sofa/{part}"] = sofa_metrics(subset)
    runner.store.save_report(report)
    _echo_json({key: m.model_dump() for key, m in report.rows.items()})


def _k_range(spec: Optional[str]) -> Optional[List[int]]:
    if not spec:
        return None
    try:
        lo, hi = (int(part) for part in spec.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected a:b, got {spec}", param_hint="--diagnose-k")
    if not 1 <= lo <= hi:
        raise click.BadParameter(f"need 1 <= a <= b, got {spec}", param_hint="--diagnose-k")
    return list(range(lo, hi + 1))


@click.option("--iterations", type=int, default=None, help="Repeated train/test splits")
@click.option("--diagnose-k", default=None, help="Add k-means elbow curves for k in a:b")
@command
def e2e(runner, iterations: Optional[int], diagnose_k: Optional[str]):
    """Synthesize or ingest, then preprocess, project, score trust, train and evaluate."""
    input_dir = Path(runner.config.io.input)
    report = runner.run_e2e(input_dir, iterations=iterations, diagnose_k=_k_range(diagnose_k))
    _echo_json({
        "rows": {key: m.model_dump() for key, m in report.rows.items()},
        "projection": {k: report.projection[k] for k in ("windows", "status", "corrected_cells")},
        "importance": report.importance,
    })


def run(argv: Optional[List[str]] = None) -> None:
    """Console entry point: run the CLI and map failures to exit codes."""
    try:
        main.main(args=argv, prog_name="clinproj", standalone_mode=False)
        code = 0
    except click.UsageError as e:
        e.show()
        code = EXIT_USAGE
    except click.ClickException as e:
        e.show()
        code = e.exit_code
    except click.Abort:
        code = EXIT_USAGE
    except (FileNotFoundError, PSVFormatError, RegistryError) as e:
        logger.error(f"Input error: {e}", exc_info=True)
        click.echo(f"Error: {e}", err=True)
        code = EXIT_IO
    except (SolverFailure, NodeQPError) as e:
        logger.error(f"Solver failure: {e}", exc_info=True)
        click.echo(f"Error: {e}", err=True)
        code = EXIT_SOLVER
    except TrainingError as e:
        logger.error(f"Training failure: {e}", exc_info=True)
        click.echo(f"Error: {e}", err=True)
        code = EXIT_TRAINING
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        code = EXIT_USAGE
    sys.exit(code)


if __name__ == "__main__":
    run()
