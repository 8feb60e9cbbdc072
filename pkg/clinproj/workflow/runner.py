"""
Pipeline runner - orchestrates a full correction-and-prediction run.

Stage flow:
1. Load config, registry and score tables
2. Synthesize a cohort or ingest PSV files
3. Impute and cut records into sub-patients
4. Project every window onto the physical set
5. Score trust against the normal set (statistics from training patients only)
6. Train the cluster-then-predict model, with and without trust features
7. Evaluate both variants and the SOFA baseline, over repeated splits
"""

import logging
from dataclasses import asdict, dataclass
from functools import cached_property
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from sklearn.preprocessing import StandardScaler

from ..constraints import ConstraintSet, build_physical, load_registry
from ..datagen import corrupt, generate_cohort
from ..errors import ClinProjError, PSVFormatError, SolverFailure
from ..io import ArtifactStore, create_store, psv_files, read_psv, write_psv
from ..mlkit import (
    GBTParams,
    PipelineModel,
    build_features,
    cluster_diagnostics,
    curves,
    detection_histogram,
    evaluate,
    feature_importance,
    feature_names,
    patient_split,
    resample,
    sofa_baseline,
    summarize_metrics,
    time_to_detection,
    train_pipeline,
)
from ..preprocess import PatientRecord, SubPatient, impute, load_score_tables, make_subpatients, onset_hour
from ..preprocess.transform import transform
from ..projection import (
    ProjectionEngine,
    ProjectionResult,
    SolverOptions,
    TrustScaler,
    TrustScores,
    project_normal,
    summarize,
)
from ..schemas import (
    CorruptionKind,
    CorruptionMask,
    CorruptionSpec,
    EvaluationReport,
    Metrics,
    RunManifest,
    SolveStatus,
    SubPatientBatch,
    TrustTable,
)
from ..settings import RunConfig, config_hash

logger = logging.getLogger(__name__)

WITH_TRUST = "with_trust"
WITHOUT_TRUST = "without_trust"
SOFA = "sofa"
RECOVERY_TOL = 1e-6


def _versions() -> Dict[str, str]:
    out = {}
    for dist in ("clinproj", "numpy", "pandas", "scikit-learn", "quadprog", "pydantic"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = "unknown"
    return out


@dataclass
class SplitRun:
    """Outcome of one train/test split for one feature variant."""
    model: PipelineModel
    train: Metrics
    test: Metrics
    test_scores: np.ndarray
    test_labels: np.ndarray


class PipelineRunner:
    """
    Runs the pipeline stages against one configuration.

    Every stage is also callable on its own; the CLI commands persist
    their output through the artifact store between invocations.
    """

    def __init__(self, config: RunConfig, store: Optional[ArtifactStore] = None):
        """
        Initialize pipeline runner.

        Args:
            config: Run configuration (flags already applied)
            store: Artifact store; defaults to JSON files under config.io.output
        """
        self.config = config
        self.registry = load_registry(config.registry_path)
        self.scores = load_score_tables(config.scores_path)
        self.store = store or create_store(config.io.output)
        self.options = SolverOptions(
            gap_tol=config.solver.gap_tol,
            feas_tol=config.solver.feas_tol,
            node_budget=config.solver.node_budget,
        )

    @cached_property
    def constraint_set(self) -> ConstraintSet:
        return build_physical(self.registry, self.config.preprocess.window)

    @property
    def gbt_params(self) -> GBTParams:
        return GBTParams(**asdict(self.config.ml.gbt))

    def manifest(self, command: str, k: Optional[int] = None) -> RunManifest:
        ml = self.config.ml
        hyperparams = {f"gbt_{key}": float(v) for key, v in asdict(ml.gbt).items()}
        hyperparams.update({
            "minority_frac": ml.minority_frac,
            "smote_k": float(ml.smote_k),
            "smote_multiplier": float(ml.smote_multiplier),
            "kmeans_restarts": float(ml.kmeans_restarts),
            "threshold_step": ml.threshold_step,
            "train_ratio": ml.train_ratio,
            "window": float(self.config.preprocess.window),
            "stride": float(self.config.preprocess.stride),
        })
        return RunManifest(
            command=command,
            config_hash=config_hash(self.config),
            seed=self.config.seed,
            versions=_versions(),
            hyperparams=hyperparams,
            k=k,
        )

    # ========================================================================
    # Cohort
    # ========================================================================

    def synthesize(self, output_dir: Path, corrupt_records: bool = False,
                   n_patients: Optional[int] = None) -> Dict:
        """Generate a cohort, optionally corrupt it, and write it as PSV files."""
        gen = self.config.datagen
        records = generate_cohort(
            n_patients or gen.n_patients,
            (gen.hours_min, gen.hours_max),
            gen.sepsis_rate,
            seed=self.config.seed,
            registry=self.registry,
        )
        mask = CorruptionMask()
        if corrupt_records:
            spec = CorruptionSpec(**{"seed": self.config.seed, **gen.corruption})
            damaged = []
            for record in records:
                record, cells = corrupt(record, spec, self.registry)
                damaged.append(record)
                mask.cells.extend(cells.cells)
            records = damaged
            create_store(str(output_dir)).save_mask(mask)

        for record in records:
            write_psv(record, output_dir, self.registry)

        result = {
            "patients": len(records),
            "septic": sum(r.is_septic for r in records),
            "corrupted_cells": len(mask.cells),
            "output": str(output_dir),
        }
        logger.info("Synthesized cohort", extra=result)
        return result

    def load_cohort(self, input_dir: Path) -> Tuple[List[PatientRecord], int]:
        """Read every PSV file under ``input_dir``; unreadable files are logged and skipped."""
        records, skipped = [], 0
        for path in psv_files(input_dir):
            try:
                records.append(read_psv(path, self.registry))
            except (ClinProjError, ValueError) as e:
                skipped += 1
                logger.error(f"Skipping {path.name}: {e}", extra={"path": str(path)}, exc_info=True)
        logger.info(
            f"Loaded {len(records)} patients from {input_dir}",
            extra={"patients": len(records), "skipped": skipped},
        )
        return records, skipped

    # ========================================================================
    # Preprocess and projection
    # ========================================================================

    def preprocess(self, records: Sequence[PatientRecord]) -> List[SubPatient]:
        """Impute, transform and window every record."""
        pre = self.config.preprocess
        subpatients = []
        for record in records:
            try:
                filled = impute(record, self.registry)
                subpatients.extend(make_subpatients(filled, self.registry, pre.window, pre.stride, self.scores))
            except (ClinProjError, ValueError) as e:
                logger.error(
                    f"Error preprocessing {record.patient_id}: {e}",
                    extra={"patient_id": record.patient_id, "error": str(e)},
                    exc_info=True,
                )
        logger.info(
            f"Built {len(subpatients)} sub-patients",
            extra={"patients": len(records), "windows": len(subpatients),
                   "positive_windows": sum(sp.label for sp in subpatients)},
        )
        return subpatients

    def to_batch(self, subpatients: Sequence[SubPatient],
                 results: Optional[Sequence[ProjectionResult]] = None) -> SubPatientBatch:
        return SubPatientBatch(
            registry_hash=self.registry.content_hash(),
            vitals=self.registry.names,
            window=self.config.preprocess.window,
            stride=self.config.preprocess.stride,
            subpatients=[sp.to_payload() for sp in subpatients],
            projections=None if results is None else [r.to_payload() for r in results],
        )

    def from_batch(self, batch: SubPatientBatch) -> Tuple[List[SubPatient], Optional[List[ProjectionResult]]]:
        if batch.registry_hash != self.registry.content_hash():
            raise PSVFormatError("sub-patient batch was built with a different vital registry")
        subpatients = [SubPatient.from_payload(p) for p in batch.subpatients]
        results = None
        if batch.projections is not None:
            results = [ProjectionResult.from_payload(p) for p in batch.projections]
        return subpatients, results

    def project(self, subpatients: Sequence[SubPatient],
                strict: bool = True) -> Tuple[List[ProjectionResult], Dict]:
        """
        Project every window onto the physical set.

        With ``strict`` set, any non-optimal window raises SolverFailure
        after the summary is logged.
        """
        windows = [sp.data for sp in subpatients]
        engine = ProjectionEngine(self.constraint_set, self.options, self.config.workers)
        results = engine.project_all(windows)
        summary = summarize(results, self.registry.names, windows)

        failed = [sp.sub_id for sp, r in zip(subpatients, results) if r.status is not SolveStatus.OPTIMAL]
        if failed:
            logger.warning(
                f"{len(failed)} windows did not reach optimality",
                extra={"failed": len(failed), "first": failed[0]},
            )
            if strict:
                raise SolverFailure(f"{len(failed)} windows not solved to optimality", failed)
        return results, summary

    # ========================================================================
    # Trust and features
    # ========================================================================

    def score_trust(self, subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult],
                    train_ids: Set[str]) -> Tuple[TrustScores, TrustScaler]:
        """Trust scores for every window, with min-max statistics from training patients only."""
        norm = np.vstack([project_normal(r.corrected) for r in results])
        train_rows = np.array([sp.patient_id in train_ids for sp in subpatients])
        scaler = TrustScaler().fit(norm[train_rows])
        return TrustScores(norm_dist=norm, trust=scaler.transform(norm)), scaler

    def trust_table(self, subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult],
                    seed: Optional[int] = None) -> TrustTable:
        train, _ = patient_split(subpatients, self.config.ml.train_ratio, self.config.seed if seed is None else seed)
        train_ids = {sp.patient_id for sp in train}
        scores, scaler = self.score_trust(subpatients, results, train_ids)
        return TrustTable(
            registry_hash=self.registry.content_hash(),
            vitals=self.registry.names,
            sub_ids=[sp.sub_id for sp in subpatients],
            norm_dist=scores.norm_dist.tolist(),
            trust=scores.trust.tolist(),
            trust_min=scaler.mins.tolist(),
            trust_max=scaler.maxs.tolist(),
            train_patient_ids=sorted(train_ids),
        )

    def saved_trust(self, subpatients: Sequence[SubPatient]) -> Optional[Tuple[Set[str], TrustScaler]]:
        """Training patients and frozen statistics of the stored trust table; None when there is none."""
        try:
            table = self.store.load_trust()
        except FileNotFoundError:
            return None
        if table.registry_hash != self.registry.content_hash():
            raise PSVFormatError("trust table was scored with a different vital registry")
        if table.sub_ids != [sp.sub_id for sp in subpatients]:
            raise PSVFormatError("trust table does not match the projected batch; rerun `clinproj trust`")
        return set(table.train_patient_ids), TrustScaler.from_bounds(table.trust_min, table.trust_max)

    def features(self, subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult],
                 scaler: Optional[TrustScaler]) -> np.ndarray:
        """Corrected values plus trust when ``scaler`` is given; imputed values alone otherwise."""
        if scaler is None:
            return build_features(subpatients, [sp.data for sp in subpatients])
        trust = scaler.transform(np.vstack([project_normal(r.corrected) for r in results]))
        return build_features(subpatients, [r.corrected for r in results], trust)

    # ========================================================================
    # Training and evaluation
    # ========================================================================

    def train(self, subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult],
              train_ids: Set[str], use_trust: bool = True, seed: Optional[int] = None,
              command: str = "train", scaler: Optional[TrustScaler] = None) -> PipelineModel:
        """
        Fit the cluster-then-predict model on the training patients.

        With ``use_trust`` the trust statistics come from ``scaler`` when given
        and are fitted on the training windows otherwise.
        """
        seed = self.config.seed if seed is None else seed
        rows = [i for i, sp in enumerate(subpatients) if sp.patient_id in train_ids]
        train_sp = [subpatients[i] for i in rows]
        train_res = [results[i] for i in rows]
        if not use_trust:
            scaler = None
        elif scaler is None:
            _, scaler = self.score_trust(train_sp, train_res, train_ids)
        X = self.features(train_sp, train_res, scaler)
        y = np.array([sp.label for sp in train_sp], dtype=int)

        ml = self.config.ml
        model = train_pipeline(
            X, y,
            feature_names(self.registry.names, self.config.preprocess.window, use_trust),
            ml.clusters,
            self.gbt_params,
            seed,
            self.manifest(command, k=ml.clusters),
            window=self.config.preprocess.window,
            registry_hash=self.registry.content_hash(),
            trust_scaler=scaler,
            minority_frac=ml.minority_frac,
            smote_k=ml.smote_k,
            smote_multiplier=ml.smote_multiplier,
            kmeans_restarts=ml.kmeans_restarts,
            threshold_step=ml.threshold_step,
        )
        model.train_patient_ids = sorted(train_ids)
        model.test_patient_ids = sorted({sp.patient_id for sp in subpatients} - set(train_ids))
        return model

    def predict(self, model: PipelineModel, subpatients: Sequence[SubPatient],
                results: Sequence[ProjectionResult]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(probabilities, labels, clusters) for every sub-patient."""
        if model.registry_hash != self.registry.content_hash():
            raise PSVFormatError("model was trained with a different vital registry")
        if subpatients and subpatients[0].data.shape[1] != model.window:
            raise PSVFormatError(f"model expects {model.window}-hour windows")
        X = self.features(subpatients, results, model.trust_scaler if model.use_trust else None)
        return model.predict_batch(X)

    def evaluate(self, model: PipelineModel, subpatients: Sequence[SubPatient],
                 results: Sequence[ProjectionResult], patient_ids: Set[str]) -> Tuple[Metrics, np.ndarray, np.ndarray]:
        """Metrics of ``model`` on the sub-patients of ``patient_ids``."""
        rows = [i for i, sp in enumerate(subpatients) if sp.patient_id in patient_ids]
        subset = [subpatients[i] for i in rows]
        probs, labels, _ = self.predict(model, subset, [results[i] for i in rows])
        truth = np.array([sp.label for sp in subset], dtype=int)
        return evaluate(probs, truth, predicted=labels), probs, truth

    def run_split(self, subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult],
                  seed: int, use_trust: bool) -> SplitRun:
        train, _ = patient_split(subpatients, self.config.ml.train_ratio, seed)
        train_ids = {sp.patient_id for sp in train}
        test_ids = {sp.patient_id for sp in subpatients} - train_ids
        model = self.train(subpatients, results, train_ids, use_trust=use_trust, seed=seed, command="e2e")
        train_metrics, _, _ = self.evaluate(model, subpatients, results, train_ids)
        test_metrics, scores, labels = self.evaluate(model, subpatients, results, test_ids)
        return SplitRun(model, train_metrics, test_metrics, scores, labels)

    def benchmark(self, subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult],
                  iterations: int) -> Dict:
        """
        Repeat split, train and evaluate ``iterations`` times with seeds seed, seed+1, ...

        Returns per-variant metric rows and curves of the first split, the
        first with-trust model, and mean/std summaries over all splits.
        """
        runs: Dict[str, List[Metrics]] = {}
        first: Dict[str, object] = {}
        for i in range(iterations):
            seed = self.config.seed + i
            logger.info(f"Benchmark split {i + 1}/{iterations}", extra={"iteration": i, "seed": seed})
            train, test = patient_split(subpatients, self.config.ml.train_ratio, seed)
            for variant, use_trust in ((WITH_TRUST, True), (WITHOUT_TRUST, False)):
                split = self.run_split(subpatients, results, seed, use_trust)
                runs.setdefault(f"{variant}/train", []).append(split.train)
                runs.setdefault(f"{variant}/test", []).append(split.test)
                if i == 0:
                    first[variant] = split
            runs.setdefault(f"{SOFA}/train", []).append(sofa_baseline(train))
            runs.setdefault(f"{SOFA}/test", []).append(sofa_baseline(test))
            if i == 0:
                first[SOFA] = test

        rows = {key: metrics[0] for key, metrics in runs.items()}
        curve_data = {
            variant: curves(first[variant].test_scores, first[variant].test_labels)
            for variant in (WITH_TRUST, WITHOUT_TRUST)
        }
        curve_data[SOFA] = curves([sp.sofa for sp in first[SOFA]], [sp.label for sp in first[SOFA]])
        return {
            "rows": rows,
            "curves": curve_data,
            "summaries": {key: summarize_metrics(metrics) for key, metrics in runs.items()},
            "model": first[WITH_TRUST].model,
        }

    def detection(self, model: PipelineModel, records: Sequence[PatientRecord],
                  subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult]) -> Dict:
        """First-alert offsets for the septic test patients of ``model``."""
        by_patient: Dict[str, List[int]] = {}
        for i, sp in enumerate(subpatients):
            by_patient.setdefault(sp.patient_id, []).append(i)
        test_ids = set(model.test_patient_ids)
        lead = self.config.preprocess.label_lead_hours
        offsets = []
        for record in records:
            onset = onset_hour(record.labels, lead)
            rows = by_patient.get(record.patient_id)
            if record.patient_id not in test_ids or onset is None or not rows:
                continue
            subset = [subpatients[i] for i in rows]
            X = self.features(subset, [results[i] for i in rows],
                              model.trust_scaler if model.use_trust else None)
            offsets.append(time_to_detection(model, X, [sp.window_end for sp in subset], onset))
        return detection_histogram(offsets)

    def diagnostics(self, subpatients: Sequence[SubPatient], results: Sequence[ProjectionResult],
                    k_range: Sequence[int]) -> List[Dict[str, float]]:
        """Elbow curves on standardised, resampled training features of the first split."""
        train, _ = patient_split(subpatients, self.config.ml.train_ratio, self.config.seed)
        train_ids = {sp.patient_id for sp in train}
        train_res = [r for sp, r in zip(subpatients, results) if sp.patient_id in train_ids]
        _, scaler = self.score_trust(train, train_res, train_ids)
        X = self.features(train, train_res, scaler)
        y = np.array([sp.label for sp in train], dtype=int)
        ml = self.config.ml
        data = resample(X, y, ml.minority_frac, ml.smote_k, ml.smote_multiplier, self.config.seed)
        Z = StandardScaler().fit_transform(data.X)
        return cluster_diagnostics(Z, data.y, k_range, ml.kmeans_restarts, self.config.seed)

    # ========================================================================
    # Corruption recovery
    # ========================================================================

    def recovery_report(self, mask: CorruptionMask, subpatients: Sequence[SubPatient],
                        results: Sequence[ProjectionResult], tol: float = RECOVERY_TOL) -> Dict:
        """
        Score projected windows against the corruption ground truth.

        A cell is ``restored`` when every window covering it lands within
        ``tol`` (solve-space) of its original value, and ``at_bound`` when
        every covering window puts it at the physical bound nearest the
        corrupted value.
        """
        covering: Dict[str, List[int]] = {}
        for i, sp in enumerate(subpatients):
            covering.setdefault(sp.patient_id, []).append(i)
        cs = self.constraint_set

        report = {k.value: {"cells": 0, "covered": 0, "restored": 0, "at_bound": 0} for k in CorruptionKind}
        for cell in mask.cells:
            row = report[cell.kind.value]
            row["cells"] += 1
            spec = self.registry.lookup(cell.vital)
            v = self.registry.index(cell.vital)
            values = [
                results[i].corrected[v, cell.hour - subpatients[i].window_start]
                for i in covering.get(cell.patient_id, [])
                if subpatients[i].window_start <= cell.hour < subpatients[i].window_end
            ]
            if not values:
                continue
            row["covered"] += 1
            values = np.asarray(values)
            original = float(transform(spec, cell.original))
            if np.all(np.abs(values - original) <= tol):
                row["restored"] += 1
            if cell.corrupted is not None and not (spec.log and cell.corrupted <= -1.0):
                bound = float(np.clip(transform(spec, cell.corrupted), cs.lower[v, 0], cs.upper[v, 0]))
                if np.all(np.abs(values - bound) <= tol):
                    row["at_bound"] += 1
        logger.info("Scored corruption recovery", extra={"cells": len(mask.cells)})
        return report

    # ========================================================================
    # End to end
    # ========================================================================

    def run_e2e(self, input_dir: Optional[Path] = None, iterations: Optional[int] = None,
                diagnose_k: Optional[Sequence[int]] = None) -> EvaluationReport:
        """
        Ingest (or synthesize), preprocess, project, score trust, train and evaluate.

        Without PSV files under ``input_dir`` a corrupted synthetic cohort is
        written to ``<output>/psv`` first and scored against its mask.
        """
        iterations = iterations or self.config.iterations
        mask = None
        if input_dir is None or not Path(input_dir).is_dir() or not psv_files(input_dir):
            input_dir = Path(self.config.io.output) / "psv"
            self.synthesize(input_dir, corrupt_records=True)
        mask_path = Path(input_dir) / "corruption_mask.json"
        if mask_path.exists():
            mask = create_store(str(input_dir)).load_mask()

        records, skipped = self.load_cohort(Path(input_dir))
        subpatients = self.preprocess(records)
        results, projection = self.project(subpatients)
        self.store.save_batch(self.to_batch(subpatients, results))
        projection["skipped_files"] = skipped

        bench = self.benchmark(subpatients, results, iterations)
        model: PipelineModel = bench["model"]
        self.store.save_model(model.to_artifact())

        report = EvaluationReport(
            manifest=self.manifest("e2e", k=self.config.ml.clusters),
            rows=bench["rows"],
            curves=bench["curves"],
            summaries=bench["summaries"],
            projection=projection,
            importance=feature_importance(model),
            detection=self.detection(model, records, subpatients, results),
            diagnostics=self.diagnostics(subpatients, results, diagnose_k) if diagnose_k else [],
        )
        if mask is not None:
            report.projection["recovery"] = self.recovery_report(mask, subpatients, results)
        self.store.save_report(report)
        logger.info("End-to-end run complete", extra={"iterations": iterations, "windows": len(subpatients)})
        return report
