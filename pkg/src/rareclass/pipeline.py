"""End-to-end orchestration: load -> explore -> prune -> split -> scale ->
impute -> select -> resample -> train -> evaluate, with a leakage guard on
the untouched test partition and deterministic report emission."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import featsel, impute, models, preprocess
from .config import PipelineConfig, ConfigError
from .data import Dataset, column_stats, load_delimited, load_secom
from .metrics import ConfusionMatrix, MetricSet, RocCurve, confusion, metric_set, roc_curve

__all__ = [
    "PipelineError",
    "ModelResult",
    "EvalReport",
    "run_scenario",
    "run_pipeline",
    "reproduce",
    "emit_report",
]

STAGES = ("load", "eda", "prune", "split", "scale", "impute", "select",
          "resample", "train", "evaluate")

REFERENCE_TARGETS = {"recall": 0.96, "auc": 0.95, "precision": 0.66}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ModelResult:
    family: str
    confusion: ConfusionMatrix
    metrics: MetricSet
    roc: RocCurve

    @property
    def auc(self) -> float:
        return self.roc.auc


@dataclass
class EvalReport:
    model_results: dict               # family -> ModelResult
    config_digest: str
    seed: int
    stage_timings: dict
    prune_counts: dict
    missing_stats: dict
    vote_summary: dict
    resample_summary: dict
    leakage_hash_at_split: str
    leakage_hash_at_eval: str


@dataclass
class PipelineResult:
    """All stage artifacts of one run; `report` is filled at completion."""
    raw: Dataset = None
    stats: list = None
    pruned: Dataset = None
    drop_logs: dict = field(default_factory=dict)
    split: preprocess.SplitPlan = None
    scaler: preprocess.ScalerParams = None
    train_set: Dataset = None
    test_set: Dataset = None
    decisions: list = field(default_factory=list)
    ledger: featsel.FeatureVoteLedger = None
    resampled_train: Dataset = None
    resample_plan = None
    trained: dict = field(default_factory=dict)
    report: EvalReport = None
    timings: dict = field(default_factory=dict)


def _hash_rows(d: Dataset, idx: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(d.features.values[idx].tobytes())
    h.update(d.labels[idx].tobytes())
    return h.hexdigest()


def _load(cfg: PipelineConfig) -> Dataset:
    if cfg.loader == "secom":
        return load_secom(cfg.data_path, cfg.labels_path)
    return load_delimited(cfg.data_path, cfg.label_column, cfg.delimiter)


def _missing_stats(d: Dataset) -> dict:
    present = d.features.present
    cells_missing = 1.0 - present.mean()
    col_missing = 1.0 - present.mean(axis=0)
    affected = col_missing > 0
    over_affected = (col_missing[affected].mean() if affected.any() else 0.0)
    return {
        "missing_fraction_all_cells": float(cells_missing),
        "missing_fraction_affected_columns": float(over_affected),
        "n_affected_columns": int(affected.sum()),
    }


def _impute_train_test(cfg: PipelineConfig, train_s: Dataset, test_s: Dataset,
                       seed: int) -> tuple[Dataset, Dataset]:
    if cfg.impute_method == "knn":
        p = impute.KnnImputeParams(k=cfg.knn_k)
        return (impute.knn_impute(p, train_s, train_s),
                impute.knn_impute(p, train_s, test_s))
    if cfg.impute_method == "mice":
        p = impute.MiceParams(n_iterations=cfg.mice_iterations,
                              initial_fill=cfg.mice_initial_fill,
                              seed=seed, noise_mode=cfg.mice_noise_mode)
        return (impute.mice_impute(p, train_s, train_s),
                impute.mice_impute(p, train_s, test_s))

    # simple strategies with one bounded distribution-refinement pass:
    # a column whose skewness sign flips after filling toggles once
    # between mean and median, then imputation is re-run.
    stats = column_stats(train_s)
    plan = impute.assign_simple_strategies(stats, cfg.skew_threshold)
    for cid, strat in cfg.impute_overrides.items():
        plan.override(cid, strat)
    plan = impute.fit_simple_plan(plan, train_s)
    filled = impute.simple_impute(plan, train_s)
    after = {s.column_id: s for s in column_stats(filled)}
    toggled = False
    for s in stats:
        if s.column_id in cfg.impute_overrides or s.skewness is None:
            continue
        sk_before, sk_after = s.skewness, after[s.column_id].skewness
        if sk_before * sk_after < 0 and plan.strategies[s.column_id] in ("mean", "median"):
            plan.override(s.column_id,
                          "median" if plan.strategies[s.column_id] == "mean" else "mean")
            toggled = True
    if toggled:
        plan = impute.fit_simple_plan(plan, train_s)
    return impute.simple_impute(plan, train_s), impute.simple_impute(plan, test_s)


def run_pipeline(cfg: PipelineConfig, stop_after: str = "evaluate") -> PipelineResult:
    """Execute the pipeline stages in order, stopping after `stop_after`."""
    cfg.validate()
    if stop_after not in STAGES:
        raise ConfigError(f"unknown stage {stop_after!r}")
    res = PipelineResult()
    stop_idx = STAGES.index(stop_after)

    def stage(name):
        return _StageTimer(name, res.timings)

    try:
        with stage("load"):
            res.raw = _load(cfg)
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError("load", e) from e
    if stop_idx < 1:
        return res

    try:
        with stage("eda"):
            res.stats = column_stats(res.raw)
            missing = _missing_stats(res.raw)
    except Exception as e:
        raise PipelineError("eda", e) from e
    if stop_idx < 2:
        return res

    try:
        with stage("prune"):
            d, log_m = preprocess.drop_high_missing(res.raw, cfg.missing_drop_threshold)
            d, log_c = preprocess.drop_constant(d)
            d, log_r = preprocess.drop_correlated(d, cfg.correlation_threshold)
            res.drop_logs = {"high_missing": log_m, "constant": log_c, "correlated": log_r}
            res.pruned = d
            missing_after = _missing_stats(d)
    except Exception as e:
        raise PipelineError("prune", e) from e
    if stop_idx < 3:
        return res

    try:
        with stage("split"):
            if cfg.split_mode == "kfold":
                res.split = preprocess.stratified_kfold(res.pruned, cfg.k_folds, cfg.seed)
                train_idx, test_idx = res.split.fold(0)
            else:
                res.split = preprocess.stratified_split(res.pruned, cfg.test_fraction, cfg.seed)
                train_idx, test_idx = res.split.train_row_indices, res.split.test_row_indices
            hash_at_split = _hash_rows(res.pruned, test_idx)
    except Exception as e:
        raise PipelineError("split", e) from e
    if stop_idx < 4:
        return res

    try:
        with stage("scale"):
            train_d = res.pruned.take_rows(train_idx)
            test_d = res.pruned.take_rows(test_idx)
            # columns that became constant within the training partition
            # cannot be scaled; drop them from both partitions
            tstats = column_stats(train_d)
            keep = [s.column_id for s in tstats
                    if not s.is_constant and s.missing_fraction < 1.0]
            dropped_train_constant = [s.column_id for s in tstats if s.column_id not in keep]
            if dropped_train_constant:
                train_d = train_d.select_columns(keep)
                test_d = test_d.select_columns(keep)
            res.scaler = preprocess.fit_scaler(train_d)
            train_d = preprocess.apply_scaler(res.scaler, train_d)
            test_d = preprocess.apply_scaler(res.scaler, test_d)
    except Exception as e:
        raise PipelineError("scale", e) from e
    if stop_idx < 5:
        return res

    try:
        with stage("impute"):
            train_d, test_d = _impute_train_test(cfg, train_d, test_d, cfg.seed)
    except Exception as e:
        raise PipelineError("impute", e) from e
    if stop_idx < 6:
        return res

    try:
        with stage("select"):
            if cfg.roster == "none":
                res.decisions, res.ledger = [], None
            else:
                if cfg.roster == "default":
                    res.decisions = featsel.run_default_roster(
                        train_d, master_seed=cfg.seed, n_keep=cfg.featsel_n_keep)
                else:  # fast roster: the three filter selectors only
                    n_keep = cfg.featsel_n_keep or max(1, train_d.n_cols // 2)
                    res.decisions = [
                        featsel.select_f_score(train_d, n_keep),
                        featsel.select_mutual_info(train_d, n_keep, n_bins=8),
                        featsel.select_lasso(train_d, lam=0.01, seed=cfg.seed),
                    ]
                res.ledger = featsel.vote(res.decisions, cfg.vote_threshold)
                if res.ledger.selected:
                    train_d = train_d.select_columns(list(res.ledger.selected))
                    test_d = test_d.select_columns(list(res.ledger.selected))
            res.train_set, res.test_set = train_d, test_d
    except Exception as e:
        raise PipelineError("select", e) from e
    if stop_idx < 7:
        return res

    try:
        with stage("resample"):
            from . import resample as rs
            if cfg.scenario == "smote":
                res.resampled_train, res.resample_plan = rs.smote(
                    train_d, rs.SmoteParams(cfg.over_ratio, cfg.smote_k_neighbors, cfg.seed))
            elif cfg.scenario == "combined":
                res.resampled_train, res.resample_plan = rs.combined_resample(
                    train_d, cfg.over_ratio, cfg.under_ratio, cfg.smote_k_neighbors, cfg.seed)
            else:
                res.resampled_train, res.resample_plan = train_d, None
    except Exception as e:
        raise PipelineError("resample", e) from e
    if stop_idx < 8:
        return res

    try:
        with stage("train"):
            for fam in cfg.model_families:
                spec = models.ModelSpec(fam, cfg.model_overrides.get(fam, {}), seed=cfg.seed)
                res.trained[fam] = models.train(spec, res.resampled_train)
    except Exception as e:
        raise PipelineError("train", e) from e
    if stop_idx < 9:
        return res

    try:
        with stage("evaluate"):
            hash_at_eval = _hash_rows(res.pruned, test_idx)
            if hash_at_eval != hash_at_split:
                raise RuntimeError("leakage guard tripped: test partition changed")
            results = {}
            for fam, m in res.trained.items():
                scores = models.predict_scores(m, res.test_set.features)
                c = confusion(res.test_set.labels, scores, 0.5)
                results[fam] = ModelResult(fam, c, metric_set(c),
                                           roc_curve(res.test_set.labels, scores))
            res.report = EvalReport(
                model_results=results,
                config_digest=cfg.digest(),
                seed=cfg.seed,
                stage_timings=dict(res.timings),
                prune_counts={
                    "high_missing": len(res.drop_logs["high_missing"].entries),
                    "constant": len(res.drop_logs["constant"].entries),
                    "correlated": len(res.drop_logs["correlated"].entries),
                    "surviving": res.pruned.n_cols,
                },
                missing_stats={"before_prune": missing, "after_prune": missing_after},
                vote_summary=_vote_summary(res.ledger),
                resample_summary=_resample_summary(res.resample_plan),
                leakage_hash_at_split=hash_at_split,
                leakage_hash_at_eval=hash_at_eval,
            )
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError("evaluate", e) from e
    res.report.stage_timings = dict(res.timings)
    return res


def _vote_summary(ledger) -> dict:
    if ledger is None:
        return {}
    voted = sum(1 for v in ledger.votes.values() if v >= 1)
    return {
        "n_selected": len(ledger.selected),
        "n_voted": voted,
        "n_zero_votes": len(ledger.votes) - voted,
        "threshold": ledger.threshold,
        "max_vote_features": list(ledger.max_vote_features()),
    }


def _resample_summary(plan) -> dict:
    if plan is None:
        return {}
    return {
        "strategy": plan.strategy,
        "over_ratio": plan.over_ratio,
        "under_ratio": plan.under_ratio,
        "counts_before": list(plan.counts_before),
        "counts_after": list(plan.counts_after),
    }


class _StageTimer:
    def __init__(self, name, sink):
        self.name, self.sink = name, sink

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.sink[self.name] = time.perf_counter() - self.t0
        return False


def run_scenario(cfg: PipelineConfig) -> EvalReport:
    """Run the full pipeline and return the evaluation report."""
    return run_pipeline(cfg).report


def scenario_config(scenario_id: int, seed: int, data_path, labels_path,
                    out_dir="out", roster="default") -> PipelineConfig:
    if scenario_id not in (1, 2, 3):
        raise ConfigError(f"unknown scenario id {scenario_id}; expected 1, 2, or 3")
    cfg = PipelineConfig(data_path=str(data_path), labels_path=str(labels_path),
                         seed=seed, out_dir=str(out_dir), roster=roster)
    if scenario_id == 1:
        cfg.scenario = "none"
    elif scenario_id == 2:
        cfg.scenario, cfg.over_ratio = "smote", 0.7
    else:
        cfg.scenario, cfg.over_ratio, cfg.under_ratio = "combined", 0.4, 0.8
    return cfg


def reproduce(scenario_id: int, seed: int, out_dir, data_path, labels_path,
              roster: str = "default") -> EvalReport:
    """Run one of the three fixed testing scenarios and write all report
    artifacts to out_dir."""
    cfg = scenario_config(scenario_id, seed, data_path, labels_path, out_dir, roster)
    res = run_pipeline(cfg)
    emit_report(res.report, out_dir,
                formats=("table_text", "roc_csv", "roc_plot", "ledger"),
                result=res)
    return res.report


# ---------------------------------------------------------------------------
# report emission

def _roc_svg(roc: RocCurve, title: str) -> str:
    w, h, pad = 480, 480, 50
    def px(x): return pad + x * (w - 2 * pad)
    def py(y): return h - pad - y * (h - 2 * pad)
    pts = " ".join(f"{px(f):.2f},{py(t):.2f}" for f, t in zip(roc.fpr, roc.tpr))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{px(0)}" y1="{py(0)}" x2="{px(1)}" y2="{py(0)}" stroke="black"/>',
        f'<line x1="{px(0)}" y1="{py(0)}" x2="{px(0)}" y2="{py(1)}" stroke="black"/>',
        f'<line x1="{px(0)}" y1="{py(0)}" x2="{px(1)}" y2="{py(1)}" stroke="#bbbbbb" stroke-dasharray="4"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f5fa6" stroke-width="2"/>',
        f'<text x="{w/2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>',
        f'<text x="{w/2:.0f}" y="{h-10}" text-anchor="middle" font-family="sans-serif" font-size="12">False Positive Rate</text>',
        f'<text x="14" y="{h/2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {h/2:.0f})">True Positive Rate</text>',
        f'<text x="{px(0.62):.0f}" y="{py(0.08):.0f}" font-family="sans-serif" font-size="13">AUC = {roc.auc:.3f}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def format_report_table(r: EvalReport) -> str:
    lines = []
    lines.append(f"{'Model':<22}{'Balanced Accuracy':>19}{'Precision':>11}{'Recall':>9}{'FAR':>7}{'AUC':>7}")
    for fam, mr in r.model_results.items():
        m = mr.metrics
        prec = f"{m.precision:.2f}" + ("" if m.precision_defined else "*")
        lines.append(f"{fam:<22}{m.balanced_accuracy:>19.2f}{prec:>11}"
                     f"{m.recall:>9.2f}{m.far:>7.2f}{mr.auc:>7.2f}")
    return "\n".join(lines)


def emit_report(r: EvalReport, out_dir, formats=("table_text", "roc_csv", "roc_plot", "ledger"),
                result: PipelineResult | None = None) -> list[str]:
    """Write the requested artifact files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if "table_text" in formats:
        lines = [format_report_table(r), ""]
        lines.append(f"config digest: {r.config_digest}   seed: {r.seed}")
        pc = r.prune_counts
        lines.append(f"pruning: {pc['high_missing']} high-missing, {pc['constant']} constant, "
                     f"{pc['correlated']} correlated dropped; {pc['surviving']} columns survive")
        ms = r.missing_stats
        lines.append(
            "missing cells: "
            f"{ms['before_prune']['missing_fraction_all_cells']*100:.2f}% before pruning, "
            f"{ms['after_prune']['missing_fraction_all_cells']*100:.2f}% after")
        if r.vote_summary:
            vs = r.vote_summary
            lines.append(f"feature votes: {vs['n_selected']} selected at threshold "
                         f"{vs['threshold']}, {vs['n_voted']} with >=1 vote, "
                         f"{vs['n_zero_votes']} with none; top features {vs['max_vote_features']}")
        if r.resample_summary:
            rs = r.resample_summary
            lines.append(f"resampling: {rs['strategy']} over={rs['over_ratio']} "
                         f"under={rs['under_ratio']} counts {rs['counts_before']} -> "
                         f"{rs['counts_after']}")
        lines.append("")
        lines.append("Stretch reference targets from the published study (not gates): "
                     f"recall {REFERENCE_TARGETS['recall']:.2f}, "
                     f"AUC {REFERENCE_TARGETS['auc']:.2f}, "
                     f"precision {REFERENCE_TARGETS['precision']:.2f}")
        path = out / "report.txt"
        path.write_text("\n".join(lines) + "\n")
        written.append(str(path))

    if "roc_csv" in formats:
        for fam, mr in r.model_results.items():
            path = out / f"roc_{fam}.csv"
            path.write_text(mr.roc.to_csv())
            written.append(str(path))

    if "roc_plot" in formats:
        for fam, mr in r.model_results.items():
            path = out / f"roc_{fam}.svg"
            path.write_text(_roc_svg(mr.roc, f"ROC: {fam}"))
            written.append(str(path))

    if "ledger" in formats and result is not None:
        if result.ledger is not None:
            path = out / "votes.csv"
            path.write_text(result.ledger.to_csv())
            written.append(str(path))
        if result.drop_logs:
            lines = ["column_id,reason,threshold,kept_partner"]
            for log in result.drop_logs.values():
                lines.extend(log.to_csv().splitlines()[1:])
            path = out / "drops.csv"
            path.write_text("\n".join(lines) + "\n")
            written.append(str(path))
        if result.resample_plan is not None:
            path = out / "resample_plan.csv"
            path.write_text(result.resample_plan.to_csv())
            written.append(str(path))

    return written
