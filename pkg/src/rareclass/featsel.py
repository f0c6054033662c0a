"""Vote-based feature selection.

A roster of selectors each nominates a feature subset from the training
partition; a feature enters the final set when at least `threshold`
selectors chose it.  Estimator-backed selectors train with the minority
class up-weighted so the vote is biased toward rare-class signal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _stats

from . import models
from .data import Dataset
from .metrics import confusion, metric_set
from .preprocess import stratified_kfold

__all__ = [
    "SelectorDecision",
    "FeatureVoteLedger",
    "FeatselError",
    "select_f_score",
    "select_mutual_info",
    "select_lasso",
    "select_boruta",
    "select_rfe",
    "select_sfs",
    "vote",
    "run_default_roster",
]


class FeatselError(ValueError):
    pass


@dataclass(frozen=True)
class SelectorDecision:
    name: str
    selected: tuple                  # column ids
    scores: dict = field(default_factory=dict)   # column_id -> score
    universe: tuple = ()             # all column ids the selector considered
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FeatureVoteLedger:
    votes: dict                      # column_id -> vote count
    contributors: dict               # column_id -> tuple of selector names
    threshold: int
    selected: tuple

    def max_vote_features(self) -> tuple:
        if not self.votes:
            return ()
        top = max(self.votes.values())
        return tuple(sorted(c for c, v in self.votes.items() if v == top))

    def to_csv(self) -> str:
        lines = ["column_id,votes,contributors"]
        order = sorted(self.votes, key=lambda c: (-self.votes[c], c))
        for c in order:
            names = ";".join(self.contributors[c])
            lines.append(f"{c},{self.votes[c]},{names}")
        return "\n".join(lines) + "\n"


def _check_train(train: Dataset):
    if np.isnan(train.features.values).any():
        raise FeatselError("training data must be imputed before feature selection")
    counts = np.bincount(train.labels, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        raise FeatselError("both classes required")


def _check_n_keep(n_keep: int, n_cols: int):
    if not 1 <= n_keep <= n_cols:
        raise FeatselError(f"n_keep must be in [1, {n_cols}], got {n_keep}")


def _minority_weight(labels: np.ndarray) -> float:
    counts = np.bincount(labels, minlength=2)
    return counts[0] / counts[1]


def _top_by_score(column_ids, score: np.ndarray, n_keep: int) -> tuple:
    # stable: descending score, ties to the lower column id
    order = sorted(range(len(score)), key=lambda i: (-score[i], column_ids[i]))
    return tuple(int(column_ids[i]) for i in order[:n_keep])


def select_f_score(train: Dataset, n_keep: int) -> SelectorDecision:
    """One-way ANOVA F statistic of each column between the two classes."""
    _check_train(train)
    _check_n_keep(n_keep, train.n_cols)
    X = train.features.values
    y = train.labels
    n = len(y)
    grand = X.mean(axis=0)
    g0, g1 = X[y == 0], X[y == 1]
    n0, n1 = len(g0), len(g1)
    m0, m1 = g0.mean(axis=0), g1.mean(axis=0)
    ssb = n0 * (m0 - grand) ** 2 + n1 * (m1 - grand) ** 2
    ssw = ((g0 - m0) ** 2).sum(axis=0) + ((g1 - m1) ** 2).sum(axis=0)
    msb = ssb / 1.0                      # k - 1 = 1
    msw = ssw / (n - 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        f_vals = msb / msw
    zero_within = msw <= 0
    f_vals[zero_within & (np.abs(m0 - m1) > 0)] = np.inf
    f_vals[zero_within & (np.abs(m0 - m1) == 0)] = 0.0
    selected = _top_by_score(train.column_ids, f_vals, n_keep)
    return SelectorDecision(
        "f_score", selected,
        scores={int(c): float(v) for c, v in zip(train.column_ids, f_vals)},
        universe=tuple(int(c) for c in train.column_ids))


def _mutual_info_column(col: np.ndarray, y: np.ndarray, n_bins: int) -> float:
    edges = np.quantile(col, np.linspace(0, 1, n_bins + 1)[1:-1])
    edges = np.unique(edges)
    bins = np.searchsorted(edges, col, side="right")
    n = len(y)
    mi = 0.0
    for b in np.unique(bins):
        for cls in (0, 1):
            nij = np.sum((bins == b) & (y == cls))
            if nij == 0:
                continue
            pij = nij / n
            pi = np.sum(bins == b) / n
            pj = np.sum(y == cls) / n
            mi += pij * math.log(pij / (pi * pj))
    return max(mi, 0.0)


def select_mutual_info(train: Dataset, n_keep: int, n_bins: int = 8) -> SelectorDecision:
    """Plug-in mutual information with the label after equal-frequency
    discretization of each column."""
    _check_train(train)
    _check_n_keep(n_keep, train.n_cols)
    if n_bins < 2:
        raise FeatselError("n_bins must be >= 2")
    X = train.features.values
    mi = np.array([_mutual_info_column(X[:, j], train.labels, n_bins)
                   for j in range(train.n_cols)])
    selected = _top_by_score(train.column_ids, mi, n_keep)
    return SelectorDecision(
        f"mutual_info_{n_bins}", selected,
        scores={int(c): float(v) for c, v in zip(train.column_ids, mi)},
        universe=tuple(int(c) for c in train.column_ids))


def select_lasso(train: Dataset, lam: float, seed: int = 0,
                 tol: float = 1e-7, max_sweeps: int = 10_000) -> SelectorDecision:
    """L1-regularized least squares on the +/-1 label, solved by cyclic
    coordinate descent on internally standardized columns.

    Objective: (1/2n) ||y - Xw||^2 + lam * ||w||_1.  Selected features are
    the nonzero coefficients.
    """
    _check_train(train)
    if lam < 0:
        raise FeatselError("lambda must be >= 0")
    X = train.features.values
    y = np.where(train.labels == 1, 1.0, -1.0)
    y = y - y.mean()
    n, p = X.shape
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    live = sd > 0
    Z = np.zeros_like(X)
    Z[:, live] = (X[:, live] - mu[live]) / sd[live]

    w = np.zeros(p)
    r = y.copy()                    # residual y - Zw
    objective = []

    def obj() -> float:
        return float((r @ r) / (2 * n) + lam * np.abs(w).sum())

    objective.append(obj())
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            if not live[j]:
                continue
            zj = Z[:, j]
            rho = (zj @ r) / n + w[j]          # since mean(zj^2) == 1
            new = math.copysign(max(abs(rho) - lam, 0.0), rho)
            if new != w[j]:
                r += zj * (w[j] - new)
                delta = max(delta, abs(new - w[j]))
                w[j] = new
        objective.append(obj())
        if delta < tol:
            break

    grad = -(Z.T @ r) / n
    kkt = 0.0
    for j in range(p):
        if not live[j]:
            continue
        if w[j] != 0:
            kkt = max(kkt, abs(grad[j] + lam * math.copysign(1.0, w[j])))
        else:
            kkt = max(kkt, max(abs(grad[j]) - lam, 0.0))

    selected = tuple(int(c) for c, wj in zip(train.column_ids, w) if wj != 0)
    return SelectorDecision(
        f"lasso_{lam:g}", selected,
        scores={int(c): abs(float(wj)) for c, wj in zip(train.column_ids, w)},
        universe=tuple(int(c) for c in train.column_ids),
        diagnostics={"objective_trace": objective, "kkt_residual": kkt,
                     "n_sweeps": len(objective) - 1, "seed": seed})


def _forest_importance(train: Dataset, values: np.ndarray, seed: int,
                       n_trees: int, max_depth: int) -> np.ndarray:
    from .data import Dataset as _DS, FeatureMatrix as _FM
    ds = _DS(_FM(values, np.arange(values.shape[1])), train.labels)
    spec = models.ModelSpec("random_forest",
                            {"n_trees": n_trees, "max_depth": max_depth, "min_leaf": 5},
                            seed=seed)
    m = models.train(spec, ds, class_weight=_minority_weight(train.labels))
    return m.state["importance"]


def select_boruta(train: Dataset, max_iterations: int = 20, alpha: float = 0.05,
                  seed: int = 0, n_trees: int = 40, max_depth: int = 5) -> SelectorDecision:
    """Shadow-feature wrapper: each round pits random-forest importances
    against per-column permuted copies; a binomial test over rounds
    classifies features as confirmed, rejected, or tentative.  Only
    confirmed features are selected."""
    _check_train(train)
    if max_iterations < 5:
        raise FeatselError("max_iterations must be >= 5")
    X = train.features.values
    p = train.n_cols
    hits = np.zeros(p, dtype=np.int64)
    for it in range(max_iterations):
        rng = np.random.default_rng([seed, it])
        shadows = np.empty_like(X)
        for j in range(p):
            shadows[:, j] = rng.permutation(X[:, j])
        imp = _forest_importance(train, np.hstack([X, shadows]),
                                 seed=int(rng.integers(2 ** 31)),
                                 n_trees=n_trees, max_depth=max_depth)
        real, shadow = imp[:p], imp[p:]
        hits += real > shadow.max()

    confirmed, rejected, tentative = [], [], []
    for j, cid in enumerate(train.column_ids):
        h = int(hits[j])
        if _stats.binom.sf(h - 1, max_iterations, 0.5) < alpha:
            confirmed.append(int(cid))
        elif _stats.binom.cdf(h, max_iterations, 0.5) < alpha:
            rejected.append(int(cid))
        else:
            tentative.append(int(cid))
    return SelectorDecision(
        "boruta", tuple(confirmed),
        scores={int(c): int(h) for c, h in zip(train.column_ids, hits)},
        universe=tuple(int(c) for c in train.column_ids),
        diagnostics={"rejected": tuple(rejected), "tentative": tuple(tentative),
                     "max_iterations": max_iterations, "alpha": alpha})


_RFE_ESTIMATORS = ("logistic", "linear_svm", "forest")
_SFS_ESTIMATORS = ("boosted_trees", "linear_svm")


def _subset_dataset(train: Dataset, col_ids) -> Dataset:
    return train.select_columns(list(col_ids))


def _rank_scores(train: Dataset, estimator: str, seed: int, params: dict) -> np.ndarray:
    """Per-column importance for RFE: |coefficient| or forest gain."""
    cw = _minority_weight(train.labels)
    if estimator == "forest":
        spec = models.ModelSpec("random_forest", {
            "n_trees": params.get("n_trees", 30),
            "max_depth": params.get("max_depth", 4), "min_leaf": 5}, seed=seed)
        m = models.train(spec, train, class_weight=cw)
        return m.state["importance"]
    family = "logistic" if estimator == "logistic" else "linear_svm"
    hp = {"epochs": params.get("epochs", 150)}
    if family == "logistic":
        hp.update({"learning_rate": params.get("learning_rate", 0.5),
                   "l2": params.get("l2", 1e-3)})
    else:
        hp.update({"learning_rate": params.get("learning_rate", 0.05),
                   "c": params.get("c", 1.0)})
    m = models.train(models.ModelSpec(family, hp, seed=seed), train, class_weight=cw)
    return np.abs(m.state["weights"])


def select_rfe(train: Dataset, estimator: str, n_keep: int,
               seed: int = 0, estimator_params: dict | None = None) -> SelectorDecision:
    """Recursive elimination: refit, drop the single weakest feature (ties
    drop the higher column id), repeat until n_keep remain."""
    _check_train(train)
    _check_n_keep(n_keep, train.n_cols)
    if estimator not in _RFE_ESTIMATORS:
        raise FeatselError(f"estimator must be one of {_RFE_ESTIMATORS}")
    params = estimator_params or {}
    current = _subset_dataset(train, [int(c) for c in train.column_ids])
    elimination_order = []
    while current.n_cols > n_keep:
        score = _rank_scores(current, estimator, seed, params)
        # weakest feature; tie -> higher column id dropped
        order = sorted(range(current.n_cols),
                       key=lambda i: (score[i], -current.column_ids[i]))
        drop = int(current.column_ids[order[0]])
        elimination_order.append(drop)
        keep = [int(c) for c in current.column_ids if int(c) != drop]
        current = _subset_dataset(current, keep)
    return SelectorDecision(
        f"rfe_{estimator}", tuple(int(c) for c in current.column_ids),
        universe=tuple(int(c) for c in train.column_ids),
        diagnostics={"elimination_order": tuple(elimination_order)})


def _cv_balanced_accuracy(train: Dataset, col_ids, estimator: str,
                          folds: np.ndarray, seed: int, params: dict) -> float:
    cw = _minority_weight(train.labels)
    if estimator == "boosted_trees":
        spec = models.ModelSpec("gradient_boosting", {
            "n_rounds": params.get("n_rounds", 15),
            "max_depth": params.get("max_depth", 2),
            "shrinkage": params.get("shrinkage", 0.3), "min_leaf": 2}, seed=seed)
    else:
        spec = models.ModelSpec("linear_svm", {
            "epochs": params.get("epochs", 100),
            "learning_rate": params.get("learning_rate", 0.05)}, seed=seed)
    sub = _subset_dataset(train, col_ids)
    scores = []
    for f in range(int(folds.max()) + 1):
        tr = np.nonzero(folds != f)[0]
        va = np.nonzero(folds == f)[0]
        m = models.train(spec, sub.take_rows(tr), class_weight=cw)
        s = models.predict_scores(m, sub.features.take_rows(va))
        ms = metric_set(confusion(sub.labels[va], s, 0.5))
        scores.append(ms.balanced_accuracy)
    return float(np.mean(scores))


def select_sfs(train: Dataset, estimator: str, direction: str, n_keep: int,
               cv_folds: int = 3, seed: int = 0,
               estimator_params: dict | None = None) -> SelectorDecision:
    """Greedy sequential selection by mean cross-validated balanced
    accuracy; score ties go to the lowest column id."""
    _check_train(train)
    _check_n_keep(n_keep, train.n_cols)
    if estimator not in _SFS_ESTIMATORS:
        raise FeatselError(f"estimator must be one of {_SFS_ESTIMATORS}")
    if direction not in ("forward", "backward"):
        raise FeatselError("direction must be forward or backward")
    if cv_folds < 2:
        raise FeatselError("cv_folds must be >= 2")
    params = estimator_params or {}
    folds = stratified_kfold(train, cv_folds, seed).fold_assignments
    all_ids = [int(c) for c in train.column_ids]

    if direction == "forward":
        chosen: list[int] = []
        remaining = list(all_ids)
        while len(chosen) < n_keep:
            best = None
            for c in remaining:
                s = _cv_balanced_accuracy(train, chosen + [c], estimator, folds, seed, params)
                if best is None or s > best[0] or (s == best[0] and c < best[1]):
                    best = (s, c)
            chosen.append(best[1])
            remaining.remove(best[1])
        selected = tuple(sorted(chosen))
    else:
        chosen = list(all_ids)
        while len(chosen) > n_keep:
            best = None
            for c in chosen:
                trial = [x for x in chosen if x != c]
                s = _cv_balanced_accuracy(train, trial, estimator, folds, seed, params)
                if best is None or s > best[0] or (s == best[0] and c < best[1]):
                    best = (s, c)
            chosen.remove(best[1])
        selected = tuple(sorted(chosen))

    return SelectorDecision(
        f"sfs_{estimator}_{direction}", selected,
        universe=tuple(all_ids),
        diagnostics={"cv_folds": cv_folds})


def vote(decisions: list[SelectorDecision], threshold: int) -> FeatureVoteLedger:
    """Aggregate selector decisions: a feature is selected when at least
    `threshold` selectors chose it."""
    if not decisions:
        raise FeatselError("at least one decision required")
    if threshold < 1:
        raise FeatselError("threshold must be >= 1")
    if threshold > len(decisions):
        warnings.warn(f"threshold {threshold} exceeds the {len(decisions)} selectors run; "
                      "selection is empty")
    universe: set[int] = set()
    for d in decisions:
        universe |= set(d.universe if d.universe else d.selected)
    votes = {c: 0 for c in sorted(universe)}
    contributors = {c: [] for c in sorted(universe)}
    for d in decisions:
        for c in d.selected:
            votes[c] += 1
            contributors[c].append(d.name)
    selected = tuple(c for c in sorted(universe) if votes[c] >= threshold)
    return FeatureVoteLedger(votes, {c: tuple(v) for c, v in contributors.items()},
                             threshold, selected)


def run_default_roster(train: Dataset, master_seed: int = 0,
                       n_keep: int | None = None,
                       sfs_n_keep: int | None = None) -> list[SelectorDecision]:
    """The default 12-voter roster.

    Filter selectors at three granularities (mutual information at 4/8/16
    bins), two coordinate-descent L1 strengths, a shadow-feature wrapper,
    recursive elimination under three estimators, and sequential selection
    under two.  Per-selector budget defaults to half the surviving columns;
    sequential selection is capped lower because its cost grows with the
    square of its budget.
    """
    _check_train(train)
    p = train.n_cols
    if n_keep is None:
        n_keep = max(1, p // 2)
    if sfs_n_keep is None:
        sfs_n_keep = max(1, min(20, n_keep))

    def seed_for(name: str) -> int:
        return int(np.random.default_rng([master_seed, abs(hash_name(name))]).integers(2 ** 31))

    def hash_name(name: str) -> int:
        # stable across processes (unlike built-in hash with PYTHONHASHSEED)
        return int.from_bytes(name.encode(), "little") % (2 ** 31)

    decisions = [
        select_f_score(train, n_keep),
        select_mutual_info(train, n_keep, n_bins=4),
        select_mutual_info(train, n_keep, n_bins=8),
        select_mutual_info(train, n_keep, n_bins=16),
        select_lasso(train, lam=0.005, seed=seed_for("lasso_a")),
        select_lasso(train, lam=0.02, seed=seed_for("lasso_b")),
        select_boruta(train, max_iterations=20, alpha=0.05, seed=seed_for("boruta")),
        select_rfe(train, "logistic", n_keep, seed=seed_for("rfe_logistic")),
        select_rfe(train, "linear_svm", n_keep, seed=seed_for("rfe_linear_svm")),
        select_rfe(train, "forest", n_keep, seed=seed_for("rfe_forest")),
        select_sfs(train, "boosted_trees", "forward", sfs_n_keep, cv_folds=2,
                   seed=seed_for("sfs_boosted_trees")),
        select_sfs(train, "linear_svm", "forward", sfs_n_keep, cv_folds=2,
                   seed=seed_for("sfs_linear_svm")),
    ]
    return decisions
