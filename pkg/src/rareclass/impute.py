"""Missing-value imputation: simple column strategies, nearest-neighbour
averaging, and iterative chained-equation regression.

All fitted quantities (fill values, neighbour pools, regression
coefficients) come from the training partition only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import ColumnStats, Dataset, ProvenanceRecord

__all__ = [
    "SimpleImputePlan",
    "KnnImputeParams",
    "MiceParams",
    "ImputeError",
    "ImputeLogEntry",
    "assign_simple_strategies",
    "fit_simple_plan",
    "simple_impute",
    "knn_impute",
    "mice_impute",
]

SIMPLE_STRATEGIES = ("mean", "median", "most_frequent", "forward", "backward",
                     "linear_interpolation")


class ImputeError(ValueError):
    pass


@dataclass(frozen=True)
class ImputeLogEntry:
    row: int
    column_id: int
    method: str
    value: float
    fallback: bool = False


def impute_log_csv(entries) -> str:
    lines = ["row,column_id,method,value,fallback"]
    for e in entries:
        lines.append(f"{e.row},{e.column_id},{e.method},{e.value!r},{int(e.fallback)}")
    return "\n".join(lines) + "\n"


@dataclass
class SimpleImputePlan:
    """Per-column strategy with fill values fitted on training rows."""

    strategies: dict            # column_id -> strategy name
    fill_values: dict = field(default_factory=dict)   # column_id -> fitted value

    def override(self, column_id: int, strategy: str) -> None:
        if strategy not in SIMPLE_STRATEGIES:
            raise ImputeError(f"unknown strategy {strategy!r}")
        self.strategies[int(column_id)] = strategy


@dataclass(frozen=True)
class KnnImputeParams:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ImputeError("k must be >= 1")


@dataclass(frozen=True)
class MiceParams:
    n_iterations: int = 5
    initial_fill: str = "mean"          # mean | median
    seed: int = 0
    noise_mode: str = "deterministic_prediction"  # or gaussian_residual_draw
    ridge: float = 1e-8

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ImputeError("n_iterations must be >= 1")
        if self.initial_fill not in ("mean", "median"):
            raise ImputeError("initial_fill must be mean or median")
        if self.noise_mode not in ("deterministic_prediction", "gaussian_residual_draw"):
            raise ImputeError(f"unknown noise_mode {self.noise_mode!r}")


def assign_simple_strategies(train_stats: list[ColumnStats], skew_threshold: float = 1.0) -> SimpleImputePlan:
    """Median for columns with |skewness| strictly above the threshold,
    mean otherwise."""
    strategies = {}
    for s in train_stats:
        skew = s.skewness if s.skewness is not None else 0.0
        strategies[s.column_id] = "median" if abs(skew) > skew_threshold else "mean"
    return SimpleImputePlan(strategies)


def fit_simple_plan(plan: SimpleImputePlan, train: Dataset) -> SimpleImputePlan:
    """Fit fill values on the training rows for every column of the plan."""
    v = train.features.values
    fills = {}
    for j, cid in enumerate(train.column_ids):
        cid = int(cid)
        if cid not in plan.strategies:
            raise ImputeError(f"plan does not cover column {cid}")
        col = v[:, j]
        present = col[~np.isnan(col)]
        if len(present) == 0:
            raise ImputeError(f"column {cid} entirely missing in training data")
        strat = plan.strategies[cid]
        if strat == "median":
            fills[cid] = float(np.median(present))
        elif strat == "most_frequent":
            vals, counts = np.unique(present, return_counts=True)
            fills[cid] = float(vals[np.argmax(counts)])
        else:
            # mean fill; also the boundary fallback for the order-based strategies
            fills[cid] = float(present.mean())
    return SimpleImputePlan(dict(plan.strategies), fills)


def _fill_ordered(col: np.ndarray, strategy: str, fallback: float) -> np.ndarray:
    """Forward / backward / linear interpolation over row order."""
    out = col.copy()
    present = ~np.isnan(out)
    if not present.any():
        out[:] = fallback
        return out
    idx = np.arange(len(out))
    if strategy == "forward":
        # last present value at or before each row
        last = np.where(present, idx, -1)
        last = np.maximum.accumulate(last)
        filled = np.where(last >= 0, out[np.maximum(last, 0)], np.nan)
        out = np.where(present, out, filled)
        # leading gap: backward fill, then mean
        still = np.isnan(out)
        if still.any():
            out = _fill_ordered(out, "backward", fallback)
    elif strategy == "backward":
        nxt = np.where(present, idx, len(out))
        nxt = np.minimum.accumulate(nxt[::-1])[::-1]
        filled = np.where(nxt < len(out), out[np.minimum(nxt, len(out) - 1)], np.nan)
        out = np.where(present, out, filled)
        still = np.isnan(out)
        if still.any():
            out[still] = fallback
    elif strategy == "linear_interpolation":
        out[~present] = np.interp(idx[~present], idx[present], out[present])
        # np.interp extends flat at the edges; replace pure extrapolation with mean
        first, last = idx[present][0], idx[present][-1]
        edge = (~present) & ((idx < first) | (idx > last))
        out[edge] = fallback
    else:
        raise ImputeError(f"unknown ordered strategy {strategy!r}")
    return out


def simple_impute(plan: SimpleImputePlan, d: Dataset, log: list | None = None) -> Dataset:
    """Fill every missing cell per the plan. Present cells are untouched."""
    if not plan.fill_values:
        raise ImputeError("plan has no fitted fill values; call fit_simple_plan first")
    v = d.features.values.copy()
    for j, cid in enumerate(d.column_ids):
        cid = int(cid)
        if cid not in plan.strategies:
            raise ImputeError(f"plan does not cover column {cid}")
        strat = plan.strategies[cid]
        fill = plan.fill_values[cid]
        col = v[:, j]
        missing = np.isnan(col)
        if not missing.any():
            continue
        if strat in ("mean", "median", "most_frequent"):
            col[missing] = fill
        else:
            col[:] = _fill_ordered(col, strat, fill)
        if log is not None:
            for r in np.nonzero(missing)[0]:
                log.append(ImputeLogEntry(int(r), cid, strat, float(col[r])))
    rec = ProvenanceRecord("simple_impute", {"strategies": dict(plan.strategies)})
    return d.with_values(v, rec)


def knn_impute(p: KnnImputeParams, train: Dataset, target: Dataset,
               log: list | None = None) -> Dataset:
    """Fill each missing cell with the mean of the column's values among the
    k nearest training rows.

    Distance is Euclidean over mutually present features, normalised by the
    shared-feature count.  Neighbours missing the needed column are skipped
    in favour of the next nearest; with no eligible neighbour the column
    mean is used and logged as a fallback.
    """
    if not np.array_equal(train.column_ids, target.column_ids):
        raise ImputeError("train and target column ids differ")
    tv = train.features.values
    tp = ~np.isnan(tv)
    col_means = np.array([tv[tp[:, j], j].mean() if tp[:, j].any() else np.nan
                          for j in range(train.n_cols)])
    if np.isnan(col_means).any():
        raise ImputeError("a training column is entirely missing")
    n_present = tp.sum(axis=0)
    short = n_present < p.k
    if short.any():
        cid = int(train.column_ids[np.nonzero(short)[0][0]])
        raise ImputeError(f"column {cid} has fewer than k={p.k} present training rows")

    out = target.features.values.copy()
    tv0 = np.where(tp, tv, 0.0)
    for r in range(target.n_rows):
        row = out[r]
        missing = np.isnan(row)
        if not missing.any():
            continue
        rp = ~missing
        if rp.any():
            shared = tp[:, rp]                       # (n_train, n_shared_candidates)
            diff = tv0[:, rp] - np.where(shared, row[rp], 0.0)
            diff[~shared] = 0.0
            cnt = shared.sum(axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                dist = np.sqrt((diff ** 2).sum(axis=1) / cnt)
            dist[cnt == 0] = np.inf
        else:
            dist = np.full(train.n_rows, np.inf)
        order = np.argsort(dist, kind="stable")
        order = order[np.isfinite(dist[order])]
        for j in np.nonzero(missing)[0]:
            donors = order[tp[order, j]][: p.k]
            cid = int(target.column_ids[j])
            if len(donors) == p.k:
                val = float(tv[donors, j].mean())
                fb = False
            else:
                val = float(col_means[j])
                fb = True
            out[r, j] = val
            if log is not None:
                log.append(ImputeLogEntry(r, cid, "knn", val, fallback=fb))
    rec = ProvenanceRecord("knn_impute", {"k": p.k})
    return target.with_values(out, rec)


def _initial_fill(values: np.ndarray, mode: str, train_mask: np.ndarray) -> np.ndarray:
    """Fill NaNs with train-row column means or medians."""
    out = values.copy()
    for j in range(values.shape[1]):
        col = values[:, j]
        tcol = col[train_mask]
        present = tcol[~np.isnan(tcol)]
        if len(present) == 0:
            raise ImputeError(f"column index {j} entirely missing in training data")
        fill = float(np.median(present)) if mode == "median" else float(present.mean())
        out[np.isnan(col), j] = fill
    return out


def mice_impute(p: MiceParams, train: Dataset, target: Dataset,
                log: list | None = None) -> Dataset:
    """Chained-equation imputation: iteratively regress each incomplete
    column on all others and refill its missing entries.

    Regressions are ridge-damped least squares fitted on training rows where
    the column is observed.  gaussian_residual_draw mode adds seeded noise
    with the training residual scale; the default is the deterministic
    fitted mean.
    """
    if not np.array_equal(train.column_ids, target.column_ids):
        raise ImputeError("train and target column ids differ")
    if train.n_cols < 2:
        raise ImputeError("chained-equation imputation needs at least 2 columns")

    n_train = train.n_rows
    values = np.vstack([train.features.values, target.features.values])
    orig_missing = np.isnan(values)
    train_mask = np.zeros(len(values), dtype=bool)
    train_mask[:n_train] = True

    state = _initial_fill(values, p.initial_fill, train_mask)
    rng = np.random.default_rng(p.seed)
    incomplete = [j for j in range(values.shape[1]) if orig_missing[:, j].any()]
    n_cols = values.shape[1]

    for _ in range(p.n_iterations):
        for j in incomplete:
            others = [c for c in range(n_cols) if c != j]
            obs = train_mask & ~orig_missing[:, j]
            if obs.sum() < 2:
                raise ImputeError(f"column index {j} has fewer than 2 observed training rows")
            X = state[obs][:, others]
            y = state[obs, j]
            Xm, ym = X.mean(axis=0), y.mean()
            Xc, yc = X - Xm, y - ym
            gram = Xc.T @ Xc + p.ridge * np.eye(len(others))
            try:
                beta = np.linalg.solve(gram, Xc.T @ yc)
            except np.linalg.LinAlgError:
                # singular even after damping: column-mean refill this sweep
                miss = orig_missing[:, j]
                state[miss, j] = ym
                if log is not None:
                    for r in np.nonzero(miss)[0]:
                        log.append(ImputeLogEntry(int(r), int(train.column_ids[j]),
                                                  "mice", float(ym), fallback=True))
                continue
            miss = orig_missing[:, j]
            pred = (state[miss][:, others] - Xm) @ beta + ym
            if p.noise_mode == "gaussian_residual_draw":
                resid = yc - Xc @ beta
                sigma = float(np.sqrt((resid ** 2).mean()))
                pred = pred + rng.normal(0.0, sigma, size=len(pred))
            state[miss, j] = pred

    if log is not None:
        for j in incomplete:
            cid = int(train.column_ids[j])
            for r in np.nonzero(orig_missing[n_train:, j])[0]:
                log.append(ImputeLogEntry(int(r), cid, "mice",
                                          float(state[n_train + r, j])))
    rec = ProvenanceRecord("mice_impute", {
        "n_iterations": p.n_iterations, "initial_fill": p.initial_fill,
        "noise_mode": p.noise_mode, "seed": p.seed,
    })
    return target.with_values(state[n_train:], rec)
