"""Binary tree builders shared by the tree, forest, and boosting learners.

Trees are stored as parallel arrays (feature, threshold, left, right,
value).  feature == -1 marks a leaf.  Thresholds sit at midpoints of
adjacent distinct values; rows with x <= threshold go left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GAIN_TOL = 1e-12


@dataclass
class Tree:
    feature: list        # per node: column position, or -1 for leaf
    threshold: list
    left: list
    right: list
    value: list          # leaf payload (class-1 fraction or boosting weight)

    def new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def apply(self, X: np.ndarray) -> np.ndarray:
        feat = np.asarray(self.feature, dtype=np.int64)
        thr = np.asarray(self.threshold)
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        val = np.asarray(self.value)
        node_of = np.zeros(len(X), dtype=np.int64)
        while True:
            inner = np.nonzero(feat[node_of] >= 0)[0]
            if not len(inner):
                break
            nodes = node_of[inner]
            go_left = X[inner, feat[nodes]] <= thr[nodes]
            node_of[inner] = np.where(go_left, left[nodes], right[nodes])
        return val[node_of]

    @staticmethod
    def empty() -> "Tree":
        return Tree([], [], [], [], [])


def _split_candidates(v: np.ndarray, min_leaf: int):
    """Sorted order plus boundary positions respecting min_leaf."""
    order = np.argsort(v, kind="stable")
    vs = v[order]
    n = len(vs)
    if n < 2 * min_leaf:
        return order, vs, np.empty(0, dtype=np.int64)
    pos = np.nonzero(vs[:-1] != vs[1:])[0]      # split between pos and pos+1
    pos = pos[(pos + 1 >= min_leaf) & (n - pos - 1 >= min_leaf)]
    return order, vs, pos


def build_gini_tree(X: np.ndarray, y: np.ndarray, w: np.ndarray,
                    max_depth: int, min_leaf: int,
                    candidate_cols=None, rng=None,
                    n_subsample: int | None = None,
                    importance: np.ndarray | None = None) -> Tree:
    """CART with weighted Gini impurity.

    candidate_cols fixes the searchable columns; n_subsample draws that many
    columns per split with the given rng (forest mode).  Ties on gain break
    to the lowest column position, then the lowest threshold.
    """
    tree = Tree.empty()
    all_cols = np.arange(X.shape[1]) if candidate_cols is None else np.asarray(candidate_cols)

    def gini_sum(w1: float, w0: float) -> float:
        tot = w1 + w0
        if tot <= 0:
            return 0.0
        return tot * (1.0 - (w1 / tot) ** 2 - (w0 / tot) ** 2)

    def grow(idx: np.ndarray, depth: int) -> int:
        node = tree.new_node()
        wy = w[idx] * (y[idx] == 1)
        w1, wt = wy.sum(), w[idx].sum()
        tree.value[node] = w1 / wt if wt > 0 else 0.0
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return node
        parent = gini_sum(w1, wt - w1)
        if parent <= GAIN_TOL:
            return node

        if n_subsample is not None and n_subsample < len(all_cols):
            cols = np.sort(rng.choice(all_cols, size=n_subsample, replace=False))
        else:
            cols = all_cols

        best = (GAIN_TOL, -1, 0.0)      # gain, column, threshold
        for j in cols:
            order, vs, pos = _split_candidates(X[idx, j], min_leaf)
            if not len(pos):
                continue
            sw = w[idx][order]
            sw1 = sw * (y[idx][order] == 1)
            cw = np.cumsum(sw)
            cw1 = np.cumsum(sw1)
            wl, wl1 = cw[pos], cw1[pos]
            wr, wr1 = wt - wl, w1 - wl1
            with np.errstate(invalid="ignore", divide="ignore"):
                child = (wl - wl1 ** 2 / wl - (wl - wl1) ** 2 / wl
                         + wr - wr1 ** 2 / wr - (wr - wr1) ** 2 / wr)
            gain = parent - child
            k = int(np.argmax(gain))
            if gain[k] > best[0]:
                thr = (vs[pos[k]] + vs[pos[k] + 1]) / 2.0
                best = (float(gain[k]), int(j), float(thr))

        gain, j, thr = best
        if j < 0:
            return node
        if importance is not None:
            importance[j] += gain
        tree.feature[node] = j
        tree.threshold[node] = thr
        go_left = X[idx, j] <= thr
        tree.left[node] = grow(idx[go_left], depth + 1)
        tree.right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return tree


def build_variance_tree(X: np.ndarray, target: np.ndarray, w: np.ndarray,
                        hess: np.ndarray, max_depth: int, min_leaf: int) -> Tree:
    """Regression tree on a gradient target with squared-error splits and
    one-step Newton leaf values (sum of weighted residuals over sum of
    weighted hessians)."""
    tree = Tree.empty()
    cols = np.arange(X.shape[1])

    def grow(idx: np.ndarray, depth: int) -> int:
        node = tree.new_node()
        sw, swr, swh = w[idx].sum(), (w[idx] * target[idx]).sum(), (w[idx] * hess[idx]).sum()
        tree.value[node] = swr / swh if swh > 1e-12 else 0.0
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return node

        best = (GAIN_TOL, -1, 0.0)
        parent = swr ** 2 / sw if sw > 0 else 0.0
        for j in cols:
            order, vs, pos = _split_candidates(X[idx, j], min_leaf)
            if not len(pos):
                continue
            ws = w[idx][order]
            cw = np.cumsum(ws)
            cs = np.cumsum(ws * target[idx][order])
            wl, sl = cw[pos], cs[pos]
            wr, sr = sw - wl, swr - sl
            with np.errstate(invalid="ignore", divide="ignore"):
                gain = sl ** 2 / wl + sr ** 2 / wr - parent
            k = int(np.argmax(gain))
            if gain[k] > best[0]:
                thr = (vs[pos[k]] + vs[pos[k] + 1]) / 2.0
                best = (float(gain[k]), int(j), float(thr))

        gain, j, thr = best
        if j < 0:
            return node
        tree.feature[node] = j
        tree.threshold[node] = thr
        go_left = X[idx, j] <= thr
        tree.left[node] = grow(idx[go_left], depth + 1)
        tree.right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return tree


def build_second_order_tree(X: np.ndarray, grad: np.ndarray, hess: np.ndarray,
                            w: np.ndarray, max_depth: int, min_leaf: int,
                            leaf_l2: float, gamma: float) -> Tree:
    """Gradient/hessian tree: split gain 0.5 * (GL^2/(HL+l2) + GR^2/(HR+l2)
    - G^2/(H+l2)) - gamma; leaf weight -G/(H+l2)."""
    tree = Tree.empty()
    cols = np.arange(X.shape[1])

    def grow(idx: np.ndarray, depth: int) -> int:
        node = tree.new_node()
        G = (w[idx] * grad[idx]).sum()
        H = (w[idx] * hess[idx]).sum()
        tree.value[node] = -G / (H + leaf_l2)
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return node

        parent = G ** 2 / (H + leaf_l2)
        best = (GAIN_TOL, -1, 0.0)
        for j in cols:
            order, vs, pos = _split_candidates(X[idx, j], min_leaf)
            if not len(pos):
                continue
            ws = w[idx][order]
            cg = np.cumsum(ws * grad[idx][order])
            ch = np.cumsum(ws * hess[idx][order])
            gl, hl = cg[pos], ch[pos]
            gr, hr = G - gl, H - hl
            gain = 0.5 * (gl ** 2 / (hl + leaf_l2) + gr ** 2 / (hr + leaf_l2) - parent) - gamma
            k = int(np.argmax(gain))
            if gain[k] > best[0]:
                thr = (vs[pos[k]] + vs[pos[k] + 1]) / 2.0
                best = (float(gain[k]), int(j), float(thr))

        gain, j, thr = best
        if j < 0:
            return node
        tree.feature[node] = j
        tree.threshold[node] = thr
        go_left = X[idx, j] <= thr
        tree.left[node] = grow(idx[go_left], depth + 1)
        tree.right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return tree
