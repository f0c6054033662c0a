import numpy as np
import pytest

from rareclass.data import Dataset, FeatureMatrix
from rareclass.featsel import (FeatselError, SelectorDecision, run_default_roster,
                               select_boruta, select_f_score, select_lasso,
                               select_mutual_info, select_rfe, select_sfs, vote)


def _ds(values, labels):
    values = np.asarray(values, dtype=float)
    return Dataset(FeatureMatrix(values, np.arange(values.shape[1])),
                   np.asarray(labels, dtype=int))


def _signal_noise(n=150, n_signal=3, n_noise=7, shift=2.5, seed=0):
    """First n_signal columns carry a class shift, the rest are pure noise."""
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.3).astype(int)
    y[:2] = [0, 1]
    x = rng.normal(size=(n, n_signal + n_noise))
    x[:, :n_signal] += shift * y[:, None]
    return _ds(x, y)


class TestFScore:
    def test_hand_anova_oracle(self):
        # 6 points, one column; direct one-way ANOVA F arithmetic
        x = np.array([[1.0], [2.0], [3.0], [7.0], [8.0], [9.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        g0, g1 = x[:3, 0], x[3:, 0]
        grand = x[:, 0].mean()
        ssb = 3 * (g0.mean() - grand) ** 2 + 3 * (g1.mean() - grand) ** 2
        ssw = ((g0 - g0.mean()) ** 2).sum() + ((g1 - g1.mean()) ** 2).sum()
        expected = (ssb / 1) / (ssw / 4)
        dec = select_f_score(_ds(x, y), n_keep=1)
        assert dec.scores[0] == pytest.approx(expected, abs=1e-10)

    def test_ranks_signal_first(self):
        d = _signal_noise()
        dec = select_f_score(d, n_keep=3)
        assert set(dec.selected) == {0, 1, 2}

    def test_separated_constant_groups_sentinel(self):
        # zero within-group variance with distinct means: infinite F
        x = np.array([[1.0], [1.0], [5.0], [5.0]])
        y = np.array([0, 0, 1, 1])
        dec = select_f_score(_ds(x, y), n_keep=1)
        assert dec.scores[0] == np.inf

    def test_nan_input_rejected(self):
        d = _ds([[np.nan], [1.0]], [0, 1])
        with pytest.raises(FeatselError, match="imputed"):
            select_f_score(d, 1)


class TestMutualInfo:
    def test_plug_in_table_oracle(self):
        # two bins split at the median; hand-computed joint table
        x = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        # bins: {0,1} vs {2,3}; perfectly aligned with the label
        # I(X;Y) = H(Y) = ln 2
        dec = select_mutual_info(_ds(x, y), n_keep=1, n_bins=2)
        assert dec.scores[0] == pytest.approx(np.log(2), abs=1e-12)

    def test_mi_bounded_by_label_entropy(self):
        d = _signal_noise(seed=2)
        p = d.labels.mean()
        h_y = -(p * np.log(p) + (1 - p) * np.log(1 - p))
        dec = select_mutual_info(d, n_keep=5, n_bins=8)
        assert all(v <= h_y + 1e-9 for v in dec.scores.values())
        assert all(v >= -1e-12 for v in dec.scores.values())

    def test_independent_column_near_zero(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(4000, 1))
        y = (rng.random(4000) < 0.5).astype(int)
        dec = select_mutual_info(_ds(x, y), n_keep=1, n_bins=4)
        assert dec.scores[0] < 0.01

    def test_bad_bins(self):
        with pytest.raises(FeatselError):
            select_mutual_info(_signal_noise(), 1, n_bins=1)


class TestLasso:
    def test_soft_threshold_oracle_orthonormal(self):
        # with orthonormal standardized design the CD solution is the
        # soft-thresholded univariate coefficient
        n = 64
        rng = np.random.default_rng(7)
        q, _ = np.linalg.qr(rng.normal(size=(n, 2)))
        X = q * np.sqrt(n)  # columns: mean ~0, unit variance scaling
        X = X - X.mean(axis=0)
        X = X / X.std(axis=0)
        beta = np.array([0.8, 0.05])
        y_cont = X @ beta
        y = (y_cont > np.median(y_cont)).astype(int)
        d = _ds(X, y)
        lam = 0.2
        dec = select_lasso(d, lam=lam)
        t = np.where(y == 1, 1.0, -1.0)
        t_c = t - t.mean()
        for j in range(2):
            rho = float(X[:, j] @ t_c) / n
            expected = np.sign(rho) * max(abs(rho) - lam, 0.0)
            assert dec.scores[j] == pytest.approx(expected, abs=1e-5)

    def test_lambda_max_gives_empty_set(self):
        d = _signal_noise()
        dec = select_lasso(d, lam=10.0)
        assert dec.selected == ()

    def test_objective_monotone_and_kkt(self):
        d = _signal_noise(seed=5)
        dec = select_lasso(d, lam=0.02)
        trace = np.array(dec.diagnostics["objective_trace"])
        assert (np.diff(trace) <= 1e-10).all()
        assert dec.diagnostics["kkt_residual"] < 1e-5

    def test_small_lambda_keeps_signal(self):
        d = _signal_noise(seed=6)
        dec = select_lasso(d, lam=0.005)
        assert {0, 1, 2} <= set(dec.selected)


class TestBoruta:
    def test_recovers_signal_across_seeds(self):
        hits = 0
        for seed in range(20):
            d = _signal_noise(n=120, shift=3.0, seed=seed)
            dec = select_boruta(d, max_iterations=12, seed=seed)
            if {0, 1, 2} <= set(dec.selected):
                hits += 1
        assert hits >= 19

    def test_rarely_confirms_pure_noise(self):
        false_pos = 0
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            x = rng.normal(size=(100, 8))
            y = (rng.random(100) < 0.3).astype(int)
            y[:2] = [0, 1]
            dec = select_boruta(_ds(x, y), max_iterations=10, seed=seed)
            false_pos += len(dec.selected)
        assert false_pos <= 4

    def test_min_iterations_enforced(self):
        with pytest.raises(FeatselError):
            select_boruta(_signal_noise(), max_iterations=2)

    def test_diagnostics_partition(self):
        d = _signal_noise(seed=3)
        dec = select_boruta(d, max_iterations=10, seed=3)
        diag = dec.diagnostics
        all_cols = set(dec.selected) | set(diag["rejected"]) | set(diag["tentative"])
        assert all_cols == set(dec.universe)
        assert not set(dec.selected) & (set(diag["rejected"]) | set(diag["tentative"]))


class TestRfe:
    @pytest.mark.parametrize("estimator", ["logistic", "linear_svm", "forest"])
    def test_eliminates_noise(self, estimator):
        hits = 0
        for seed in range(20):
            d = _signal_noise(n=120, shift=3.0, seed=30 + seed)
            dec = select_rfe(d, estimator, n_keep=3, seed=seed)
            if set(dec.selected) == {0, 1, 2}:
                hits += 1
        assert hits >= 18

    def test_keep_all_is_identity(self):
        d = _signal_noise()
        dec = select_rfe(d, "logistic", n_keep=d.n_cols)
        assert set(dec.selected) == set(d.column_ids)

    def test_unknown_estimator(self):
        with pytest.raises(FeatselError):
            select_rfe(_signal_noise(), "nearest_centroid", 2)


class TestSfs:
    def test_forward_keep_one_matches_exhaustive(self):
        # oracle: evaluate every single-column model with the same CV
        from rareclass.featsel import _cv_balanced_accuracy
        from rareclass.preprocess import stratified_kfold
        d = _signal_noise(n=90, n_signal=2, n_noise=3, seed=9)
        est, params, cv, seed = "linear_svm", {}, 2, 0
        folds = stratified_kfold(d, cv, seed).fold_assignments
        scores = {int(c): _cv_balanced_accuracy(d, [int(c)], est, folds, seed, params)
                  for c in d.column_ids}
        best = min(sorted(scores), key=lambda c: (-scores[c], c))
        dec = select_sfs(d, est, "forward", n_keep=1, cv_folds=cv, seed=seed)
        assert dec.selected == (best,)

    def test_forward_finds_signal(self):
        d = _signal_noise(n=120, shift=3.0, seed=10)
        dec = select_sfs(d, "linear_svm", "forward", n_keep=3, cv_folds=2, seed=1)
        assert len(set(dec.selected) & {0, 1, 2}) >= 2

    def test_bad_direction(self):
        with pytest.raises(FeatselError):
            select_sfs(_signal_noise(), "linear_svm", "sideways", 2)


class TestVote:
    def _dec(self, name, cols, universe=(0, 1, 2, 3)):
        return SelectorDecision(name, tuple(cols), universe=tuple(universe))

    def test_threshold_counting(self):
        decs = [self._dec("a", [0, 1]), self._dec("b", [1, 2]), self._dec("c", [1])]
        led = vote(decs, threshold=2)
        assert led.selected == (1,)
        # the universe column that nobody picked is present with zero votes
        assert led.votes == {0: 1, 1: 3, 2: 1, 3: 0}

    def test_threshold_one_is_union(self):
        decs = [self._dec("a", [0]), self._dec("b", [3])]
        led = vote(decs, threshold=1)
        assert set(led.selected) == {0, 3}

    def test_permutation_invariance(self):
        decs = [self._dec("a", [0, 1]), self._dec("b", [1, 2]), self._dec("c", [2])]
        led1 = vote(decs, 2)
        led2 = vote(decs[::-1], 2)
        assert led1.selected == led2.selected
        assert led1.votes == led2.votes

    def test_selected_monotone_in_threshold(self):
        decs = [self._dec(n, c) for n, c in
                [("a", [0, 1, 2]), ("b", [1, 2]), ("c", [2]), ("d", [2, 3])]]
        prev = None
        for t in range(1, 5):
            cur = set(vote(decs, t).selected)
            if prev is not None:
                assert cur <= prev
            prev = cur

    def test_threshold_above_roster_warns_and_empties(self):
        decs = [self._dec("a", [0]), self._dec("b", [0])]
        with pytest.warns(UserWarning):
            led = vote(decs, threshold=3)
        assert led.selected == ()

    def test_contributors_recorded(self):
        decs = [self._dec("a", [0]), self._dec("b", [0])]
        led = vote(decs, 2)
        assert set(led.contributors[0]) == {"a", "b"}


class TestRoster:
    def test_twelve_voters_distinct_names(self):
        d = _signal_noise(n=100, seed=12)
        decs = run_default_roster(d, master_seed=0, n_keep=3, sfs_n_keep=2)
        assert len(decs) == 12
        assert len({dec.name for dec in decs}) == 12

    def test_roster_deterministic(self):
        d = _signal_noise(n=100, seed=12)
        a = run_default_roster(d, master_seed=5, n_keep=3, sfs_n_keep=2)
        b = run_default_roster(d, master_seed=5, n_keep=3, sfs_n_keep=2)
        assert [x.selected for x in a] == [y.selected for y in b]

    def test_majority_vote_finds_signal(self):
        d = _signal_noise(n=150, shift=3.0, seed=13)
        decs = run_default_roster(d, master_seed=0, n_keep=3, sfs_n_keep=2)
        led = vote(decs, threshold=3)
        assert {0, 1, 2} <= set(led.selected)
