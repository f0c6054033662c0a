"""Walk through the exploratory pass on a synthetic sensor dump: class
balance, missingness, constant columns, and the correlation structure that
motivates pruning."""

import numpy as np

from rareclass.data import column_stats, correlation_matrix
from rareclass.synth import make_imbalanced


def main():
    d = make_imbalanced(n_rows=500, n_informative=5, n_noise=20,
                        positive_fraction=0.08, missing_fraction=0.05,
                        n_constant=3, n_duplicate=3, n_high_missing=2, seed=0)
    n_pos = int(d.labels.sum())
    print(f"{d.n_rows} runs x {d.n_cols} sensors, "
          f"{n_pos} failures ({n_pos / d.n_rows:.1%})")

    stats = column_stats(d)
    missing = np.array([s.missing_fraction for s in stats])
    print(f"\nmissing cells overall: {missing.mean():.2%}")
    affected = missing[missing > 0]
    print(f"missing over affected columns only: {affected.mean():.2%} "
          f"({len(affected)} columns) -- the same dataset can honestly be "
          "described with either number")
    print(f"columns over 50% missing: {(missing > 0.5).sum()}")
    print(f"constant columns: {sum(s.is_constant for s in stats)}")

    skews = [(s.column_id, s.skewness) for s in stats
             if s.skewness is not None and abs(s.skewness) > 1.0]
    print(f"\ncolumns with |skewness| > 1: {len(skews)} "
          "(any such column gets median rather than mean imputation later; "
          "this generator draws gaussians, so expect few)")

    r = correlation_matrix(d)
    np.fill_diagonal(r, 0.0)
    iu = np.triu_indices_from(r, 1)
    strong = np.abs(r[iu]) > 0.7
    print(f"\ncolumn pairs with |r| > 0.7: {int(np.nansum(strong))} "
          "(the planted duplicates)")


if __name__ == "__main__":
    main()
