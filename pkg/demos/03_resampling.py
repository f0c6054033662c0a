"""The resampling arithmetic, spelled out on a 1:14 training set.

Oversampling alone, undersampling alone, and the combined plan that moves
a 1:14 class ratio to roughly 4:5."""

import numpy as np

from rareclass.data import Dataset, FeatureMatrix
from rareclass.resample import (SmoteParams, combined_resample,
                                random_undersample, smote)


def ratio(d):
    n_min = int(d.labels.sum())
    return n_min, d.n_rows - n_min


def main():
    rng = np.random.default_rng(1)
    n_min, n_maj = 70, 980    # 1:14
    v = rng.normal(size=(n_min + n_maj, 6))
    v[: n_min] += 1.5
    y = np.concatenate([np.ones(n_min, dtype=int), np.zeros(n_maj, dtype=int)])
    d = Dataset(FeatureMatrix(v, np.arange(6)), y)
    print(f"start: {ratio(d)[0]} minority vs {ratio(d)[1]} majority (1:14)")

    over, plan = smote(d, SmoteParams(target_ratio=0.7, k_neighbors=5, seed=0))
    print(f"\noversample to 70%: {plan.counts_after[1]} vs {plan.counts_after[0]}")
    rec = plan.synthetic_records[0]
    print(f"  first synthetic row interpolates rows {rec.parent_row} and "
          f"{rec.neighbor_row} at lambda={rec.lam:.3f}")

    under, plan = random_undersample(d, target_ratio=1.0, seed=0)
    print(f"\nundersample to parity: {plan.counts_after[1]} vs {plan.counts_after[0]} "
          "(throws away most of the majority)")

    both, plan = combined_resample(d, over_ratio=0.4, under_ratio=0.8, seed=0)
    mino, maj = plan.counts_after[1], plan.counts_after[0]
    print(f"\ncombined 0.4 then 0.8: {mino} vs {maj} "
          f"(ratio {mino / maj:.2f}, i.e. about 4:5)")
    print("\nthe combined plan keeps more of the majority's information than "
          "pure undersampling while inventing fewer rows than pure oversampling")


if __name__ == "__main__":
    main()
