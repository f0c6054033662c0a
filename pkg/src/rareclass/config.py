"""Pipeline configuration: a flat key=value file grouped by bracketed
sections (configparser syntax). Unknown sections or keys are errors."""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, asdict


class ConfigError(ValueError):
    pass


SCENARIOS = ("none", "smote", "combined")
ROSTERS = ("default", "fast", "none")
IMPUTE_METHODS = ("simple", "knn", "mice")

DEFAULT_FAMILIES = ("logistic", "linear_svm", "decision_tree", "random_forest",
                    "gradient_boosting", "regularized_boosting")


@dataclass
class PipelineConfig:
    # [data]
    loader: str = "secom"                 # secom | delimited
    data_path: str = ""
    labels_path: str = ""
    label_column: str = ""
    delimiter: str = ","
    # [preprocess]
    missing_drop_threshold: float = 0.5
    correlation_threshold: float = 0.7
    # [split]
    split_mode: str = "split"             # split | kfold
    test_fraction: float = 0.3
    k_folds: int = 5
    # [impute]
    impute_method: str = "knn"
    knn_k: int = 5
    mice_iterations: int = 5
    mice_initial_fill: str = "mean"
    mice_noise_mode: str = "deterministic_prediction"
    skew_threshold: float = 1.0
    impute_overrides: dict = field(default_factory=dict)   # column_id -> strategy
    # [featsel]
    roster: str = "default"
    vote_threshold: int = 3
    featsel_n_keep: int | None = None
    # [resample]
    scenario: str = "none"
    over_ratio: float = 0.7
    under_ratio: float = 0.8
    smote_k_neighbors: int = 5
    # [models]
    model_families: tuple = DEFAULT_FAMILIES
    model_overrides: dict = field(default_factory=dict)    # family -> hyperparam dict
    # [run]
    seed: int = 0
    out_dir: str = "out"

    def validate(self) -> None:
        if self.loader not in ("secom", "delimited"):
            raise ConfigError(f"unknown loader {self.loader!r}")
        if not 0 < self.missing_drop_threshold <= 1:
            raise ConfigError("missing_drop_threshold must be in (0, 1]")
        if not 0 < self.correlation_threshold < 1:
            raise ConfigError("correlation_threshold must be in (0, 1)")
        if self.split_mode not in ("split", "kfold"):
            raise ConfigError(f"unknown split mode {self.split_mode!r}")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must be in (0, 1)")
        if self.impute_method not in IMPUTE_METHODS:
            raise ConfigError(f"unknown imputation method {self.impute_method!r}")
        if self.roster not in ROSTERS:
            raise ConfigError(f"unknown selector roster {self.roster!r}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        for r in (self.over_ratio, self.under_ratio):
            if not 0 < r <= 1:
                raise ConfigError("resampling ratios must be in (0, 1]")
        if self.vote_threshold < 1:
            raise ConfigError("vote_threshold must be >= 1")
        for fam in self.model_families:
            if fam not in DEFAULT_FAMILIES:
                raise ConfigError(f"unknown model family {fam!r}")

    def digest(self) -> str:
        # out_dir is where results land, not part of what was computed
        fields = {k: v for k, v in asdict(self).items() if k != "out_dir"}
        payload = repr(sorted(fields.items())).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


_SECTION_KEYS = {
    "data": {"loader", "data_path", "labels_path", "label_column", "delimiter"},
    "preprocess": {"missing_drop_threshold", "correlation_threshold"},
    "split": {"mode", "test_fraction", "k"},
    "impute": {"method", "k", "iterations", "initial_fill", "noise_mode",
               "skew_threshold", "overrides"},
    "featsel": {"roster", "vote_threshold", "n_keep"},
    "resample": {"scenario", "over_ratio", "under_ratio", "k_neighbors"},
    "models": {"families"},
    "run": {"seed", "out_dir"},
}


def load_config(path) -> PipelineConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    cfg = PipelineConfig()
    for section in parser.sections():
        if section.startswith("model."):
            family = section.split(".", 1)[1]
            cfg.model_overrides[family] = {
                k: float(v) if "." in v or "e" in v.lower() else int(v)
                for k, v in parser.items(section)}
            continue
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser.options(section):
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
        items = dict(parser.items(section))
        if section == "data":
            cfg.loader = items.get("loader", cfg.loader)
            cfg.data_path = items.get("data_path", cfg.data_path)
            cfg.labels_path = items.get("labels_path", cfg.labels_path)
            cfg.label_column = items.get("label_column", cfg.label_column)
            cfg.delimiter = items.get("delimiter", cfg.delimiter)
        elif section == "preprocess":
            cfg.missing_drop_threshold = float(items.get("missing_drop_threshold",
                                                         cfg.missing_drop_threshold))
            cfg.correlation_threshold = float(items.get("correlation_threshold",
                                                        cfg.correlation_threshold))
        elif section == "split":
            cfg.split_mode = items.get("mode", cfg.split_mode)
            cfg.test_fraction = float(items.get("test_fraction", cfg.test_fraction))
            cfg.k_folds = int(items.get("k", cfg.k_folds))
        elif section == "impute":
            cfg.impute_method = items.get("method", cfg.impute_method)
            cfg.knn_k = int(items.get("k", cfg.knn_k))
            cfg.mice_iterations = int(items.get("iterations", cfg.mice_iterations))
            cfg.mice_initial_fill = items.get("initial_fill", cfg.mice_initial_fill)
            cfg.mice_noise_mode = items.get("noise_mode", cfg.mice_noise_mode)
            cfg.skew_threshold = float(items.get("skew_threshold", cfg.skew_threshold))
            if "overrides" in items and items["overrides"].strip():
                for pair in items["overrides"].split(","):
                    cid, strat = pair.split(":")
                    cfg.impute_overrides[int(cid)] = strat.strip()
        elif section == "featsel":
            cfg.roster = items.get("roster", cfg.roster)
            cfg.vote_threshold = int(items.get("vote_threshold", cfg.vote_threshold))
            if "n_keep" in items:
                cfg.featsel_n_keep = int(items["n_keep"])
        elif section == "resample":
            cfg.scenario = items.get("scenario", cfg.scenario)
            cfg.over_ratio = float(items.get("over_ratio", cfg.over_ratio))
            cfg.under_ratio = float(items.get("under_ratio", cfg.under_ratio))
            cfg.smote_k_neighbors = int(items.get("k_neighbors", cfg.smote_k_neighbors))
        elif section == "models":
            cfg.model_families = tuple(f.strip() for f in items["families"].split(",") if f.strip())
        elif section == "run":
            cfg.seed = int(items.get("seed", cfg.seed))
            cfg.out_dir = items.get("out_dir", cfg.out_dir)
    cfg.validate()
    return cfg
