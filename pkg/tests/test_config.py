import pytest

from rareclass.config import ConfigError, PipelineConfig, load_config


def _write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return str(p)


class TestDefaults:
    def test_defaults_valid(self):
        PipelineConfig().validate()

    def test_digest_stable(self):
        assert PipelineConfig().digest() == PipelineConfig().digest()

    def test_digest_sensitive_to_any_field(self):
        a = PipelineConfig()
        b = PipelineConfig(seed=1)
        c = PipelineConfig(over_ratio=0.6)
        assert len({a.digest(), b.digest(), c.digest()}) == 3


class TestValidation:
    @pytest.mark.parametrize("kw", [
        {"loader": "parquet"},
        {"missing_drop_threshold": 0.0},
        {"correlation_threshold": 1.0},
        {"split_mode": "loocv"},
        {"test_fraction": 1.0},
        {"impute_method": "hot_deck"},
        {"roster": "everything"},
        {"scenario": "adasyn"},
        {"over_ratio": 1.5},
        {"under_ratio": 0.0},
        {"vote_threshold": 0},
        {"model_families": ("logistic", "perceptron")},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            PipelineConfig(**kw).validate()


class TestLoadFile:
    def test_full_file(self, tmp_path):
        cfg = load_config(_write(tmp_path, """
[data]
loader = secom
data_path = d.txt
labels_path = l.txt

[preprocess]
missing_drop_threshold = 0.4
correlation_threshold = 0.8

[split]
mode = kfold
k = 4

[impute]
method = mice
iterations = 7
overrides = 3:median, 9:forward

[featsel]
roster = fast
vote_threshold = 2
n_keep = 10

[resample]
scenario = combined
over_ratio = 0.4
under_ratio = 0.8

[models]
families = logistic, random_forest

[model.logistic]
epochs = 50
learning_rate = 0.2

[run]
seed = 11
out_dir = results
"""))
        assert cfg.missing_drop_threshold == 0.4
        assert cfg.split_mode == "kfold" and cfg.k_folds == 4
        assert cfg.impute_method == "mice" and cfg.mice_iterations == 7
        assert cfg.impute_overrides == {3: "median", 9: "forward"}
        assert cfg.roster == "fast" and cfg.featsel_n_keep == 10
        assert cfg.scenario == "combined"
        assert cfg.model_families == ("logistic", "random_forest")
        assert cfg.model_overrides["logistic"] == {"epochs": 50, "learning_rate": 0.2}
        assert cfg.seed == 11 and cfg.out_dir == "results"

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match="section"):
            load_config(_write(tmp_path, "[tuning]\ntrials = 5\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(_write(tmp_path, "[split]\nholdout = 0.2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(str(tmp_path / "absent.ini"))

    def test_invalid_value_caught_at_load(self, tmp_path):
        with pytest.raises(ConfigError, match="scenario"):
            load_config(_write(tmp_path, "[resample]\nscenario = adasyn\n"))
