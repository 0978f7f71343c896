from pathlib import Path

import pandas as pd
import pytest

from gselect.exceptions import ConfigError
from gselect.lab.reports import (
    compare_with_reference,
    config_hash,
    load_reference,
    ordering_violations,
    read_body,
    read_manifest,
    write_csv,
)
from gselect.schemas import ExperimentConfig, RunManifest
from gselect.stats.priors import TABLE1_PRIORS

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
EXPERIMENT_CONFIGS = sorted(p for p in CONFIGS.glob("*.yaml") if p.name != "table1_reference.yaml")


@pytest.mark.parametrize("path", EXPERIMENT_CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    cfg = ExperimentConfig.from_yaml(path)
    assert cfg.cells()


def test_table1_config():
    cfg = ExperimentConfig.from_yaml(CONFIGS / "table1.yaml")
    assert [spec.label for spec in cfg.priors] == TABLE1_PRIORS
    assert len(cfg.cells()) == 3 * 2 * 3
    assert cfg.cells()[0] == ("normal", 50, 29)
    assert cfg.min_abs_coef == 0.6


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.cells() == [("normal", 50, 29), ("normal", 100, 29), ("normal", 150, 29)]
    assert cfg.chain_length == 10000 and cfg.burn_in == 5000


def test_scheme_p_fixed():
    cfg = ExperimentConfig.build({"scheme": "scheme2", "scheme_p": 30, "n_list": [50, 100]})
    assert [p for _, _, p in cfg.cells()] == [30, 30]


def test_nested_growth():
    cfg = ExperimentConfig.build({"scheme": "nested", "n_list": [50, 100], "b_exponent": 0.5})
    assert [p for _, _, p in cfg.cells()] == [8, 10]


def test_error_dist_listified():
    cfg = ExperimentConfig.build({"error_dist": "t3"})
    assert cfg.error_dist == ["t3"]


def test_overrides_win(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("replicates: 5\nbase_seed: 1\n")
    cfg = ExperimentConfig.from_yaml(path, replicates=7, base_seed=None)
    assert cfg.replicates == 7
    assert cfg.base_seed == 1


@pytest.mark.parametrize(
    "data,key",
    [
        ({"replicates": 0}, "replicates"),
        ({"bogus": 1}, "bogus"),
        ({"n_list": [2]}, "n_list"),
        ({"tol": 1e-3}, "tol"),
        ({"model_prior": "bernoulli:1.5"}, "model_prior"),
        ({"s_exponent": 1.0}, "s_exponent"),
        ({"min_abs_coef": -0.1}, "min_abs_coef"),
    ],
)
def test_invalid_keys_reported(data, key):
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.build(data)
    assert any(k.startswith(key) for k in exc.value.keys)


def test_burn_in_below_chain_length():
    with pytest.raises(ConfigError):
        ExperimentConfig.build({"chain_length": 100, "burn_in": 100})


def test_duplicate_prior_names():
    with pytest.raises(ConfigError):
        ExperimentConfig.build({"priors": ["robust", "robust"]})


def test_unknown_prior():
    with pytest.raises(ConfigError):
        ExperimentConfig.build({"priors": ["ridge"]})


def test_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("n_list: [1, 2\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_yaml(path)
    path.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_yaml(path)


def test_config_hash_is_canonical():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    a = ExperimentConfig().resolved_dump()
    b = ExperimentConfig(base_seed=1).resolved_dump()
    assert config_hash(a) != config_hash(b)


def test_csv_manifest_header(tmp_path):
    manifest = RunManifest(command="x", config_hash="h", base_seed=1, library_version="1.0.0",
                           timestamp="2024-01-01T00:00:00+00:00")
    df = pd.DataFrame({"a": [0.1, 1 / 3], "b": [1, 2]})
    path = write_csv(df, tmp_path / "f.csv", manifest)
    assert read_manifest(path)["timestamp"] == "2024-01-01T00:00:00+00:00"
    body = read_body(path)
    assert body.splitlines() == ["a,b", "0.1,1", "0.3333333333333333,2"]


class TestReference:
    def test_load(self):
        ref = load_reference(CONFIGS / "table1_reference.yaml")
        row = ref[(ref.error_dist == "normal") & (ref.p_plus_1 == 30) & (ref.n == 150)
                  & (ref.prior == "proposed-II")]
        assert row["reference"].tolist() == [0.9055]
        assert set(ref.prior) == set(TABLE1_PRIORS)

    def test_compare_and_ordering(self):
        ref = load_reference(CONFIGS / "table1_reference.yaml")
        report = pd.DataFrame(
            {
                "error_dist": ["normal"] * 4,
                "p_plus_1": [30] * 4,
                "n": [150] * 4,
                "prior": ["zellner-siow", "robust", "proposed-I", "proposed-II"],
                "mean": [0.55, 0.48, 0.80, 0.85],
                "mse": [0.3] * 4,
            }
        )
        merged = compare_with_reference(report, ref, tol=0.10)
        assert merged["within_tol"].tolist() == [True, True, False, True]
        violations = ordering_violations(report, slack=0.05)
        assert violations[["higher", "lower"]].values.tolist() == [["robust", "zellner-siow"]]
