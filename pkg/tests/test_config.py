import json

import pytest

from symode.config import load_run_config, run_config_from_dict
from symode.errors import ConfigError


def minimal_synthetic():
    return {"mode": "synthetic", "model": {"kind": "sir"}}


def minimal_real():
    return {"mode": "real", "input_csv": "series.csv"}


class TestValidation:
    def test_minimal_synthetic_parses_with_defaults(self):
        cfg = run_config_from_dict(minimal_synthetic())
        assert cfg.mode == "synthetic"
        assert cfg.data.n_trajectories == 200
        assert cfg.data.steps == 250
        assert cfg.data.dt == 0.2
        assert cfg.search.epochs == 100
        assert cfg.search.batch_size == 10
        assert cfg.search.epsilon == 0.1
        assert cfg.search.controller_lr == 0.002

    def test_missing_mode(self):
        with pytest.raises(ConfigError, match="mode"):
            run_config_from_dict({})

    def test_unknown_top_level_key(self):
        doc = minimal_synthetic()
        doc["typo_key"] = 1
        with pytest.raises(ConfigError, match="typo_key"):
            run_config_from_dict(doc)

    def test_unknown_nested_key_reports_path(self):
        doc = minimal_synthetic()
        doc["search"] = {"optim": {"t9_iters": 3}}
        with pytest.raises(ConfigError, match="search.optim"):
            run_config_from_dict(doc)

    def test_mode_foreign_block_rejected(self):
        doc = minimal_real()
        doc["data"] = {"steps": 10}
        with pytest.raises(ConfigError):
            run_config_from_dict(doc)

    def test_real_requires_input_csv(self):
        with pytest.raises(ConfigError, match="input_csv"):
            run_config_from_dict({"mode": "real"})

    def test_bad_value_reports_path(self):
        doc = minimal_synthetic()
        doc["data"] = {"train_fraction": 1.5}
        with pytest.raises(ConfigError, match="train_fraction"):
            run_config_from_dict(doc)

    def test_bad_type_reports_path(self):
        doc = minimal_synthetic()
        doc["search"] = {"epochs": "many"}
        with pytest.raises(ConfigError, match="epochs"):
            run_config_from_dict(doc)

    def test_unknown_model_kind(self):
        with pytest.raises(ConfigError, match="model.kind"):
            run_config_from_dict({"mode": "synthetic",
                                  "model": {"kind": "sirs"}})

    def test_templates_string_or_list(self):
        doc = minimal_synthetic()
        doc["search"] = {"templates": "type1"}
        assert run_config_from_dict(doc).search.templates == "type1"
        doc["search"] = {"templates": ["type1", "type2", "type2"]}
        assert run_config_from_dict(doc).search.templates == [
            "type1", "type2", "type2"]
        doc["search"] = {"templates": "type9"}
        with pytest.raises(ConfigError, match="templates"):
            run_config_from_dict(doc)

    def test_by_constant_requires_constant(self):
        doc = minimal_real()
        doc["normalization"] = {"mode": "by_constant"}
        with pytest.raises(ConfigError, match="constant"):
            run_config_from_dict(doc)

    def test_epi_param_overrides(self):
        doc = minimal_synthetic()
        doc["model"]["params"] = {"beta": 0.5, "gamma": 0.1}
        cfg = run_config_from_dict(doc)
        assert cfg.model_params == {"beta": 0.5, "gamma": 0.1}
        doc["model"]["params"] = {"betta": 0.5}
        with pytest.raises(ConfigError, match="model.params"):
            run_config_from_dict(doc)

    def test_echo_round_trip(self):
        doc = {
            "mode": "synthetic",
            "seed": 7,
            "output_dir": "out",
            "model": {"kind": "seir", "params": {"beta": 0.8}},
            "data": {"n_trajectories": 6, "steps": 12, "dt": 0.1,
                     "train_fraction": 0.5, "normalize_init": False},
            "search": {"epochs": 2, "batch_size": 3, "pool_capacity": 4,
                       "nu": 0.25, "epsilon": 0.2, "controller_lr": 0.01,
                       "templates": "type1",
                       "optim": {"t1_iters": 5, "t2_iters": 5, "t3_iters": 5,
                                 "lr_first": 0.1, "lr_finetune": 0.01,
                                 "grad_tol": 1e-6, "armijo_c": 1e-4,
                                 "backtrack_factor": 0.5}},
        }
        cfg = run_config_from_dict(doc)
        echoed = cfg.to_dict()
        assert run_config_from_dict(echoed).to_dict() == echoed

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(minimal_synthetic()), encoding="utf-8")
        assert load_run_config(path).mode == "synthetic"
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(bad)
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "missing.json")
