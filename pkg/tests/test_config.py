"""Tests for pipeline configuration loading, validation, and digests."""

from __future__ import annotations

import dataclasses
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from topicaudit.config import ConfigError, PipelineConfig, load_config


class TestValidation:
    def test_defaults_are_valid(self):
        PipelineConfig()

    def test_unknown_classifier(self):
        with pytest.raises(ConfigError, match="classifier"):
            PipelineConfig(classifier="forest")

    def test_split_ratio_bounds(self):
        with pytest.raises(ConfigError, match="split_ratio"):
            PipelineConfig(split_ratio=1.0)
        with pytest.raises(ConfigError, match="split_ratio"):
            PipelineConfig(split_ratio=0.0)

    def test_trr_fix_range(self):
        PipelineConfig(trr_fix=1.0)
        with pytest.raises(ConfigError, match="trr_fix"):
            PipelineConfig(trr_fix=0.0)

    def test_k_related_must_fit_under_n_topics(self):
        with pytest.raises(ConfigError, match="k_related"):
            PipelineConfig(n_topics=3, k_related=3)

    def test_stoplist_choices(self):
        PipelineConfig(stoplist="none")
        with pytest.raises(ConfigError, match="stoplist"):
            PipelineConfig(stoplist="english")


class TestDigest:
    def test_stable_across_instances(self):
        assert PipelineConfig().digest() == PipelineConfig().digest()

    def test_ignores_dataset_path_and_out_dir(self):
        a = PipelineConfig(dataset_path="/a.tsv", out_dir="/x")
        b = PipelineConfig(dataset_path="/b.tsv", out_dir="/y")
        assert a.digest() == b.digest()

    @given(st.sampled_from([f.name for f in dataclasses.fields(PipelineConfig)
                            if f.name not in ("dataset_path", "out_dir")]))
    def test_any_other_field_changes_it(self, field):
        base = PipelineConfig()
        bumped = {
            "seed": 43, "split_ratio": 0.6, "min_df": 3, "stoplist": "none",
            "word_quota": 100, "phrase_quota": 50, "classifier": "svm",
            "l2_strength": 2.0, "svm_c": 2.0, "nb_alpha": 2.0, "epochs": 10,
            "svm_epochs": 10, "subsample_train": True, "background_size": 10,
            "n_coalitions": 64, "nb_linear_attribution": True, "k_top": 10,
            "tau_p": 0.1, "rho": {"word": 1.0, "phrase": 0.0, "structural": 0.0},
            "n_topics": 5, "nmf_max_iters": 10, "nmf_tol": 1e-3,
            "k_related": 1, "temperature": 3.0, "k_nn": 5, "trr_fix": 0.9,
            "base_detector": "entropy", "repair_representation": "odin",
            "dataset_format": "generic_csv", "label_column": "y",
            "text_column": "msg", "label_map": {"ok": 0, "bad": 1},
        }
        other = dataclasses.replace(base, **{field: bumped[field]})
        assert other.digest() != base.digest()


class TestLoadConfig:
    def test_round_trip_with_overrides(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"dataset_path": "d.tsv", "seed": 3}),
                        encoding="utf-8")
        cfg = load_config(path, out_dir=str(tmp_path / "run"), seed=9)
        assert cfg.dataset_path == "d.tsv"
        assert cfg.seed == 9
        assert cfg.out_dir == str(tmp_path / "run")

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"datset_path": "oops.tsv"}', encoding="utf-8")
        with pytest.raises(ConfigError, match="datset_path"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="config"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_value_surfaces_as_config_error(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"classifier": "forest"}', encoding="utf-8")
        with pytest.raises(ConfigError, match="classifier"):
            load_config(path)
