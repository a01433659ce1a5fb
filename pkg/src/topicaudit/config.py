"""Pipeline configuration: one JSON document with defaults baked in.

A bare ``{"dataset_path": ..., "out_dir": ...}`` reproduces the reference
setting.  The config digest is a sha256 over every semantic field; the
dataset path and output directory are excluded so the same corpus
processed in two locations yields byte-identical artifacts.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Unusable configuration (unknown key, invalid value, bad JSON)."""


DIGEST_EXCLUDED = ("dataset_path", "out_dir")


@dataclass
class PipelineConfig:
    dataset_path: str = ""
    out_dir: str = ""
    dataset_format: str = "sms_tsv"
    label_column: str = "label"
    text_column: str = "text"
    label_map: dict[str, int] | None = None
    seed: int = 42

    split_ratio: float = 0.5
    min_df: int = 2
    stoplist: str = "default"
    word_quota: int = 7000
    phrase_quota: int = 3000

    classifier: str = "logreg"
    l2_strength: float = 1.0
    svm_c: float = 1.0
    nb_alpha: float = 1.0
    epochs: int = 500
    svm_epochs: int = 2000
    subsample_train: bool = False

    background_size: int = 50
    n_coalitions: int | None = None
    nb_linear_attribution: bool = False

    k_top: int = 200
    tau_p: float = 0.05
    rho: dict[str, float] = field(default_factory=lambda: {
        "word": 0.65, "phrase": 0.3, "structural": 0.05})

    n_topics: int = 10
    nmf_max_iters: int = 500
    nmf_tol: float = 1e-5

    k_related: int = 2
    temperature: float = 2.0
    k_nn: int = 25

    trr_fix: float = 0.95
    base_detector: str = "rel_u"
    repair_representation: str = "original"

    def __post_init__(self):
        if self.classifier not in ("logreg", "svm", "nb"):
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.stoplist not in ("default", "none"):
            raise ConfigError("stoplist must be 'default' or 'none'")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("split_ratio must be in (0, 1)")
        if not 0.0 < self.trr_fix <= 1.0:
            raise ConfigError("trr_fix must be in (0, 1]")
        if self.n_topics < 1:
            raise ConfigError("n_topics must be at least 1")
        if self.k_related >= self.n_topics:
            raise ConfigError("k_related must be below n_topics")

    def digest(self) -> str:
        payload = dataclasses.asdict(self)
        for key in DIGEST_EXCLUDED:
            payload.pop(key)
        canonical = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: str | Path, out_dir: str | None = None,
                seed: int | None = None) -> PipelineConfig:
    """Read a JSON config, applying optional command-line overrides."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if out_dir is not None:
        raw["out_dir"] = out_dir
    if seed is not None:
        raw["seed"] = seed
    try:
        return PipelineConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc))
