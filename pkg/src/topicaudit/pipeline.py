"""Stage orchestration: each command is a pure function of the config
and upstream artifacts, so reruns are byte-identical.

Artifact chain (all under the output directory, all stamped with the
config digest; a digest mismatch refuses to combine):

    prepare  -> dataset.jsonl, space.json, vectors.csv
    train    -> model.json
    explain  -> shap_plus.csv, shap_minus.csv, shap_meta.json
    profile  -> topics_plus.json, topics_minus.json, profiles.json
    score    -> representations.csv, scores.csv
    evaluate -> detector_report.json
    repair   -> repair_report.json (and refreshed scores.csv outcomes)
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import attribution, classifiers, corpus, features, profiling, scoring
from . import uncertainty
from .config import PipelineConfig

BASE_METHODS = uncertainty.OUTPUT_UQ_METHODS
REPRESENTATIONS = uncertainty.REPRESENTATIONS
XMAP_COLUMNS = tuple(f"xmap_{rep}" for rep in REPRESENTATIONS)
SUBSETS = (("positive", 1), ("negative", 0))


class StageError(RuntimeError):
    """A pipeline stage could not run; the message names the stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class Paths:
    out: Path

    @property
    def dataset(self): return self.out / "dataset.jsonl"
    @property
    def space(self): return self.out / "space.json"
    @property
    def vectors(self): return self.out / "vectors.csv"
    @property
    def model(self): return self.out / "model.json"
    @property
    def shap_meta(self): return self.out / "shap_meta.json"
    @property
    def profiles(self): return self.out / "profiles.json"
    @property
    def representations(self): return self.out / "representations.csv"
    @property
    def scores(self): return self.out / "scores.csv"
    @property
    def detector_report(self): return self.out / "detector_report.json"
    @property
    def repair_report(self): return self.out / "repair_report.json"
    @property
    def report(self): return self.out / "report.md"

    def supports(self, polarity: str) -> Path:
        return self.out / f"shap_{polarity}.csv"

    def topics(self, polarity: str) -> Path:
        return self.out / f"topics_{polarity}.json"


def paths_for(cfg: PipelineConfig) -> Paths:
    if not cfg.out_dir:
        raise ValueError("config has no output directory")
    return Paths(out=Path(cfg.out_dir))


def _stage(name: str):
    """Wrap a stage so any module error surfaces with the stage name."""
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(cfg: PipelineConfig):
            try:
                return fn(cfg)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, str(exc)) from exc
        return wrapper
    return deco


def _require(path: Path, stage: str, producer: str) -> None:
    if not path.exists():
        raise StageError(stage, f"missing {path.name}; run {producer} first")


def _match(found: str, cfg: PipelineConfig, stage: str, name: str) -> None:
    if found != cfg.digest():
        raise StageError(stage, f"{name} carries config digest {found[:12]}, "
                                f"expected {cfg.digest()[:12]}; rerun "
                                "upstream stages with this config")


def _encode_threshold(value: float) -> float | str:
    # JSON has no Infinity; the sentinel survives strict parsers.
    return "inf" if math.isinf(value) else float(value)


# ---------------------------------------------------------------- loading

def _load_dataset(cfg, stage) -> list[corpus.Message]:
    p = paths_for(cfg)
    _require(p.dataset, stage, "prepare")
    messages, digest = corpus.read_dataset(p.dataset)
    _match(digest, cfg, stage, "dataset.jsonl")
    return messages

def _load_space(cfg, stage) -> features.FeatureSpace:
    p = paths_for(cfg)
    _require(p.space, stage, "prepare")
    space = features.read_space(p.space)
    _match(space.config_digest, cfg, stage, "space.json")
    return space

def _load_matrix(cfg, stage, space) -> tuple[np.ndarray, list[int]]:
    p = paths_for(cfg)
    _require(p.vectors, stage, "prepare")
    vectors, digest = features.read_vectors(p.vectors)
    _match(digest, cfg, stage, "vectors.csv")
    return features.stack(vectors, space), [v.id for v in vectors]

def _load_model(cfg, stage):
    p = paths_for(cfg)
    _require(p.model, stage, "train")
    model = classifiers.read_model(p.model)
    _match(model.config_digest, cfg, stage, "model.json")
    return model

def _load_supports(cfg, stage, polarity) -> dict[int, dict[int, float]]:
    p = paths_for(cfg)
    _require(p.supports(polarity), stage, "explain")
    table, digest = attribution.read_supports(p.supports(polarity))
    _match(digest, cfg, stage, f"shap_{polarity}.csv")
    return table

def _load_topics(cfg, stage, polarity) -> profiling.TopicModel:
    p = paths_for(cfg)
    _require(p.topics(polarity), stage, "profile")
    model = profiling.read_topics(p.topics(polarity))
    _match(model.config_digest, cfg, stage, f"topics_{polarity}.json")
    return model

def _load_profiles(cfg, stage) -> dict:
    p = paths_for(cfg)
    _require(p.profiles, stage, "profile")
    groups, digest = profiling.read_profiles(p.profiles)
    _match(digest, cfg, stage, "profiles.json")
    return groups


# ---------------------------------------------------------------- prepare

@_stage("prepare")
def cmd_prepare(cfg: PipelineConfig) -> None:
    if not cfg.dataset_path:
        raise StageError("prepare", "config has no dataset_path")
    p = paths_for(cfg)
    p.out.mkdir(parents=True, exist_ok=True)
    digest = cfg.digest()

    messages = corpus.load_dataset(
        cfg.dataset_path, format=cfg.dataset_format,
        label_column=cfg.label_column, text_column=cfg.text_column,
        label_map=cfg.label_map)
    train, test = corpus.split(messages, cfg.split_ratio, cfg.seed)
    everyone = sorted(train + test, key=lambda m: m.id)

    stop = (corpus.default_stoplist() if cfg.stoplist == "default"
            else frozenset())
    train_df = corpus.document_frequencies(
        [corpus.TokenizedMessage(m.id, corpus.tokenize(m.text))
         for m in train])
    tokenized = {m.id: corpus.preprocess(m, stop, train_df, cfg.min_df)
                 for m in everyone}

    space = features.fit_space(
        [tokenized[m.id] for m in train], train,
        word_quota=cfg.word_quota, phrase_quota=cfg.phrase_quota,
        config_digest=digest)
    vectors = [features.vectorize(tokenized[m.id], m, space)
               for m in everyone]

    corpus.write_dataset(p.dataset, everyone, digest)
    features.write_space(p.space, space)
    features.write_vectors(p.vectors, vectors, digest)


# ------------------------------------------------------------------ train

def _split_ids(messages) -> tuple[list[corpus.Message], list[corpus.Message]]:
    train = [m for m in messages if m.split == "train"]
    test = [m for m in messages if m.split == "test"]
    return train, test


@_stage("train")
def cmd_train(cfg: PipelineConfig) -> None:
    p = paths_for(cfg)
    messages = _load_dataset(cfg, "train")
    space = _load_space(cfg, "train")
    X, ids = _load_matrix(cfg, "train", space)
    row_of = {msg_id: i for i, msg_id in enumerate(ids)}

    train, _ = _split_ids(messages)
    if cfg.subsample_train:
        train = corpus.subsample_majority(train, cfg.seed)
    X_train = X[[row_of[m.id] for m in train]]
    y_train = np.array([m.label for m in train])

    digest = cfg.digest()
    if cfg.classifier == "logreg":
        model = classifiers.train_logreg(
            X_train, y_train, l2_strength=cfg.l2_strength,
            epochs=cfg.epochs, seed=cfg.seed, config_digest=digest)
    elif cfg.classifier == "svm":
        model = classifiers.train_svm(
            X_train, y_train, C=cfg.svm_c, epochs=cfg.svm_epochs,
            seed=cfg.seed, config_digest=digest)
    else:
        model = classifiers.train_nb(
            X_train, y_train, alpha=cfg.nb_alpha,
            structural_start=space.structural_start, seed=cfg.seed,
            config_digest=digest)
    classifiers.write_model(p.model, model)


# ---------------------------------------------------------------- explain

def _linear_supports(Phi: np.ndarray, ids: list[int], polarity: str):
    """Yield one message's polarity supports at a time (Phi rows are
    dense, so materializing every dict at once would dwarf the matrix)."""
    for i, msg_id in enumerate(ids):
        row = Phi[i]
        if polarity == "plus":
            cols = np.nonzero(row > 0.0)[0]
            table = {int(c): float(row[c]) for c in cols}
        else:
            cols = np.nonzero(row < 0.0)[0]
            table = {int(c): float(-row[c]) for c in cols}
        yield attribution.PolaritySupports(id=msg_id, s_plus=table,
                                           s_minus=table)


@_stage("explain")
def cmd_explain(cfg: PipelineConfig) -> None:
    p = paths_for(cfg)
    messages = _load_dataset(cfg, "explain")
    space = _load_space(cfg, "explain")
    X, ids = _load_matrix(cfg, "explain", space)
    model = _load_model(cfg, "explain")
    row_of = {msg_id: i for i, msg_id in enumerate(ids)}
    digest = cfg.digest()

    train, _ = _split_ids(messages)
    train_rows = [row_of[m.id] for m in train]
    X_train = X[train_rows]
    y_train = np.array([m.label for m in train])
    train_ids = [m.id for m in train]

    linear = cfg.classifier == "logreg" or (
        cfg.classifier == "nb" and cfg.nb_linear_attribution)

    if linear:
        # Exact linear attributions against the training mean, dense by
        # construction; computed as one broadcast and streamed out.
        background = attribution.make_background(
            X_train, y_train, train_ids, size=len(train_ids), seed=cfg.seed)
        mu = background.mean
        if cfg.classifier == "logreg":
            w, b = model.weights, model.bias
        else:
            w, b = classifiers.nb_log_odds(model)
            X = model.transform(X)
            mu = model.transform(mu[None, :])[0]
        Phi = (X - mu[None, :]) * w[None, :]
        base = float(w @ mu + b)
        base_values = {msg_id: base for msg_id in ids}
        for polarity in ("plus", "minus"):
            attribution.write_supports(
                p.supports(polarity), _linear_supports(Phi, ids, polarity),
                polarity, digest)
        attribution.write_shap_meta(p.shap_meta, base_values, "margin",
                                    cfg.seed, background, digest)
        return

    background = attribution.make_background(
        X_train, y_train, train_ids, size=cfg.background_size, seed=cfg.seed)

    def predict_fn(rows: np.ndarray) -> np.ndarray:
        return classifiers.probability_function(model, rows)

    supports, base_values = [], {}
    for msg_id in ids:
        shap = attribution.kernel_shap(
            predict_fn, X[row_of[msg_id]], background,
            n_coalitions=cfg.n_coalitions, seed=cfg.seed, msg_id=msg_id)
        supports.append(attribution.split_supports(shap))
        base_values[msg_id] = shap.base_value
    for polarity in ("plus", "minus"):
        attribution.write_supports(p.supports(polarity), supports, polarity,
                                   digest)
    attribution.write_shap_meta(p.shap_meta, base_values, "probability",
                                cfg.seed, background, digest)


# ---------------------------------------------------------------- profile

def _predictions(model, X, ids) -> dict[int, classifiers.Prediction]:
    return {pred.id: pred for pred in classifiers.predict_all(model, X, ids)}


def _reliable_groups(messages, preds) -> dict[str, list[int]]:
    """Train-split correctly classified ids per group, sorted."""
    train, _ = _split_ids(messages)
    groups = {"TP": [], "TN": []}
    for m in train:
        pred = preds[m.id]
        if pred.label == m.label:
            groups["TP" if m.label == 1 else "TN"].append(m.id)
    return {g: sorted(ids) for g, ids in groups.items()}


POLARITY_OF_GROUP = {"TP": "plus", "TN": "minus"}


@_stage("profile")
def cmd_profile(cfg: PipelineConfig) -> None:
    p = paths_for(cfg)
    messages = _load_dataset(cfg, "profile")
    space = _load_space(cfg, "profile")
    X, ids = _load_matrix(cfg, "profile", space)
    model = _load_model(cfg, "profile")
    preds = _predictions(model, X, ids)
    groups = _reliable_groups(messages, preds)
    reliable_ids = sorted(groups["TP"] + groups["TN"])
    if not reliable_ids:
        raise StageError("profile", "no correctly classified training "
                                    "messages to profile")
    digest = cfg.digest()
    families = space.families()

    profiles: dict[str, dict[str, list[float] | None]] = {}
    for polarity in ("plus", "minus"):
        supports = _load_supports(cfg, "profile", polarity)
        rows = [supports.get(i, {}) for i in reliable_ids]
        stats = profiling.feature_stats(rows, space.n_columns)
        r = profiling.rank_score(stats, cfg.tau_p)
        columns = profiling.select_top(r, families, cfg.rho, cfg.k_top)
        matrix = profiling.build_matrix(rows, columns)
        W, H, trace = profiling.nmf(matrix, cfg.n_topics,
                                    max_iters=cfg.nmf_max_iters,
                                    tol=cfg.nmf_tol, seed=cfg.seed)
        assignment = profiling.assign_topics(H)
        profiling.write_topics(p.topics(polarity), profiling.TopicModel(
            polarity=polarity, columns=columns, W=W, H=H,
            assignment=assignment, objective=trace[-1], seed=cfg.seed,
            config_digest=digest))

        group = "TP" if polarity == "plus" else "TN"
        row_index = {msg_id: k for k, msg_id in enumerate(reliable_ids)}
        tcs = [profiling.topic_contributions(matrix[row_index[i]],
                                             assignment, cfg.n_topics)
               for i in groups[group]]
        profiles[group] = _group_profile_representations(tcs, H, cfg)

    profiling.write_profiles(p.profiles, profiles, POLARITY_OF_GROUP, digest)


def _group_profile_representations(tcs, H, cfg) -> dict[str, list | None]:
    """All eight representation profiles of one reliable group.

    The profile is each representation's transform applied to the group's
    mean topic contribution; an empty or massless group has no reference
    distribution, so every representation goes NA."""
    empty = {name: None for name in REPRESENTATIONS}
    if not tcs:
        return empty
    mean_tc = np.mean(np.stack(tcs), axis=0)
    if mean_tc.sum() <= 0.0:
        return empty
    s = uncertainty.evidence_scale(tcs)
    references = [uncertainty.original(tc).vector for tc in tcs]
    reps = uncertainty.all_representations(
        mean_tc, s, H, cfg.k_related, cfg.temperature, references, cfg.k_nn)
    return {name: (None if rep.vector is None else [float(v) for v in rep.vector])
            for name, rep in reps.items()}


# ------------------------------------------------------------------ score

SCORE_HEADER = ("id,split,gold,predicted,p_pos,correct,"
                + ",".join(BASE_METHODS) + ","
                + ",".join(XMAP_COLUMNS) + ",outcome")


def _write_scores(path: Path, rows: list[dict], digest: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_digest={digest}\n")
        fh.write(SCORE_HEADER + "\n")
        for row in rows:
            cells = [str(row["id"]), row["split"], str(row["gold"]),
                     str(row["predicted"]), repr(row["p_pos"]),
                     str(row["correct"])]
            for method in BASE_METHODS:
                cells.append(repr(row[method]))
            for col in XMAP_COLUMNS:
                v = row[col]
                cells.append("NA" if v is None else repr(v))
            cells.append(row["outcome"])
            fh.write(",".join(cells) + "\n")


def _read_scores(cfg, stage) -> list[dict]:
    p = paths_for(cfg)
    _require(p.scores, stage, "score")
    rows, digest = [], ""
    with open(p.scores, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# config_digest="):
                digest = line.split("=", 1)[1]
                continue
            if not line or line.startswith("id,"):
                continue
            cells = line.split(",")
            row = {"id": int(cells[0]), "split": cells[1],
                   "gold": int(cells[2]), "predicted": int(cells[3]),
                   "p_pos": float(cells[4]), "correct": int(cells[5])}
            offset = 6
            for j, method in enumerate(BASE_METHODS):
                row[method] = float(cells[offset + j])
            offset += len(BASE_METHODS)
            for j, col in enumerate(XMAP_COLUMNS):
                cell = cells[offset + j]
                row[col] = None if cell == "NA" else float(cell)
            row["outcome"] = cells[offset + len(XMAP_COLUMNS)]
            rows.append(row)
    _match(digest, cfg, stage, "scores.csv")
    return rows


@_stage("score")
def cmd_score(cfg: PipelineConfig) -> None:
    p = paths_for(cfg)
    messages = _load_dataset(cfg, "score")
    space = _load_space(cfg, "score")
    X, ids = _load_matrix(cfg, "score", space)
    model = _load_model(cfg, "score")
    preds = _predictions(model, X, ids)
    profiles = _load_profiles(cfg, "score")
    digest = cfg.digest()

    polarity_ctx = {}
    for polarity in ("plus", "minus"):
        topics = _load_topics(cfg, "score", polarity)
        supports = _load_supports(cfg, "score", polarity)
        polarity_ctx[polarity] = (topics, supports)

    # Topic contributions for every message, on the polarity its own
    # prediction selects (positive -> spamward supports, negative ->
    # hamward); reliable-group context is derived from the same values.
    tc_of: dict[int, np.ndarray] = {}
    for msg_id in ids:
        polarity = "plus" if preds[msg_id].label == 1 else "minus"
        topics, supports = polarity_ctx[polarity]
        row = np.array([supports.get(msg_id, {}).get(int(c), 0.0)
                        for c in topics.columns])
        tc_of[msg_id] = profiling.topic_contributions(
            row, topics.assignment, cfg.n_topics)

    groups = _reliable_groups(messages, preds)
    context = {}
    for group, polarity in POLARITY_OF_GROUP.items():
        member_tcs = [tc_of[i] for i in groups[group]]
        s = uncertainty.evidence_scale(member_tcs) if member_tcs else 1.0
        refs = [uncertainty.original(tc).vector for tc in member_tcs]
        context[polarity] = (s, refs)

    table: dict[int, dict[str, uncertainty.Representation]] = {}
    rows = []
    for m in sorted(messages, key=lambda msg: msg.id):
        pred = preds[m.id]
        polarity = "plus" if pred.label == 1 else "minus"
        topics, _ = polarity_ctx[polarity]
        s, refs = context[polarity]
        reps = uncertainty.all_representations(
            tc_of[m.id], s, topics.H, cfg.k_related, cfg.temperature,
            refs, cfg.k_nn)
        table[m.id] = reps
        xmap = scoring.misclassification_score(
            {name: rep.vector for name, rep in reps.items()},
            profiles, pred.label)
        row = {"id": m.id, "split": m.split, "gold": m.label,
               "predicted": pred.label, "p_pos": float(pred.p_pos),
               "correct": int(pred.label == m.label), "outcome": "accepted"}
        for method in BASE_METHODS:
            row[method] = uncertainty.output_uq_score(
                pred.p_pos, method, cfg.temperature)
        for rep_name, col in zip(REPRESENTATIONS, XMAP_COLUMNS):
            row[col] = xmap[rep_name]
        rows.append(row)

    uncertainty.write_representations(p.representations, table, digest)
    _write_scores(p.scores, rows, digest)


# --------------------------------------------------------------- evaluate

def _detector_metrics(scores: list[float | None], flags: list[bool],
                      trr_fix: float) -> dict:
    kept = [(s, f) for s, f in zip(scores, flags) if s is not None]
    n_na = len(scores) - len(kept)
    if kept:
        arr = np.array([s for s, _ in kept])
        fl = np.array([f for _, f in kept], dtype=bool)
        area = scoring.auroc(arr, fl)
        frr = scoring.frr_at_trr(arr, fl, trr_fix)
        cutoff = scoring.trr_cutoff(arr, fl, trr_fix)
        n_true = int(np.sum((arr >= cutoff) & fl))
        n_false = int(np.sum((arr >= cutoff) & ~fl))
    else:
        area, frr, cutoff, n_true, n_false = None, None, math.inf, 0, 0
    return {
        "n_scored": len(kept),
        "n_na": n_na,
        "n_misclassified": int(sum(f for _, f in kept)),
        "auroc": area,
        "frr_at_trr": frr,
        "threshold": _encode_threshold(cutoff),
        "n_true_rejections": n_true,
        "n_false_rejections": n_false,
    }


@_stage("evaluate")
def cmd_evaluate(cfg: PipelineConfig) -> None:
    p = paths_for(cfg)
    rows = _read_scores(cfg, "evaluate")
    test = [r for r in rows if r["split"] == "test"]
    report = {"config_digest": cfg.digest(), "trr_fix": cfg.trr_fix,
              "subsets": {}}
    for subset, label in SUBSETS:
        part = [r for r in test if r["predicted"] == label]
        flags = [not r["correct"] for r in part]
        detectors = {}
        for method in BASE_METHODS:
            detectors[method] = dict(kind="output_uq", **_detector_metrics(
                [r[method] for r in part], flags, cfg.trr_fix))
        for rep, col in zip(REPRESENTATIONS, XMAP_COLUMNS):
            detectors[col] = dict(kind="xmap", **_detector_metrics(
                [r[col] for r in part], flags, cfg.trr_fix))
        report["subsets"][subset] = {
            "n": len(part),
            "n_misclassified": int(sum(flags)),
            "detectors": detectors,
        }
    with open(p.detector_report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------- repair

@_stage("repair")
def cmd_repair(cfg: PipelineConfig) -> None:
    p = paths_for(cfg)
    if cfg.base_detector not in BASE_METHODS:
        raise StageError("repair", f"unknown base detector "
                                   f"{cfg.base_detector!r}")
    if cfg.repair_representation not in REPRESENTATIONS:
        raise StageError("repair", f"unknown repair representation "
                                   f"{cfg.repair_representation!r}")
    rows = _read_scores(cfg, "repair")
    test = [r for r in rows if r["split"] == "test"]
    train = [r for r in rows if r["split"] == "train"]

    rejections, subset_info = [], {}
    for subset, label in SUBSETS:
        part = [r for r in test if r["predicted"] == label]
        scores_arr = np.array([r[cfg.base_detector] for r in part])
        flags = np.array([not r["correct"] for r in part], dtype=bool)
        rej = scoring.reject_set(scores_arr, flags, [r["id"] for r in part],
                                 cfg.trr_fix)
        rejections.append(rej)
        subset_info[subset] = {
            "threshold": _encode_threshold(rej.threshold),
            "n_rejected": len(rej.rejected_ids),
            "n_true_rejections": len(rej.true_rejections),
            "n_false_rejections": len(rej.false_rejections),
        }

    polarity_of = {r["id"]: ("plus" if r["predicted"] == 1 else "minus")
                   for r in test}
    per_rep = {}
    for rep, col in zip(REPRESENTATIONS, XMAP_COLUMNS):
        taus = {}
        for polarity, label in (("plus", 1), ("minus", 0)):
            part = [r for r in train
                    if r["predicted"] == label and r[col] is not None]
            taus[polarity] = scoring.calibrate_tau(
                np.array([r[col] for r in part]),
                np.array([not r["correct"] for r in part], dtype=bool),
                cfg.trr_fix)
        xmap_scores = {r["id"]: r[col] for r in test}
        rep_report = scoring.repair(rejections, xmap_scores, taus,
                                    polarity_of,
                                    base_detector=cfg.base_detector,
                                    representation=rep)
        per_rep[rep] = {
            "tau_plus": taus["plus"],
            "tau_minus": taus["minus"],
            "recov_r": rep_report.recov_r,
            "leak_r": rep_report.leak_r,
            "n_recovery": rep_report.n_recovery,
            "n_leakage": rep_report.n_leakage,
            "n_correct_fix": rep_report.n_correct_fix,
            "n_false_rejections": rep_report.n_false_rejections,
            "n_true_rejections": rep_report.n_true_rejections,
            "re_accepted_ids": list(rep_report.re_accepted_ids),
        }

    report = {
        "config_digest": cfg.digest(),
        "base_detector": cfg.base_detector,
        "repair_representation": cfg.repair_representation,
        "trr_fix": cfg.trr_fix,
        "subsets": subset_info,
        "representations": per_rep,
    }
    with open(p.repair_report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True)
        fh.write("\n")

    # Refresh outcomes for the configured representation; recomputed from
    # the score columns alone, so the rewrite is idempotent.
    rejected = set()
    for rej in rejections:
        rejected.update(rej.rejected_ids)
    re_accepted = set(per_rep[cfg.repair_representation]["re_accepted_ids"])
    for row in rows:
        if row["id"] in re_accepted:
            row["outcome"] = "repaired"
        elif row["id"] in rejected:
            row["outcome"] = "rejected"
        else:
            row["outcome"] = "accepted"
    _write_scores(p.scores, rows, cfg.digest())
