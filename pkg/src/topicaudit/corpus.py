"""Dataset ingestion, text normalization, and deterministic splits.

Messages come in as UCI-style TSV (``label<TAB>text``) or generic CSV with
named label/text columns, are canonicalized to binary labels (1 = spam or
phishing, 0 = legitimate), tokenized, stopword/rare-token filtered, and
split into stratified train/test halves.  Everything here is a pure
function of its inputs plus an explicit seed, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

LABEL_POSITIVE = 1
LABEL_NEGATIVE = 0

_TSV_LABEL_MAP = {"ham": LABEL_NEGATIVE, "spam": LABEL_POSITIVE}


class DatasetError(ValueError):
    """Malformed dataset content (bad row, unknown label token)."""


@dataclass(frozen=True)
class Message:
    id: int
    text: str
    label: int
    split: str = ""


@dataclass(frozen=True)
class TokenizedMessage:
    id: int
    tokens: tuple[str, ...]


def load_dataset(path: str | Path, format: str = "sms_tsv",
                 label_column: str = "label", text_column: str = "text",
                 label_map: dict[str, int] | None = None) -> list[Message]:
    """Read a labeled message file into Message records.

    ``sms_tsv`` rows are ``<label>\\t<text>`` with label in {ham, spam};
    ``generic_csv`` has a header naming the label and text columns.  Ids are
    assigned by row order and duplicate texts are retained.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {path}")
    if format == "sms_tsv":
        return _load_sms_tsv(path)
    if format == "generic_csv":
        return _load_generic_csv(path, label_column, text_column,
                                 label_map or _TSV_LABEL_MAP)
    raise ValueError(f"unknown dataset format: {format!r}")


def _load_sms_tsv(path: Path) -> list[Message]:
    messages = []
    with open(path, encoding="utf-8") as fh:
        for row_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            if "\t" not in line:
                raise DatasetError(f"row {row_no}: missing tab separator")
            token, text = line.split("\t", 1)
            label = _map_label(token, _TSV_LABEL_MAP, row_no)
            if not text:
                raise DatasetError(f"row {row_no}: empty message text")
            messages.append(Message(id=len(messages), text=text, label=label))
    return messages


def _load_generic_csv(path: Path, label_column: str, text_column: str,
                      label_map: dict[str, int]) -> list[Message]:
    messages = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or label_column not in reader.fieldnames \
                or text_column not in reader.fieldnames:
            raise DatasetError(
                f"csv header must contain {label_column!r} and {text_column!r}")
        for row_no, row in enumerate(reader, start=1):
            token = row.get(label_column)
            text = row.get(text_column)
            if token is None or text is None:
                raise DatasetError(f"row {row_no}: missing label or text field")
            label = _map_label(token.strip(), label_map, row_no)
            if not text:
                raise DatasetError(f"row {row_no}: empty message text")
            messages.append(Message(id=len(messages), text=text, label=label))
    return messages


def _map_label(token: str, label_map: dict[str, int], row_no: int) -> int:
    key = token.strip().lower()
    if key in label_map:
        return int(label_map[key])
    if key in ("0", "1"):
        return int(key)
    raise DatasetError(f"row {row_no}: unknown label token {token!r}")


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase and split on non-alphanumeric boundaries.

    Pure-digit tokens are kept: digit runs are spam-indicative and the
    structural features count them too.
    """
    return tuple(_TOKEN_RE.findall(text.lower()))


def default_stoplist() -> frozenset[str]:
    """English stoplist shipped with the package."""
    data = resources.files("topicaudit").joinpath("assets/stopwords_en.txt")
    words = data.read_text(encoding="utf-8").split()
    return frozenset(words)


def document_frequencies(tokenized: list[TokenizedMessage]) -> Counter:
    """Token -> number of documents containing it (computed once, on train)."""
    df: Counter = Counter()
    for msg in tokenized:
        df.update(set(msg.tokens))
    return df


def preprocess(msg: Message, stoplist: frozenset[str] | set[str],
               train_df: Counter, min_df: int = 2) -> TokenizedMessage:
    """Tokenize one message, dropping stopwords and rare tokens.

    ``train_df`` must be the document-frequency table of the training split;
    a token survives only if its training df is at least ``min_df``.  An
    empty token list is a valid result.
    """
    kept = tuple(
        tok for tok in tokenize(msg.text)
        if tok not in stoplist and train_df.get(tok, 0) >= min_df
    )
    return TokenizedMessage(id=msg.id, tokens=kept)


def split(messages: list[Message], ratio: float, seed: int) -> tuple[list[Message], list[Message]]:
    """Stratified deterministic train/test split.

    Train gets ceil(ratio * n) messages overall, apportioned per class by
    largest remainder so the train positive fraction tracks the full corpus
    within 1/|train|.  The result is independent of input order.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    by_label: dict[int, list[Message]] = {}
    for msg in messages:
        by_label.setdefault(msg.label, []).append(msg)
    for label, group in sorted(by_label.items()):
        if len(group) < 2:
            raise DatasetError(
                f"cannot stratify: class {label} has {len(group)} member(s)")

    n_train_total = math.ceil(ratio * len(messages))
    labels = sorted(by_label)
    quota = {lab: int(math.floor(ratio * len(by_label[lab]))) for lab in labels}
    remainders = sorted(
        labels,
        key=lambda lab: (-(ratio * len(by_label[lab]) - quota[lab]), lab),
    )
    short = n_train_total - sum(quota.values())
    for lab in remainders[:short]:
        quota[lab] += 1

    rng = np.random.default_rng(seed)
    train: list[Message] = []
    test: list[Message] = []
    for lab in labels:
        group = sorted(by_label[lab], key=lambda m: m.id)
        order = rng.permutation(len(group))
        chosen = set(order[:quota[lab]].tolist())
        for idx, msg in enumerate(group):
            dest, tag = (train, "train") if idx in chosen else (test, "test")
            dest.append(Message(id=msg.id, text=msg.text, label=msg.label, split=tag))
    train.sort(key=lambda m: m.id)
    test.sort(key=lambda m: m.id)
    return train, test


def subsample_majority(train: list[Message], seed: int) -> list[Message]:
    """Drop majority-class training messages until the labels balance.

    Stand-in for generative augmentation of the minority class: instead of
    synthesizing new minority messages, the majority is thinned to match.
    """
    pos = [m for m in train if m.label == LABEL_POSITIVE]
    neg = [m for m in train if m.label == LABEL_NEGATIVE]
    major, minor = (pos, neg) if len(pos) > len(neg) else (neg, pos)
    if len(major) == len(minor):
        return sorted(train, key=lambda m: m.id)
    rng = np.random.default_rng(seed)
    major = sorted(major, key=lambda m: m.id)
    keep_idx = set(rng.permutation(len(major))[:len(minor)].tolist())
    kept = [m for i, m in enumerate(major) if i in keep_idx]
    return sorted(kept + minor, key=lambda m: m.id)


def write_dataset(path: str | Path, messages: list[Message],
                  config_digest: str = "") -> None:
    """Persist messages as dataset.jsonl, one object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        if config_digest:
            fh.write(json.dumps({"config_digest": config_digest},
                                sort_keys=True) + "\n")
        for msg in messages:
            fh.write(json.dumps(
                {"id": msg.id, "text": msg.text, "label": msg.label,
                 "split": msg.split},
                sort_keys=True, ensure_ascii=False) + "\n")


def read_dataset(path: str | Path) -> tuple[list[Message], str]:
    """Load dataset.jsonl; returns (messages, config_digest)."""
    messages = []
    digest = ""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "config_digest" in obj and "id" not in obj:
                digest = obj["config_digest"]
                continue
            messages.append(Message(id=obj["id"], text=obj["text"],
                                    label=obj["label"], split=obj["split"]))
    return messages, digest
