"""Loading serialized models without knowing their kind up front."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import ConfigError
from .forest import FOREST_FORMAT, HandoffForestClassifier
from .tree import TREE_FORMAT, HandoffTreeClassifier

Model = HandoffTreeClassifier | HandoffForestClassifier


def load_model_bytes(data: bytes | str) -> Model:
    if not data:
        raise ConfigError("empty model document")
    try:
        document = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed model document: {exc}") from exc
    fmt = document.get("format")
    if fmt == TREE_FORMAT:
        return HandoffTreeClassifier.from_document(document)
    if fmt == FOREST_FORMAT:
        return HandoffForestClassifier.from_document(document)
    raise ConfigError(f"unknown model format {fmt!r}")


def load_model(path: str | Path) -> Model:
    return load_model_bytes(Path(path).read_bytes())


def model_version(model: Model) -> str:
    data = model.serialize()
    fmt = json.loads(data)["format"]
    return f"{fmt}:{hashlib.sha256(data).hexdigest()[:12]}"
