"""Small shared helpers."""

from __future__ import annotations

import hashlib
import json


def canonical_json(data) -> str:
    """Deterministic JSON rendering: sorted keys, compact separators."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(data) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
