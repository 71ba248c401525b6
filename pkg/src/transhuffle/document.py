"""JSON interchange format for shuffles (``format_version`` "1")."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .core import EXACT, REAL, LazyTransposition, Shuffle

FORMAT_VERSION = "1"


class DocumentError(ValueError):
    pass


@dataclass(frozen=True)
class ShuffleDocument:
    shuffle: Shuffle
    provenance: dict = field(default_factory=dict)
    format_version: str = FORMAT_VERSION

    @property
    def n(self) -> int:
        return self.shuffle.n

    @property
    def mode(self) -> str:
        return self.shuffle.mode

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShuffleDocument):
            return NotImplemented
        if (self.format_version, self.provenance) != (other.format_version, other.provenance):
            return False
        return shuffles_identical(self.shuffle, other.shuffle)


def shuffles_identical(x: Shuffle, y: Shuffle) -> bool:
    """Same order, pairs and bit-identical probabilities of the same mode."""
    if x.n != y.n or x.length != y.length or x.mode != y.mode:
        return False
    for s, t in zip(x.steps, y.steps):
        if s.pair != t.pair or type(s.p) is not type(t.p):
            return False
        if s.mode == REAL:
            if not _same_longdouble(s.p, t.p):
                return False
        elif s.p != t.p:
            return False
    return True


def _same_longdouble(x, y) -> bool:
    # tobytes() would include the padding bytes of the 80-bit format
    x, y = np.longdouble(x), np.longdouble(y)
    return bool(x == y and np.signbit(x) == np.signbit(y))


def format_real(p) -> str:
    """Shortest round-trip decimal of a ``longdouble``, at least 17 significant digits."""
    return np.format_float_scientific(np.longdouble(p), unique=True, min_digits=16)


def _emit_prob(p) -> Any:
    if isinstance(p, Fraction):
        return {"num": str(p.numerator), "den": str(p.denominator)}
    return format_real(p)


def to_dict(doc: ShuffleDocument) -> dict:
    shuffle = doc.shuffle
    out: dict[str, Any] = {
        "format_version": doc.format_version,
        "n": shuffle.n,
        "mode": shuffle.mode,
        "steps": [{"a": s.a, "b": s.b, "p": _emit_prob(s.p)} for s in shuffle.steps],
    }
    if doc.provenance:
        out["provenance"] = doc.provenance
    return out


def emit(doc: ShuffleDocument | Shuffle, indent: int | None = 2) -> str:
    if isinstance(doc, Shuffle):
        doc = ShuffleDocument(doc)
    return json.dumps(to_dict(doc), indent=indent) + "\n"


def _parse_prob(raw: Any, mode: str):
    if mode == EXACT:
        if not isinstance(raw, dict) or set(raw) != {"num", "den"}:
            raise DocumentError(f"exact probability must be {{num, den}}, got {raw!r}")
        num, den = int(str(raw["num"])), int(str(raw["den"]))
        if den <= 0:
            raise DocumentError("denominator must be positive")
        return Fraction(num, den)
    if not isinstance(raw, str):
        raise DocumentError(f"real probability must be a decimal string, got {raw!r}")
    return np.longdouble(raw)


def from_dict(data: dict) -> ShuffleDocument:
    try:
        version = str(data["format_version"])
        n = int(data["n"])
        mode = data.get("mode", EXACT)
        steps_raw = data["steps"]
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed shuffle document: {exc}") from exc
    if version != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {version!r}")
    if mode not in (EXACT, REAL):
        raise DocumentError(f"unknown mode {mode!r}")
    try:
        steps = tuple(LazyTransposition(int(s["a"]), int(s["b"]), _parse_prob(s["p"], mode))
                      for s in steps_raw)
        shuffle = Shuffle(n, steps, mode)
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(str(exc)) from exc
    return ShuffleDocument(shuffle, dict(data.get("provenance") or {}), version)


def parse(text: str) -> ShuffleDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    return from_dict(data)


def load(path) -> ShuffleDocument:
    with open(path) as fh:
        return parse(fh.read())
