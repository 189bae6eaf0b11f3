"""Label coding: 0 = bona fide, 1 = attack (higher score means attack)."""

from __future__ import annotations

from .errors import UnknownLabelError

BONAFIDE = 0
ATTACK = 1

LABEL_NAMES = {BONAFIDE: "bonafide", ATTACK: "attack"}
_NAME_TO_LABEL = {v: k for k, v in LABEL_NAMES.items()}


def parse_label(name: str, line: int | None = None) -> int:
    try:
        return _NAME_TO_LABEL[name]
    except KeyError:
        raise UnknownLabelError(
            f"unknown label {name!r} (expected 'bonafide' or 'attack')", line=line
        ) from None


def label_name(label: int) -> str:
    return LABEL_NAMES[int(label)]
