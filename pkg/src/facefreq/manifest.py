"""JSONL dataset manifests: one sample per line.

Line schema:
    {"path": "images/a.jpg", "label": "bonafide", "split": "train",
     "face_box": {"x": 10, "y": 12, "w": 96, "h": 96},   # optional
     "source": "ff"}                                      # optional tag

Relative paths resolve against the manifest's own directory, so a corpus
directory can be moved as a unit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicatePathError, ManifestError
from .image_io import FaceBox
from .labels import label_name, parse_label

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    label: int
    split: str
    face_box: FaceBox | None = None
    source: str = "default"


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)
    base_dir: Path | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def split(self, name: str) -> tuple[ManifestEntry, ...]:
        return tuple(e for e in self.entries if e.split == name)

    def sample_id(self, entry: ManifestEntry) -> str:
        """Stable id for an entry: path relative to the manifest directory
        when possible, else the path as given."""
        if self.base_dir is not None:
            try:
                return entry.path.resolve().relative_to(Path(self.base_dir).resolve()).as_posix()
            except ValueError:
                pass
        return entry.path.as_posix()

    def sources(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for e in self.entries:
            seen.setdefault(e.source, None)
        return tuple(seen)


def _parse_box(obj, line: int) -> FaceBox:
    if not isinstance(obj, dict):
        raise ManifestError(f"face_box must be an object, got {type(obj).__name__}", line)
    try:
        x, y, w, h = (int(obj[k]) for k in ("x", "y", "w", "h"))
    except KeyError as exc:
        raise ManifestError(f"face_box missing key {exc}", line) from None
    except (TypeError, ValueError):
        raise ManifestError("face_box fields must be integers", line) from None
    try:
        return FaceBox(x, y, w, h)
    except ValueError as exc:
        raise ManifestError(str(exc), line) from None


def parse_manifest(text: str, base_dir: str | Path = ".") -> DatasetManifest:
    """Parse JSONL manifest text; empty text gives an empty (valid) manifest."""
    base = Path(base_dir)
    entries: list[ManifestEntry] = []
    seen_paths: set[Path] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON: {exc.msg}", line_no) from None
        if not isinstance(obj, dict):
            raise ManifestError("each line must be a JSON object", line_no)
        for key in ("path", "label", "split"):
            if key not in obj:
                raise ManifestError(f"missing required key {key!r}", line_no)
        path = base / str(obj["path"])
        if path in seen_paths:
            raise DuplicatePathError(f"duplicate path {obj['path']!r}", line_no)
        seen_paths.add(path)
        label = parse_label(str(obj["label"]), line=line_no)
        split = str(obj["split"])
        if split not in SPLITS:
            raise ManifestError(f"unknown split {split!r} (expected one of {SPLITS})", line_no)
        box = _parse_box(obj["face_box"], line_no) if obj.get("face_box") is not None else None
        source = str(obj.get("source", "default"))
        entries.append(ManifestEntry(path, label, split, box, source))
    return DatasetManifest(tuple(entries), base_dir=base)


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    return parse_manifest(path.read_text(), base_dir=path.parent)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write JSONL, with paths relative to the manifest directory when possible."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base = path.parent.resolve()
    lines = []
    for e in manifest:
        try:
            rel = e.path.resolve().relative_to(base).as_posix()
        except ValueError:
            rel = e.path.as_posix()
        obj: dict = {"path": rel, "label": label_name(e.label), "split": e.split}
        if e.face_box is not None:
            b = e.face_box
            obj["face_box"] = {"x": b.x, "y": b.y, "w": b.w, "h": b.h}
        obj["source"] = e.source
        lines.append(json.dumps(obj, sort_keys=True))
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
