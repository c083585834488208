"""Corpus ingestion and JSON Lines emission."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import xxhash

from .synth import DUPLICATE, ORIGINAL, LabeledCorpus
from .text import Document


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusSource:
    kind: str
    path: Path
    id_rule: str = "explicit-field"

    def __post_init__(self) -> None:
        if self.kind not in ("jsonl", "directory"):
            raise ValueError(f"unknown corpus kind {self.kind!r}")
        object.__setattr__(self, "path", Path(self.path))

    @classmethod
    def infer(cls, path: str | Path) -> CorpusSource:
        path = Path(path)
        if path.is_dir():
            return cls("directory", path, "filename-stem")
        return cls("jsonl", path, "explicit-field")


def _jsonl_records(path: Path) -> Iterator[tuple[int, dict]]:
    try:
        handle = path.open(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            doc_id, text = record.get("id"), record.get("text")
            if not isinstance(doc_id, (str, int)) or isinstance(doc_id, bool) or str(doc_id) == "":
                raise CorpusError(f"{path}:{lineno}: missing or invalid 'id'")
            if not isinstance(text, str):
                raise CorpusError(f"{path}:{lineno}: missing or invalid 'text'")
            record["id"] = str(doc_id)
            yield lineno, record


def _read_jsonl(path: Path) -> list[tuple[int, dict]]:
    seen: dict[str, int] = {}
    records = []
    for lineno, record in _jsonl_records(path):
        doc_id = record["id"]
        if doc_id in seen:
            raise CorpusError(f"{path}: duplicate id {doc_id!r} on lines {seen[doc_id]} and {lineno}")
        seen[doc_id] = lineno
        records.append((lineno, record))
    return records


def _read_directory(path: Path) -> list[Document]:
    if not path.is_dir():
        raise CorpusError(f"cannot read directory {path}")
    docs = []
    origin: dict[str, Path] = {}
    for file in sorted(p for p in path.rglob("*") if p.is_file()):
        doc_id = file.stem
        if doc_id in origin:
            raise CorpusError(f"filename stem collision for id {doc_id!r}: {origin[doc_id]} and {file}")
        origin[doc_id] = file
        try:
            text = file.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise CorpusError(f"cannot read {file}: {exc}") from exc
        docs.append(Document(doc_id, text))
    return docs


def ingest(source: CorpusSource | str | Path) -> list[Document]:
    """Load documents in deterministic order (file order, or sorted paths)."""
    if not isinstance(source, CorpusSource):
        source = CorpusSource.infer(source)
    if source.kind == "directory":
        return _read_directory(source.path)
    return [Document(r["id"], r["text"]) for _, r in _read_jsonl(source.path)]


def read_labeled(path: str | Path) -> LabeledCorpus:
    """Read a labeled corpus written by :func:`write_labeled`."""
    path = Path(path)
    docs, labels, provenance = [], {}, {}
    for lineno, record in _read_jsonl(path):
        label = record.get("label")
        if label not in (ORIGINAL, DUPLICATE):
            raise CorpusError(f"{path}:{lineno}: label must be {ORIGINAL!r} or {DUPLICATE!r}, got {label!r}")
        docs.append(Document(record["id"], record["text"]))
        labels[record["id"]] = label
        if label == DUPLICATE and record.get("source_id") is not None:
            provenance[record["id"]] = str(record["source_id"])
    return LabeledCorpus(docs, labels, provenance)


def write_jsonl(records: Iterable[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as out:
        for record in records:
            out.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_documents(docs: Iterable[Document], path: str | Path) -> None:
    write_jsonl(({"id": d.id, "text": d.text} for d in docs), path)


def write_labeled(corpus: LabeledCorpus, path: str | Path) -> None:
    write_jsonl(
        (
            {
                "id": d.id,
                "text": d.text,
                "label": corpus.labels[d.id],
                "source_id": corpus.provenance.get(d.id),
            }
            for d in corpus.documents
        ),
        path,
    )


def input_digest(path: str | Path) -> str:
    """64-bit content hash of a corpus file or directory, as 16 hex digits."""
    path = Path(path)
    h = xxhash.xxh64()
    if path.is_dir():
        for file in sorted(p for p in path.rglob("*") if p.is_file()):
            h.update(file.relative_to(path).as_posix().encode("utf-8") + b"\0")
            h.update(file.read_bytes())
    else:
        with path.open("rb") as handle:
            for block in iter(lambda: handle.read(1 << 20), b""):
                h.update(block)
    return h.hexdigest()
