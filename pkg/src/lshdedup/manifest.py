from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

MANIFEST_SUFFIX = ".manifest.json"


@dataclass
class RunManifest:
    """Everything needed to rerun a command and get the same outputs."""

    command: str
    argv: list[str]
    config: dict
    seeds: dict[str, int]
    input_digest: str | None
    outputs: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    tool_version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: str | Path) -> RunManifest:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**data)


def manifest_path_for(output: str | Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + MANIFEST_SUFFIX)
