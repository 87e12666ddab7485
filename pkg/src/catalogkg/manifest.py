"""Run manifests: what a command read, wrote, and the checksums of both."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import InputFormatError

SUFFIX = ".manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    inputs: dict = field(default_factory=dict)   # path -> sha256
    outputs: dict = field(default_factory=dict)  # path -> sha256
    duration_s: float = 0.0

    def add_input(self, path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path


def manifest_path(output) -> Path:
    output = Path(output)
    return output.with_name(output.name + SUFFIX)


def verify_input(path) -> None:
    """Check ``path`` against any manifest in its directory that lists it as an output.

    Files without a manifest pass; a listed file whose checksum differs fails.
    """
    path = Path(path)
    digest = None
    for mf in sorted(path.parent.glob("*" + SUFFIX)):
        try:
            outputs = json.loads(mf.read_text(encoding="utf-8")).get("outputs", {})
        except (ValueError, AttributeError):
            continue
        for listed, checksum in outputs.items():
            if Path(listed).name == path.name and Path(listed).resolve() == path.resolve():
                digest = digest or sha256_file(path)
                if digest != checksum:
                    raise InputFormatError(
                        f"checksum mismatch against {mf.name}; file changed after it was written",
                        path)
