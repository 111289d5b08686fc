"""Run manifests: config hash, seeds, convergence reports, file checksums."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List

from .. import __version__
from ..classical.backend import BACKEND_NAME


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    code_version: str = __version__
    backend: str = BACKEND_NAME
    files: List[Dict] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    convergence: Dict = field(default_factory=dict)
    decisions: Dict = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def add_file(self, path: str):
        self.files.append(
            {"name": os.path.basename(path), "sha256": file_sha256(path)}
        )

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "code_version": self.code_version,
            "backend": self.backend,
            "files": self.files,
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
            "convergence": self.convergence,
            "decisions": self.decisions,
            "errors": self.errors,
            "notes": self.notes,
        }

    def write(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
