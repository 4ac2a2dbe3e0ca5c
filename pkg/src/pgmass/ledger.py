"""Append-only JSONL ledger of experiment runs."""
from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from . import __version__


def file_hash(path) -> str:
    """Content hash of an input file (or of the reference itself, e.g. a
    catalog name)."""
    p = Path(path)
    data = p.read_bytes() if p.is_file() else str(path).encode()
    return hashlib.sha256(data).hexdigest()


def summary_hash(summary) -> str:
    blob = json.dumps(summary, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


class ExperimentLedger:
    def __init__(self, path):
        self.path = Path(path)

    def append(self, command: str, parameters: dict, summary, seed=None, inputs=None) -> dict:
        entry = {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "command": command,
            "parameters": parameters,
            "seed": seed,
            "inputs": {str(k): file_hash(k) for k in (inputs or [])},
            "summary": summary,
            "summary_hash": summary_hash(summary),
            "version": __version__,
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as fh:
            fh.write(json.dumps(entry, sort_keys=True, default=str) + "\n")
        return entry

    def entries(self) -> list:
        if not self.path.exists():
            return []
        return [json.loads(line) for line in self.path.read_text().splitlines() if line.strip()]
