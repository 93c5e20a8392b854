"""Run manifests: digests of inputs and outputs for reproducibility checks."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

__all__ = ["sha256_file", "write_manifest", "read_manifest"]

MANIFEST_NAME = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir,
    command: list[str],
    inputs: list,
    outputs: list,
    config: dict | None = None,
    seed: int | None = None,
) -> Path:
    """Write <out_dir>/manifest.json recording input/output digests.

    Identical inputs and seed must yield identical input/output digest maps;
    only created_at may differ between reruns.
    """
    from . import __version__

    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "inputs": {str(p): sha256_file(p) for p in sorted(map(str, inputs))},
        "outputs": {str(p): sha256_file(p) for p in sorted(map(str, outputs))},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))
