"""Study definition: conditions, stimuli, randomization seed."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import SchemaError


@dataclass(frozen=True)
class Stimulus:
    utterance_id: str
    condition: str
    audio_path: Path


@dataclass(frozen=True)
class Study:
    study_id: str
    conditions: tuple[str, ...]
    stimuli: tuple[Stimulus, ...]
    seed: int
    allow_replay: bool = True


def load_study(path) -> Study:
    """Load and validate a study manifest (JSON).

    Audio paths are resolved relative to the manifest's directory; every
    (utterance, condition) pair must be unique and every audio file present.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}")
    for key in ("study_id", "conditions", "seed", "stimuli"):
        if key not in raw:
            raise SchemaError(f"{path}: manifest missing {key!r}")
    conditions = tuple(raw["conditions"])
    if len(set(conditions)) != len(conditions):
        raise SchemaError(f"{path}: duplicate condition names")
    root = path.parent
    stimuli = []
    seen = set()
    missing = []
    for i, entry in enumerate(raw["stimuli"]):
        for key in ("id", "condition", "audio"):
            if key not in entry:
                raise SchemaError(f"{path}: stimulus {i} missing {key!r}")
        if entry["condition"] not in conditions:
            raise SchemaError(
                f"{path}: stimulus {i} has undeclared condition {entry['condition']!r}"
            )
        pair = (entry["id"], entry["condition"])
        if pair in seen:
            raise SchemaError(f"{path}: duplicate stimulus {pair}")
        seen.add(pair)
        audio = root / entry["audio"]
        if not audio.is_file():
            missing.append(str(audio))
        stimuli.append(
            Stimulus(utterance_id=entry["id"], condition=entry["condition"], audio_path=audio)
        )
    if missing:
        raise SchemaError(
            "missing audio files:\n  " + "\n  ".join(missing)
        )
    if not stimuli:
        raise SchemaError(f"{path}: study has no stimuli")
    return Study(
        study_id=str(raw["study_id"]),
        conditions=conditions,
        stimuli=tuple(stimuli),
        seed=int(raw["seed"]),
        allow_replay=bool(raw.get("allow_replay", True)),
    )
