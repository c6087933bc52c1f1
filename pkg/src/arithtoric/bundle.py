"""Reading and writing fan, collection and action files, and the bundled data set."""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from .descent import GaloisAction, action_from_dict, action_to_dict, full_aut_action, trivial_action
from .excol import Collection, CollectionError
from .fan import Fan, FanError, build_an_fan, fan_aut

FAN_SCHEMA = "arithtoric.fan/1"
COLLECTION_SCHEMA = "arithtoric.collection/1"
ACTION_SCHEMA = "arithtoric.action/1"

KLEIN_SIGMA = [[-1, 0, 0], [0, 0, -1], [0, -1, 0]]
KLEIN_TAU = [[1, 0, 0], [1, -1, 0], [1, 0, -1]]


class InputError(ValueError):
    """A data file is missing or malformed."""


def data_dir() -> Path:
    return Path(str(resources.files("arithtoric") / "data"))


def resolve(path: str) -> Path:
    """``bundled:NAME`` refers to ``data/NAME.json``; anything else is a filesystem path."""
    if path.startswith("bundled:"):
        return data_dir() / (path.split(":", 1)[1] + ".json")
    return Path(path)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _read_json(path: str) -> dict:
    p = resolve(path)
    try:
        return json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise InputError(f"file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{p} is not valid JSON: {exc}") from exc


def fan_to_dict(f: Fan, kind: str | None = None, n: int | None = None) -> dict:
    d = {"schema": FAN_SCHEMA, **f.to_dict(), "hash": f.content_hash()}
    if kind is not None:
        d["kind"], d["n"] = kind, n
    return d


def load_fan(path: str) -> Fan:
    d = _read_json(path)
    try:
        f = Fan.from_dict(d)
    except FanError as exc:
        raise InputError(f"bad fan file {path}: {exc}") from exc
    if "hash" in d and d["hash"] != f.content_hash():
        raise InputError(f"fan file {path} fails its content hash")
    return f


def collection_to_dict(c: Collection) -> dict:
    return {"schema": COLLECTION_SCHEMA, **c.to_dict()}


def load_collection(path: str, fan: Fan) -> Collection:
    d = _read_json(path)
    try:
        return Collection.from_dict(d, fan)
    except (CollectionError, ValueError) as exc:
        raise InputError(f"bad collection file {path}: {exc}") from exc


def load_action(path: str, fan: Fan) -> GaloisAction:
    d = _read_json(path)
    try:
        return action_from_dict(d, fan)
    except ValueError as exc:
        raise InputError(f"bad action file {path}: {exc}") from exc


def action_document(a: GaloisAction, group_spec) -> dict:
    return {"schema": ACTION_SCHEMA, **action_to_dict(a, group_spec)}


def bundled_action_documents() -> dict[str, dict]:
    """Actions shipped with the package, keyed by file stem."""
    docs = {}
    for n in (1, 2, 3):
        f = build_an_fan(n)
        docs[f"action_a{n}_trivial"] = action_document(trivial_action(f), "trivial")
    p1 = build_an_fan(1)
    swap = {"schema": ACTION_SCHEMA, "fan_hash": p1.content_hash(), "group": "C2", "phi": {"s": [[-1]]}}
    docs["action_a1_swap"] = action_document(action_from_dict(swap, p1), "C2")
    a3 = build_an_fan(3)
    klein = {"fan_hash": a3.content_hash(), "group": "C2xC2", "phi": {"s": KLEIN_SIGMA, "t": KLEIN_TAU},
             "field_label": {"biquadratic": [5, 29]}}
    docs["action_a3_biquadratic"] = action_document(action_from_dict(klein, a3), "C2xC2")
    full = full_aut_action(a3)
    aut = fan_aut(a3)
    table = {"table": [list(r) for r in aut.group.mul], "generators": list(aut.group.generators)}
    docs["action_a3_full"] = action_document(full, table)
    return docs


def write_manifest(directory: Path) -> dict:
    files = sorted(p for p in directory.glob("*.json") if p.name != "MANIFEST.json")
    manifest = {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in files}
    (directory / "MANIFEST.json").write_text(dumps(manifest))
    return manifest


def check_manifest(directory: Path | None = None) -> list[str]:
    """Names of bundled files whose sha256 differs from the manifest."""
    directory = directory or data_dir()
    manifest = json.loads((directory / "MANIFEST.json").read_text())
    bad = []
    for name, digest in manifest.items():
        p = directory / name
        if not p.exists() or hashlib.sha256(p.read_bytes()).hexdigest() != digest:
            bad.append(name)
    return bad


def regenerate(directory: Path | None = None, jobs: int = 1) -> dict:
    """Rewrite every bundled file through the build commands, then the manifest."""
    from .cli import main
    directory = Path(directory or data_dir())
    directory.mkdir(parents=True, exist_ok=True)
    for n in (1, 2, 3):
        if main(["build", "an", "--n", str(n), "--out", str(directory), "--with-collection",
                 "--jobs", str(jobs), "--format", "structured"]) != 0:
            raise RuntimeError(f"build failed for n = {n}")
    for stem, doc in bundled_action_documents().items():
        (directory / f"{stem}.json").write_text(dumps(doc))
    return write_manifest(directory)


if __name__ == "__main__":
    regenerate()
