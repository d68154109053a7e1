"""Write generated course instances plus a manifest with per-level statistics."""

from __future__ import annotations

import json
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from pathlib import Path

from planeval.course.generator import (
    dataset_statistics,
    generate_instance,
    instance_seed,
)
from planeval.course.io import save_instance
from planeval.course.model import Difficulty

MANIFEST_SCHEMA = "planeval.dataset/1"


def generate_dataset(
    difficulties: Sequence[Difficulty | str],
    count: int,
    seed: int,
    out_dir: str | Path,
    parallelism: int = 1,
) -> Path:
    """Files are named ``<level>_<index>.json``; instance i of every level uses seed (seed, i)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.json"
    manifest = {"schema": MANIFEST_SCHEMA, "levels": {}}
    if path.exists():
        # keep levels written by earlier invocations
        old = json.loads(path.read_text(encoding="utf-8"))
        if old.get("schema") == MANIFEST_SCHEMA:
            manifest["levels"].update(old.get("levels", {}))
    for level in [Difficulty(d) for d in difficulties]:
        seeds = [instance_seed(seed, i) for i in range(count)]
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(partial(generate_instance, level), seeds))
        files = []
        for i, (s, rec) in enumerate(zip(seeds, records)):
            name = f"{level.value.lower()}_{i:04d}.json"
            save_instance(rec, out / name)
            files.append({"file": name, "seed": s, "optimal_score": rec.optimal_score})
        stats = dataset_statistics([r.instance for r in records])
        manifest["levels"][level.value] = {"seed": seed, "count": count, "statistics": stats, "files": files}
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
