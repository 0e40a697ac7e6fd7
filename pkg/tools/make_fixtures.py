"""Regenerate the bundled demonstration fixture under src/gridhouse/data/structures/.

Run from the repository root:

    python3 tools/make_fixtures.py

The fixture is the scripted coffee demonstration on kitchen_01; it is the
structure the augmentation examples and several tests start from.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gridhouse.record import serialize, structure_stats
from gridhouse.sampledata import demonstrate_coffee
from gridhouse.scene import load_scene_file


def main() -> None:
    here = os.path.dirname(__file__)
    scene = load_scene_file(
        os.path.join(here, "..", "src", "gridhouse", "data", "scenes", "kitchen_01.scene.json")
    )
    structure = demonstrate_coffee(scene)
    out_dir = os.path.join(here, "..", "src", "gridhouse", "data", "structures")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "coffee_kitchen_01.hts.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(structure))
    steps, actions = structure_stats(structure)
    print(f"wrote {os.path.relpath(path)} ({steps} steps, {actions} actions)")


if __name__ == "__main__":
    main()
