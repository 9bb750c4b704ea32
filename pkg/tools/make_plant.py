"""Regenerate the plant models in the corpus directory."""

import argparse
from pathlib import Path

from tawcet.corpus import corpus_dir
from tawcet.fmt import serialize
from tawcet.plant import plant_network

HEADER = "# Generated by tools/make_plant.py; edit the generator, not this file.\n"


def plant_files() -> dict[str, str]:
    out = {}
    for boxes in (1, 3):
        for config in ("fast", "slow"):
            n = plant_network(boxes, config)
            out[f"plant_{config}_{boxes + 3}.ta"] = HEADER + serialize(n)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=corpus_dir())
    args = ap.parse_args()
    for name, text in plant_files().items():
        (args.out / name).write_text(text, encoding="utf-8")
        print(f"wrote {args.out / name}")


if __name__ == "__main__":
    main()
