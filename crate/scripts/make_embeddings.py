"""Writes data/embeddings.csv: deterministic stand-in sentence embeddings.

Real runs should replace this file with 512-d sentence-encoder vectors of the
category names. These synthetic vectors share a component per room group so
the palette still places related categories near each other in color space.
"""
import csv
import pathlib

import numpy as np

GROUPS = {
    "bedroom": ["bed", "nightstand", "wardrobe", "dresser"],
    "living": ["sofa", "armchair", "coffee table", "tv stand", "rug", "floor lamp", "plant", "piano"],
    "dining": ["dining table", "dining chair"],
    "office": ["desk", "office chair", "bookshelf"],
    "kitchen": ["kitchen counter", "stove", "refrigerator", "cabinet", "sink"],
    "bath": ["bathtub", "toilet", "shower"],
}
DIM = 512


def main() -> None:
    rng = np.random.default_rng(2022)
    shared = rng.standard_normal(DIM)
    rows = []
    for group, names in GROUPS.items():
        centroid = rng.standard_normal(DIM)
        for name in names:
            v = 0.3 * shared + 0.45 * centroid + 0.6 * rng.standard_normal(DIM)
            rows.append((name, v / np.linalg.norm(v)))
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "embeddings.csv"
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["name"] + [f"e{i}" for i in range(DIM)])
        for name, v in rows:
            w.writerow([name] + [repr(float(x)) for x in v])
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
