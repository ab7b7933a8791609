#!/usr/bin/env python3
"""Download public tabular benchmarks and convert them to the CSV layout
the ``distill`` and ``sweep`` commands expect (header row, one label
column).

Integrity works trust-on-first-use: the first download records each file's
sha256 into ``checksums.json`` next to the data; later runs verify against
the recorded digest and refuse silently changed files.  Delete the entry to
re-pin.

Usage:
    scripts/prepare_tabular.py adult magic --dest data/
"""

import argparse
import csv
import hashlib
import json
import sys
import urllib.request
from pathlib import Path

SOURCES = {
    "adult": {
        "url": "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data",
        "columns": [
            "age", "workclass", "fnlwgt", "education", "education_num",
            "marital_status", "occupation", "relationship", "race", "sex",
            "capital_gain", "capital_loss", "hours_per_week", "native_country",
            "label",
        ],
    },
    "magic": {
        "url": "https://archive.ics.uci.edu/ml/machine-learning-databases/magic/magic04.data",
        "columns": [
            "f_length", "f_width", "f_size", "f_conc", "f_conc1", "f_asym",
            "f_m3long", "f_m3trans", "f_alpha", "f_dist", "label",
        ],
    },
}


def sha256_of(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def prepare(name, dest):
    spec = SOURCES[name]
    dest.mkdir(parents=True, exist_ok=True)
    raw = dest / f"{name}.raw"
    if not raw.exists():
        print(f"downloading {spec['url']}")
        urllib.request.urlretrieve(spec["url"], raw)

    manifest_path = dest / "checksums.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    digest = sha256_of(raw)
    pinned = manifest.get(name)
    if pinned is None:
        manifest[name] = digest
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        print(f"pinned {name} sha256 {digest[:16]}...")
    elif pinned != digest:
        sys.exit(f"{name}: sha256 mismatch (pinned {pinned[:16]}..., got {digest[:16]}...)")

    out = dest / f"{name}.csv"
    with open(raw, encoding="utf-8") as src, open(out, "w", newline="", encoding="utf-8") as dst:
        writer = csv.writer(dst)
        writer.writerow(spec["columns"])
        for line in src:
            line = line.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != len(spec["columns"]):
                continue
            writer.writerow(cells)
    print(f"wrote {out}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("datasets", nargs="+", choices=sorted(SOURCES))
    parser.add_argument("--dest", default="data", type=Path)
    args = parser.parse_args()
    for name in args.datasets:
        prepare(name, args.dest)


if __name__ == "__main__":
    main()
