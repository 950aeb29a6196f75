#!/usr/bin/env python3
"""Download the two benchmark datasets from the UCI repository into data/.

The library itself never touches the network; run this once (or vendor the
files some other way) before using the ``adult`` / ``german`` presets.
"""

import argparse
import sys
import urllib.request
from pathlib import Path

FILES = {
    "adult.data": (
        "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data",
        32_561,
    ),
    "german.data": (
        "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/german.data",
        1_000,
    ),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default="data", help="target directory (default: data/)")
    parser.add_argument("--force", action="store_true", help="re-download existing files")
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    for name, (url, expected_rows) in FILES.items():
        target = dest / name
        if target.exists() and not args.force:
            print(f"{target} already present, skipping (use --force to refresh)")
            continue
        print(f"downloading {url}")
        with urllib.request.urlopen(url) as resp:
            payload = resp.read()
        target.write_bytes(payload)
        rows = sum(1 for line in payload.decode().splitlines() if line.strip() and line.strip() != ".")
        status = "ok" if rows == expected_rows else f"WARNING: expected {expected_rows}"
        print(f"wrote {target} ({rows} data rows, {status})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
