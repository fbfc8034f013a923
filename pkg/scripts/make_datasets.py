#!/usr/bin/env python3
"""Generate the synthetic demo datasets into data/."""

import argparse
from pathlib import Path

from causalboard import simdata

REPO = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(REPO / "data"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in (
        ("autompg.csv", simdata.autompg_like()),
        ("opioid.csv", simdata.opioid_like()),
        ("life_expectancy.csv", simdata.life_expectancy_like()),
    ):
        (out / name).write_text(text, encoding="utf-8")
        print(f"wrote {out / name}")


if __name__ == "__main__":
    main()
