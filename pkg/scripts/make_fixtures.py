#!/usr/bin/env python3
"""Build a replay fixture directory from the canned response corpus.

Reads fixtures/responses/manifest.json plus the per-battery response texts
and writes one keyed fixture file per exchange, ready for
`causalboard serve --llm-mode replay --fixtures <out>`.
"""

import argparse
import json
from pathlib import Path

from causalboard import llm, prompts

REPO = Path(__file__).resolve().parent.parent


def build_replay_fixtures(corpus_dir: Path, out_dir: Path) -> int:
    manifest = json.loads((corpus_dir / "manifest.json").read_text(encoding="utf-8"))
    model = manifest.get("model", "gpt-4")
    temperature = manifest.get("temperature", 0.0)
    count = 0
    for battery, params in manifest["batteries"].items():
        specs = prompts.battery_specs(**params)
        texts = sorted((corpus_dir / battery).glob("*.txt"))
        if len(texts) != len(specs):
            raise SystemExit(
                f"{battery}: {len(texts)} response files for {len(specs)} specs"
            )
        for spec, text_path in zip(specs, texts):
            response = text_path.read_text(encoding="utf-8").rstrip("\n")
            llm.write_fixture(out_dir, spec.rendered, response,
                              model=model, temperature=temperature)
            count += 1
    return count


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", default=str(REPO / "fixtures" / "responses"))
    parser.add_argument("--out", default=str(REPO / "fixtures" / "replay"))
    args = parser.parse_args()
    n = build_replay_fixtures(Path(args.corpus), Path(args.out))
    print(f"wrote {n} fixtures to {args.out}")


if __name__ == "__main__":
    main()
