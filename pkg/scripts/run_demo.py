#!/usr/bin/env python3
"""End-to-end demo on the synthetic car dataset, fully offline.

Ingests the data, discovers the initial CPDAG, debates the reversible
cylinders/displacement edge, pulls the relation environment for the
heavy-but-quick combination, accepts the strongest mediator, refits the
coefficients, and renders the charts as SVG. Everything runs in replay
mode against the bundled response corpus.
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def run(args: list[str]) -> None:
    print(f"$ {' '.join(args)}")
    subprocess.run(args, check=True)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default=str(REPO / "demo-run"))
    args = parser.parse_args()
    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)

    run([sys.executable, str(REPO / "scripts" / "make_datasets.py"),
         "--out", str(work / "data")])
    fixtures = work / "replay"
    run([sys.executable, str(REPO / "scripts" / "make_fixtures.py"),
         "--out", str(fixtures)])

    cli = [sys.executable, "-m", "causalboard.cli"]
    project = work / "cars.causalproj.json"
    run(cli + ["ingest", str(work / "data" / "autompg.csv"),
               "--name", "cars", "--domain", "automotive engineering",
               "--out", str(project)])
    run(cli + ["discover", "--project", str(project),
               "--fixtures", str(fixtures)])
    run(cli + ["debate", "--project", str(project),
               "--edge", "cylinders,displacement",
               "--fixtures", str(fixtures),
               "--out", str(work / "debate.json")])
    run(cli + ["render", "debate", str(work / "debate.json"),
               "-o", str(work / "debate.svg")])
    run(cli + ["environment", "--project", str(project),
               "--edge", "weight,acceleration", "--cause", "weight",
               "--cause-level", "higher", "--effect-level", "lower",
               "--fixtures", str(fixtures),
               "--out", str(work / "environment.json")])
    run(cli + ["render", "environment", str(work / "environment.json"),
               "-o", str(work / "environment.svg")])
    run(cli + ["edit", "--project", str(project), "--op", "add_third",
               "--kind", "mediator", "--cause", "weight",
               "--effect", "acceleration", "--cause-level", "higher",
               "--effect-level", "lower", "--name", "Torque",
               "--strength", "strong", "--direction", "positive",
               "--fixtures", str(fixtures)])
    run(cli + ["sem", "--project", str(project),
               "--fixtures", str(fixtures), "--out", str(work / "fit.json")])

    doc = json.loads((work / "debate.json").read_text(encoding="utf-8"))
    print()
    print(f"dominance verdict: {doc['dominance']['verdict']}")
    print(f"artifacts in {work}: debate.svg, environment.svg, fit.json, "
          f"cars.causalproj.json")


if __name__ == "__main__":
    main()
