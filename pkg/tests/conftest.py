import json
from pathlib import Path

import pytest

from causalboard import ingest, llm, prompts, simdata

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "fixtures" / "responses"
GOLDEN = Path(__file__).resolve().parent / "golden"


def corpus_manifest() -> dict:
    return json.loads((CORPUS / "manifest.json").read_text(encoding="utf-8"))


def corpus_texts(battery: str) -> list[str]:
    return [
        p.read_text(encoding="utf-8").rstrip("\n")
        for p in sorted((CORPUS / battery).glob("*.txt"))
    ]


def build_replay_fixtures(out_dir: Path) -> None:
    manifest = corpus_manifest()
    for battery, params in manifest["batteries"].items():
        specs = prompts.battery_specs(**params)
        texts = corpus_texts(battery)
        assert len(texts) == len(specs), battery
        for spec, response in zip(specs, texts):
            llm.write_fixture(out_dir, spec.rendered, response,
                              model=manifest["model"],
                              temperature=manifest["temperature"])


@pytest.fixture(scope="session")
def replay_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("replay-fixtures")
    build_replay_fixtures(out)
    return out


@pytest.fixture(scope="session")
def autompg_csv(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data") / "autompg.csv"
    path.write_text(simdata.autompg_like(), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def autompg_ds(autompg_csv) -> ingest.Dataset:
    return ingest.load_csv(str(autompg_csv), name="autompg")


@pytest.fixture(scope="session")
def life_expectancy_csv(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data-le") / "life_expectancy.csv"
    path.write_text(simdata.life_expectancy_like(), encoding="utf-8")
    return path
