#!/usr/bin/env python3
"""Record API responses as JSON fixtures for the dashboard's contract tests.

Runs the service in-process in replay mode (no network), executes the same
flows the dashboard performs, and freezes every response under
frontend/fixtures/.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from causalboard.api import Settings, create_app
from causalboard.llm import LlmConfig
from causalboard import simdata

from make_fixtures import build_replay_fixtures

REPO = Path(__file__).resolve().parent.parent
OUT = REPO / "frontend" / "fixtures"


def save(name: str, payload: dict) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    print(f"recorded {name}")


def names_of(model: dict) -> dict:
    return {v["id"]: v["name"] for v in model["variables"]}


def edge_between(model: dict, a: str, b: str) -> dict:
    nm = names_of(model)
    return next(e for e in model["edges"]
                if {nm[e["src"]], nm[e["dst"]]} == {a, b})


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        replay = tmp_path / "replay"
        build_replay_fixtures(REPO / "fixtures" / "responses", replay)
        settings = Settings(
            project_dir=tmp_path / "projects",
            llm=LlmConfig(mode="replay", fixtures_dir=str(replay)),
        )
        client = TestClient(create_app(settings))

        save("config.json", client.get("/config").json())

        # car project: discover, debate, environment, accept Torque mediator
        created = client.post(
            "/projects",
            data={"name": "cars", "domain": "automotive engineering"},
            files={"csv": ("autompg.csv", simdata.autompg_like().encode(),
                           "text/csv")},
        ).json()
        pid, mid = created["project"], created["root_model"]
        discovered = client.post(f"/projects/{pid}/models/{mid}/discover",
                                 json={}).json()
        model = discovered["model"]
        save("car_model.json", client.get(
            f"/projects/{pid}/models/{mid}").json())
        save("car_project.json", client.get(f"/projects/{pid}").json())

        e_cd = edge_between(model, "cylinders", "displacement")
        save("car_debate.json", client.post(
            f"/projects/{pid}/models/{mid}/edges/{e_cd['id']}/debate",
            json={}).json())

        e_wa = edge_between(model, "weight", "acceleration")
        save("car_environment.json", client.post(
            f"/projects/{pid}/models/{mid}/edges/{e_wa['id']}/environment",
            json={"cause_level": "higher", "effect_level": "lower"}).json())

        ids = {n: v for v, n in names_of(model).items()}
        save("car_patch_torque.json", client.patch(
            f"/projects/{pid}/models/{mid}/edges",
            json={
                "op": "add_third", "kind": "mediator",
                "cause": ids["weight"], "effect": ids["acceleration"],
                "cause_level": "higher", "effect_level": "lower",
                "finding": {"name": "Torque", "strength": "strong",
                            "direction": "positive"},
            }).json())

        # health project: PFPH/LE debate and the latent factors chart
        le = client.post(
            "/projects",
            data={"name": "health", "domain": "public health"},
            files={"csv": ("life_expectancy.csv",
                           simdata.life_expectancy_like().encode(),
                           "text/csv")},
        ).json()
        lpid, lmid = le["project"], le["root_model"]
        lmodel = client.post(f"/projects/{lpid}/models/{lmid}/discover",
                             json={}).json()["model"]
        save("le_project.json", client.get(f"/projects/{lpid}").json())
        save("le_model.json", client.get(
            f"/projects/{lpid}/models/{lmid}").json())

        e_pl = edge_between(lmodel, "percent fair or poor health",
                            "life expectancy")
        save("le_debate.json", client.post(
            f"/projects/{lpid}/models/{lmid}/edges/{e_pl['id']}/debate",
            json={}).json())

        vid = next(v["id"] for v in lmodel["variables"]
                   if v["name"] == "primary care physician rate")
        save("le_latent.json", client.post(
            f"/projects/{lpid}/models/{lmid}/variables/{vid}/latent",
            json={}).json())


if __name__ == "__main__":
    main()
