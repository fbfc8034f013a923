"""Command-line interface mirroring the HTTP API.

Commands that touch a project route through the same FastAPI app that
`serve` exposes (run in-process), so CLI and HTTP behavior cannot drift.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import charts, discover, graph, ingest, store
from .api import Settings, create_app
from .ids import ulid
from .llm import LlmConfig


def _llm_config(args) -> LlmConfig:
    return LlmConfig(
        mode=args.llm_mode,
        fixtures_dir=args.fixtures,
        model=getattr(args, "model_name", "gpt-4") or "gpt-4",
    )


def _client(project_file: Path, args):
    from fastapi.testclient import TestClient

    settings = Settings(project_dir=project_file.parent.resolve(),
                        llm=_llm_config(args),
                        strict=getattr(args, "strict", False))
    app = create_app(settings)
    return TestClient(app, raise_server_exceptions=False)


def _project_id(project_file: Path) -> str:
    doc = json.loads(project_file.read_text(encoding="utf-8"))
    return doc["id"]


def _fail_on_error(resp) -> dict:
    body = resp.json()
    if resp.status_code >= 400:
        err = body.get("error", {})
        sys.exit(f"error [{err.get('code', resp.status_code)}]: "
                 f"{err.get('message', body)}")
    return body


def _emit(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _resolve_edge(model: dict, spec: str) -> str:
    """Edge by id, or by 'name_a,name_b' endpoint names."""
    if "," not in spec:
        return spec
    a, b = (s.strip() for s in spec.split(",", 1))
    names = {v["id"]: v["name"] for v in model["variables"]}
    for e in model["edges"]:
        if {names[e["src"]], names[e["dst"]]} == {a, b}:
            return e["id"]
    sys.exit(f"error: no edge between {a!r} and {b!r}")


def _resolve_variable(model: dict, spec: str) -> str:
    for v in model["variables"]:
        if v["id"] == spec or v["name"] == spec:
            return v["id"]
    sys.exit(f"error: no variable {spec!r}")


def _fetch_model(client, pid: str, mid: str) -> dict:
    return _fail_on_error(client.get(f"/projects/{pid}/models/{mid}"))["model"]


def _model_arg(client, pid: str, args) -> str:
    if args.model:
        return args.model
    doc = _fail_on_error(client.get(f"/projects/{pid}"))
    return doc["tree"]["root"]


# -- commands -----------------------------------------------------------------


def cmd_ingest(args) -> None:
    csv_path = Path(args.csv)
    hints = {}
    for h in args.hint or []:
        name, _, kind = h.rpartition("=")
        hints[name] = kind
    ds = ingest.load_csv(str(csv_path), schema_hints=hints or None,
                         name=args.name or csv_path.stem)
    variables = tuple(
        graph.Variable(id=ulid(), name=c.name, kind=c.kind,
                       provenance="measured", dataset_column=c.name)
        for c in ds.columns
    )
    root = graph.CausalModel(
        id=ulid(), name=f"{ds.name} (root)", variables=variables, edges=())
    project = store.Project(
        name=ds.name,
        dataset_path=str(csv_path.resolve()),
        dataset_fingerprint=ds.fingerprint(),
        tree=graph.ModelTree.with_root(root),
        domain=args.domain,
    )
    project.append_audit("cli", "ingest", {"csv": str(csv_path)})
    out = args.out or f"{project.name}.causalproj.json"
    store.save(project, out)
    print(ingest.summary(ds))
    print(f"project: {out} (id {project.id}, root model {root.id})")


def cmd_discover(args) -> None:
    forbidden = {tuple(f.split(",", 1)) for f in args.forbid or []}
    required = {tuple(r.split(",", 1)) for r in args.require or []}
    if args.project:
        project_file = Path(args.project)
        client = _client(project_file, args)
        pid = _project_id(project_file)
        mid = _model_arg(client, pid, args)
        body = {"forbidden": sorted(forbidden), "required": sorted(required)}
        doc = _fail_on_error(
            client.post(f"/projects/{pid}/models/{mid}/discover", json=body))
        for step in doc["trace"]:
            print(json.dumps(step))
        _emit(doc["model"], args.out)
        return
    if not args.csv:
        sys.exit("error: provide a CSV path or --project")
    ds = ingest.load_csv(args.csv)
    result = discover.ges_search(ds, forbidden=forbidden, required=required)
    for kind, src, dst, delta in result.trace:
        print(json.dumps({"move": kind, "src": src, "dst": dst, "delta": delta}))
    doc = result.cpdag.to_dict()
    doc["total_bic"] = result.total_bic
    _emit(doc, args.out)


def cmd_debate(args) -> None:
    project_file = Path(args.project)
    client = _client(project_file, args)
    pid = _project_id(project_file)
    mid = _model_arg(client, pid, args)
    model = _fetch_model(client, pid, mid)
    eid = _resolve_edge(model, args.edge)
    body = {"domain": args.domain} if args.domain is not None else {}
    doc = _fail_on_error(
        client.post(f"/projects/{pid}/models/{mid}/edges/{eid}/debate",
                    json=body))
    _emit(doc, args.out)


def cmd_environment(args) -> None:
    project_file = Path(args.project)
    client = _client(project_file, args)
    pid = _project_id(project_file)
    mid = _model_arg(client, pid, args)
    model = _fetch_model(client, pid, mid)
    eid = _resolve_edge(model, args.edge)
    body = {"cause_level": args.cause_level, "effect_level": args.effect_level}
    if args.cause:
        body["cause"] = _resolve_variable(model, args.cause)
    if args.domain is not None:
        body["domain"] = args.domain
    doc = _fail_on_error(
        client.post(f"/projects/{pid}/models/{mid}/edges/{eid}/environment",
                    json=body))
    _emit(doc, args.out)


def cmd_latent(args) -> None:
    project_file = Path(args.project)
    client = _client(project_file, args)
    pid = _project_id(project_file)
    mid = _model_arg(client, pid, args)
    model = _fetch_model(client, pid, mid)
    vid = _resolve_variable(model, args.variable)
    body = {"domain": args.domain} if args.domain is not None else {}
    doc = _fail_on_error(
        client.post(f"/projects/{pid}/models/{mid}/variables/{vid}/latent",
                    json=body))
    _emit(doc, args.out)


def cmd_edit(args) -> None:
    project_file = Path(args.project)
    client = _client(project_file, args)
    pid = _project_id(project_file)
    mid = _model_arg(client, pid, args)
    model = _fetch_model(client, pid, mid)
    body: dict = {"op": args.op}
    if args.op in ("direct", "remove"):
        if not args.edge:
            sys.exit("error: --edge required")
        body["edge"] = _resolve_edge(model, args.edge)
        if args.op == "direct":
            if not args.toward or not args.sign:
                sys.exit("error: direct needs --toward and --sign")
            body["toward"] = _resolve_variable(model, args.toward)
            body["sign"] = args.sign
    elif args.op == "add_third":
        if not (args.kind and args.cause and args.effect and args.name
                and args.strength):
            sys.exit("error: add_third needs --kind --cause --effect --name "
                     "--strength")
        body.update(
            kind=args.kind,
            cause=_resolve_variable(model, args.cause),
            effect=_resolve_variable(model, args.effect),
            cause_level=args.cause_level,
            effect_level=args.effect_level,
            finding={"name": args.name, "strength": args.strength,
                     "direction": args.direction},
        )
    elif args.op == "add_latent":
        if not (args.target and args.name and args.strength and args.sign):
            sys.exit("error: add_latent needs --target --name --strength --sign")
        body.update(
            target=_resolve_variable(model, args.target),
            finding={"name": args.name, "strength": args.strength,
                     "sign": args.sign},
        )
    else:
        sys.exit(f"error: unknown op {args.op!r}")
    doc = _fail_on_error(
        client.patch(f"/projects/{pid}/models/{mid}/edges", json=body))
    _emit(doc, args.out)


def cmd_sem(args) -> None:
    project_file = Path(args.project)
    client = _client(project_file, args)
    pid = _project_id(project_file)
    mid = _model_arg(client, pid, args)
    doc = _fail_on_error(client.post(f"/projects/{pid}/models/{mid}/sem"))
    _emit(doc, args.out)


def cmd_render(args) -> None:
    doc = json.loads(Path(args.chart).read_text(encoding="utf-8"))
    if "chart" in doc:
        doc = doc["chart"]
    if doc.get("kind") != args.kind:
        sys.exit(f"error: chart file holds a {doc.get('kind')!r} chart, "
                 f"expected {args.kind!r}")
    chart = charts.chart_from_dict(doc)
    svg = charts.render_svg(chart)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")


def cmd_serve(args) -> None:
    settings = Settings(
        project_dir=Path(args.project_dir).resolve(),
        llm=_llm_config(args),
        token=args.token,
        ui_dir=Path(args.ui_dir).resolve() if args.ui_dir else None,
        strict=args.strict,
    )
    app = create_app(settings)
    if args.describe:
        print(json.dumps(app.openapi(), indent=2, sort_keys=True))
        return
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


def _add_llm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--llm-mode", default="replay",
                   choices=["live", "replay", "record"])
    p.add_argument("--fixtures", default=None, help="fixture directory")
    p.add_argument("--model-name", default="gpt-4", help="chat model name")
    p.add_argument("--strict", action="store_true",
                   help="verify the dataset fingerprint on every load")


def _add_project_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--project", required=True, help="project file path")
    p.add_argument("--model", default=None, help="model id (default: root)")
    p.add_argument("--out", default=None, help="write response JSON here")
    _add_llm_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalboard",
        description="Causal-model development workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a CSV into a new project")
    p.add_argument("csv")
    p.add_argument("--name", default=None)
    p.add_argument("--domain", default="", help="expert domain for prompts")
    p.add_argument("--out", default=None)
    p.add_argument("--hint", action="append",
                   help="column kind override, e.g. --hint origin=categorical")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("discover", help="learn a CPDAG from data")
    p.add_argument("csv", nargs="?", default=None)
    p.add_argument("--project", default=None, help="apply to a project model")
    p.add_argument("--model", default=None)
    p.add_argument("--forbid", action="append", metavar="a,b")
    p.add_argument("--require", action="append", metavar="a,b")
    p.add_argument("--out", default=None)
    _add_llm_flags(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("debate", help="run the 10-prompt relation battery")
    _add_project_flags(p)
    p.add_argument("--edge", required=True, help="edge id or 'name_a,name_b'")
    p.add_argument("--domain", default=None)
    p.set_defaults(func=cmd_debate)

    p = sub.add_parser("environment",
                       help="confounder/mediator batteries for a relation")
    _add_project_flags(p)
    p.add_argument("--edge", required=True)
    p.add_argument("--cause", default=None, help="which endpoint is the cause")
    p.add_argument("--cause-level", default="general",
                   choices=["general", "higher", "lower"])
    p.add_argument("--effect-level", default="general",
                   choices=["general", "higher", "lower"])
    p.add_argument("--domain", default=None)
    p.set_defaults(func=cmd_environment)

    p = sub.add_parser("latent", help="latent-factor prompt for a variable")
    _add_project_flags(p)
    p.add_argument("--variable", required=True, help="variable id or name")
    p.add_argument("--domain", default=None)
    p.set_defaults(func=cmd_latent)

    p = sub.add_parser("edit", help="edit a model's edges")
    _add_project_flags(p)
    p.add_argument("--op", required=True,
                   choices=["direct", "remove", "add_third", "add_latent"])
    p.add_argument("--edge", default=None)
    p.add_argument("--toward", default=None)
    p.add_argument("--sign", default=None,
                   choices=["positive", "negative", "categorical"])
    p.add_argument("--kind", default=None, choices=["confounder", "mediator"])
    p.add_argument("--cause", default=None)
    p.add_argument("--effect", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--cause-level", default="general",
                   choices=["general", "higher", "lower"])
    p.add_argument("--effect-level", default="general",
                   choices=["general", "higher", "lower"])
    p.add_argument("--name", default=None, help="finding name")
    p.add_argument("--strength", default=None,
                   choices=["weak", "medium", "strong"])
    p.add_argument("--direction", default=None,
                   choices=["positive", "negative"])
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("sem", help="fit standardized path coefficients")
    _add_project_flags(p)
    p.set_defaults(func=cmd_sem)

    p = sub.add_parser("render", help="render a chart JSON to SVG")
    p.add_argument("kind", choices=["debate", "environment", "latent"])
    p.add_argument("chart", help="chart JSON file (or full API response)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8722)
    p.add_argument("--project-dir", default=".")
    p.add_argument("--token", default=None)
    p.add_argument("--ui-dir", default=None)
    p.add_argument("--describe", action="store_true",
                   help="print the OpenAPI description and exit")
    _add_llm_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> None:
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
