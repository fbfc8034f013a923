"""HTTP service exposing the full workflow to the dashboard and scripts.

Projects are one JSON file each under a project directory. Every request
loads the project from disk, mutates a fresh copy, and saves atomically
before returning, so a failed request leaves the persisted state untouched.
Per-project writes are serialized through a single lock.
"""

from __future__ import annotations

import io
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, File, Form, Header, Request, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import charts, discover, graph, ingest, prompts, sem, store
from .ids import ulid
from .llm import BatteryError, LlmConfig, LlmError, LlmGateway, MissingFixture

ERROR_STATUS = {
    "bad_request": 400,
    "not_found": 404,
    "conflict": 409,
    "parse_failure": 422,
    "llm_failure": 502,
    "internal": 500,
}


class ApiError(Exception):
    def __init__(self, code: str, message: str, detail: Optional[dict] = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail or {}


@dataclass
class Settings:
    project_dir: Path
    llm: LlmConfig = field(default_factory=LlmConfig)
    token: Optional[str] = None
    ui_dir: Optional[Path] = None
    strict: bool = False  # re-verify dataset fingerprints on every load


class Repo:
    """Disk-backed project registry with per-project write serialization."""

    def __init__(self, settings: Settings, gateway: Optional[LlmGateway] = None):
        self.settings = settings
        self.gateway = gateway
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._datasets: dict[str, ingest.Dataset] = {}
        self._idempotency: dict[tuple[str, str], dict] = {}
        self.jobs: dict[str, dict] = {}

    def lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def project_path(self, project_id: str) -> Path:
        default = self.settings.project_dir / f"{project_id}.causalproj.json"
        if default.exists():
            return default
        # project files may carry user-chosen names; match by embedded id
        for candidate in sorted(self.settings.project_dir.glob("*.causalproj.json")):
            try:
                if store.load(candidate).id == project_id:
                    return candidate
            except store.StoreError:
                continue
        return default

    def load(self, project_id: str) -> store.Project:
        path = self.project_path(project_id)
        if not path.exists():
            raise ApiError("not_found", f"no project {project_id}")
        try:
            return store.load(path, strict=self.settings.strict)
        except store.StoreError as exc:
            raise ApiError("conflict", str(exc))

    def save(self, p: store.Project) -> None:
        store.save(p, self.project_path(p.id))

    def dataset(self, p: store.Project) -> ingest.Dataset:
        cached = self._datasets.get(p.dataset_path)
        if cached is not None and cached.fingerprint() == p.dataset_fingerprint:
            return cached
        ds = ingest.load_csv(p.dataset_path)
        if ds.fingerprint() != p.dataset_fingerprint:
            raise ApiError(
                "conflict",
                "dataset on disk no longer matches the project fingerprint",
            )
        self._datasets[p.dataset_path] = ds
        return ds

    def idempotent(self, project_id: str, key: Optional[str]) -> Optional[dict]:
        if key is None:
            return None
        return self._idempotency.get((project_id, key))

    def remember(self, project_id: str, key: Optional[str], response: dict) -> None:
        if key is not None:
            self._idempotency[(project_id, key)] = response


# -- request bodies ----------------------------------------------------------


class DiscoverBody(BaseModel):
    forbidden: list[tuple[str, str]] = []
    required: list[tuple[str, str]] = []


class FindingBody(BaseModel):
    name: str
    strength: str
    direction: Optional[str] = None  # mediators
    sign: Optional[str] = None  # latents
    justification: str = ""
    exchange_key: Optional[str] = None
    span: Optional[tuple[int, int]] = None


class EdgePatch(BaseModel):
    op: str  # direct | remove | add_third | add_latent
    edge: Optional[str] = None
    toward: Optional[str] = None
    sign: Optional[str] = None
    kind: Optional[str] = None  # confounder | mediator (add_third)
    cause: Optional[str] = None
    effect: Optional[str] = None
    target: Optional[str] = None  # add_latent
    cause_level: str = "general"
    effect_level: str = "general"
    finding: Optional[FindingBody] = None


class EnvironmentBody(BaseModel):
    cause_level: str = "general"
    effect_level: str = "general"
    cause: Optional[str] = None  # variable id; defaults to the edge src
    domain: Optional[str] = None


class DebateBody(BaseModel):
    domain: Optional[str] = None


class LatentBody(BaseModel):
    domain: Optional[str] = None


class ChildrenBody(BaseModel):
    selected: Optional[list[str]] = None
    note: str = ""
    split: Optional[dict[str, str]] = None  # {"a": var_id, "b": var_id}


# -- helpers -----------------------------------------------------------------


def _get_model(p: store.Project, model_id: str) -> graph.CausalModel:
    try:
        return p.tree.model(model_id)
    except graph.GraphError:
        raise ApiError("not_found", f"no model {model_id} in project {p.id}")


def _get_edge(m: graph.CausalModel, edge_id: str) -> graph.Edge:
    try:
        return m.edge(edge_id)
    except graph.GraphError:
        raise ApiError("not_found", f"no edge {edge_id} in model {m.id}")


def _get_variable(m: graph.CausalModel, var_id: str) -> graph.Variable:
    try:
        return m.variable(var_id)
    except graph.GraphError:
        raise ApiError("not_found", f"no variable {var_id} in model {m.id}")


def _model_payload(p: store.Project, m: graph.CausalModel) -> dict:
    node = p.tree.nodes[m.id]
    return {
        "model": m.to_dict(),
        "parent": node.parent,
        "children": p.tree.children_of(m.id),
        "note": node.note,
    }


def _rebind_discovered(
    template: graph.CausalModel, found: graph.CausalModel
) -> graph.CausalModel:
    """Graft a discovery result onto an existing tree node: measured
    variables keep their ids (matched by dataset column), edges are fresh."""
    by_column = {
        v.dataset_column: v for v in template.variables if v.dataset_column
    }
    id_map = {}
    for v in found.variables:
        kept = by_column.get(v.dataset_column)
        if kept is None:
            raise ApiError(
                "conflict",
                f"model {template.id} lacks a variable for column "
                f"{v.dataset_column!r}; re-create the project",
            )
        id_map[v.id] = kept.id
    edges = tuple(
        graph.Edge(
            id=ulid(),
            src=id_map[e.src],
            dst=id_map[e.dst],
            orientation=e.orientation,
            sign=e.sign,
            weight=e.weight,
            status=e.status,
            role=e.role,
            origin=e.origin,
        )
        for e in found.edges
    )
    return graph.CausalModel(
        id=template.id,
        name=template.name,
        variables=tuple(by_column.values()),
        edges=edges,
        outcome=template.outcome,
    )


def _finding_from_body(body: FindingBody, kind: str):
    span = body.span or (0, 0)
    if kind == "confounder":
        return prompts.ConfounderFinding(
            name=body.name, strength=body.strength,
            justification=body.justification, span=span,
        )
    if kind == "mediator":
        if body.direction not in prompts.DIRECTIONS:
            raise ApiError("bad_request", "mediator finding needs a direction")
        return prompts.MediatorFinding(
            name=body.name, strength=body.strength,
            justification=body.justification, conditions="",
            direction=body.direction, span=span,
        )
    if kind == "latent":
        if body.sign not in prompts.LATENT_SIGNS:
            raise ApiError("bad_request", "latent finding needs a sign")
        return prompts.LatentFinding(
            name=body.name, strength=body.strength, sign=body.sign,
            justification=body.justification, span=span,
        )
    raise ApiError("bad_request", f"unknown finding kind {kind!r}")


# -- app factory ---------------------------------------------------------------


def create_app(settings: Settings, gateway: Optional[LlmGateway] = None) -> FastAPI:
    settings.project_dir.mkdir(parents=True, exist_ok=True)
    if gateway is None:
        gateway = LlmGateway(settings.llm)
    repo = Repo(settings, gateway)
    app = FastAPI(title="causalboard", version="0.1.0")
    app.state.repo = repo

    def require_token(authorization: Optional[str] = Header(default=None)) -> None:
        if settings.token is None:
            return
        if authorization != f"Bearer {settings.token}":
            raise ApiError("bad_request", "missing or invalid bearer token")

    guarded = [Depends(require_token)]

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=ERROR_STATUS.get(exc.code, 500),
            content={"error": {"code": exc.code, "message": exc.message,
                               "detail": exc.detail}},
        )

    @app.exception_handler(Exception)
    async def fallback_handler(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"error": {"code": "internal", "message": str(exc),
                               "detail": {}}},
        )

    @app.get("/config")
    def get_config() -> dict:
        return {
            "llm_mode": settings.llm.mode,
            "model": settings.llm.model,
            "version": app.version,
            "theme": {
                "grey": charts.DEFAULT_THEME.grey,
                "magenta": charts.DEFAULT_THEME.magenta,
                "skyblue": charts.DEFAULT_THEME.skyblue,
                "positive_edge": charts.DEFAULT_THEME.positive_edge,
                "negative_edge": charts.DEFAULT_THEME.negative_edge,
            },
        }

    @app.post("/projects", dependencies=guarded)
    def create_project(
        name: str = Form(...),
        domain: str = Form(default=""),
        csv: UploadFile = File(...),
    ) -> dict:
        try:
            text = csv.file.read().decode("utf-8")
        except UnicodeDecodeError:
            raise ApiError("bad_request", "CSV upload must be UTF-8")
        project_id = ulid()
        data_path = settings.project_dir / f"{project_id}-data.csv"
        try:
            ds = ingest.load_csv_text(text, str(data_path), name=name)
        except ingest.IngestError as exc:
            raise ApiError("bad_request", str(exc))
        data_path.write_text(text, encoding="utf-8")

        variables = tuple(
            graph.Variable(
                id=ulid(), name=c.name, kind=c.kind, provenance="measured",
                dataset_column=c.name,
            )
            for c in ds.columns
        )
        root = graph.CausalModel(
            id=ulid(), name=f"{name} (root)", variables=variables, edges=())
        p = store.Project(
            name=name,
            dataset_path=str(data_path),
            dataset_fingerprint=ds.fingerprint(),
            tree=graph.ModelTree.with_root(root),
            domain=domain,
            fixtures_dir=settings.llm.fixtures_dir,
            id=project_id,
        )
        p.append_audit("api", "create_project", {"name": name})
        repo.save(p)
        report = ds.report
        return {
            "project": p.id,
            "root_model": root.id,
            "n": ds.n,
            "columns": [
                {"name": c.name, "kind": c.kind} for c in ds.columns
            ],
            "drop_report": {
                "rows_total": report.rows_total if report else ds.n,
                "rows_dropped": report.rows_dropped if report else 0,
            },
        }

    @app.get("/projects/{pid}", dependencies=guarded)
    def get_project(pid: str) -> dict:
        p = repo.load(pid)
        return {
            "project": p.id,
            "name": p.name,
            "domain": p.domain,
            "dataset_path": p.dataset_path,
            "tree": {
                "root": p.tree.root,
                "nodes": {
                    mid: {
                        "name": node.model.name,
                        "parent": node.parent,
                        "note": node.note,
                        "n_variables": len(node.model.variables),
                        "n_edges": len(node.model.edges),
                    }
                    for mid, node in sorted(p.tree.nodes.items())
                },
            },
        }

    @app.get("/projects/{pid}/models/{mid}", dependencies=guarded)
    def get_model(pid: str, mid: str) -> dict:
        p = repo.load(pid)
        return _model_payload(p, _get_model(p, mid))

    @app.post("/projects/{pid}/models/{mid}/discover", dependencies=guarded)
    def discover_model(pid: str, mid: str, body: DiscoverBody) -> dict:
        with repo.lock(pid):
            p = repo.load(pid)
            template = _get_model(p, mid)
            ds = repo.dataset(p)
            try:
                result = discover.ges_search(
                    ds,
                    forbidden=set(map(tuple, body.forbidden)),
                    required=set(map(tuple, body.required)),
                )
            except discover.DiscoveryError as exc:
                raise ApiError("bad_request", str(exc))
            model = _rebind_discovered(template, result.cpdag)
            try:
                model, fit_result = sem.fit_and_apply(ds, model)
            except sem.SemError as exc:
                raise ApiError("conflict", f"SEM refresh failed: {exc}")
            p.tree.replace_model(model)
            p.append_audit("api", "discover", {
                "model": mid,
                "forbidden": sorted(map(list, body.forbidden)),
                "required": sorted(map(list, body.required)),
            })
            repo.save(p)
        return {
            "total_bic": result.total_bic,
            "trace": [
                {"move": kind, "src": s, "dst": d, "delta": delta}
                for kind, s, d, delta in result.trace
            ],
            "fit": fit_result.to_dict(),
            **_model_payload(p, model),
        }

    @app.patch("/projects/{pid}/models/{mid}/edges", dependencies=guarded)
    def patch_edges(
        pid: str,
        mid: str,
        body: EdgePatch,
        idempotency_key: Optional[str] = Header(default=None),
    ) -> dict:
        replayed = repo.idempotent(pid, idempotency_key)
        if replayed is not None:
            return replayed
        with repo.lock(pid):
            p = repo.load(pid)
            m = _get_model(p, mid)
            response = _apply_patch(repo, p, m, body)
            repo.save(p)
        repo.remember(pid, idempotency_key, response)
        return response

    def _apply_patch(repo: Repo, p: store.Project, m: graph.CausalModel,
                     body: EdgePatch) -> dict:
        ds = repo.dataset(p)
        delta_payload: Optional[dict] = None
        delta_note: Optional[str] = None

        def preview_delta(edit: discover.Edit) -> None:
            nonlocal delta_payload, delta_note
            try:
                total, per_node = discover.bic_delta(ds, m, edit)
                delta_payload = {"total": total, "per_node": per_node}
            except discover.NoDataError as exc:
                delta_note = str(exc)
            except discover.DiscoveryError as exc:
                delta_note = str(exc)

        if body.op == "direct":
            if body.edge is None or body.toward is None or body.sign is None:
                raise ApiError("bad_request", "direct needs edge, toward, sign")
            _get_edge(m, body.edge)
            _get_variable(m, body.toward)
            preview_delta(discover.Edit(kind="direct", edge_id=body.edge,
                                        toward=body.toward))
            try:
                updated = graph.direct_edge(m, body.edge, body.toward, body.sign)
            except graph.CycleError as exc:
                raise ApiError("conflict", str(exc))
            except graph.GraphError as exc:
                raise ApiError("bad_request", str(exc))
        elif body.op == "remove":
            if body.edge is None:
                raise ApiError("bad_request", "remove needs an edge id")
            _get_edge(m, body.edge)
            preview_delta(discover.Edit(kind="remove", edge_id=body.edge))
            updated = graph.remove_edge(m, body.edge)
        elif body.op == "add_third":
            if body.finding is None or body.kind not in ("confounder", "mediator"):
                raise ApiError(
                    "bad_request", "add_third needs kind and finding fields"
                )
            if body.cause is None or body.effect is None:
                raise ApiError("bad_request", "add_third needs cause and effect")
            _get_variable(m, body.cause)
            _get_variable(m, body.effect)
            finding = _finding_from_body(body.finding, body.kind)
            delta_note = "no data for a hypothesized variable"
            try:
                updated = graph.add_third_variable(
                    m, finding, body.cause, body.effect,
                    cause_level=body.cause_level, effect_level=body.effect_level,
                )
            except graph.NameCollisionError as exc:
                raise ApiError("conflict", str(exc))
            except graph.CycleError as exc:
                raise ApiError("conflict", str(exc))
        elif body.op == "add_latent":
            if body.finding is None or body.target is None:
                raise ApiError("bad_request", "add_latent needs target and finding")
            _get_variable(m, body.target)
            finding = _finding_from_body(body.finding, "latent")
            delta_note = "no data for a hypothesized variable"
            try:
                updated = graph.add_latent(m, finding, body.target)
            except graph.NameCollisionError as exc:
                raise ApiError("conflict", str(exc))
            except graph.CycleError as exc:
                raise ApiError("conflict", str(exc))
        else:
            raise ApiError("bad_request", f"unknown op {body.op!r}")

        p.tree.replace_model(updated)
        p.append_audit("api", f"edge_{body.op}", body.model_dump(mode="json"))
        response = _model_payload(p, updated)
        response["bic_delta"] = delta_payload
        if delta_note:
            response["bic_note"] = delta_note
        return response

    # -- battery endpoints -------------------------------------------------

    def _run_specs(specs: list[prompts.PromptSpec]):
        try:
            return gateway.run_battery(specs)
        except MissingFixture as exc:
            raise ApiError("llm_failure", str(exc), {"key": exc.key})
        except BatteryError as exc:
            raise ApiError("llm_failure", f"all prompts failed: {exc}")
        except LlmError as exc:
            raise ApiError("llm_failure", str(exc))

    def _parse_findings(p: store.Project, item, parser):
        """Parse a battery response; on failure, permit one automatic repair
        completion asking for the required tuple format before surfacing the
        original failure. Returns (parse outcome, exchange findings refer to).
        """
        parsed = parser(item.exchange.response)
        if not isinstance(parsed, prompts.ParseFailure):
            return parsed, item.exchange
        repair_text = (
            f"{item.spec.rendered}\n\nYour previous answer was:\n"
            f"{item.exchange.response}\n\n{prompts.REPAIR_PROMPT}"
        )
        try:
            repair_ex = gateway.complete_text(repair_text)
        except LlmError:
            return parsed, item.exchange
        p.record_exchange(repair_ex)
        reparsed = parser(repair_ex.response)
        if isinstance(reparsed, prompts.ParseFailure):
            return parsed, item.exchange
        return reparsed, repair_ex

    def _maybe_async(pid: str, operation: str, fn):
        """Battery work is synchronous in replay mode; live calls can take
        tens of seconds, so they run as a polled job."""
        if settings.llm.mode == "replay":
            return fn()
        job_id = ulid()
        repo.jobs[job_id] = {"status": "pending", "operation": operation}

        def runner():
            try:
                result = fn()
                repo.jobs[job_id] = {
                    "status": "done", "operation": operation, "result": result,
                }
            except ApiError as exc:
                repo.jobs[job_id] = {
                    "status": "error", "operation": operation,
                    "error": {"code": exc.code, "message": exc.message},
                }
            except Exception as exc:
                repo.jobs[job_id] = {
                    "status": "error", "operation": operation,
                    "error": {"code": "internal", "message": str(exc)},
                }

        threading.Thread(target=runner, daemon=True).start()
        return JSONResponse(status_code=202, content={"job": job_id})

    @app.get("/jobs/{job_id}", dependencies=guarded)
    def get_job(job_id: str) -> dict:
        job = repo.jobs.get(job_id)
        if job is None:
            raise ApiError("not_found", f"no job {job_id}")
        return job

    @app.post("/projects/{pid}/models/{mid}/edges/{eid}/debate",
              dependencies=guarded)
    def debate(pid: str, mid: str, eid: str, body: Optional[DebateBody] = None):
        body = body or DebateBody()

        def run() -> dict:
            with repo.lock(pid):
                p = repo.load(pid)
                m = _get_model(p, mid)
                e = _get_edge(m, eid)
                a = m.variable(e.src).name
                b = m.variable(e.dst).name
                domain = body.domain if body.domain is not None else p.domain
                specs = prompts.debate_battery(a, b, domain)
                items = _run_specs(specs)
                ratings: dict[str, prompts.Rating] = {}
                refs: dict[str, charts.JustificationRef] = {}
                justifications = []
                failures = []
                for item in items:
                    if item.exchange is None:
                        failures.append({"key": item.spec.key, "error": item.error})
                        continue
                    p.record_exchange(item.exchange)
                    parsed = prompts.parse_rating(item.exchange.response)
                    if isinstance(parsed, prompts.ParseFailure):
                        failures.append({
                            "key": item.spec.key,
                            "error": f"parse failure: {parsed.reason}",
                            "raw": parsed.raw,
                        })
                        continue
                    ratings[item.spec.key] = parsed
                    refs[item.spec.key] = charts.JustificationRef(
                        exchange_key=item.exchange.key, span=parsed.span,
                        text=parsed.justification,
                    )
                    justifications.append({
                        "text": parsed.justification,
                        "exchange_key": item.exchange.key,
                        "span": list(parsed.span),
                        "spec_key": item.spec.key,
                        "cause": item.spec.cause,
                        "cause_level": item.spec.cause_level,
                        "effect_level": item.spec.effect_level,
                    })
                    p.add_finding(store.Finding(
                        kind="rating", model_id=mid, target_id=eid,
                        exchange_key=item.exchange.key,
                        payload={
                            "spec_key": item.spec.key,
                            "cause": item.spec.cause,
                            "effect": item.spec.effect,
                            "cause_level": item.spec.cause_level,
                            "effect_level": item.spec.effect_level,
                            "value": parsed.value,
                            "span": list(parsed.span),
                        },
                    ))
                if not ratings:
                    raise ApiError(
                        "parse_failure",
                        "no debate rating could be parsed",
                        {"failures": failures},
                    )
                chart = charts.build_debate(specs, ratings, refs)
                verdict = charts.dominance(chart)
                p.append_audit("api", "debate", {"model": mid, "edge": eid})
                repo.save(p)
            return {
                "chart": charts.chart_to_dict(chart),
                "dominance": {
                    "verdict": verdict.verdict,
                    "confounder_likely": verdict.confounder_likely,
                },
                "sign_patterns": {
                    "left": charts.sign_pattern(chart, "left"),
                    "right": charts.sign_pattern(chart, "right"),
                },
                "justifications": justifications,
                "failures": failures,
            }

        return _maybe_async(pid, "debate", run)

    @app.post("/projects/{pid}/models/{mid}/edges/{eid}/environment",
              dependencies=guarded)
    def environment(pid: str, mid: str, eid: str, body: Optional[EnvironmentBody] = None):
        body = body or EnvironmentBody()

        def run() -> dict:
            with repo.lock(pid):
                p = repo.load(pid)
                m = _get_model(p, mid)
                e = _get_edge(m, eid)
                cause_id = body.cause or e.src
                if cause_id not in (e.src, e.dst):
                    raise ApiError("bad_request",
                                   "cause must be an endpoint of the edge")
                effect_id = e.dst if cause_id == e.src else e.src
                cause = m.variable(cause_id).name
                effect = m.variable(effect_id).name
                domain = body.domain if body.domain is not None else p.domain
                conf_specs = prompts.confounder_battery(cause, effect, domain)
                med_specs = prompts.mediator_battery(cause, effect, domain)
                items = _run_specs(conf_specs + med_specs)

                combo = (body.cause_level, body.effect_level)
                confounders: list[prompts.ConfounderFinding] = []
                mediators: list[prompts.MediatorFinding] = []
                justifications = []
                failures = []
                warnings: list[str] = []
                for item in items:
                    if item.exchange is None:
                        failures.append({"key": item.spec.key, "error": item.error})
                        continue
                    p.record_exchange(item.exchange)
                    kind = item.spec.kind
                    parse = (prompts.parse_confounders if kind == "confounder"
                             else prompts.parse_mediators)
                    parsed, source_ex = _parse_findings(p, item, parse)
                    if isinstance(parsed, prompts.ParseFailure):
                        failures.append({
                            "key": item.spec.key,
                            "error": f"parse failure: {parsed.reason}",
                            "raw": parsed.raw,
                        })
                        continue
                    warnings.extend(parsed.warnings)
                    spec_combo = (item.spec.cause_level, item.spec.effect_level)
                    for f in parsed.findings:
                        p.add_finding(store.Finding(
                            kind=kind, model_id=mid, target_id=eid,
                            exchange_key=source_ex.key,
                            payload={
                                "name": f.name,
                                "strength": f.strength,
                                "direction": getattr(f, "direction", None),
                                "justification": f.justification,
                                "span": list(f.span),
                                "cause_level": item.spec.cause_level,
                                "effect_level": item.spec.effect_level,
                            },
                        ))
                        justifications.append({
                            "text": f.justification,
                            "exchange_key": source_ex.key,
                            "span": list(f.span),
                            "name": f.name,
                            "kind": kind,
                            "cause_level": item.spec.cause_level,
                            "effect_level": item.spec.effect_level,
                        })
                        if spec_combo == combo:
                            if kind == "confounder":
                                confounders.append(f)
                            else:
                                mediators.append(f)
                if not confounders and not mediators:
                    raise ApiError(
                        "parse_failure",
                        f"no findings parsed for levels {combo}",
                        {"failures": failures},
                    )
                chart = charts.build_environment(
                    confounders, mediators, cause, effect,
                    cause_level=body.cause_level, effect_level=body.effect_level,
                )
                p.append_audit("api", "environment", {
                    "model": mid, "edge": eid,
                    "cause_level": body.cause_level,
                    "effect_level": body.effect_level,
                })
                repo.save(p)
            return {
                "chart": charts.chart_to_dict(chart),
                "justifications": justifications,
                "warnings": warnings,
                "failures": failures,
            }

        return _maybe_async(pid, "environment", run)

    @app.post("/projects/{pid}/models/{mid}/variables/{vid}/latent",
              dependencies=guarded)
    def latent(pid: str, mid: str, vid: str, body: Optional[LatentBody] = None):
        body = body or LatentBody()

        def run() -> dict:
            with repo.lock(pid):
                p = repo.load(pid)
                m = _get_model(p, mid)
                target = _get_variable(m, vid).name
                domain = body.domain if body.domain is not None else p.domain
                spec = prompts.latent_prompt(target, domain)
                items = _run_specs([spec])
                item = items[0]
                if item.exchange is None:
                    raise ApiError("llm_failure", item.error or "completion failed")
                p.record_exchange(item.exchange)
                parsed, source_ex = _parse_findings(
                    p, item, prompts.parse_latents)
                if isinstance(parsed, prompts.ParseFailure):
                    raise ApiError("parse_failure", parsed.reason,
                                   {"raw": parsed.raw})
                justifications = []
                for f in parsed.findings:
                    p.add_finding(store.Finding(
                        kind="latent", model_id=mid, target_id=vid,
                        exchange_key=source_ex.key,
                        payload={
                            "name": f.name, "strength": f.strength,
                            "sign": f.sign, "justification": f.justification,
                            "span": list(f.span),
                        },
                    ))
                    justifications.append({
                        "text": f.justification,
                        "exchange_key": source_ex.key,
                        "span": list(f.span),
                        "name": f.name,
                        "kind": "latent",
                    })
                chart = charts.build_latent(parsed.findings, target)
                p.append_audit("api", "latent", {"model": mid, "variable": vid})
                repo.save(p)
            return {
                "chart": charts.chart_to_dict(chart),
                "justifications": justifications,
                "warnings": list(parsed.warnings),
            }

        return _maybe_async(pid, "latent", run)

    @app.post("/projects/{pid}/models/{mid}/children", dependencies=guarded)
    def children(pid: str, mid: str, body: ChildrenBody) -> dict:
        with repo.lock(pid):
            p = repo.load(pid)
            _get_model(p, mid)
            warnings: list[str] = []
            if body.split is not None:
                a, b = body.split.get("a"), body.split.get("b")
                if not a or not b:
                    raise ApiError("bad_request", "split needs variable ids a and b")
                try:
                    ab, ba, warnings = p.tree.split_bidirectional(mid, a, b)
                except graph.CycleError as exc:
                    raise ApiError("conflict", str(exc))
                except graph.GraphError as exc:
                    raise ApiError("bad_request", str(exc))
                new_ids = [i for i in (ab, ba) if i is not None]
                op = "split_bidirectional"
            elif body.selected:
                try:
                    child = p.tree.create_child_subgraph(
                        mid, set(body.selected), note=body.note
                    )
                except graph.GraphError as exc:
                    raise ApiError("bad_request", str(exc))
                new_ids = [child]
                op = "create_subgraph"
            else:
                raise ApiError("bad_request", "provide either selected or split")
            p.append_audit("api", op, body.model_dump(mode="json"))
            repo.save(p)
        return {"children": new_ids, "warnings": warnings}

    @app.post("/projects/{pid}/models/{mid}/sem", dependencies=guarded)
    def run_sem(pid: str, mid: str) -> dict:
        with repo.lock(pid):
            p = repo.load(pid)
            m = _get_model(p, mid)
            ds = repo.dataset(p)
            try:
                updated, fr = sem.fit_and_apply(ds, m)
            except sem.SemError as exc:
                raise ApiError("conflict", str(exc))
            p.tree.replace_model(updated)
            p.append_audit("api", "sem", {"model": mid})
            repo.save(p)
        return {"fit": fr.to_dict(), **_model_payload(p, updated)}

    @app.post("/projects/{pid}/dataset/columns", dependencies=guarded)
    def upload_columns(pid: str, csv: UploadFile = File(...)) -> dict:
        with repo.lock(pid):
            p = repo.load(pid)
            try:
                new_text = csv.file.read().decode("utf-8")
            except UnicodeDecodeError:
                raise ApiError("bad_request", "CSV upload must be UTF-8")
            merged_text, added = _merge_columns(
                Path(p.dataset_path).read_text(encoding="utf-8"), new_text
            )
            version = sum(1 for _ in settings.project_dir.glob(f"{pid}-data*.csv"))
            data_path = settings.project_dir / f"{pid}-data-v{version + 1}.csv"
            try:
                ds = ingest.load_csv_text(merged_text, str(data_path), name=p.name)
            except ingest.IngestError as exc:
                raise ApiError("bad_request", str(exc))
            data_path.write_text(merged_text, encoding="utf-8")
            p.dataset_path = str(data_path)
            p.dataset_fingerprint = ds.fingerprint()

            promoted = []
            added_by_name = {c.casefold(): c for c in added}
            for node in p.tree.nodes.values():
                model = node.model
                new_vars = []
                changed = False
                for v in model.variables:
                    col = added_by_name.get(v.name.casefold())
                    if v.provenance == "hypothesized" and col is not None:
                        new_vars.append(graph.Variable(
                            id=v.id, name=v.name,
                            kind=ds.spec_of(col).kind,
                            provenance="measured", dataset_column=col,
                        ))
                        promoted.append({"model": model.id, "variable": v.id,
                                         "column": col})
                        changed = True
                    else:
                        new_vars.append(v)
                if changed:
                    node.model = graph.CausalModel(
                        id=model.id, name=model.name,
                        variables=tuple(new_vars), edges=model.edges,
                        outcome=model.outcome,
                    )
            p.append_audit("api", "upload_columns", {"columns": added})
            repo.save(p)
        return {
            "dataset_path": p.dataset_path,
            "n": ds.n,
            "added_columns": added,
            "promoted": promoted,
        }

    if settings.ui_dir is not None and settings.ui_dir.exists():
        app.mount("/ui", StaticFiles(directory=str(settings.ui_dir), html=True),
                  name="ui")

    return app


def _merge_columns(base_text: str, new_text: str) -> tuple[str, list[str]]:
    """Append uploaded columns to the raw dataset, matching by row order."""
    import csv as csv_mod

    base_rows = list(csv_mod.reader(io.StringIO(base_text)))
    new_rows = list(csv_mod.reader(io.StringIO(new_text)))
    base_rows = [r for r in base_rows if any(c.strip() for c in r)]
    new_rows = [r for r in new_rows if any(c.strip() for c in r)]
    if not new_rows:
        raise ApiError("bad_request", "uploaded CSV is empty")
    if len(new_rows) != len(base_rows):
        raise ApiError(
            "bad_request",
            f"uploaded CSV has {len(new_rows) - 1} data rows; the project "
            f"dataset has {len(base_rows) - 1} (row order must match)",
        )
    added = [h.strip() for h in new_rows[0]]
    existing = {h.strip().casefold() for h in base_rows[0]}
    clash = [c for c in added if c.casefold() in existing]
    if clash:
        raise ApiError("conflict", f"columns already present: {clash}")
    out = io.StringIO()
    writer = csv_mod.writer(out, lineterminator="\n")
    for base, extra in zip(base_rows, new_rows):
        writer.writerow(base + extra)
    return out.getvalue(), added
