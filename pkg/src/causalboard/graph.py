"""Causal graph data model: variables, typed edges, models, and the model tree.

Models are immutable values; every edit returns a new model (copy-on-write),
and the directed subgraph of a valid model is always acyclic. The ModelTree
holds graph variants: children are induced subgraphs or direction-split
copies of their parent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Optional

from .ids import ulid

if TYPE_CHECKING:
    from .prompts import ConfounderFinding, LatentFinding, MediatorFinding

# Hypothesized edges carry a fixed prior weight per stated strength; negated
# for negative signs. Keeps dotted-edge rendering and sorting deterministic.
STRENGTH_PRIOR = {"weak": 0.2, "medium": 0.5, "strong": 0.8}

ORIENTATIONS = ("directed", "undirected")
SIGNS = ("positive", "negative", "categorical", "unknown")
STATUSES = ("data_confirmed", "hypothesized")
ROLES = ("plain", "confounder_link", "mediator_link", "latent_link")
ORIGINS = ("algorithm", "user", "llm")
LEVELS = ("general", "higher", "lower")


class GraphError(ValueError):
    """Invalid graph construction or edit."""


class CycleError(GraphError):
    """The edit would create a directed cycle."""


class NameCollisionError(GraphError):
    """A hypothesized variable clashes with an existing variable name."""


@dataclass(frozen=True)
class Variable:
    id: str
    name: str
    kind: str = "continuous"  # continuous | categorical
    provenance: str = "measured"  # measured | hypothesized
    dataset_column: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.provenance == "measured") != (self.dataset_column is not None):
            raise GraphError(
                f"variable {self.name!r}: measured iff dataset_column present"
            )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "kind": self.kind,
            "provenance": self.provenance,
            "dataset_column": self.dataset_column,
        }

    @staticmethod
    def from_dict(d: dict) -> "Variable":
        return Variable(
            id=d["id"],
            name=d["name"],
            kind=d["kind"],
            provenance=d["provenance"],
            dataset_column=d.get("dataset_column"),
        )


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    orientation: str = "directed"
    sign: str = "unknown"
    weight: Optional[float] = None
    status: str = "data_confirmed"
    role: str = "plain"
    origin: str = "algorithm"

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise GraphError("self-loop edges are not allowed")
        if self.orientation not in ORIENTATIONS:
            raise GraphError(f"bad orientation {self.orientation!r}")
        if self.sign not in SIGNS:
            raise GraphError(f"bad sign {self.sign!r}")
        if self.status not in STATUSES:
            raise GraphError(f"bad status {self.status!r}")
        if self.role not in ROLES:
            raise GraphError(f"bad role {self.role!r}")
        if self.origin not in ORIGINS:
            raise GraphError(f"bad origin {self.origin!r}")
        if self.weight is not None:
            if not -1.0 <= self.weight <= 1.0:
                raise GraphError(f"weight {self.weight} outside [-1, 1]")
            if self.sign == "positive" and self.weight < 0:
                raise GraphError("positive edge with negative weight")
            if self.sign == "negative" and self.weight > 0:
                raise GraphError("negative edge with positive weight")

    def pair(self) -> frozenset[str]:
        return frozenset((self.src, self.dst))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "src": self.src,
            "dst": self.dst,
            "orientation": self.orientation,
            "sign": self.sign,
            "weight": self.weight,
            "status": self.status,
            "role": self.role,
            "origin": self.origin,
        }

    @staticmethod
    def from_dict(d: dict) -> "Edge":
        return Edge(
            id=d["id"],
            src=d["src"],
            dst=d["dst"],
            orientation=d["orientation"],
            sign=d["sign"],
            weight=d.get("weight"),
            status=d["status"],
            role=d["role"],
            origin=d["origin"],
        )


def _toposort(node_ids: Iterable[str], directed: Iterable[tuple[str, str]]) -> list[str]:
    """Kahn's algorithm; raises CycleError when no topological order exists."""
    nodes = list(node_ids)
    out: dict[str, list[str]] = {v: [] for v in nodes}
    indeg: dict[str, int] = {v: 0 for v in nodes}
    for src, dst in directed:
        out[src].append(dst)
        indeg[dst] += 1
    frontier = sorted(v for v in nodes if indeg[v] == 0)
    order: list[str] = []
    while frontier:
        v = frontier.pop(0)
        order.append(v)
        for w in sorted(out[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                frontier.append(w)
        frontier.sort()
    if len(order) != len(nodes):
        raise CycleError("directed subgraph contains a cycle")
    return order


@dataclass(frozen=True)
class CausalModel:
    id: str
    name: str
    variables: tuple[Variable, ...]
    edges: tuple[Edge, ...]
    outcome: Optional[str] = None

    def __post_init__(self) -> None:
        var_ids = {v.id for v in self.variables}
        if len(var_ids) != len(self.variables):
            raise GraphError("duplicate variable ids")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise GraphError("duplicate variable names")
        pairs = set()
        for e in self.edges:
            if e.src not in var_ids or e.dst not in var_ids:
                raise GraphError(f"edge {e.id} endpoint missing from variables")
            if e.pair() in pairs:
                raise GraphError(
                    f"more than one edge between {e.src} and {e.dst}"
                )
            pairs.add(e.pair())
        if self.outcome is not None and self.outcome not in var_ids:
            raise GraphError("outcome is not a known variable")
        self.topological_order()  # raises CycleError on a directed cycle

    # -- lookups ---------------------------------------------------------

    def variable(self, var_id: str) -> Variable:
        for v in self.variables:
            if v.id == var_id:
                return v
        raise GraphError(f"unknown variable id {var_id!r}")

    def variable_by_name(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise GraphError(f"unknown variable name {name!r}")

    def edge(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise GraphError(f"unknown edge id {edge_id!r}")

    def edge_between(self, a: str, b: str) -> Optional[Edge]:
        want = frozenset((a, b))
        for e in self.edges:
            if e.pair() == want:
                return e
        return None

    def directed_pairs(self) -> list[tuple[str, str]]:
        return [(e.src, e.dst) for e in self.edges if e.orientation == "directed"]

    def parents_of(self, var_id: str) -> set[str]:
        return {
            e.src
            for e in self.edges
            if e.orientation == "directed" and e.dst == var_id
        }

    def topological_order(self) -> list[str]:
        return _toposort((v.id for v in self.variables), self.directed_pairs())

    # -- identity --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "outcome": self.outcome,
            "variables": [v.to_dict() for v in sorted(self.variables, key=lambda v: v.id)],
            "edges": [e.to_dict() for e in sorted(self.edges, key=lambda e: e.id)],
        }

    @staticmethod
    def from_dict(d: dict) -> "CausalModel":
        return CausalModel(
            id=d["id"],
            name=d["name"],
            outcome=d.get("outcome"),
            variables=tuple(Variable.from_dict(v) for v in d["variables"]),
            edges=tuple(Edge.from_dict(e) for e in d["edges"]),
        )

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode()).hexdigest()

    def _with_edges(self, edges: Iterable[Edge]) -> "CausalModel":
        return replace(self, edges=tuple(edges))


# -- edit operations (all copy-on-write) ----------------------------------


def direct_edge(m: CausalModel, edge_id: str, toward: str, sign: str) -> CausalModel:
    """Direct an undirected edge into `toward`, preserving acyclicity."""
    e = m.edge(edge_id)
    if e.orientation != "undirected":
        raise GraphError(f"edge {edge_id} is already directed")
    if toward not in (e.src, e.dst):
        raise GraphError(f"{toward!r} is not an endpoint of edge {edge_id}")
    src = e.dst if toward == e.src else e.src
    weight = e.weight
    if weight is not None:
        if sign == "positive":
            weight = abs(weight)
        elif sign == "negative":
            weight = -abs(weight)
    directed = replace(
        e, src=src, dst=toward, orientation="directed", sign=sign,
        weight=weight, origin="user",
    )
    out = [directed if x.id == edge_id else x for x in m.edges]
    try:
        return m._with_edges(out)
    except CycleError:
        raise CycleError(
            f"directing {m.variable(src).name} -> {m.variable(toward).name} "
            f"would create a directed cycle"
        ) from None


def remove_edge(m: CausalModel, edge_id: str) -> CausalModel:
    m.edge(edge_id)  # raises on unknown id
    return m._with_edges(e for e in m.edges if e.id != edge_id)


def add_edge(
    m: CausalModel,
    src: str,
    dst: str,
    orientation: str = "directed",
    sign: str = "unknown",
    origin: str = "user",
    status: str = "data_confirmed",
    weight: Optional[float] = None,
    role: str = "plain",
) -> CausalModel:
    """Add a new edge between existing variables (user-drawn networks)."""
    m.variable(src), m.variable(dst)
    if m.edge_between(src, dst) is not None:
        raise GraphError(f"an edge between {src} and {dst} already exists")
    e = Edge(
        id=ulid(), src=src, dst=dst, orientation=orientation, sign=sign,
        weight=weight, status=status, role=role, origin=origin,
    )
    return m._with_edges(m.edges + (e,))


def _level_sign(level: str) -> int:
    if level not in LEVELS:
        raise GraphError(f"bad level {level!r}")
    return -1 if level == "lower" else 1


def _signed(sign_value: int) -> str:
    return "positive" if sign_value > 0 else "negative"


def _hypothesized_variable(m: CausalModel, name: str, kind: str = "continuous") -> Variable:
    for v in m.variables:
        if v.name.lower() == name.lower():
            raise NameCollisionError(
                f"variable named {name!r} already exists; merge manually"
            )
    return Variable(id=ulid(), name=name, kind=kind, provenance="hypothesized")


def add_third_variable(
    m: CausalModel,
    finding: "ConfounderFinding | MediatorFinding",
    cause: str,
    effect: str,
    cause_level: str = "general",
    effect_level: str = "general",
) -> CausalModel:
    """Insert an accepted confounder or mediator as a hypothesized variable.

    A confounder F gains dotted F->cause and F->effect edges of unknown sign.
    A mediator M gains dotted cause->M and M->effect edges whose signs combine
    the finding's direction with the levels of the audited relation.
    """
    m.variable(cause), m.variable(effect)
    prior = STRENGTH_PRIOR[finding.strength]
    new_var = _hypothesized_variable(m, finding.name)

    direction = getattr(finding, "direction", None)
    if direction is None:
        edges = (
            Edge(
                id=ulid(), src=new_var.id, dst=cause, sign="unknown",
                weight=prior, status="hypothesized", role="confounder_link",
                origin="llm",
            ),
            Edge(
                id=ulid(), src=new_var.id, dst=effect, sign="unknown",
                weight=prior, status="hypothesized", role="confounder_link",
                origin="llm",
            ),
        )
    else:
        d = 1 if direction == "positive" else -1
        in_sign = _level_sign(cause_level) * d
        out_sign = d * _level_sign(effect_level)
        edges = (
            Edge(
                id=ulid(), src=cause, dst=new_var.id, sign=_signed(in_sign),
                weight=in_sign * prior, status="hypothesized",
                role="mediator_link", origin="llm",
            ),
            Edge(
                id=ulid(), src=new_var.id, dst=effect, sign=_signed(out_sign),
                weight=out_sign * prior, status="hypothesized",
                role="mediator_link", origin="llm",
            ),
        )

    try:
        return replace(m, variables=m.variables + (new_var,), edges=m.edges + edges)
    except CycleError:
        raise CycleError(
            f"adding {finding.name!r} between {m.variable(cause).name} and "
            f"{m.variable(effect).name} would create a directed cycle"
        ) from None


def add_latent(m: CausalModel, finding: "LatentFinding", target: str) -> CausalModel:
    """Insert an accepted latent factor with one dotted edge onto `target`."""
    m.variable(target)
    prior = STRENGTH_PRIOR[finding.strength]
    sign = finding.sign
    if sign == "negative":
        weight = -prior
    else:
        weight = prior
    kind = "categorical" if sign == "categorical" else "continuous"
    new_var = _hypothesized_variable(m, finding.name, kind=kind)
    edge = Edge(
        id=ulid(), src=new_var.id, dst=target, sign=sign, weight=weight,
        status="hypothesized", role="latent_link", origin="llm",
    )
    return replace(m, variables=m.variables + (new_var,), edges=m.edges + (edge,))


# -- model tree ------------------------------------------------------------


@dataclass
class TreeNode:
    model: CausalModel
    parent: Optional[str]
    note: str = ""


@dataclass
class ModelTree:
    """N-ary tree of causal models. Mutated through this interface only."""

    nodes: dict[str, TreeNode] = field(default_factory=dict)
    root: Optional[str] = None

    @staticmethod
    def with_root(model: CausalModel, note: str = "") -> "ModelTree":
        t = ModelTree()
        t.nodes[model.id] = TreeNode(model=model, parent=None, note=note)
        t.root = model.id
        return t

    def model(self, model_id: str) -> CausalModel:
        if model_id not in self.nodes:
            raise GraphError(f"unknown model id {model_id!r}")
        return self.nodes[model_id].model

    def replace_model(self, model: CausalModel) -> None:
        """Swap in an edited value for an existing tree node (same id)."""
        if model.id not in self.nodes:
            raise GraphError(f"unknown model id {model.id!r}")
        self.nodes[model.id].model = model

    def children_of(self, model_id: str) -> list[str]:
        return sorted(
            mid for mid, n in self.nodes.items() if n.parent == model_id
        )

    def validate(self) -> None:
        if self.root is None or self.root not in self.nodes:
            raise GraphError("tree has no root")
        roots = [mid for mid, n in self.nodes.items() if n.parent is None]
        if roots != [self.root] and set(roots) != {self.root}:
            raise GraphError("tree must have a single root")
        for mid in self.nodes:
            seen = set()
            cur: Optional[str] = mid
            while cur is not None:
                if cur in seen:
                    raise GraphError("cycle in parent links")
                seen.add(cur)
                cur = self.nodes[cur].parent
            if self.root not in seen:
                raise GraphError(f"model {mid} unreachable from root")

    def create_child_subgraph(
        self, parent_id: str, selected: set[str], note: str = ""
    ) -> str:
        """Add the induced subgraph over `selected` as a child model."""
        parent = self.model(parent_id)
        known = {v.id for v in parent.variables}
        unknown = selected - known
        if unknown:
            raise GraphError(f"selected ids not in parent: {sorted(unknown)}")
        if len(selected) < 2:
            raise GraphError("subgraph selection needs at least 2 variables")
        variables = tuple(v for v in parent.variables if v.id in selected)
        edges = tuple(
            e for e in parent.edges if e.src in selected and e.dst in selected
        )
        child = CausalModel(
            id=ulid(),
            name=note or f"{parent.name} (subgraph)",
            variables=variables,
            edges=edges,
            outcome=parent.outcome if parent.outcome in selected else None,
        )
        self.nodes[child.id] = TreeNode(model=child, parent=parent_id, note=note)
        return child.id

    def split_bidirectional(
        self, model_id: str, var_a: str, var_b: str
    ) -> tuple[Optional[str], Optional[str], list[str]]:
        """Fork a model with a user-flagged bidirectional relation a<->b.

        Produces up to two children: one with a->b, one with b->a. A
        direction that would close a cycle is refused with a warning; if
        both directions close cycles the split fails.
        """
        parent = self.model(model_id)
        e = parent.edge_between(var_a, var_b)
        if e is None:
            raise GraphError("no edge between the flagged pair")

        warnings: list[str] = []
        child_ids: list[Optional[str]] = []
        for src, dst in ((var_a, var_b), (var_b, var_a)):
            sign = e.sign
            weight = e.weight
            if e.orientation == "directed" and e.src != src:
                # Mirror of the stored direction: a raw sign/weight carries no
                # meaning for the reversed mechanism.
                sign, weight = "unknown", None
            try:
                directed = replace(e, src=src, dst=dst, orientation="directed",
                                   sign=sign, weight=weight)
                child = CausalModel(
                    id=ulid(),
                    name=f"{parent.name}: {parent.variable(src).name} -> "
                         f"{parent.variable(dst).name}",
                    variables=parent.variables,
                    edges=tuple(directed if x.id == e.id else x for x in parent.edges),
                    outcome=parent.outcome,
                )
            except CycleError:
                warnings.append(
                    f"direction {parent.variable(src).name} -> "
                    f"{parent.variable(dst).name} refused: would create a cycle"
                )
                child_ids.append(None)
                continue
            self.nodes[child.id] = TreeNode(
                model=child, parent=model_id,
                note=f"split: {parent.variable(src).name} -> {parent.variable(dst).name}",
            )
            child_ids.append(child.id)

        if child_ids[0] is None and child_ids[1] is None:
            raise CycleError("both directions of the split create cycles")
        return child_ids[0], child_ids[1], warnings

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "nodes": {
                mid: {
                    "model": n.model.to_dict(),
                    "parent": n.parent,
                    "note": n.note,
                }
                for mid, n in sorted(self.nodes.items())
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "ModelTree":
        t = ModelTree(root=d["root"])
        for mid, n in d["nodes"].items():
            t.nodes[mid] = TreeNode(
                model=CausalModel.from_dict(n["model"]),
                parent=n.get("parent"),
                note=n.get("note", ""),
            )
        t.validate()
        return t


# -- DOT export -------------------------------------------------------------


def _penwidth(weight: Optional[float]) -> str:
    w = abs(weight) if weight is not None else 0.0
    if w >= 0.5:
        return "3.0"
    if w >= 0.2:
        return "2.0"
    return "1.0"


def to_dot(m: CausalModel) -> str:
    """Render a model in Graphviz DOT; hypothesized elements are dotted."""
    lines = [f'digraph "{m.name}" {{']
    for v in sorted(m.variables, key=lambda v: v.name):
        attrs = ['shape=oval', f'label="{v.name}"']
        if v.provenance == "hypothesized":
            attrs.append("style=dotted")
        if m.outcome == v.id:
            attrs.append('color=purple')
        lines.append(f'  "{v.id}" [{", ".join(attrs)}];')
    for e in sorted(m.edges, key=lambda e: e.id):
        attrs = [f"penwidth={_penwidth(e.weight)}"]
        if e.orientation == "undirected":
            attrs.append("dir=none")
        if e.status == "hypothesized":
            attrs.append("style=dotted")
        lines.append(f'  "{e.src}" -> "{e.dst}" [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
