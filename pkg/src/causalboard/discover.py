"""Score-based causal structure learning.

Greedy hill climbing over DAGs with a decomposable Gaussian BIC score:
a forward phase of single-edge insertions, a backward phase of deletions,
then conversion of the resulting DAG to its CPDAG (v-structures plus Meek
rules R1-R4). Also provides BIC-delta feedback for proposed graph edits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .graph import CausalModel, CycleError, Edge, Variable
from .ids import ulid
from .ingest import Dataset

# Keeps local scores finite when a regression is an exact fit.
_MIN_MEAN_RSS = 1e-12

# A move must beat this margin to count as improving: score-equivalent
# DAGs differ only by float jitter, far below any real BIC gain (>= O(1)).
_STRICT_EPS = 1e-3


class DiscoveryError(ValueError):
    """Invalid input to the structure search."""


class CollinearParentsError(DiscoveryError):
    def __init__(self, node: str, parents: tuple[str, ...]):
        super().__init__(
            f"singular design matrix regressing {node!r} on {sorted(parents)}"
        )
        self.node = node
        self.parents = parents


class NoDataError(DiscoveryError):
    """The edit touches a hypothesized variable with no data column."""


@dataclass
class ScoreCache:
    """Memoized local BIC contributions, valid for one dataset fingerprint."""

    fingerprint: str
    entries: dict[tuple[str, tuple[str, ...]], float] = field(default_factory=dict)

    def get(self, node: str, parents: Iterable[str]) -> Optional[float]:
        return self.entries.get((node, tuple(sorted(parents))))

    def put(self, node: str, parents: Iterable[str], score: float) -> None:
        if not math.isfinite(score):
            raise DiscoveryError(f"non-finite local score for {node!r}")
        self.entries[(node, tuple(sorted(parents)))] = score


def local_bic(
    ds: Dataset,
    node: str,
    parents: Iterable[str],
    cache: Optional[ScoreCache] = None,
) -> float:
    """Local BIC of `node` given `parents`: n*ln(RSS/n) + |parents|*ln(n).

    RSS comes from the least-squares regression of node on parents with an
    intercept. Constant terms are dropped; they cancel in all deltas. Lower
    is better.
    """
    parents = tuple(sorted(parents))
    if node in parents:
        raise DiscoveryError(f"{node!r} cannot be its own parent")
    if len(parents) >= ds.n - 1:
        raise DiscoveryError(
            f"{len(parents)} parents for {node!r} with only n={ds.n} rows"
        )
    if cache is not None:
        if cache.fingerprint != ds.fingerprint():
            raise DiscoveryError("score cache belongs to a different dataset")
        hit = cache.get(node, parents)
        if hit is not None:
            return hit

    y = ds.column(node)
    n = ds.n
    if parents:
        X = np.column_stack(
            [np.ones(n)] + [ds.column(p) for p in parents]
        )
        if np.linalg.matrix_rank(X) < X.shape[1]:
            raise CollinearParentsError(node, parents)
        beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
        resid = y - X @ beta
        rss = float(resid @ resid)
    else:
        resid = y - y.mean()
        rss = float(resid @ resid)

    score = n * math.log(max(rss / n, _MIN_MEAN_RSS)) + len(parents) * math.log(n)
    if cache is not None:
        cache.put(node, parents, score)
    return score


def total_bic(
    ds: Dataset,
    parent_sets: dict[str, set[str]],
    cache: Optional[ScoreCache] = None,
) -> float:
    return sum(local_bic(ds, v, ps, cache) for v, ps in parent_sets.items())


# -- greedy DAG search -------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    cpdag: CausalModel
    dag: CausalModel
    total_bic: float
    trace: tuple[tuple[str, str, str, float], ...]  # (move, src, dst, delta)


def _creates_cycle(parents: dict[str, set[str]], src: str, dst: str) -> bool:
    """Would adding src->dst close a directed cycle? (is src reachable from dst)"""
    stack = [dst]
    seen = set()
    while stack:
        v = stack.pop()
        if v == src:
            return True
        if v in seen:
            continue
        seen.add(v)
        stack.extend(c for c, ps in parents.items() if v in ps)
    return False


def ges_search(
    ds: Dataset,
    forbidden: Optional[set[tuple[str, str]]] = None,
    required: Optional[set[tuple[str, str]]] = None,
    cache: Optional[ScoreCache] = None,
) -> SearchResult:
    """Greedy BIC search over DAGs, followed by CPDAG completion.

    Forward phase: from the empty graph (plus required edges), repeatedly
    apply the single insertion that most decreases the total BIC, skipping
    forbidden and cycle-creating ones. Backward phase: repeatedly apply the
    best score-decreasing deletion (required edges are kept). Ties break on
    the lexicographically smallest (src, dst) name pair.
    """
    names = ds.column_names()
    forbidden = forbidden or set()
    required = required or set()
    for a, b in forbidden | required:
        if a not in names or b not in names:
            raise DiscoveryError(f"constraint names unknown column: ({a}, {b})")
    if cache is None:
        cache = ScoreCache(fingerprint=ds.fingerprint())

    conflicts = forbidden & required
    if conflicts:
        raise DiscoveryError(f"edges both forbidden and required: {sorted(conflicts)}")

    parents: dict[str, set[str]] = {v: set() for v in names}
    for a, b in sorted(required):
        parents[b].add(a)
    try:
        _toposort_parents(parents)
    except CycleError:
        raise DiscoveryError("required edges form a directed cycle") from None

    trace: list[tuple[str, str, str, float]] = []

    def local(v: str) -> float:
        return local_bic(ds, v, parents[v], cache)

    # forward: insert edges while the score improves
    while True:
        best: Optional[tuple[float, str, str]] = None
        for dst in names:
            base = local(dst)
            for src in names:
                if src == dst or src in parents[dst] or dst in parents[src]:
                    continue
                if (src, dst) in forbidden:
                    continue
                if _creates_cycle(parents, src, dst):
                    continue
                delta = local_bic(ds, dst, parents[dst] | {src}, cache) - base
                key = (delta, src, dst)
                if delta < 0 and (best is None or key < best):
                    best = key
        if best is None:
            break
        delta, src, dst = best
        parents[dst].add(src)
        trace.append(("add", src, dst, delta))

    # backward: delete edges while the score improves
    while True:
        best = None
        for dst in names:
            if not parents[dst]:
                continue
            base = local(dst)
            for src in sorted(parents[dst]):
                if (src, dst) in required:
                    continue
                delta = local_bic(ds, dst, parents[dst] - {src}, cache) - base
                key = (delta, src, dst)
                if delta < 0 and (best is None or key < best):
                    best = key
        if best is None:
            break
        delta, src, dst = best
        parents[dst].remove(src)
        trace.append(("del", src, dst, delta))

    # repair: greedy insertion order can lock in a wrong orientation whose
    # fix is score-neutral (all DAGs in one equivalence class score alike).
    # Walk the current class via covered-edge reversals and take the best
    # strictly improving move found from any member; stop when the whole
    # class is a local optimum. Bounded for safety; every applied move
    # lowers the score by more than _STRICT_EPS, so the loop terminates.
    for _ in range(50 * len(names) * len(names)):
        move = _best_strict_move(ds, names, parents, forbidden, required, cache)
        if move is None:
            escape = _class_escape(ds, names, parents, forbidden, required, cache)
            if escape is None:
                break
            parents, move = escape
        delta, kind, src, dst = move
        _apply_move(parents, kind, src, dst)
        trace.append((kind, src, dst, delta))

    score = total_bic(ds, parents, cache)
    dag_edges = [(src, dst) for dst in names for src in sorted(parents[dst])]
    oriented = cpdag_orientations(names, dag_edges, keep_directed=required)

    dag = _model_from_edges(ds, dag_edges)
    cpdag = _model_from_orientations(ds, oriented)
    return SearchResult(cpdag=cpdag, dag=dag, total_bic=score, trace=tuple(trace))


def _toposort_parents(parents: dict[str, set[str]]) -> None:
    from .graph import _toposort

    _toposort(parents.keys(), [(s, d) for d, ps in parents.items() for s in ps])


def _apply_move(parents: dict[str, set[str]], kind: str, src: str, dst: str) -> None:
    if kind == "add":
        parents[dst].add(src)
    elif kind == "del":
        parents[dst].remove(src)
    elif kind == "rev":
        parents[dst].remove(src)
        parents[src].add(dst)
    else:
        raise DiscoveryError(f"unknown move kind {kind!r}")


def _best_strict_move(
    ds: Dataset,
    names: list[str],
    parents: dict[str, set[str]],
    forbidden: set[tuple[str, str]],
    required: set[tuple[str, str]],
    cache: ScoreCache,
) -> Optional[tuple[float, str, str, str]]:
    """Best score-decreasing insertion, deletion, or reversal, or None."""
    best: Optional[tuple[float, str, str, str]] = None
    best_key: Optional[tuple[float, str, str, str]] = None

    def consider(delta: float, kind: str, src: str, dst: str) -> None:
        nonlocal best, best_key
        key = (delta, src, dst, kind)
        if delta < -_STRICT_EPS and (best_key is None or key < best_key):
            best = (delta, kind, src, dst)
            best_key = key

    for dst in names:
        base = local_bic(ds, dst, parents[dst], cache)
        for src in names:
            if src == dst:
                continue
            if src not in parents[dst] and dst not in parents[src]:
                if (src, dst) in forbidden:
                    continue
                if _creates_cycle(parents, src, dst):
                    continue
                delta = local_bic(ds, dst, parents[dst] | {src}, cache) - base
                consider(delta, "add", src, dst)
        for src in sorted(parents[dst]):
            if (src, dst) in required:
                continue
            del_delta = local_bic(ds, dst, parents[dst] - {src}, cache) - base
            consider(del_delta, "del", src, dst)
            if (dst, src) in forbidden:
                continue
            parents[dst].discard(src)
            cycle = _creates_cycle(parents, dst, src)
            parents[dst].add(src)
            if cycle:
                continue
            rev_delta = del_delta + (
                local_bic(ds, src, parents[src] | {dst}, cache)
                - local_bic(ds, src, parents[src], cache)
            )
            consider(rev_delta, "rev", src, dst)
    return best


def _covered_reversals(
    parents: dict[str, set[str]],
    forbidden: set[tuple[str, str]],
    required: set[tuple[str, str]],
) -> list[tuple[str, str]]:
    """Edges x->y with Pa(y) = Pa(x) + {x}; reversing one is score-neutral
    and stays inside the Markov equivalence class."""
    out = []
    for dst in sorted(parents):
        for src in sorted(parents[dst]):
            if (src, dst) in required or (dst, src) in forbidden:
                continue
            if parents[dst] == parents[src] | {src}:
                out.append((src, dst))
    return out


def _signature(parents: dict[str, set[str]]) -> tuple:
    return tuple((v, tuple(sorted(ps))) for v, ps in sorted(parents.items()))


_CLASS_WALK_CAP = 256


def _class_escape(
    ds: Dataset,
    names: list[str],
    parents: dict[str, set[str]],
    forbidden: set[tuple[str, str]],
    required: set[tuple[str, str]],
    cache: ScoreCache,
) -> Optional[tuple[dict[str, set[str]], tuple[float, str, str, str]]]:
    """Breadth-first walk over the equivalence class of the current DAG,
    returning the first-best (member, strict move) pair, or None when no
    member of the class admits a strictly improving move."""
    start = {v: set(ps) for v, ps in parents.items()}
    seen = {_signature(start)}
    queue = [start]
    best: Optional[tuple[dict[str, set[str]], tuple[float, str, str, str]]] = None
    while queue and len(seen) <= _CLASS_WALK_CAP:
        state = queue.pop(0)
        move = _best_strict_move(ds, names, state, forbidden, required, cache)
        if move is not None and (best is None or move < best[1]):
            best = (state, move)
        for src, dst in _covered_reversals(state, forbidden, required):
            nxt = {v: set(ps) for v, ps in state.items()}
            _apply_move(nxt, "rev", src, dst)
            sig = _signature(nxt)
            if sig not in seen:
                seen.add(sig)
                queue.append(nxt)
    return best


# -- CPDAG completion --------------------------------------------------------


def cpdag_orientations(
    nodes: list[str],
    dag_edges: list[tuple[str, str]],
    keep_directed: Optional[set[tuple[str, str]]] = None,
) -> dict[frozenset, Optional[tuple[str, str]]]:
    """Map each skeleton pair to its compelled direction, or None if reversible.

    Starts from the DAG's v-structures (x -> z <- y with x, y non-adjacent),
    keeps any user-required directions, and closes under Meek rules R1-R4.
    """
    adj: dict[str, set[str]] = {v: set() for v in nodes}
    parents: dict[str, set[str]] = {v: set() for v in nodes}
    for s, d in dag_edges:
        adj[s].add(d)
        adj[d].add(s)
        parents[d].add(s)

    directed: dict[frozenset, tuple[str, str]] = {}

    def orient(s: str, d: str) -> bool:
        key = frozenset((s, d))
        if key in directed:
            return False
        directed[key] = (s, d)
        return True

    for z in nodes:
        for x in parents[z]:
            for y in parents[z]:
                if x < y and y not in adj[x] and x not in adj[y]:
                    orient(x, z)
                    orient(y, z)
    for s, d in keep_directed or set():
        if d in adj.get(s, set()):
            orient(s, d)

    def is_directed(s: str, d: str) -> bool:
        return directed.get(frozenset((s, d))) == (s, d)

    def is_undirected(a: str, b: str) -> bool:
        return b in adj[a] and frozenset((a, b)) not in directed

    changed = True
    while changed:
        changed = False
        for a in nodes:
            for b in adj[a]:
                if not is_undirected(a, b):
                    continue
                # R1: c -> a, a - b, c and b non-adjacent  =>  a -> b
                if any(
                    is_directed(c, a) and b not in adj[c]
                    for c in adj[a] if c != b
                ):
                    changed |= orient(a, b)
                    continue
                # R2: a -> c -> b and a - b  =>  a -> b
                if any(
                    is_directed(a, c) and is_directed(c, b)
                    for c in adj[a] & adj[b]
                ):
                    changed |= orient(a, b)
                    continue
                # R3: a - c, a - d, c -> b, d -> b, c and d non-adjacent => a -> b
                partners = [
                    c for c in adj[a] & adj[b]
                    if is_undirected(a, c) and is_directed(c, b)
                ]
                if any(
                    c2 not in adj[c1] and c1 != c2
                    for c1 in partners for c2 in partners
                ):
                    changed |= orient(a, b)
                    continue
                # R4: chains a - c -> d and c -> d -> b, with c and b
                # non-adjacent and d adjacent to a  =>  a -> b
                if any(
                    is_undirected(a, c) and is_directed(c, d) and b not in adj[c]
                    for d in adj[a] & adj[b]
                    if is_directed(d, b)
                    for c in adj[a] & adj[d]
                    if c != b
                ):
                    changed |= orient(a, b)
                    continue

    out: dict[frozenset, Optional[tuple[str, str]]] = {}
    for s, d in dag_edges:
        key = frozenset((s, d))
        out[key] = directed.get(key)
    return out


def _edge_sign_for(ds: Dataset, a: str, b: str) -> str:
    if ds.spec_of(a).kind == "categorical" or ds.spec_of(b).kind == "categorical":
        return "categorical"
    return "unknown"


def _measured_variables(ds: Dataset) -> dict[str, Variable]:
    out = {}
    for c in ds.columns:
        out[c.name] = Variable(
            id=ulid(), name=c.name, kind=c.kind, provenance="measured",
            dataset_column=c.name,
        )
    return out

def _model_from_edges(ds: Dataset, dag_edges: list[tuple[str, str]]) -> CausalModel:
    variables = _measured_variables(ds)
    edges = tuple(
        Edge(
            id=ulid(), src=variables[s].id, dst=variables[d].id,
            orientation="directed", sign=_edge_sign_for(ds, s, d),
            status="data_confirmed", origin="algorithm",
        )
        for s, d in sorted(dag_edges)
    )
    return CausalModel(
        id=ulid(), name=f"{ds.name} (dag)",
        variables=tuple(variables[n] for n in ds.column_names()), edges=edges,
    )


def _model_from_orientations(
    ds: Dataset, oriented: dict[frozenset, Optional[tuple[str, str]]]
) -> CausalModel:
    variables = _measured_variables(ds)
    edges = []
    for key in sorted(oriented, key=lambda k: tuple(sorted(k))):
        direction = oriented[key]
        if direction is None:
            a, b = sorted(key)
            edges.append(
                Edge(
                    id=ulid(), src=variables[a].id, dst=variables[b].id,
                    orientation="undirected", sign=_edge_sign_for(ds, a, b),
                    status="data_confirmed", origin="algorithm",
                )
            )
        else:
            s, d = direction
            edges.append(
                Edge(
                    id=ulid(), src=variables[s].id, dst=variables[d].id,
                    orientation="directed", sign=_edge_sign_for(ds, s, d),
                    status="data_confirmed", origin="algorithm",
                )
            )
    return CausalModel(
        id=ulid(), name=f"{ds.name} (cpdag)",
        variables=tuple(variables[n] for n in ds.column_names()), edges=tuple(edges),
    )


# -- BIC deltas for proposed edits -------------------------------------------


@dataclass(frozen=True)
class Edit:
    """A proposed structural edit, for BIC feedback before committing."""

    kind: str  # "direct" | "remove" | "add"
    edge_id: Optional[str] = None
    src: Optional[str] = None  # variable ids
    dst: Optional[str] = None
    toward: Optional[str] = None


def _column_of(m: CausalModel, var_id: str) -> str:
    v = m.variable(var_id)
    if v.provenance != "measured" or v.dataset_column is None:
        raise NoDataError(f"variable {v.name!r} has no data column")
    return v.dataset_column


def _measured_parent_columns(m: CausalModel, var_id: str) -> set[str]:
    cols = set()
    for p in m.parents_of(var_id):
        v = m.variable(p)
        if v.provenance == "measured" and v.dataset_column is not None:
            cols.add(v.dataset_column)
        else:
            raise NoDataError(
                f"parent {v.name!r} of {m.variable(var_id).name!r} has no data"
            )
    return cols


def bic_delta(
    ds: Dataset,
    m: CausalModel,
    edit: Edit,
    cache: Optional[ScoreCache] = None,
) -> tuple[float, dict[str, float]]:
    """Exact BIC change of an edit, from the affected nodes only.

    By decomposability only nodes whose parent sets change contribute.
    Returns (total delta, per-node deltas keyed by variable id); negative
    means the edit improves the score.
    """
    if cache is None:
        cache = ScoreCache(fingerprint=ds.fingerprint())

    if edit.kind == "direct":
        e = m.edge(edit.edge_id or "")
        if e.orientation != "undirected":
            raise DiscoveryError("direct edit needs an undirected edge")
        if edit.toward not in (e.src, e.dst):
            raise DiscoveryError("`toward` must be an endpoint of the edge")
        gained = e.src if edit.toward == e.dst else e.dst
        changes = {edit.toward: (_column_of(m, gained), True)}
    elif edit.kind == "remove":
        e = m.edge(edit.edge_id or "")
        if e.orientation != "directed":
            return 0.0, {}
        changes = {e.dst: (_column_of(m, e.src), False)}
    elif edit.kind == "add":
        if edit.src is None or edit.dst is None:
            raise DiscoveryError("add edit needs src and dst")
        if m.edge_between(edit.src, edit.dst) is not None:
            raise DiscoveryError("an edge already exists between the pair")
        changes = {edit.dst: (_column_of(m, edit.src), True)}
    else:
        raise DiscoveryError(f"unsupported edit kind {edit.kind!r}")

    per_node: dict[str, float] = {}
    for var_id, (parent_col, added) in changes.items():
        node_col = _column_of(m, var_id)
        before = _measured_parent_columns(m, var_id)
        after = (before | {parent_col}) if added else (before - {parent_col})
        if before == after:
            per_node[var_id] = 0.0
            continue
        per_node[var_id] = local_bic(ds, node_col, after, cache) - local_bic(
            ds, node_col, before, cache
        )
    return sum(per_node.values()), per_node


def model_total_bic(ds: Dataset, m: CausalModel, cache: Optional[ScoreCache] = None) -> float:
    """Total BIC of a model's measured directed subgraph."""
    parent_sets = {}
    for v in m.variables:
        if v.provenance != "measured" or v.dataset_column is None:
            continue
        parent_sets[v.dataset_column] = _measured_parent_columns(m, v.id)
    return total_bic(ds, parent_sets, cache)
