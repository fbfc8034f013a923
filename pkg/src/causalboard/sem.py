"""Linear SEM estimation: per-node least squares on standardized data.

For a recursive (acyclic) model with no latent structure, regressing each
node on its directed parents is the maximum-likelihood SEM estimator, and
z-scored columns make the coefficients standardized path weights.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .graph import CausalModel, Edge
from .ingest import Dataset

# Coefficients inside the dead zone keep sign "unknown" so noise does not
# flip edge colors between refits.
SIGN_DEAD_ZONE = 0.02


class SemError(ValueError):
    """Estimation cannot proceed (collinearity, sample size, staleness)."""


@dataclass(frozen=True)
class EdgeFit:
    edge_id: str
    coefficient: float
    std_error: float


@dataclass(frozen=True)
class FitResult:
    edges: tuple[EdgeFit, ...]
    r_squared: dict[str, float]  # variable id -> R^2 of its regression
    unfitted: tuple[str, ...]  # edge ids skipped (undirected / hypothesized)
    dataset_fingerprint: str
    model_hash: str

    def coefficient(self, edge_id: str) -> float:
        for ef in self.edges:
            if ef.edge_id == edge_id:
                return ef.coefficient
        raise KeyError(f"edge {edge_id} was not fitted")

    def to_dict(self) -> dict:
        return {
            "edges": {
                ef.edge_id: {
                    "coefficient": ef.coefficient,
                    "std_error": ef.std_error,
                }
                for ef in self.edges
            },
            "r_squared": dict(sorted(self.r_squared.items())),
            "unfitted": sorted(self.unfitted),
            "dataset_fingerprint": self.dataset_fingerprint,
            "model_hash": self.model_hash,
        }


def _fittable(m: CausalModel, e: Edge) -> bool:
    # A hypothesized edge becomes fittable the moment both endpoints carry
    # data (column upload promotes the variable); apply_fit then flips its
    # status to data_confirmed.
    if e.orientation != "directed":
        return False
    src, dst = m.variable(e.src), m.variable(e.dst)
    return (
        src.provenance == "measured"
        and dst.provenance == "measured"
        and src.dataset_column is not None
        and dst.dataset_column is not None
    )


def fit(ds: Dataset, m: CausalModel) -> FitResult:
    """OLS of every node on its measured directed parents.

    Undirected and hypothesized edges are skipped and listed as unfitted.
    Per-node regressions are independent; results merge deterministically
    in variable order.
    """
    by_node: dict[str, list[Edge]] = {}
    unfitted: list[str] = []
    for e in m.edges:
        if _fittable(m, e):
            by_node.setdefault(e.dst, []).append(e)
        else:
            unfitted.append(e.id)

    edge_fits: list[EdgeFit] = []
    r2: dict[str, float] = {}
    for v in m.variables:  # deterministic merge order
        incoming = by_node.get(v.id)
        if not incoming:
            continue
        incoming = sorted(incoming, key=lambda e: e.id)
        node_col = m.variable(v.id).dataset_column
        parent_cols = [m.variable(e.src).dataset_column for e in incoming]
        n, p = ds.n, len(parent_cols)
        if n <= p + 1:
            raise SemError(
                f"regression of {v.name!r} on {p} parents needs n > {p + 1}, "
                f"got n={n}"
            )
        y = ds.column(node_col)
        X = np.column_stack([np.ones(n)] + [ds.column(c) for c in parent_cols])
        if np.linalg.matrix_rank(X) < X.shape[1]:
            raise SemError(
                f"collinear parents {sorted(parent_cols)} for {v.name!r}"
            )
        beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
        resid = y - X @ beta
        rss = float(resid @ resid)
        tss = float(((y - y.mean()) ** 2).sum())
        sigma2 = rss / (n - p - 1)
        cov = sigma2 * np.linalg.inv(X.T @ X)
        for j, e in enumerate(incoming):
            edge_fits.append(
                EdgeFit(
                    edge_id=e.id,
                    coefficient=float(beta[j + 1]),
                    std_error=float(np.sqrt(cov[j + 1, j + 1])),
                )
            )
        r2[v.id] = 1.0 - rss / tss if tss > 0 else 1.0

    return FitResult(
        edges=tuple(edge_fits),
        r_squared=r2,
        unfitted=tuple(unfitted),
        dataset_fingerprint=ds.fingerprint(),
        model_hash=m.content_hash(),
    )


def sign_of(coefficient: float) -> str:
    if coefficient > SIGN_DEAD_ZONE:
        return "positive"
    if coefficient < -SIGN_DEAD_ZONE:
        return "negative"
    return "unknown"


def apply_fit(m: CausalModel, fr: FitResult) -> CausalModel:
    """Overwrite edge weights/signs from fitted coefficients.

    Fitted edges become data_confirmed. Coefficients are clamped into
    [-1, 1] on the edge (the FitResult keeps the raw value); categorical
    endpoints keep their categorical sign tag.
    """
    if fr.model_hash != m.content_hash():
        raise SemError("fit was computed for a different model revision")
    fitted = {ef.edge_id: ef.coefficient for ef in fr.edges}
    out = []
    for e in m.edges:
        if e.id not in fitted:
            out.append(e)
            continue
        coeff = max(-1.0, min(1.0, fitted[e.id]))
        sign = sign_of(coeff)
        if e.sign == "categorical":
            sign = "categorical"
        out.append(
            replace(e, weight=coeff, sign=sign, status="data_confirmed")
        )
    return m._with_edges(out)


def fit_and_apply(ds: Dataset, m: CausalModel) -> tuple[CausalModel, FitResult]:
    fr = fit(ds, m)
    return apply_fit(m, fr), fr
