"""Render-ready chart models and a deterministic SVG renderer.

Three chart kinds summarize a relation audit: the debate chart (ten ratings
as a bidirectional bar chart), the relation-environment chart (confounders
and mediators around a cause/effect pair), and the latent-factors chart
(positive influences above the target, negative below). Byte-identical SVG
for identical inputs makes the renders golden-testable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence
from xml.sax.saxutils import escape

from .prompts import (
    ConfounderFinding,
    LatentFinding,
    MediatorFinding,
    PromptSpec,
    Rating,
    LEVEL_COMBOS,
)

# Quantified chart readings; both are deliberate, config-exposed constants.
DOMINANCE_MIN_SCORE = 3
DOMINANCE_GAP = 1
SIGN_MARGIN = 1

_STRENGTH_ORDER = {"strong": 0, "medium": 1, "weak": 2}


class ChartError(ValueError):
    """Chart input does not satisfy its structural contract."""


@dataclass(frozen=True)
class Theme:
    grey: str = "#9e9e9e"
    magenta: str = "#d81b60"
    skyblue: str = "#64b5f6"
    red_shades: tuple[tuple[str, str], ...] = (
        ("weak", "#ffcdd2"), ("medium", "#e57373"), ("strong", "#d32f2f"),
    )
    green_shades: tuple[tuple[str, str], ...] = (
        ("weak", "#c8e6c9"), ("medium", "#81c784"), ("strong", "#388e3c"),
    )
    blue_shades: tuple[tuple[str, str], ...] = (
        ("weak", "#bbdefb"), ("medium", "#64b5f6"), ("strong", "#1976d2"),
    )
    yellow_shades: tuple[tuple[str, str], ...] = (
        ("weak", "#fff9c4"), ("medium", "#fff176"), ("strong", "#fbc02d"),
    )
    # Resolves the figure-vs-text color conflict in favor of the encoding
    # scheme: positive edges red, negative green. Flip for the alternative.
    positive_edge: str = "#c62828"
    negative_edge: str = "#2e7d32"

    def shade(self, family: str, strength: str) -> str:
        table = {
            "red": self.red_shades,
            "green": self.green_shades,
            "blue": self.blue_shades,
            "yellow": self.yellow_shades,
        }[family]
        return dict(table)[strength]


DEFAULT_THEME = Theme()


@dataclass(frozen=True)
class JustificationRef:
    exchange_key: str
    span: tuple[int, int]
    text: str = ""


@dataclass(frozen=True)
class Bar:
    score: int  # 0 = unavailable
    color_class: str  # grey | magenta | skyblue
    available: bool = True
    justification: Optional[JustificationRef] = None


@dataclass(frozen=True)
class BarPair:
    cause_level: str
    effect_level: str
    left: Bar
    right: Bar


@dataclass(frozen=True)
class DebateChartData:
    left_var: str
    right_var: str
    rows: tuple[BarPair, ...]
    schema: int = 1

    def __post_init__(self) -> None:
        if len(self.rows) != len(LEVEL_COMBOS):
            raise ChartError(f"debate chart needs {len(LEVEL_COMBOS)} rows")
        for i, row in enumerate(self.rows):
            expect = "grey" if i == 0 else (
                "magenta" if row.cause_level == "higher" else "skyblue"
            )
            for bar in (row.left, row.right):
                if bar.color_class != expect:
                    raise ChartError(
                        f"row {i} bar has class {bar.color_class}, "
                        f"expected {expect}"
                    )
                if not 0 <= bar.score <= 4:
                    raise ChartError(f"bar score {bar.score} outside 0..4")


@dataclass(frozen=True)
class ChartFinding:
    name: str
    strength: str
    direction: Optional[str] = None  # mediators: positive | negative
    justification: Optional[JustificationRef] = None


@dataclass(frozen=True)
class EnvironmentChartData:
    cause: str
    effect: str
    cause_level: str
    effect_level: str
    confounders: tuple[ChartFinding, ...]
    mediators: tuple[ChartFinding, ...]
    schema: int = 1


@dataclass(frozen=True)
class LatentChartData:
    target: str
    positives: tuple[ChartFinding, ...]
    negatives: tuple[ChartFinding, ...]
    categoricals: tuple[ChartFinding, ...] = ()
    schema: int = 1


@dataclass(frozen=True)
class DominanceVerdict:
    verdict: str  # suggest_left_to_right | suggest_right_to_left | inconclusive
    confounder_likely: bool = False


# -- builders ----------------------------------------------------------------


def _bar_color(row_index: int, cause_level: str) -> str:
    if row_index == 0:
        return "grey"
    return "magenta" if cause_level == "higher" else "skyblue"


def build_debate(
    specs: Sequence[PromptSpec],
    ratings: Mapping[str, Rating],
    refs: Optional[Mapping[str, JustificationRef]] = None,
) -> DebateChartData:
    """Assemble the ten-rating debate chart from a battery's parsed results.

    Missing ratings render as flagged zero-length stubs rather than being
    dropped, so the analyst sees the gap.
    """
    if len(specs) != 2 * len(LEVEL_COMBOS):
        raise ChartError("a debate battery has exactly 10 specs")
    left_var, right_var = specs[0].cause, specs[0].effect or ""
    refs = refs or {}

    def find_spec(cause: str, combo: tuple[str, str]) -> PromptSpec:
        for s in specs:
            if s.cause == cause and (s.cause_level, s.effect_level) == combo:
                return s
        raise ChartError(f"battery is missing the {cause}/{combo} spec")

    rows = []
    for i, combo in enumerate(LEVEL_COMBOS):
        bars = {}
        for side, cause in (("left", left_var), ("right", right_var)):
            s = find_spec(cause, combo)
            rating = ratings.get(s.key)
            bars[side] = Bar(
                score=rating.value if rating is not None else 0,
                color_class=_bar_color(i, combo[0]),
                available=rating is not None,
                justification=refs.get(s.key),
            )
        rows.append(
            BarPair(
                cause_level=combo[0], effect_level=combo[1],
                left=bars["left"], right=bars["right"],
            )
        )
    return DebateChartData(left_var=left_var, right_var=right_var, rows=tuple(rows))


def dominance(d: DebateChartData) -> DominanceVerdict:
    """Read the general-row bars: a clear winner suggests the direction;
    two weak bars raise the likelihood of a confounder."""
    s_left = d.rows[0].left.score
    s_right = d.rows[0].right.score
    if s_left >= DOMINANCE_MIN_SCORE and s_left - s_right >= DOMINANCE_GAP:
        return DominanceVerdict("suggest_left_to_right")
    if s_right >= DOMINANCE_MIN_SCORE and s_right - s_left >= DOMINANCE_GAP:
        return DominanceVerdict("suggest_right_to_left")
    return DominanceVerdict(
        "inconclusive", confounder_likely=max(s_left, s_right) <= 2
    )


def sign_pattern(d: DebateChartData, direction: str) -> str:
    """Level-consistency reading for one side: aligned levels (hi->hi, lo->lo)
    beating crossed levels signals positive causation, and vice versa."""
    if direction not in ("left", "right"):
        raise ChartError("direction must be 'left' or 'right'")
    by_combo = {
        (r.cause_level, r.effect_level): getattr(r, direction).score
        for r in d.rows[1:]
    }
    aligned = by_combo[("higher", "higher")] + by_combo[("lower", "lower")]
    crossed = by_combo[("higher", "lower")] + by_combo[("lower", "higher")]
    if aligned > crossed + SIGN_MARGIN:
        return "positive"
    if crossed > aligned + SIGN_MARGIN:
        return "negative"
    return "indeterminate"


def _sorted_findings(findings: Sequence[ChartFinding]) -> tuple[ChartFinding, ...]:
    return tuple(
        sorted(findings, key=lambda f: (_STRENGTH_ORDER[f.strength], f.name))
    )


def build_environment(
    confounders: Sequence[ConfounderFinding],
    mediators: Sequence[MediatorFinding],
    cause: str,
    effect: str,
    cause_level: str = "general",
    effect_level: str = "general",
) -> EnvironmentChartData:
    conf = [
        ChartFinding(name=f.name, strength=f.strength)
        for f in confounders
    ]
    med = [
        ChartFinding(name=f.name, strength=f.strength, direction=f.direction)
        for f in mediators
    ]
    return EnvironmentChartData(
        cause=cause,
        effect=effect,
        cause_level=cause_level,
        effect_level=effect_level,
        confounders=_sorted_findings(conf),
        mediators=_sorted_findings(med),
    )


def build_latent(
    latents: Sequence[LatentFinding], target: str
) -> LatentChartData:
    groups: dict[str, list[ChartFinding]] = {"positive": [], "negative": [],
                                             "categorical": []}
    for f in latents:
        groups[f.sign].append(ChartFinding(name=f.name, strength=f.strength))
    return LatentChartData(
        target=target,
        positives=_sorted_findings(groups["positive"]),
        negatives=_sorted_findings(groups["negative"]),
        categoricals=_sorted_findings(groups["categorical"]),
    )


# -- serialization (schema: 1) ------------------------------------------------


def chart_to_dict(chart) -> dict:
    if isinstance(chart, DebateChartData):
        return {
            "schema": 1,
            "kind": "debate",
            "left_var": chart.left_var,
            "right_var": chart.right_var,
            "rows": [
                {
                    "cause_level": r.cause_level,
                    "effect_level": r.effect_level,
                    "left": _bar_dict(r.left),
                    "right": _bar_dict(r.right),
                }
                for r in chart.rows
            ],
        }
    if isinstance(chart, EnvironmentChartData):
        return {
            "schema": 1,
            "kind": "environment",
            "cause": chart.cause,
            "effect": chart.effect,
            "cause_level": chart.cause_level,
            "effect_level": chart.effect_level,
            "confounders": [_finding_dict(f) for f in chart.confounders],
            "mediators": [_finding_dict(f) for f in chart.mediators],
        }
    if isinstance(chart, LatentChartData):
        return {
            "schema": 1,
            "kind": "latent",
            "target": chart.target,
            "positives": [_finding_dict(f) for f in chart.positives],
            "negatives": [_finding_dict(f) for f in chart.negatives],
            "categoricals": [_finding_dict(f) for f in chart.categoricals],
        }
    raise ChartError(f"not a chart: {type(chart).__name__}")


def _bar_dict(b: Bar) -> dict:
    out = {"score": b.score, "color_class": b.color_class, "available": b.available}
    if b.justification is not None:
        out["justification"] = {
            "exchange_key": b.justification.exchange_key,
            "span": list(b.justification.span),
            "text": b.justification.text,
        }
    return out


def _finding_dict(f: ChartFinding) -> dict:
    out = {"name": f.name, "strength": f.strength}
    if f.direction is not None:
        out["direction"] = f.direction
    return out


def chart_from_dict(doc: dict):
    if doc.get("schema") != 1:
        raise ChartError(f"unsupported chart schema {doc.get('schema')!r}")
    kind = doc.get("kind")
    if kind == "debate":
        return DebateChartData(
            left_var=doc["left_var"],
            right_var=doc["right_var"],
            rows=tuple(
                BarPair(
                    cause_level=r["cause_level"],
                    effect_level=r["effect_level"],
                    left=_bar_from(r["left"]),
                    right=_bar_from(r["right"]),
                )
                for r in doc["rows"]
            ),
        )
    if kind == "environment":
        return EnvironmentChartData(
            cause=doc["cause"],
            effect=doc["effect"],
            cause_level=doc.get("cause_level", "general"),
            effect_level=doc.get("effect_level", "general"),
            confounders=tuple(_finding_from(f) for f in doc["confounders"]),
            mediators=tuple(_finding_from(f) for f in doc["mediators"]),
        )
    if kind == "latent":
        return LatentChartData(
            target=doc["target"],
            positives=tuple(_finding_from(f) for f in doc["positives"]),
            negatives=tuple(_finding_from(f) for f in doc["negatives"]),
            categoricals=tuple(_finding_from(f) for f in doc.get("categoricals", [])),
        )
    raise ChartError(f"unknown chart kind {kind!r}")


def _bar_from(d: dict) -> Bar:
    ref = None
    if "justification" in d:
        j = d["justification"]
        ref = JustificationRef(
            exchange_key=j["exchange_key"], span=tuple(j["span"]),
            text=j.get("text", ""),
        )
    return Bar(
        score=d["score"], color_class=d["color_class"],
        available=d.get("available", True), justification=ref,
    )


def _finding_from(d: dict) -> ChartFinding:
    return ChartFinding(
        name=d["name"], strength=d["strength"], direction=d.get("direction")
    )


# -- SVG rendering -------------------------------------------------------------

_BAR_UNIT = 60.0  # px per rating point
_ROW_H = 48.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _rect(x, y, w, h, fill, extra="") -> str:
    return (
        f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
        f'height="{_fmt(h)}" fill="{fill}"{extra}/>'
    )


def _text(x, y, content, anchor="middle", size=12, extra="") -> str:
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}" '
        f'font-family="sans-serif" font-size="{size}"{extra}>'
        f"{escape(content)}</text>"
    )


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _level_label(cause_level: str, effect_level: str) -> str:
    if cause_level == "general":
        return "general"
    return f"{cause_level} → {effect_level}"


def _render_debate(chart: DebateChartData, theme: Theme) -> str:
    width, center = 720.0, 360.0
    height = 56.0 + _ROW_H * len(chart.rows)
    colors = {"grey": theme.grey, "magenta": theme.magenta, "skyblue": theme.skyblue}
    body = [
        _text(center - 30, 24, chart.left_var, anchor="end", size=14,
              extra=' font-weight="bold"'),
        _text(center + 30, 24, chart.right_var, anchor="start", size=14,
              extra=' font-weight="bold"'),
        f'<line x1="{_fmt(center)}" y1="36" x2="{_fmt(center)}" '
        f'y2="{_fmt(height - 8)}" stroke="#616161" stroke-width="1"/>',
    ]
    for i, row in enumerate(chart.rows):
        y = 48.0 + i * _ROW_H
        body.append(_text(center, y + 34, _level_label(row.cause_level,
                                                       row.effect_level), size=10))
        for side, bar in (("left", row.left), ("right", row.right)):
            fill = colors[bar.color_class]
            length = bar.score * _BAR_UNIT
            if side == "left":
                x = center - 4 - length
            else:
                x = center + 4
            cls = f' class="bar {side} {bar.color_class}"'
            if bar.available:
                body.append(_rect(x, y, length, 18.0, fill, extra=cls))
                anchor = "end" if side == "left" else "start"
                tx = center - 8 - length if side == "left" else center + 8 + length
                body.append(_text(tx, y + 13, str(bar.score), anchor=anchor, size=10))
            else:
                # hatched stub marks a missing rating
                stub_x = center - 10 if side == "left" else center + 4
                body.append(_rect(
                    stub_x, y, 6.0, 18.0, "none",
                    extra=f' stroke="{theme.grey}" stroke-dasharray="2,2"'
                          f'{cls.replace("bar", "bar unavailable")}',
                ))
    return _svg(width, height, body)


def _box_row(
    names: Sequence[ChartFinding], family: str, theme: Theme, y: float,
    width: float, arrows: bool,
) -> list[str]:
    if not names:
        return []
    body = []
    box_w, gap = 150.0, 16.0
    total = len(names) * box_w + (len(names) - 1) * gap
    x = (width - total) / 2
    for f in names:
        fill = theme.shade(family, f.strength)
        body.append(_rect(x, y, box_w, 40.0, fill,
                          extra=f' class="finding {family} {f.strength}" rx="6"'))
        label = f.name
        if arrows and f.direction is not None:
            label += " ↑" if f.direction == "positive" else " ↓"
        body.append(_text(x + box_w / 2, y + 24, label, size=11))
        x += box_w + gap
    return body


def _render_environment(chart: EnvironmentChartData, theme: Theme) -> str:
    width = max(720.0, 170.0 * max(len(chart.confounders), len(chart.mediators), 1))
    height = 320.0
    mid_y = 140.0
    body = []
    body += _box_row(chart.confounders, "red", theme, 24.0, width, arrows=False)
    cause_label = chart.cause if chart.cause_level == "general" else (
        f"{chart.cause_level} {chart.cause}"
    )
    effect_label = chart.effect if chart.effect_level == "general" else (
        f"{chart.effect_level} {chart.effect}"
    )
    body.append(_rect(40.0, mid_y, 220.0, 44.0, "#eeeeee",
                      extra=' class="relation cause" rx="8"'))
    body.append(_text(150.0, mid_y + 26, cause_label, size=12))
    body.append(_rect(width - 260.0, mid_y, 220.0, 44.0, "#eeeeee",
                      extra=' class="relation effect" rx="8"'))
    body.append(_text(width - 150.0, mid_y + 26, effect_label, size=12))
    body.append(
        f'<line x1="260" y1="{_fmt(mid_y + 22)}" x2="{_fmt(width - 260)}" '
        f'y2="{_fmt(mid_y + 22)}" stroke="#424242" stroke-width="2" '
        f'marker-end="url(#arrow)"/>'
    )
    body.insert(0, (
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
        '<path d="M 0 0 L 10 5 L 0 10 z" fill="#424242"/></marker></defs>'
    ))
    body += _box_row(chart.mediators, "green", theme, 248.0, width, arrows=True)
    return _svg(width, height, body)


def _render_latent(chart: LatentChartData, theme: Theme) -> str:
    groups = [
        (chart.positives, "blue", 24.0),
        (chart.negatives, "yellow", 232.0),
    ]
    width = max(
        720.0,
        170.0 * max(len(chart.positives), len(chart.negatives),
                    len(chart.categoricals), 1),
    )
    height = 360.0 if chart.categoricals else 296.0
    body = []
    body.append(_rect(width / 2 - 110.0, 128.0, 220.0, 44.0, "#eeeeee",
                      extra=' class="target" rx="8"'))
    body.append(_text(width / 2, 154.0, chart.target, size=12))
    for findings, family, y in groups:
        body += _box_row(findings, family, theme, y, width, arrows=False)
    if chart.categoricals:
        body += _box_row(chart.categoricals, "yellow", theme, 300.0,
                         width, arrows=False)
    return _svg(width, height, body)


def render_svg(chart, theme: Theme = DEFAULT_THEME) -> str:
    """Deterministic SVG text for any chart payload; identical inputs give
    byte-identical output."""
    if isinstance(chart, DebateChartData):
        return _render_debate(chart, theme)
    if isinstance(chart, EnvironmentChartData):
        return _render_environment(chart, theme)
    if isinstance(chart, LatentChartData):
        return _render_latent(chart, theme)
    raise ChartError(f"cannot render {type(chart).__name__}")
