"""Prompt batteries for auditing causal relations, and response parsers.

A relation is interrogated from every angle: ten debate prompts (both
directions, general plus all higher/lower level combinations), five
confounder and five mediator prompts per direction, and one latent-factor
prompt per variable. Parsers turn raw completions into typed findings that
keep (start, end) spans into the source text, so every claim can be traced
back to the words that produced it.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Optional

STRENGTHS = ("weak", "medium", "strong")
DIRECTIONS = ("positive", "negative")
LATENT_SIGNS = ("positive", "negative", "categorical")

# (cause_level, effect_level) rows, in fixed battery order.
LEVEL_COMBOS = (
    ("general", "general"),
    ("higher", "higher"),
    ("higher", "lower"),
    ("lower", "higher"),
    ("lower", "lower"),
)

SCALE_SENTENCE = (
    "On a scale from 1 to 4, where 4 represents highly significant, "
    "3 represents significant, 2 represents doubtful, 1 represents not "
    "significant, rate the following cause-and-effect relationship:"
)

_TUPLE_CONTRACT = (
    "Write each tuple on its own line, enclosed in parentheses, with the "
    "fields separated by semicolons."
)

_CONFOUNDER_DEFINITION = (
    "a confounder is a variable that influences both the cause variable and "
    "the effect variable, inducing a spurious association between them"
)

_MEDIATOR_DEFINITION = (
    "Rather than a direct causal relationship between the independent "
    "variable and the dependent variable, the independent variable "
    "influences the mediator variable, which in turn influences the "
    "dependent variable."
)


class PromptError(ValueError):
    """Invalid battery inputs (empty or identical variable names)."""


@dataclass(frozen=True)
class PromptSpec:
    kind: str  # debate | confounder | mediator | latent
    cause: str
    effect: Optional[str]
    cause_level: str
    effect_level: str
    domain: str
    rendered: str
    key: str  # content hash of rendered text

    @staticmethod
    def build(
        kind: str,
        cause: str,
        effect: Optional[str],
        cause_level: str,
        effect_level: str,
        domain: str,
        rendered: str,
    ) -> "PromptSpec":
        return PromptSpec(
            kind=kind,
            cause=cause,
            effect=effect,
            cause_level=cause_level,
            effect_level=effect_level,
            domain=domain,
            rendered=rendered,
            key=hashlib.sha256(rendered.encode()).hexdigest(),
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "cause": self.cause,
            "effect": self.effect,
            "cause_level": self.cause_level,
            "effect_level": self.effect_level,
            "domain": self.domain,
            "rendered": self.rendered,
            "key": self.key,
        }


@dataclass(frozen=True)
class Rating:
    value: int
    justification: str
    span: tuple[int, int]

    def __post_init__(self) -> None:
        if not 1 <= self.value <= 4:
            raise PromptError(f"rating {self.value} outside 1..4")


@dataclass(frozen=True)
class ConfounderFinding:
    name: str
    strength: str
    justification: str
    span: tuple[int, int]


@dataclass(frozen=True)
class MediatorFinding:
    name: str
    strength: str
    justification: str
    conditions: str
    direction: str  # positive | negative
    span: tuple[int, int]


@dataclass(frozen=True)
class LatentFinding:
    name: str
    strength: str
    sign: str  # positive | negative | categorical
    justification: str
    span: tuple[int, int]


@dataclass(frozen=True)
class ParseFailure:
    """Returned (never raised) when a response yields nothing usable."""

    raw: str
    reason: str


@dataclass(frozen=True)
class FindingParse:
    findings: tuple
    warnings: tuple[str, ...]


def _persona(domain: str) -> str:
    if domain.strip():
        return f"You are an expert in {domain.strip()}."
    # The model can infer the domain when none is supplied.
    return (
        "You are an expert in the domain of the variables named below; "
        "infer the domain from the variable names."
    )


def _phrase(level: str, name: str) -> str:
    return name if level == "general" else f"{level} {name}"


def _check_pair(a: str, b: str) -> None:
    if not a.strip() or not b.strip():
        raise PromptError("variable names must be nonempty")
    if a.strip() == b.strip():
        raise PromptError("the two relation variables must differ")


def debate_battery(a: str, b: str, domain: str = "") -> list[PromptSpec]:
    """Ten prompts probing a relation: five per direction, levels in fixed
    order (general, hi->hi, hi->lo, lo->hi, lo->lo), direction a->b first."""
    _check_pair(a, b)
    specs = []
    for cause, effect in ((a, b), (b, a)):
        for c_level, e_level in LEVEL_COMBOS:
            rendered = (
                f"{_persona(domain)}\n{SCALE_SENTENCE} Does "
                f"{_phrase(c_level, cause)} cause {_phrase(e_level, effect)}? "
                f"Answer on the first line in the form 'Rating: <n>', where "
                f"<n> is the integer rating, then give a one-paragraph "
                f"justification."
            )
            specs.append(
                PromptSpec.build("debate", cause, effect, c_level, e_level,
                                 domain, rendered)
            )
    return specs


def _relation_clause(cause: str, effect: str, c_level: str, e_level: str) -> str:
    return (
        f"Given the cause-and-effect relationship "
        f"'{_phrase(c_level, cause)}' causes '{_phrase(e_level, effect)}'"
    )


def confounder_battery(cause: str, effect: str, domain: str = "") -> list[PromptSpec]:
    """Five prompts (general + 4 level combos) asking for confounder tuples."""
    _check_pair(cause, effect)
    specs = []
    for c_level, e_level in LEVEL_COMBOS:
        rendered = (
            f"{_persona(domain)}\n"
            f"{_relation_clause(cause, effect, c_level, e_level)}, identify "
            f"potential confounders based on the definition: "
            f"{_CONFOUNDER_DEFINITION}. For each identified confounder, "
            f"provide the following details in a tuple format:\n"
            f"1. Name of the confounder.\n"
            f"2. Strength of the confounder (options: weak, medium, strong).\n"
            f"3. Justification for its role as a confounder based on the "
            f"definition provided.\n"
            f"{_TUPLE_CONTRACT}"
        )
        specs.append(
            PromptSpec.build("confounder", cause, effect, c_level, e_level,
                             domain, rendered)
        )
    return specs


def mediator_battery(cause: str, effect: str, domain: str = "") -> list[PromptSpec]:
    """Five prompts asking for mediator tuples, including the intervention
    direction that would produce the stated effect."""
    _check_pair(cause, effect)
    specs = []
    for c_level, e_level in LEVEL_COMBOS:
        rendered = (
            f"{_persona(domain)}\n"
            f"{_relation_clause(cause, effect, c_level, e_level)}, identify "
            f"potential mediators based on the definition: "
            f"{_MEDIATOR_DEFINITION} For each identified mediator, provide "
            f"the following details in a tuple format:\n"
            f"1. Name of the mediator.\n"
            f"2. Strength of the mediator (options: weak, medium, strong).\n"
            f"3. Justification for its role as a mediator.\n"
            f"4. Specific conditions under which the mediator operates.\n"
            f"5. Direction of the mediator's effect ('positive' or "
            f"'negative'); the direction tells us how to intervene on the "
            f"mediator to achieve the relationship.\n"
            f"{_TUPLE_CONTRACT}"
        )
        specs.append(
            PromptSpec.build("mediator", cause, effect, c_level, e_level,
                             domain, rendered)
        )
    return specs


def latent_prompt(target: str, domain: str = "") -> PromptSpec:
    """One prompt asking for intervenable latent factors on a single variable."""
    if not target.strip():
        raise PromptError("target variable name must be nonempty")
    rendered = (
        f"{_persona(domain)}\n"
        f"Given the target variable '{target}', identify potential latent "
        f"(intervenable) factors that might influence the target variable. "
        f"Ensure that the identified latent factors can be actionable or "
        f"intervenable to affect the target variable. Provide the following "
        f"details for each latent factor:\n"
        f"1. Name of the latent factor.\n"
        f"2. Strength of the effect (weak, medium, strong).\n"
        f"3. Sign of the effect (positive, negative, or categorical).\n"
        f"4. Justification for its role as a latent factor.\n"
        f"{_TUPLE_CONTRACT}"
    )
    return PromptSpec.build("latent", target, None, "general", "general",
                            domain, rendered)


# -- parsers ----------------------------------------------------------------

_RATING_RE = re.compile(r"rating\s*:?\s*\**\s*([1-4])\b", re.IGNORECASE)


def parse_rating(raw: str) -> Rating | ParseFailure:
    """Extract 'Rating: <n>' (n in 1..4) plus the trailing justification."""
    if not raw.strip():
        return ParseFailure(raw=raw, reason="empty response")
    match = _RATING_RE.search(raw)
    if match is None:
        return ParseFailure(raw=raw, reason="no 'Rating: <1-4>' found")
    rest = raw[match.end():]
    offset = match.end() + (len(rest) - len(rest.lstrip(" \t\r\n.*:-")))
    justification = raw[offset:].strip()
    end = offset + len(raw[offset:].rstrip())
    return Rating(
        value=int(match.group(1)),
        justification=justification,
        span=(offset, end),
    )


def _strip_arrows(name: str) -> tuple[str, Optional[str]]:
    """Peel leading/trailing up/down glyphs into a direction."""
    direction = None
    stripped = name.strip()
    while stripped and stripped[-1] in "↑↓":
        direction = "positive" if stripped[-1] == "↑" else "negative"
        stripped = stripped[:-1].rstrip()
    while stripped and stripped[0] in "↑↓":
        direction = "positive" if stripped[0] == "↑" else "negative"
        stripped = stripped[1:].lstrip()
    return stripped, direction


def _normalize_token(value: str) -> str:
    return value.strip().strip("'\"").strip().lower()


def _tuple_lines(raw: str):
    """Yield (fields, line_span) for each parenthesized tuple line."""
    offset = 0
    for line in raw.splitlines(keepends=True):
        stripped = line.rstrip("\r\n")
        start = offset
        offset += len(line)
        open_idx = stripped.find("(")
        close_idx = stripped.rfind(")")
        if open_idx == -1 or close_idx == -1 or close_idx <= open_idx:
            continue
        inner = stripped[open_idx + 1:close_idx]
        fields = [f.strip() for f in inner.split(";")]
        yield fields, (start, start + len(stripped)), stripped


def parse_confounders(raw: str) -> FindingParse | ParseFailure:
    """Parse confounder tuples: (name; strength; justification)."""
    findings: list[ConfounderFinding] = []
    warnings: list[str] = []
    for fields, span, line in _tuple_lines(raw):
        if len(fields) < 3:
            warnings.append(f"expected 3 fields, got {len(fields)}: {line}")
            continue
        name, _ = _strip_arrows(fields[0])
        strength = _normalize_token(fields[1])
        if strength not in STRENGTHS:
            warnings.append(f"unknown strength {fields[1]!r}: {line}")
            continue
        findings.append(
            ConfounderFinding(
                name=name,
                strength=strength,
                justification="; ".join(fields[2:]),
                span=span,
            )
        )
    if not findings:
        return ParseFailure(raw=raw, reason="no confounder tuples parsed")
    return FindingParse(findings=tuple(findings), warnings=tuple(warnings))


def parse_mediators(raw: str) -> FindingParse | ParseFailure:
    """Parse mediator tuples:
    (name; strength; justification; conditions; direction)."""
    findings: list[MediatorFinding] = []
    warnings: list[str] = []
    for fields, span, line in _tuple_lines(raw):
        if len(fields) < 5:
            warnings.append(f"expected 5 fields, got {len(fields)}: {line}")
            continue
        name, arrow_direction = _strip_arrows(fields[0])
        strength = _normalize_token(fields[1])
        direction = arrow_direction or _normalize_token(fields[-1])
        if strength not in STRENGTHS:
            warnings.append(f"unknown strength {fields[1]!r}: {line}")
            continue
        if direction not in DIRECTIONS:
            warnings.append(f"unknown direction {fields[-1]!r}: {line}")
            continue
        findings.append(
            MediatorFinding(
                name=name,
                strength=strength,
                justification="; ".join(fields[2:-2]),
                conditions=fields[-2],
                direction=direction,
                span=span,
            )
        )
    if not findings:
        return ParseFailure(raw=raw, reason="no mediator tuples parsed")
    return FindingParse(findings=tuple(findings), warnings=tuple(warnings))


def parse_latents(raw: str) -> FindingParse | ParseFailure:
    """Parse latent-factor tuples: (name; strength; sign; justification)."""
    findings: list[LatentFinding] = []
    warnings: list[str] = []
    for fields, span, line in _tuple_lines(raw):
        if len(fields) < 4:
            warnings.append(f"expected 4 fields, got {len(fields)}: {line}")
            continue
        name, arrow_direction = _strip_arrows(fields[0])
        strength = _normalize_token(fields[1])
        sign = _normalize_token(fields[2]) or (arrow_direction or "")
        if strength not in STRENGTHS:
            warnings.append(f"unknown strength {fields[1]!r}: {line}")
            continue
        if sign not in LATENT_SIGNS:
            warnings.append(f"unknown sign {fields[2]!r}: {line}")
            continue
        findings.append(
            LatentFinding(
                name=name,
                strength=strength,
                sign=sign,
                justification="; ".join(fields[3:]),
                span=span,
            )
        )
    if not findings:
        return ParseFailure(raw=raw, reason="no latent-factor tuples parsed")
    return FindingParse(findings=tuple(findings), warnings=tuple(warnings))


REPAIR_PROMPT = (
    "Your previous answer could not be parsed. Reformat your previous answer "
    "to the required tuple format: one tuple per line, enclosed in "
    "parentheses, fields separated by semicolons, and nothing else."
)


def battery_specs(kind: str, **params: str) -> list[PromptSpec]:
    """Build any battery from keyword parameters (fixture tooling, CLI)."""
    domain = params.get("domain", "")
    if kind == "debate":
        return debate_battery(params["a"], params["b"], domain)
    if kind == "confounder":
        return confounder_battery(params["cause"], params["effect"], domain)
    if kind == "mediator":
        return mediator_battery(params["cause"], params["effect"], domain)
    if kind == "latent":
        return [latent_prompt(params["target"], domain)]
    raise PromptError(f"unknown battery kind {kind!r}")
