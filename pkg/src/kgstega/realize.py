"""Turn a path into a carrier sentence that provably contains every node label.

The default realizer is deterministic template filling, so the coverage
guarantee holds by construction. An external generator (e.g. a trained
model) can plug in through :func:`realize_with_retry`; candidates that drop
a label are rejected and regenerated up to a retry budget.
"""

from __future__ import annotations

import hashlib
import re
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

from .codec import StegoPath
from .errors import CoverageExhausted, GeneratorFailed, MalformedLine, NoTemplateForArity
from .graph import KnowledgeGraph
from .interchange import path_to_json
from .text import contains_contiguous, label_tokens, tokenize

_SLOT_RE = re.compile(r"\{(rel_)?(\d+)\}")

Generator = Callable[[StegoPath, KnowledgeGraph], Sequence[str]]


@dataclass(frozen=True)
class Template:
    """Sentence pattern with one slot per path position.

    ``{k}`` takes the label of the k-th path node (1-based); ``{rel_k}``
    takes the relation label of the k-th hop.
    """

    id: str
    pattern: str

    @property
    def arity(self) -> int:
        return max((int(m.group(2)) for m in _SLOT_RE.finditer(self.pattern) if not m.group(1)), default=0)

    def validate(self) -> None:
        if not self.pattern.strip():
            raise ValueError(f"template {self.id}: empty pattern")
        slots = [int(m.group(2)) for m in _SLOT_RE.finditer(self.pattern) if not m.group(1)]
        arity = max(slots, default=0)
        if sorted(slots) != list(range(1, arity + 1)):
            raise ValueError(f"template {self.id}: slots 1..{arity} must each appear exactly once")
        for m in _SLOT_RE.finditer(self.pattern):
            if m.group(1) and not 1 <= int(m.group(2)) < max(arity, 1):
                raise ValueError(f"template {self.id}: relation slot {m.group(0)} out of range")


@dataclass(frozen=True)
class StegoSentence:
    text: str
    path_ref: StegoPath
    template_id: str


def load_templates(source: Union[str, Path, Iterable[str]]) -> list[Template]:
    """Read templates from TSV lines ``id<TAB>pattern``."""
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").split("\n")
    else:
        lines = list(source)
    templates = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise MalformedLine("templates", line_no, f"expected 2 tab-separated fields, got {len(parts)}")
        template = Template(parts[0].strip(), parts[1])
        try:
            template.validate()
        except ValueError as exc:
            raise MalformedLine("templates", line_no, str(exc)) from None
        templates.append(template)
    return templates


def _pick_template(p: StegoPath, templates: Sequence[Template]) -> Template:
    matching = sorted((t for t in templates if t.arity == len(p.nodes)), key=lambda t: t.id)
    if not matching:
        raise NoTemplateForArity(f"no template with {len(p.nodes)} slots")
    digest = hashlib.sha256(",".join(str(n) for n in p.nodes).encode()).digest()
    return matching[int.from_bytes(digest[:8], "big") % len(matching)]


def realize(p: StegoPath, templates: Sequence[Template], g: KnowledgeGraph) -> StegoSentence:
    """Deterministic template fill; selection depends only on the path."""
    template = _pick_template(p, templates)

    def fill(m: re.Match) -> str:
        k = int(m.group(2))
        if m.group(1):
            edge = g.edge(p.nodes[k - 1], p.nodes[k])
            return edge.relation if edge else ""
        return g.node(p.nodes[k - 1]).label

    return StegoSentence(_SLOT_RE.sub(fill, template.pattern), p, template.id)


def verify_coverage(sentence: str, p: StegoPath, g: KnowledgeGraph) -> bool:
    """True iff every node label of the path occurs as a contiguous token run."""
    tokens = tokenize(sentence)
    return all(
        contains_contiguous(tokens, label_tokens(g.node(nid).label))
        for nid in p.nodes
    )


@dataclass(frozen=True)
class Realization:
    sentence: StegoSentence
    attempts: int


def realize_with_retry(p: StegoPath, generator: Generator, g: KnowledgeGraph,
                       max_attempts: int = 5) -> Realization:
    """Ask the generator for candidates until one covers every label.

    Each candidate counts as one attempt; an invocation that yields no
    candidates also counts as one. Raises CoverageExhausted past the budget.
    """
    attempts = 0
    while attempts < max_attempts:
        candidates = list(generator(p, g))
        if not candidates:
            attempts += 1
            continue
        for text in candidates:
            attempts += 1
            if verify_coverage(text, p, g):
                return Realization(StegoSentence(text.strip(), p, "external"), attempts)
            if attempts >= max_attempts:
                break
    raise CoverageExhausted(max_attempts)


def template_generator(templates: Sequence[Template]) -> Generator:
    """Wrap the deterministic realizer in the generator interface."""

    def generate(p: StegoPath, g: KnowledgeGraph) -> Sequence[str]:
        return [realize(p, templates, g).text]

    return generate


def command_generator(command: str) -> Generator:
    """Wrap an external command in the generator interface.

    The command receives path-interchange JSON on stdin and must write one
    candidate sentence per line on stdout, exiting 0.
    """

    argv = shlex.split(command)

    def generate(p: StegoPath, g: KnowledgeGraph) -> Sequence[str]:
        proc = subprocess.run(
            argv,
            input=path_to_json(p, g),
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise GeneratorFailed(
                f"generator exited {proc.returncode}: {proc.stderr.strip()[:400]}"
            )
        return [line for line in proc.stdout.splitlines() if line.strip()]

    return generate
