"""Adversary knowledge: observation logs, decomposition closure, and
derivability of target expressions.

Derivability is decided in two phases.  *Analysis* saturates the seed
and observed terms under decomposition: every contiguous sub-sequence
of a known expression is known; an encryption opens once the inverse of
its encryptor is derivable; a signed payload is exposed once the
verification key is derivable; record items split into their fields.
*Synthesis* then checks a target by structural recursion: a sequence is
derivable when each of its items is, an encryption or signature when
its key and payload are, a record when all its fields are.  Analysis
only ever adds subterms, so saturation terminates; synthesis recurses
over the target, so the whole procedure is a decision procedure.

Knowledge bases are immutable snapshots: ``observe`` returns a new
value, and queries may be issued from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable

from .terms import (
    Atom,
    AtomKind,
    EncTerm,
    Expression,
    SigTerm,
    TagTerm,
    render_expression,
)


class OwnSecretQueryError(ValueError):
    """Raised for a derivability query about a key or secret in the
    asking component's own key/secret set; the knowledge predicate is
    not defined there."""


@dataclass(frozen=True)
class SecrecyTarget:
    """A key or secret whose leakage is being checked, together with the
    components that must not hold it as their own."""

    item: Atom
    owner_exclusion: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.item.kind not in (AtomKind.KEY, AtomKind.SECRET):
            raise ValueError("secrecy targets are keys or secrets")


def _known_key_labels(known: set) -> set[str]:
    return {
        e[0].label
        for e in known
        if len(e) == 1 and isinstance(e[0], Atom) and e[0].kind is AtomKind.KEY
    }


@lru_cache(maxsize=4096)
def saturate(seed_expressions: frozenset) -> frozenset:
    """Least fixpoint of the analysis rules over the seed expressions."""
    known: set[Expression] = set()
    work: list[Expression] = [tuple(e) for e in seed_expressions]

    while True:
        while work:
            e = work.pop()
            if e in known:
                continue
            known.add(e)
            n = len(e)
            for i in range(n):
                for j in range(i + 1, n + 1):
                    if (i, j) != (0, n):
                        work.append(e[i:j])
            if n == 1 and isinstance(e[0], TagTerm):
                for part in e[0].parts:
                    work.append((part,) if isinstance(part, Atom) else tuple(part))
        key_labels = _known_key_labels(known)
        for e in list(known):
            if len(e) != 1:
                continue
            item = e[0]
            if isinstance(item, (EncTerm, SigTerm)):
                unlocked = item.key.kind is AtomKind.KEY and item.key.inverse_label in key_labels
                if unlocked and item.payload not in known:
                    work.append(item.payload)
        if not work:
            break
    return frozenset(known)


def derivable_from(known: frozenset, target: Expression) -> bool:
    """Whether the target can be synthesised from the analysed set."""
    items = {e[0] for e in known if len(e) == 1}

    def has_item(item) -> bool:
        if item in items:
            return True
        if isinstance(item, EncTerm) or isinstance(item, SigTerm):
            return item.key in items and has_expr(item.payload)
        if isinstance(item, TagTerm):
            return all(
                part in items if isinstance(part, Atom) else has_expr(part)
                for part in item.parts
            )
        return False

    def has_expr(e: Expression) -> bool:
        return all(has_item(item) for item in e)

    return has_expr(tuple(target))


@dataclass(frozen=True)
class KnowledgeBase:
    """A component's accumulated view: a-priori terms plus a
    time-stamped log of everything received on its input channels."""

    initial: frozenset = frozenset()
    observed: tuple = ()
    own_ks: frozenset = frozenset()

    def observe(self, t: int, message: Expression) -> "KnowledgeBase":
        return replace(self, observed=self.observed + ((int(t), tuple(message)),))

    def observe_all(self, pairs: Iterable[tuple[int, Expression]]) -> "KnowledgeBase":
        extra = tuple((int(t), tuple(message)) for t, message in pairs)
        return replace(self, observed=self.observed + extra)

    def terms(self, up_to: int | None = None) -> frozenset:
        seen = set(self.initial)
        for t, message in self.observed:
            if up_to is None or t <= up_to:
                seen.add(message)
        return frozenset(seen)

    def analyze(self, up_to: int | None = None) -> frozenset:
        """The saturated analysis of everything held at ``up_to``."""
        return saturate(self.terms(up_to))

    def derivable(self, target: Expression, up_to: int | None = None) -> bool:
        return derivable_from(self.analyze(up_to), target)

    def know_item(self, item: Atom, up_to: int | None = None) -> bool:
        """Single key/secret knowledge; undefined for the asker's own set."""
        if item in self.own_ks:
            raise OwnSecretQueryError(item.label)
        return self.derivable((item,), up_to)

    def dump(self, up_to: int | None = None) -> str:
        """Sorted canonical renderings of the analysed set, one per line."""
        lines = sorted(render_expression(e) for e in self.analyze(up_to))
        return "\n".join(lines) + ("\n" if lines else "")


def leak_check(
    kb: KnowledgeBase,
    targets: Iterable[SecrecyTarget],
    horizon: int,
) -> tuple[tuple[SecrecyTarget, int], ...]:
    """Earliest time unit at which each target becomes derivable, if any.

    Derivability is monotone in time, so the first hit is the earliest.
    """
    leaks = []
    for target in targets:
        if target.item in kb.own_ks:
            raise OwnSecretQueryError(target.item.label)
        for t in range(horizon + 1):
            if kb.derivable((target.item,), t):
                leaks.append((target, t))
                break
    return tuple(leaks)
