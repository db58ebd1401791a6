"""Independent brute-force derivability oracle.

This is deliberately a different algorithm from the production decision
procedure: it enumerates a finite candidate universe (every contiguous
sub-expression of the seeds and the query, at every nesting depth, plus
the empty expression) and applies the derivation rules over whole
expressions until a fixpoint, then answers by membership.  The
production code instead saturates an item set and synthesises the
target by structural recursion.  Agreement between the two on random
knowledge bases is what the equivalence tests check.

Rules applied, over expressions:
  - the empty expression is always derivable;
  - any prefix or suffix of a derivable expression is derivable;
  - the concatenation of two derivable expressions is derivable;
  - a single encryption opens when the inverse of its encryptor key is
    derivable; it can be built from a derivable key and payload;
  - a single signature opens when the verification key is derivable; it
    can be built from a derivable key and payload;
  - a tagged record splits into its fields and can be rebuilt from them.
"""

from __future__ import annotations

from streamsec.terms import Atom, AtomKind, EncTerm, SigTerm, TagTerm


def _part_expr(part):
    return (part,) if isinstance(part, Atom) else tuple(part)


def sub_expressions(expression) -> set:
    """Every contiguous slice of the expression and of every payload
    expression nested anywhere inside it."""
    out: set = set()
    stack = [tuple(expression)]
    while stack:
        current = stack.pop()
        n = len(current)
        for i in range(n):
            for j in range(i + 1, n + 1):
                out.add(current[i : j])
        for item in current:
            if isinstance(item, (EncTerm, SigTerm)):
                if item.payload not in out:
                    stack.append(item.payload)
            elif isinstance(item, TagTerm):
                for part in item.parts:
                    piece = _part_expr(part)
                    if piece not in out:
                        if isinstance(part, Atom):
                            out.add(piece)
                        else:
                            stack.append(piece)
    out.add(())
    return out


def _known_key_labels(derived: set) -> set:
    return {
        e[0].label
        for e in derived
        if len(e) == 1 and isinstance(e[0], Atom) and e[0].kind is AtomKind.KEY
    }


def _buildable(expression, derived: set) -> bool:
    n = len(expression)
    for i in range(1, n):
        if expression[:i] in derived and expression[i:] in derived:
            return True
    if n == 1:
        item = expression[0]
        if isinstance(item, (EncTerm, SigTerm)):
            return (item.key,) in derived and item.payload in derived
        if isinstance(item, TagTerm):
            return all(_part_expr(part) in derived for part in item.parts)
    return False


def oracle_closure(seed_terms, candidates=()) -> set:
    universe: set = set()
    for expression in list(seed_terms) + list(candidates):
        universe |= sub_expressions(expression)
    derived: set = {()} | {tuple(e) for e in seed_terms}

    changed = True
    while changed:
        changed = False
        key_labels = _known_key_labels(derived)
        for expression in list(derived):
            n = len(expression)
            for i in range(1, n):
                for piece in (expression[:i], expression[i:]):
                    if piece not in derived:
                        derived.add(piece)
                        changed = True
            if n == 1:
                item = expression[0]
                if isinstance(item, (EncTerm, SigTerm)):
                    openable = (
                        item.key.kind is AtomKind.KEY and item.key.inverse_label in key_labels
                    )
                    if openable and item.payload not in derived:
                        derived.add(item.payload)
                        changed = True
                elif isinstance(item, TagTerm):
                    for part in item.parts:
                        piece = _part_expr(part)
                        if piece not in derived:
                            derived.add(piece)
                            changed = True
        for expression in universe:
            if expression not in derived and _buildable(expression, derived):
                derived.add(expression)
                changed = True
    return derived


def oracle_derivable(seed_terms, target) -> bool:
    target = tuple(target)
    return target in oracle_closure(seed_terms, candidates=(target,))
