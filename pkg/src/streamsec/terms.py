"""Symbolic message terms and the abstract cryptographic operations.

A message (an *expression*) is a finite tuple of items.  Items are
atoms (data values, keys, unguessable secrets, or specification
variables), encryptions or signatures over a payload expression, or
tagged records bundling atoms and expressions.  Encryption and signing
are free constructors: ``decr`` undoes ``enc`` only with the matching
inverse key, ``ext`` undoes ``sign`` only with the matching
verification key, and nothing else ever succeeds.  There are no other
algebraic identities; equality of terms is structural.

Failed operations return :class:`OpError` values instead of raising, so
a protocol guard can branch on the outcome of a decryption the same way
it branches on any other comparison.  :func:`term_eq` treats error
values as unequal to everything, including other error values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union


class AtomKind(Enum):
    """The four disjoint sorts of atomic values."""

    DATA = "data"
    KEY = "key"
    SECRET = "secret"
    VAR = "var"


@dataclass(frozen=True, slots=True)
class Atom:
    """An atomic term.

    Keys carry the label of their inverse; a symmetric key is its own
    inverse, so its inverse label equals its own label.  Non-key atoms
    have no inverse label.
    """

    kind: AtomKind
    label: str
    inverse_label: str | None = None

    def __post_init__(self) -> None:
        if (self.kind is AtomKind.KEY) != (self.inverse_label is not None):
            raise ValueError("inverse_label is set exactly for keys")

    @property
    def symmetric(self) -> bool:
        return self.kind is AtomKind.KEY and self.inverse_label == self.label

    def __repr__(self) -> str:
        return f"Atom({self.kind.value}:{self.label})"


@dataclass(frozen=True, slots=True)
class EncTerm:
    """Encryption of a whole payload expression under one encryptor."""

    key: Atom
    payload: "Expression"

    def __repr__(self) -> str:
        return render_item(self)


@dataclass(frozen=True, slots=True)
class SigTerm:
    """Signature over a payload expression, created with a signing key."""

    key: Atom
    payload: "Expression"

    def __repr__(self) -> str:
        return render_item(self)


@dataclass(frozen=True, slots=True)
class TagTerm:
    """A transparent labelled record.

    Records carry no cryptographic protection: anyone holding the record
    can read every field, and anyone holding all fields can rebuild it.
    """

    tag: str
    parts: tuple["TagPart", ...]

    def __repr__(self) -> str:
        return render_item(self)


Item = Union[Atom, EncTerm, SigTerm, TagTerm]
Expression = tuple  # tuple[Item, ...]
TagPart = Union[Atom, Expression]

EMPTY: Expression = ()


def expr(*items: Item) -> Expression:
    return tuple(items)


@dataclass(frozen=True, slots=True)
class OpError:
    """Result of a failed term operation.

    Error values propagate through further operations and compare
    unequal to everything under :func:`term_eq`, so a guard built on a
    failed check simply evaluates false instead of aborting the run.
    """

    reason: str

    def __repr__(self) -> str:
        return f"OpError({self.reason})"


NOT_AN_ENCRYPTION = OpError("not-an-encryption")
NOT_A_SIGNATURE = OpError("not-a-signature")
WRONG_KEY = OpError("wrong-key")
OUT_OF_RANGE = OpError("out-of-range")
NOT_AN_ENCRYPTOR = OpError("not-an-encryptor")
NO_MESSAGE = OpError("no-message")


def is_err(value: object) -> bool:
    return isinstance(value, OpError)


class UnknownAtomError(KeyError):
    pass


class DuplicateLabelError(ValueError):
    pass


class AtomTable:
    """Scenario-wide atom registry.

    Labels are unique within a table.  Key pairs are registered
    together, which makes inversion a total involution over the
    registered keys.
    """

    def __init__(self) -> None:
        self._atoms: dict[str, Atom] = {}

    def _add(self, atom: Atom) -> Atom:
        if atom.label in self._atoms:
            raise DuplicateLabelError(atom.label)
        self._atoms[atom.label] = atom
        return atom

    def data(self, label: str) -> Atom:
        return self._add(Atom(AtomKind.DATA, label))

    def secret(self, label: str) -> Atom:
        return self._add(Atom(AtomKind.SECRET, label))

    def var(self, label: str) -> Atom:
        return self._add(Atom(AtomKind.VAR, label))

    def asym_pair(self, label: str, inverse_label: str | None = None) -> tuple[Atom, Atom]:
        """Register a public/private pair; returns (public, private)."""
        inv = inverse_label if inverse_label is not None else label + "^-1"
        if inv == label:
            raise DuplicateLabelError(label)
        public = Atom(AtomKind.KEY, label, inv)
        private = Atom(AtomKind.KEY, inv, label)
        self._add(public)
        self._add(private)
        return public, private

    def sym_key(self, label: str) -> Atom:
        return self._add(Atom(AtomKind.KEY, label, label))

    def lookup(self, label: str) -> Atom:
        try:
            return self._atoms[label]
        except KeyError:
            raise UnknownAtomError(label) from None

    def key_inverse(self, key: Atom) -> Atom:
        """The unique inverse of a registered key; involutive."""
        registered = self._atoms.get(key.label)
        if registered is None or registered != key:
            raise UnknownAtomError(key.label)
        if key.kind is not AtomKind.KEY:
            raise ValueError(f"{key.label} is not a key")
        return self._atoms[key.inverse_label]

    def atoms(self) -> Iterator[Atom]:
        return iter(self._atoms.values())

    def __contains__(self, label: str) -> bool:
        return label in self._atoms

    def __len__(self) -> int:
        return len(self._atoms)


def _is_encryptor(value: object) -> bool:
    return isinstance(value, Atom) and value.kind in (AtomKind.KEY, AtomKind.VAR)


def enc(key: Atom, payload: Expression):
    """Encrypt a whole expression as a single unit."""
    if is_err(key):
        return key
    if is_err(payload):
        return payload
    if not _is_encryptor(key):
        return NOT_AN_ENCRYPTOR
    return (EncTerm(key, tuple(payload)),)


def sign(key: Atom, payload: Expression):
    """Sign a whole expression as a single unit."""
    if is_err(key):
        return key
    if is_err(payload):
        return payload
    if not _is_encryptor(key):
        return NOT_AN_ENCRYPTOR
    return (SigTerm(key, tuple(payload)),)


def decr(key: Atom, message: Expression):
    """Decrypt: succeeds only on a single encryption whose encryptor is
    the inverse of ``key``; returns the payload, otherwise an error."""
    if is_err(key):
        return key
    if is_err(message):
        return message
    if not (isinstance(message, tuple) and len(message) == 1 and isinstance(message[0], EncTerm)):
        return NOT_AN_ENCRYPTION
    box = message[0]
    if not (
        isinstance(key, Atom)
        and key.kind is AtomKind.KEY
        and box.key.kind is AtomKind.KEY
        and box.key.inverse_label == key.label
    ):
        return WRONG_KEY
    return box.payload


def ext(key: Atom, message: Expression):
    """Verify-and-extract: succeeds only on a single signature created
    with the inverse of ``key``; returns the signed payload."""
    if is_err(key):
        return key
    if is_err(message):
        return message
    if not (isinstance(message, tuple) and len(message) == 1 and isinstance(message[0], SigTerm)):
        return NOT_A_SIGNATURE
    box = message[0]
    if not (
        isinstance(key, Atom)
        and key.kind is AtomKind.KEY
        and box.key.kind is AtomKind.KEY
        and box.key.inverse_label == key.label
    ):
        return WRONG_KEY
    return box.payload


def concat(left: Expression, right: Expression):
    if is_err(left):
        return left
    if is_err(right):
        return right
    return tuple(left) + tuple(right)


FIRST, SECOND, THIRD = 1, 2, 3


def element(message: Expression, position: int):
    """The item at a 1-based position, or an error when the expression
    is shorter than the position."""
    if is_err(message):
        return message
    if not 1 <= position <= len(message):
        return OUT_OF_RANGE
    return message[position - 1]


def singleton(item: Item):
    """Wrap an item as a one-element expression; propagates errors."""
    if is_err(item):
        return item
    return (item,)


def term_eq(a: object, b: object) -> bool:
    """Guard-level equality: error values are unequal to everything."""
    if is_err(a) or is_err(b):
        return False
    return a == b


def render_item(item: Item) -> str:
    if isinstance(item, Atom):
        return item.label
    if isinstance(item, EncTerm):
        return f"enc({item.key.label}, {render_expression(item.payload)})"
    if isinstance(item, SigTerm):
        return f"sig({item.key.label}, {render_expression(item.payload)})"
    if isinstance(item, TagTerm):
        inner = ", ".join(
            part.label if isinstance(part, Atom) else render_expression(part)
            for part in item.parts
        )
        return f"{item.tag}({inner})"
    raise TypeError(f"not an item: {item!r}")


def render_expression(message: Expression) -> str:
    """Canonical textual form used in traces and knowledge dumps."""
    return "<" + ", ".join(render_item(item) for item in message) + ">"


def render_value(value: object) -> str:
    """Diagnostic rendering for values that may also be errors."""
    if is_err(value):
        return f"!{value.reason}"
    if isinstance(value, tuple):
        return render_expression(value)
    if isinstance(value, (Atom, EncTerm, SigTerm, TagTerm)):
        return render_item(value)
    return repr(value)
