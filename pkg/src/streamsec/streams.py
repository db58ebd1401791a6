"""Discrete-time channel histories.

A timed stream is a total map from time units to the finite list of
messages that crossed the channel during that unit; unpopulated units
read as the empty list.  Simulation only ever inspects a finite prefix,
so streams store just the populated intervals.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

from .terms import Atom, AtomKind, Expression, TagTerm, render_expression

EVENT_LABEL = "event"


class TimedStream:
    """Immutable per-channel history; ``emit`` returns a new stream."""

    __slots__ = ("_intervals",)

    def __init__(self, intervals: Mapping[int, Sequence[Expression]] | None = None) -> None:
        cleaned: dict[int, tuple[Expression, ...]] = {}
        if intervals:
            for t, messages in intervals.items():
                if t < 0:
                    raise ValueError("time units are non-negative")
                packed = tuple(messages)
                if packed:
                    cleaned[int(t)] = packed
        self._intervals = cleaned

    def interval(self, t: int) -> tuple[Expression, ...]:
        if t < 0:
            raise ValueError("time units are non-negative")
        return self._intervals.get(t, ())

    def emit(self, t: int, message: Expression) -> "TimedStream":
        if t < 0:
            raise ValueError("time units are non-negative")
        out = TimedStream.__new__(TimedStream)
        updated = dict(self._intervals)
        updated[t] = updated.get(t, ()) + (message,)
        out._intervals = updated
        return out

    @property
    def horizon(self) -> int:
        """Largest populated time unit, -1 when the stream is empty."""
        return max(self._intervals, default=-1)

    def populated(self) -> list[tuple[int, tuple[Expression, ...]]]:
        return sorted(self._intervals.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimedStream):
            return NotImplemented
        return self._intervals == other._intervals

    def __repr__(self) -> str:
        return f"TimedStream({self._intervals!r})"


def length(messages: Sequence[Expression]) -> int:
    return len(messages)


def msg_bound(stream: TimedStream, n: int, horizon: int) -> bool:
    """True when every interval up to the horizon holds at most n messages."""
    return all(len(msgs) <= n for t, msgs in stream.populated() if t <= horizon)


def is_event_message(message: object) -> bool:
    return (
        isinstance(message, tuple)
        and len(message) == 1
        and isinstance(message[0], Atom)
        and message[0].kind is AtomKind.DATA
        and message[0].label == EVENT_LABEL
    )


def is_init_message(message: object) -> bool:
    if not (isinstance(message, tuple) and len(message) == 1 and isinstance(message[0], TagTerm)):
        return False
    record = message[0]
    return (
        record.tag == "im"
        and len(record.parts) == 3
        and isinstance(record.parts[0], Atom)
        and record.parts[0].kind is AtomKind.SECRET
        and isinstance(record.parts[1], Atom)
        and record.parts[1].kind is AtomKind.KEY
        and isinstance(record.parts[2], tuple)
    )


MESSAGE_TYPES: dict[str, Callable[[object], bool]] = {
    "Expression": lambda message: isinstance(message, tuple),
    "Event": is_event_message,
    "InitMessage": is_init_message,
}


def check_message(msg_type: str, message: object) -> bool:
    return MESSAGE_TYPES[msg_type](message)


def render_trace(streams: Mapping[str, TimedStream], horizon: int) -> str:
    """One line per (time unit, channel, message); channels sorted
    alphabetically within a time unit.  Stable byte-for-byte."""
    lines = []
    for t in range(horizon + 1):
        for name in sorted(streams):
            for message in streams[name].interval(t):
                lines.append(f"t={t} {name} : {render_expression(message)}")
    return "\n".join(lines) + ("\n" if lines else "")
