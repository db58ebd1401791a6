"""Declarative component state machines and their synchronous simulation.

A component declares typed input/output ports, local variables with
initial values, stream assumptions (message bounds per interval), and a
set of guarded transitions.  At each time unit every transition whose
guard holds fires simultaneously; two fired transitions writing
different values to the same variable or channel is an error in the
component's definition, not a race.  Locals not written keep their
value and channels not written stay empty for that step (the implicit
else case).

Causality fixes when emissions land: a strongly causal component reacts
to inputs at t with emissions at t+1; a weakly causal component emits
within the same unit.  The simulator therefore delivers already
scheduled messages first, then steps the weak components in dataflow
order, then steps the strong ones.  Same-time dataflow cycles among
weak components are rejected when the composite is built.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Mapping, Sequence

from .streams import MESSAGE_TYPES, TimedStream, check_message, render_trace
from .terms import Atom, Expression, is_err

STRONG = "strong"
WEAK = "weak"


class SimulationError(Exception):
    """Base class for errors surfaced by the component engine."""


class InterfaceMismatch(SimulationError):
    """A wiring problem: unknown port, clashing message types, two
    producers for one channel, or a same-time dataflow cycle."""


class ConflictingUpdates(SimulationError):
    """Two simultaneously fired transitions wrote different values to
    the same variable or channel."""


class AssumptionViolated(SimulationError):
    """An input stream broke the component's message-bound assumption."""

    def __init__(self, component: str, channel: str, t: int, limit: int, got: int) -> None:
        super().__init__(
            f"{component}: more than {limit} message(s) on '{channel}' at t={t} (got {got})"
        )
        self.component = component
        self.channel = channel
        self.t = t


class EmissionFailure(SimulationError):
    """A fired transition produced an error value or an ill-typed
    message for an output channel."""


class SpecError(SimulationError):
    """A transition referenced an undeclared variable, binding, or port."""


@dataclass(frozen=True)
class ChannelDecl:
    """A port of a component: the name transitions use, the message type
    tag, and the channel it is wired to (defaults to the port name)."""

    name: str
    msg_type: str
    channel: str | None = None

    @property
    def wired(self) -> str:
        return self.channel if self.channel is not None else self.name


@dataclass(frozen=True)
class MsgBound:
    """Assumption: at most ``limit`` messages per interval on a port."""

    channel: str
    limit: int


class StepCtx:
    """What a transition sees during one step: the current intervals of
    the input ports, the local variables, and the component's
    where-bindings (memoised per step)."""

    __slots__ = ("t", "_inputs", "_locals", "_where", "_cache", "_evaluating")

    def __init__(
        self,
        t: int,
        inputs: Mapping[str, tuple[Expression, ...]],
        local_vars: Mapping[str, Any],
        where: Mapping[str, Callable[["StepCtx"], Any]],
    ) -> None:
        self.t = t
        self._inputs = inputs
        self._locals = local_vars
        self._where = where
        self._cache: dict[str, Any] = {}
        self._evaluating: set[str] = set()

    def interval(self, port: str) -> tuple[Expression, ...]:
        try:
            return self._inputs[port]
        except KeyError:
            raise SpecError(f"no input port '{port}'") from None

    def has(self, port: str) -> bool:
        return len(self.interval(port)) > 0

    def msg(self, port: str):
        """First message of the interval, or an error value when empty."""
        messages = self.interval(port)
        if not messages:
            from .terms import NO_MESSAGE

            return NO_MESSAGE
        return messages[0]

    def var(self, name: str):
        try:
            return self._locals[name]
        except KeyError:
            raise SpecError(f"no local variable '{name}'") from None

    def w(self, name: str):
        """Value of a named where-binding; failures stay error values."""
        if name in self._cache:
            return self._cache[name]
        if name in self._evaluating:
            raise SpecError(f"where-binding cycle at '{name}'")
        try:
            binding = self._where[name]
        except KeyError:
            raise SpecError(f"no where-binding '{name}'") from None
        self._evaluating.add(name)
        try:
            value = binding(self)
        finally:
            self._evaluating.discard(name)
        self._cache[name] = value
        return value


def const(value):
    return lambda _ctx: value


@dataclass(frozen=True)
class Transition:
    """One guarded rule: when the guard holds over the current inputs
    and locals, apply the updates and schedule the emissions.

    An emission callback returns one expression, a list of expressions
    (several messages in the same interval), or None for nothing.
    ``records`` are values logged into the component's observation
    trail when the transition fires; error values are skipped.
    """

    label: str
    guard: Callable[[StepCtx], bool]
    updates: Mapping[str, Callable[[StepCtx], Any]] = field(default_factory=dict)
    emissions: Mapping[str, Callable[[StepCtx], Any]] = field(default_factory=dict)
    records: tuple[Callable[[StepCtx], Any], ...] = ()


@dataclass(frozen=True, eq=False)
class ComponentSpec:
    """A complete component: interface, locals, assumptions, behaviour,
    and its key/secret profile."""

    name: str
    causality: str
    inputs: tuple[ChannelDecl, ...]
    outputs: tuple[ChannelDecl, ...]
    locals_init: Mapping[str, Any] = field(default_factory=dict)
    assumptions: tuple[MsgBound, ...] = ()
    transitions: tuple[Transition, ...] = ()
    where: Mapping[str, Callable[[StepCtx], Any]] = field(default_factory=dict)
    initial_emissions: tuple[tuple[int, str, Expression], ...] = ()
    private_keys: frozenset = frozenset()
    unguessable: frozenset = frozenset()
    local_secrets: frozenset = frozenset()
    observer: bool = False

    def __post_init__(self) -> None:
        if self.causality not in (STRONG, WEAK):
            raise ValueError(f"unknown causality '{self.causality}'")
        in_names = [d.name for d in self.inputs]
        out_names = [d.name for d in self.outputs]
        if len(set(in_names)) != len(in_names) or len(set(out_names)) != len(out_names):
            raise ValueError(f"{self.name}: duplicate port names")
        if set(in_names) & set(out_names):
            raise ValueError(f"{self.name}: input and output port names overlap")
        for decl in self.inputs + self.outputs:
            if decl.msg_type not in MESSAGE_TYPES:
                raise ValueError(f"{self.name}: unknown message type '{decl.msg_type}'")
        for bound in self.assumptions:
            if bound.channel not in in_names:
                raise ValueError(f"{self.name}: assumption on unknown input '{bound.channel}'")
        outs = {d.name: d for d in self.outputs}
        for t, port, message in self.initial_emissions:
            if t < 0:
                raise ValueError(f"{self.name}: initial emission at negative time")
            if port not in outs:
                raise ValueError(f"{self.name}: initial emission on unknown output '{port}'")
            if not check_message(outs[port].msg_type, message):
                raise ValueError(f"{self.name}: initial emission ill-typed for '{port}'")

    def ks(self) -> frozenset:
        """Union of private keys and unguessable values."""
        return self.private_keys | self.unguessable

    def input_decl(self, name: str) -> ChannelDecl:
        for decl in self.inputs:
            if decl.name == name:
                return decl
        raise KeyError(name)

    def rename_channels(self, mapping: Mapping[str, str]) -> "ComponentSpec":
        """Rewire ports to differently named channels.  Port names used
        by transitions are unchanged; only the wiring name moves."""
        known = {d.name for d in self.inputs + self.outputs}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"{self.name}: no such port(s) {sorted(unknown)}")

        def rename(decl: ChannelDecl) -> ChannelDecl:
            if decl.name in mapping:
                return replace(decl, channel=mapping[decl.name])
            return decl

        return replace(
            self,
            inputs=tuple(rename(d) for d in self.inputs),
            outputs=tuple(rename(d) for d in self.outputs),
        )


@dataclass(frozen=True)
class StepResult:
    state: dict
    emissions: tuple[tuple[str, Expression], ...]
    fired: tuple[str, ...]
    records: tuple[Expression, ...]


def _as_messages(value) -> list[Expression]:
    if value is None:
        return []
    if isinstance(value, list):
        return list(value)
    if isinstance(value, tuple):
        return [value]
    raise EmissionFailure(f"emission produced a non-message value: {value!r}")


def step(
    spec: ComponentSpec,
    state: Mapping[str, Any],
    inputs: Mapping[str, tuple[Expression, ...]],
    t: int,
) -> StepResult:
    """Evaluate one time unit of a component.

    All transitions with true guards fire together; conflicting writes
    raise.  Unwritten locals persist and unwritten outputs stay silent.
    """
    for bound in spec.assumptions:
        got = len(inputs.get(bound.channel, ()))
        if got > bound.limit:
            raise AssumptionViolated(spec.name, bound.channel, t, bound.limit, got)

    ctx = StepCtx(t, inputs, state, spec.where)
    fired: list[str] = []
    writes: dict[str, tuple[Any, str]] = {}
    emitted: dict[str, tuple[list[Expression], str]] = {}
    records: list[Expression] = []
    out_types = {d.name: d.msg_type for d in spec.outputs}

    for transition in spec.transitions:
        if not transition.guard(ctx):
            continue
        fired.append(transition.label)
        for name, compute in transition.updates.items():
            if name not in state:
                raise SpecError(f"{spec.name}: update of undeclared local '{name}'")
            value = compute(ctx)
            if name in writes and writes[name][0] != value:
                raise ConflictingUpdates(
                    f"{spec.name} at t={t}: '{writes[name][1]}' and "
                    f"'{transition.label}' disagree on local '{name}'"
                )
            writes[name] = (value, transition.label)
        for port, compute in transition.emissions.items():
            if port not in out_types:
                raise SpecError(f"{spec.name}: emission on undeclared output '{port}'")
            value = compute(ctx)
            if is_err(value):
                raise EmissionFailure(
                    f"{spec.name} at t={t}: emission on '{port}' failed ({value.reason})"
                )
            messages = _as_messages(value)
            for message in messages:
                if not check_message(out_types[port], message):
                    raise EmissionFailure(
                        f"{spec.name} at t={t}: message on '{port}' is not {out_types[port]}"
                    )
            if port in emitted and emitted[port][0] != messages:
                raise ConflictingUpdates(
                    f"{spec.name} at t={t}: '{emitted[port][1]}' and "
                    f"'{transition.label}' disagree on channel '{port}'"
                )
            emitted[port] = (messages, transition.label)
        for compute in transition.records:
            value = compute(ctx)
            if not is_err(value) and isinstance(value, tuple):
                records.append(value)

    new_state = dict(state)
    for name, (value, _) in writes.items():
        new_state[name] = value
    emissions = tuple(
        (port, message) for port, (messages, _) in emitted.items() for message in messages
    )
    return StepResult(new_state, emissions, tuple(fired), tuple(records))


@dataclass(frozen=True)
class Wire:
    """One channel of a composite: exactly one producer, any consumers."""

    channel: str
    msg_type: str
    producer: str
    producer_port: str
    consumers: tuple[tuple[str, str], ...]

    def describe(self) -> str:
        heads = ", ".join(f"{c}.{p}" for c, p in self.consumers) or "(unconsumed)"
        return f"{self.producer}.{self.producer_port} -> {heads}"


@dataclass(frozen=True, eq=False)
class Composite:
    """Wired components plus the union of their key/secret profiles."""

    parts: tuple[ComponentSpec, ...]
    wires: tuple[Wire, ...]
    external_inputs: tuple[tuple[str, str], ...]
    external_outputs: tuple[tuple[str, str], ...]
    weak_order: tuple[str, ...]
    private_keys: frozenset = frozenset()
    unguessable: frozenset = frozenset()
    local_secrets: frozenset = frozenset()

    def ks(self) -> frozenset:
        return self.private_keys | self.unguessable

    def part(self, name: str) -> ComponentSpec:
        for part in self.parts:
            if part.name == name:
                return part
        raise KeyError(name)

    def channel_types(self) -> dict[str, str]:
        types = {wire.channel: wire.msg_type for wire in self.wires}
        for channel, msg_type in self.external_inputs + self.external_outputs:
            types.setdefault(channel, msg_type)
        return types


WireSpec = tuple[str, str, str, str]  # producer, port, consumer, port


def parse_wire(line: str) -> WireSpec:
    """Parse ``producer.port -> consumer.port``."""
    try:
        left, right = line.split("->")
        producer, producer_port = left.strip().split(".")
        consumer, consumer_port = right.strip().split(".")
    except ValueError:
        raise InterfaceMismatch(f"malformed wire '{line.strip()}'") from None
    return producer.strip(), producer_port.strip(), consumer.strip(), consumer_port.strip()


def _wire_text(w: WireSpec) -> str:
    return f"{w[0]}.{w[1]} -> {w[2]}.{w[3]}"


def _check_weak_cycles(parts: Sequence[ComponentSpec], wires: Iterable[Wire]) -> tuple[str, ...]:
    """Order weak components along same-time dataflow; reject cycles."""
    weak = [p.name for p in parts if p.causality == WEAK]
    weak_set = set(weak)
    edges: dict[str, set[str]] = {name: set() for name in weak}
    edge_wires: dict[tuple[str, str], Wire] = {}
    for wire in wires:
        if wire.producer in weak_set:
            for consumer, _ in wire.consumers:
                if consumer in weak_set:
                    edges[wire.producer].add(consumer)
                    edge_wires.setdefault((wire.producer, consumer), wire)
    order: list[str] = []
    incoming = {name: sum(name in targets for targets in edges.values()) for name in weak}
    ready = [name for name in weak if incoming[name] == 0]
    while ready:
        name = ready.pop(0)
        order.append(name)
        for target in sorted(edges[name]):
            incoming[target] -= 1
            if incoming[target] == 0:
                ready.append(target)
    if len(order) != len(weak):
        stuck = [name for name in weak if name not in order]
        detail = "; ".join(
            f"{src}.{edge_wires[(src, dst)].producer_port} -> {dst}"
            for src in stuck
            for dst in edges[src]
            if dst in stuck and (src, dst) in edge_wires
        )
        raise InterfaceMismatch(
            f"same-time dataflow cycle among weak components {sorted(stuck)}"
            + (f" ({detail})" if detail else "")
        )
    return tuple(order)


def compose(
    parts: Sequence[ComponentSpec],
    wiring: Sequence[str | WireSpec] | None = None,
) -> Composite:
    """Build a composite, checking the syntactic interfaces.

    With no explicit wiring, same-named output and input channels
    connect (components built for a topology carry pre-renamed ports).
    With explicit wiring, only the listed connections are made and each
    channel takes its producer port's name.  Either way each channel
    has exactly one producer and all its endpoints agree on the message
    type; weakly causal components must not form same-time cycles.
    """
    parts = tuple(parts)
    names = [p.name for p in parts]
    if len(set(names)) != len(names):
        raise InterfaceMismatch(f"duplicate component names in {names}")
    by_name = {p.name: p for p in parts}

    if wiring is not None:
        parsed = [parse_wire(w) if isinstance(w, str) else w for w in wiring]
        renames: dict[str, dict[str, str]] = {name: {} for name in names}
        producers_seen: dict[str, WireSpec] = {}
        produced: set[tuple[str, str]] = set()
        consumed: dict[tuple[str, str], WireSpec] = {}
        for w in parsed:
            producer, producer_port, consumer, consumer_port = w
            if producer not in by_name:
                raise InterfaceMismatch(f"{_wire_text(w)}: unknown component '{producer}'")
            if consumer not in by_name:
                raise InterfaceMismatch(f"{_wire_text(w)}: unknown component '{consumer}'")
            out_decl = next((d for d in by_name[producer].outputs if d.name == producer_port), None)
            if out_decl is None:
                raise InterfaceMismatch(
                    f"{_wire_text(w)}: '{producer}' has no output '{producer_port}'"
                )
            in_decl = next((d for d in by_name[consumer].inputs if d.name == consumer_port), None)
            if in_decl is None:
                raise InterfaceMismatch(
                    f"{_wire_text(w)}: '{consumer}' has no input '{consumer_port}'"
                )
            if out_decl.msg_type != in_decl.msg_type:
                raise InterfaceMismatch(
                    f"{_wire_text(w)}: message types differ "
                    f"({out_decl.msg_type} vs {in_decl.msg_type})"
                )
            channel = out_decl.wired
            previous = producers_seen.get(channel)
            if previous is not None and previous[:2] != w[:2]:
                raise InterfaceMismatch(
                    f"{_wire_text(w)}: channel '{channel}' already produced by "
                    f"'{previous[0]}.{previous[1]}'"
                )
            producers_seen[channel] = w
            produced.add((producer, producer_port))
            if (consumer, consumer_port) in consumed:
                raise InterfaceMismatch(
                    f"{_wire_text(w)}: input '{consumer}.{consumer_port}' wired twice "
                    f"(also by {_wire_text(consumed[(consumer, consumer_port)])})"
                )
            consumed[(consumer, consumer_port)] = w
            renames[producer][producer_port] = channel
            renames[consumer][consumer_port] = channel
        # Unwired ports become private external channels so accidental
        # name matches cannot connect anything the wiring did not say.
        for part in parts:
            for decl in part.inputs:
                if (part.name, decl.name) not in consumed:
                    renames[part.name].setdefault(decl.name, f"{part.name}.{decl.name}")
            for decl in part.outputs:
                if (part.name, decl.name) not in produced:
                    renames[part.name].setdefault(decl.name, f"{part.name}.{decl.name}")
        parts = tuple(p.rename_channels(renames[p.name]) for p in parts)
        by_name = {p.name: p for p in parts}

    producers: dict[str, list[tuple[str, ChannelDecl]]] = {}
    consumers: dict[str, list[tuple[str, ChannelDecl]]] = {}
    for part in parts:
        for decl in part.outputs:
            producers.setdefault(decl.wired, []).append((part.name, decl))
        for decl in part.inputs:
            consumers.setdefault(decl.wired, []).append((part.name, decl))

    wires: list[Wire] = []
    external_inputs: list[tuple[str, str]] = []
    external_outputs: list[tuple[str, str]] = []
    for channel in sorted(set(producers) | set(consumers)):
        sources = producers.get(channel, [])
        sinks = consumers.get(channel, [])
        if len(sources) > 1:
            who = ", ".join(f"{name}.{decl.name}" for name, decl in sources)
            raise InterfaceMismatch(f"channel '{channel}' has two producers ({who})")
        types = {decl.msg_type for _, decl in sources + sinks}
        if len(types) > 1:
            who = ", ".join(f"{name}.{decl.name}:{decl.msg_type}" for name, decl in sources + sinks)
            raise InterfaceMismatch(f"channel '{channel}' mixes message types ({who})")
        msg_type = types.pop()
        if not sources:
            external_inputs.append((channel, msg_type))
            continue
        producer_name, producer_decl = sources[0]
        if not sinks:
            external_outputs.append((channel, msg_type))
        wires.append(
            Wire(
                channel=channel,
                msg_type=msg_type,
                producer=producer_name,
                producer_port=producer_decl.name,
                consumers=tuple((name, decl.name) for name, decl in sinks),
            )
        )

    weak_order = _check_weak_cycles(parts, wires)
    return Composite(
        parts=parts,
        wires=tuple(wires),
        external_inputs=tuple(external_inputs),
        external_outputs=tuple(external_outputs),
        weak_order=weak_order,
        private_keys=frozenset().union(*(p.private_keys for p in parts)) if parts else frozenset(),
        unguessable=frozenset().union(*(p.unguessable for p in parts)) if parts else frozenset(),
        local_secrets=frozenset().union(*(p.local_secrets for p in parts)) if parts else frozenset(),
    )


@dataclass(frozen=True)
class PropertyCheck:
    prop: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class CompositionReport:
    checks: tuple[PropertyCheck, ...]

    @property
    def ok(self) -> bool:
        return all(check.ok for check in self.checks)


def ks_union_check(composite: Composite) -> CompositionReport:
    """Verify the key/secret and channel composition properties on a
    concrete composite, one verdict per property."""
    parts = composite.parts
    checks = []

    def labels(atoms: Iterable[Atom]) -> str:
        return "{" + ", ".join(sorted(a.label for a in atoms)) + "}"

    missing_k = {k for k in composite.private_keys if not any(k in p.private_keys for p in parts)}
    checks.append(
        PropertyCheck(
            "composite-private-key-has-owner",
            not missing_k,
            "every composite private key is a part's private key"
            if not missing_k
            else f"unowned: {labels(missing_k)}",
        )
    )
    missing_s = {s for s in composite.unguessable if not any(s in p.unguessable for p in parts)}
    checks.append(
        PropertyCheck(
            "composite-unguessable-has-owner",
            not missing_s,
            "every composite unguessable value is a part's"
            if not missing_s
            else f"unowned: {labels(missing_s)}",
        )
    )
    lost_k = {k for p in parts for k in p.private_keys if k not in composite.private_keys}
    checks.append(
        PropertyCheck(
            "part-private-key-lifts",
            not lost_k,
            "every part private key is a composite private key"
            if not lost_k
            else f"lost: {labels(lost_k)}",
        )
    )
    lost_s = {s for p in parts for s in p.unguessable if s not in composite.unguessable}
    checks.append(
        PropertyCheck(
            "part-unguessable-lifts",
            not lost_s,
            "every part unguessable value lifts" if not lost_s else f"lost: {labels(lost_s)}",
        )
    )
    part_ks = frozenset().union(*(p.ks() for p in parts)) if parts else frozenset()
    invented = composite.ks() - part_ks
    checks.append(
        PropertyCheck(
            "no-invented-keys-or-secrets",
            not invented,
            "composite keys/secrets all come from parts"
            if not invented
            else f"invented: {labels(invented)}",
        )
    )
    part_inputs = {(p.name, d.wired) for p in parts for d in p.inputs}
    part_outputs = {(p.name, d.wired) for p in parts for d in p.outputs}
    bad_in = [ch for ch, _ in composite.external_inputs if not any(c == ch for _, c in part_inputs)]
    bad_out = [
        ch for ch, _ in composite.external_outputs if not any(c == ch for _, c in part_outputs)
    ]
    checks.append(
        PropertyCheck(
            "external-channels-from-parts",
            not bad_in and not bad_out,
            "every external channel belongs to a part"
            if not (bad_in or bad_out)
            else f"orphaned: {bad_in + bad_out}",
        )
    )
    return CompositionReport(tuple(checks))


@dataclass
class Trace:
    """Everything one simulation produced: per-channel streams, the
    per-component locals/firing history, the emissions each step
    scheduled, and every message each component received."""

    horizon: int
    streams: dict[str, TimedStream]
    locals_history: dict[str, list[dict]]
    fired: dict[str, list[tuple[str, ...]]]
    scheduled: dict[str, list[tuple[tuple[str, int, Expression], ...]]]
    observations: dict[str, list[tuple[int, Expression]]]

    def render(self) -> str:
        return render_trace(self.streams, self.horizon)

    def emitted_by(self, component: str) -> list[tuple[int, str, Expression]]:
        out = []
        for per_step in self.scheduled[component]:
            for channel, t, message in per_step:
                out.append((t, channel, message))
        return out

    def abort_events(self, channel_types: Mapping[str, str]) -> list[tuple[str, int]]:
        events = []
        for channel in sorted(self.streams):
            if channel_types.get(channel) != "Event":
                continue
            for t, messages in self.streams[channel].populated():
                if t <= self.horizon and messages:
                    events.append((channel, t))
        return events


def run(composite: Composite, horizon: int) -> Trace:
    """Synchronous simulation up to and including the horizon.

    Per time unit: already scheduled messages are visible first, weak
    components then read and emit within the unit (in dataflow order),
    and strong components finally read the completed intervals and
    schedule their emissions for the next unit.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    channels = set(composite.channel_types())
    for part in composite.parts:
        for decl in part.inputs + part.outputs:
            channels.add(decl.wired)
    streams: dict[str, TimedStream] = {ch: TimedStream() for ch in channels}

    states = {p.name: dict(p.locals_init) for p in composite.parts}
    locals_history = {p.name: [dict(states[p.name])] for p in composite.parts}
    fired: dict[str, list[tuple[str, ...]]] = {p.name: [] for p in composite.parts}
    scheduled: dict[str, list[tuple[tuple[str, int, Expression], ...]]] = {
        p.name: [] for p in composite.parts
    }
    observations: dict[str, list[tuple[int, Expression]]] = {p.name: [] for p in composite.parts}

    for part in composite.parts:
        outs = {d.name: d for d in part.outputs}
        for t0, port, message in part.initial_emissions:
            streams[outs[port].wired] = streams[outs[port].wired].emit(t0, message)

    weak_parts = [composite.part(name) for name in composite.weak_order]
    strong_parts = [p for p in composite.parts if p.causality == STRONG]

    def gather(part: ComponentSpec, t: int) -> dict[str, tuple[Expression, ...]]:
        return {d.name: streams[d.wired].interval(t) for d in part.inputs}

    def advance(part: ComponentSpec, t: int, delay: int) -> None:
        inputs = gather(part, t)
        for decl in part.inputs:
            for message in inputs[decl.name]:
                observations[part.name].append((t, message))
        result = step(part, states[part.name], inputs, t)
        outs = {d.name: d for d in part.outputs}
        sent = []
        for port, message in result.emissions:
            channel = outs[port].wired
            streams[channel] = streams[channel].emit(t + delay, message)
            sent.append((channel, t + delay, message))
        scheduled[part.name].append(tuple(sent))
        fired[part.name].append(result.fired)
        observations[part.name].extend((t, record) for record in result.records)
        states[part.name] = result.state

    for t in range(horizon + 1):
        for part in weak_parts:
            advance(part, t, delay=0)
        for part in strong_parts:
            advance(part, t, delay=1)
        for part in composite.parts:
            locals_history[part.name].append(dict(states[part.name]))

    return Trace(
        horizon=horizon,
        streams=streams,
        locals_history=locals_history,
        fired=fired,
        scheduled=scheduled,
        observations=observations,
    )
