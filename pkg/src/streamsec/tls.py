"""Executable handshake machines for the built-in case study.

A client opens the exchange with a hello record carrying a fresh
unguessable value, its public key, and a self-signed binding of its
name to that key.  The server echoes the unguessable value, presents a
certificate for its own key, and finally sends a session key, signed
and then encrypted under the public key it was presented.  The client
checks the certificate and the echoed value, then ships its secret
under the session key.

The flaw: the server only checks that the presented key matches the key
inside the *self-signed* binding, so an interceptor can substitute its
own key pair, decrypt the session-key message, and re-encrypt it for
the client, ending up able to read the secret.  The corrected variants
make the server include the presented key inside its signature, which
the interceptor cannot forge, and make the client verify that this
third field names its own key.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .components import (
    STRONG,
    WEAK,
    ChannelDecl,
    ComponentSpec,
    MsgBound,
    StepCtx,
    Transition,
    const,
)
from .streams import EVENT_LABEL
from .terms import (
    FIRST,
    SECOND,
    THIRD,
    Atom,
    AtomTable,
    Expression,
    OpError,
    TagTerm,
    decr,
    element,
    enc,
    ext,
    is_err,
    sign,
    singleton,
    term_eq,
)

NOT_AN_INIT_MESSAGE = OpError("not-an-init-message")

CLIENT_STATES = ("st0", "st1", "st2")
SERVER_STATES = ("initS", "waitS", "sendS1", "sendS2")
ADVERSARY_STATES = ("initA", "sendA1", "sendA2")

DEFAULT_LABELS: Mapping[str, str] = {
    "N": "N",
    "secretD": "secretD",
    "CKey": "CKey",
    "SKey": "SKey",
    "CAKey": "CAKey",
    "AKey": "AKey",
    "genKey": "genKey",
    "C": "C",
    "S": "S",
}


@dataclass(frozen=True)
class TlsParams:
    """All atoms one handshake scenario is built from."""

    table: AtomTable
    nonce: Atom
    secret_data: Atom
    client_name: Atom
    server_name: Atom
    event: Atom
    client_key: Atom
    client_key_inv: Atom
    server_key: Atom
    server_key_inv: Atom
    ca_key: Atom
    ca_key_inv: Atom
    adv_key: Atom
    adv_key_inv: Atom
    session_key: Atom


def make_params(overrides: Mapping[str, str] | None = None) -> TlsParams:
    """Build the scenario atoms; ``overrides`` renames the defaults."""
    labels = dict(DEFAULT_LABELS)
    if overrides:
        unknown = set(overrides) - set(labels)
        if unknown:
            raise KeyError(f"unknown parameter name(s): {sorted(unknown)}")
        labels.update(overrides)
    table = AtomTable()
    client_key, client_key_inv = table.asym_pair(labels["CKey"])
    server_key, server_key_inv = table.asym_pair(labels["SKey"])
    ca_key, ca_key_inv = table.asym_pair(labels["CAKey"])
    adv_key, adv_key_inv = table.asym_pair(labels["AKey"])
    return TlsParams(
        table=table,
        nonce=table.secret(labels["N"]),
        secret_data=table.secret(labels["secretD"]),
        client_name=table.data(labels["C"]),
        server_name=table.data(labels["S"]),
        event=table.data(EVENT_LABEL),
        client_key=client_key,
        client_key_inv=client_key_inv,
        server_key=server_key,
        server_key_inv=server_key_inv,
        ca_key=ca_key,
        ca_key_inv=ca_key_inv,
        adv_key=adv_key,
        adv_key_inv=adv_key_inv,
        session_key=table.sym_key(labels["genKey"]),
    )


def init_message(ung: Atom, key: Atom, msg: Expression):
    """The hello record: unguessable value, presented key, signed binding."""
    for value in (ung, key, msg):
        if is_err(value):
            return value
    return (TagTerm("im", (ung, key, tuple(msg))),)


def _im_part(message, index: int):
    if is_err(message):
        return message
    if not (
        isinstance(message, tuple)
        and len(message) == 1
        and isinstance(message[0], TagTerm)
        and message[0].tag == "im"
        and len(message[0].parts) == 3
    ):
        return NOT_AN_INIT_MESSAGE
    return message[0].parts[index]


def im_ung(message):
    return _im_part(message, 0)


def im_key(message):
    return _im_part(message, 1)


def im_msg(message):
    return _im_part(message, 2)


def server_certificate(p: TlsParams) -> Expression:
    return sign(p.ca_key_inv, (p.server_name, p.server_key))


def make_client(p: TlsParams, *, check_sender_key: bool = False) -> ComponentSpec:
    """The initiating side.  With ``check_sender_key`` the session-key
    message must name this client's own key in its third field
    (the corrected variant)."""
    hello = init_message(
        p.nonce, p.client_key, sign(p.client_key_inv, (p.client_name, p.client_key))
    )
    where = {
        # Certificate contents, trusted via the certification authority.
        "cert_fields": lambda c: ext(p.ca_key, c.msg("resp")),
        # Session-key message: decrypt with own private key, then verify
        # against the key learned from the certificate.
        "reply_fields": lambda c: ext(c.var("enc"), decr(p.client_key_inv, c.msg("resp"))),
    }

    def quiet(c: StepCtx) -> bool:
        return not c.has("abortS")

    def cert_names_server(c: StepCtx) -> bool:
        return term_eq(element(c.w("cert_fields"), FIRST), p.server_name)

    def reply_ok(c: StepCtx) -> bool:
        ok = term_eq(element(c.w("reply_fields"), SECOND), p.nonce)
        if check_sender_key:
            ok = ok and term_eq(element(c.w("reply_fields"), THIRD), p.client_key)
        return ok

    transitions = (
        Transition(
            "reset_after_peer_abort",
            guard=lambda c: c.has("abortS"),
            updates={"check": const("st0")},
        ),
        Transition(
            "engage_on_first_reply",
            guard=lambda c: quiet(c) and c.has("resp") and c.var("check") == "st0",
            updates={"check": const("st1")},
        ),
        Transition(
            "accept_certificate",
            guard=lambda c: quiet(c)
            and c.has("resp")
            and c.var("check") == "st1"
            and cert_names_server(c),
            updates={
                "check": const("st2"),
                "enc": lambda c: element(c.w("cert_fields"), SECOND),
            },
        ),
        Transition(
            "send_encrypted_secret",
            guard=lambda c: quiet(c)
            and c.has("resp")
            and c.var("check") == "st2"
            and reply_ok(c),
            updates={"check": const("st0")},
            emissions={
                "xchd": lambda c: enc(element(c.w("reply_fields"), FIRST), (p.secret_data,)),
            },
        ),
        Transition(
            "abort_on_failed_check",
            guard=lambda c: quiet(c)
            and (
                (c.var("check") == "st1" and (not c.has("resp") or not cert_names_server(c)))
                or (c.var("check") == "st2" and (not c.has("resp") or not reply_ok(c)))
            ),
            updates={"check": const("st0")},
            emissions={"abortC": const((p.event,))},
        ),
    )
    return ComponentSpec(
        name="client",
        causality=STRONG,
        inputs=(ChannelDecl("abortS", "Event"), ChannelDecl("resp", "Expression")),
        outputs=(
            ChannelDecl("init", "InitMessage"),
            ChannelDecl("xchd", "Expression"),
            ChannelDecl("abortC", "Event"),
        ),
        locals_init={"check": "st0", "enc": None},
        transitions=transitions,
        where=where,
        initial_emissions=((0, "init", hello),),
        private_keys=frozenset({p.client_key_inv}),
        unguessable=frozenset({p.nonce, p.secret_data}),
        local_secrets=frozenset(
            {(p.client_name,), (p.client_key,), (p.ca_key,), (p.event,)}
        ),
    )


def make_server(p: TlsParams, *, echo_sender_key: bool = False) -> ComponentSpec:
    """The responding side.  With ``echo_sender_key`` the signed session
    payload additionally names the key the hello presented (the
    corrected variant)."""
    where = {
        # The self-signed name/key binding, opened with the presented key.
        "hello_binding": lambda c: ext(im_key(c.msg("init")), im_msg(c.msg("init"))),
    }

    def quiet(c: StepCtx) -> bool:
        return not c.has("abortC")

    def presented_key_matches(c: StepCtx) -> bool:
        return term_eq(element(c.w("hello_binding"), SECOND), im_key(c.msg("init")))

    def session_message(c: StepCtx):
        fields = (p.session_key, c.var("uValue"))
        if echo_sender_key:
            fields = fields + (c.var("kValue"),)
        return enc(c.var("kValue"), sign(p.server_key_inv, fields))

    transitions = (
        Transition(
            "reset_after_peer_abort",
            guard=lambda c: c.has("abortC"),
            updates={"stateS": const("initS")},
        ),
        Transition(
            "reject_unbound_key",
            guard=lambda c: quiet(c)
            and c.var("stateS") == "initS"
            and c.has("init")
            and not presented_key_matches(c),
            emissions={"abortS": const((p.event,))},
        ),
        Transition(
            "accept_hello",
            guard=lambda c: quiet(c)
            and c.var("stateS") == "initS"
            and c.has("init")
            and presented_key_matches(c),
            updates={
                "stateS": const("sendS1"),
                "uValue": lambda c: im_ung(c.msg("init")),
                "kValue": lambda c: im_key(c.msg("init")),
            },
            emissions={"resp": lambda c: singleton(im_ung(c.msg("init")))},
        ),
        Transition(
            "send_certificate",
            guard=lambda c: quiet(c) and c.var("stateS") == "sendS1",
            updates={"stateS": const("sendS2")},
            emissions={"resp": const(server_certificate(p))},
        ),
        Transition(
            "send_session_key",
            guard=lambda c: quiet(c) and c.var("stateS") == "sendS2",
            updates={"stateS": const("waitS")},
            emissions={"resp": session_message},
        ),
    )
    return ComponentSpec(
        name="server",
        causality=STRONG,
        inputs=(
            ChannelDecl("init", "InitMessage"),
            ChannelDecl("abortC", "Event"),
            ChannelDecl("xchd", "Expression"),
        ),
        outputs=(ChannelDecl("resp", "Expression"), ChannelDecl("abortS", "Event")),
        locals_init={"stateS": "initS", "kValue": None, "uValue": None},
        assumptions=(MsgBound("init", 1), MsgBound("xchd", 1)),
        transitions=transitions,
        where=where,
        private_keys=frozenset({p.server_key_inv, p.session_key}),
        unguessable=frozenset(),
        local_secrets=frozenset(
            {(p.server_name,), (p.server_key,), tuple(server_certificate(p)), (p.event,)}
        ),
    )


def make_fixed_client(p: TlsParams) -> ComponentSpec:
    return make_client(p, check_sender_key=True)


def make_fixed_server(p: TlsParams) -> ComponentSpec:
    return make_server(p, echo_sender_key=True)


def make_adversary(p: TlsParams) -> ComponentSpec:
    """A zero-delay interceptor sitting on every channel.

    Abort and secret-exchange channels pass through unchanged.  The
    hello is re-issued under the interceptor's own key pair; the
    session-key message is decrypted with that pair and re-encrypted
    under the key the client originally presented.  Everything crossing
    the inputs feeds its knowledge base, as does the session key it
    extracts from the opened reply.
    """
    where = {
        "opened_reply": lambda c: decr(p.adv_key_inv, c.msg("resp_1")),
        "relayed_cert_fields": lambda c: ext(p.ca_key, c.msg("resp_1")),
    }

    def passthrough(port: str):
        return lambda c: list(c.interval(port))

    transitions = (
        Transition(
            "relay_client_abort",
            guard=lambda c: c.has("abortC_1"),
            emissions={"abortC_2": passthrough("abortC_1")},
        ),
        Transition(
            "relay_server_abort",
            guard=lambda c: c.has("abortS_1"),
            emissions={"abortS_2": passthrough("abortS_1")},
        ),
        Transition(
            "relay_secret_exchange",
            guard=lambda c: c.has("xchd_1"),
            emissions={"xchd_2": passthrough("xchd_1")},
        ),
        Transition(
            "reissue_hello_under_own_key",
            guard=lambda c: c.has("init_1"),
            updates={"aCKey": lambda c: im_key(c.msg("init_1"))},
            emissions={
                "init_2": lambda c: init_message(
                    im_ung(c.msg("init_1")),
                    p.adv_key,
                    sign(p.adv_key_inv, (p.client_name, p.adv_key)),
                ),
            },
        ),
        Transition(
            "relay_value_echo",
            guard=lambda c: c.has("resp_1") and c.var("stateA") == "initA",
            updates={"stateA": const("sendA1")},
            emissions={"resp_2": passthrough("resp_1")},
        ),
        Transition(
            "harvest_certified_key",
            guard=lambda c: c.has("resp_1") and c.var("stateA") == "sendA1",
            updates={
                "stateA": const("sendA2"),
                "aSKey": lambda c: element(c.w("relayed_cert_fields"), SECOND),
            },
            emissions={"resp_2": passthrough("resp_1")},
        ),
        Transition(
            "reencrypt_session_key",
            guard=lambda c: c.has("resp_1") and c.var("stateA") == "sendA2",
            updates={"stateA": const("initA")},
            emissions={"resp_2": lambda c: enc(c.var("aCKey"), c.w("opened_reply"))},
            records=(
                lambda c: singleton(
                    element(ext(c.var("aSKey"), c.w("opened_reply")), FIRST)
                ),
            ),
        ),
    )
    return ComponentSpec(
        name="adversary",
        causality=WEAK,
        inputs=(
            ChannelDecl("abortC_1", "Event"),
            ChannelDecl("abortS_1", "Event"),
            ChannelDecl("xchd_1", "Expression"),
            ChannelDecl("resp_1", "Expression"),
            ChannelDecl("init_1", "InitMessage"),
        ),
        outputs=(
            ChannelDecl("abortC_2", "Event"),
            ChannelDecl("abortS_2", "Event"),
            ChannelDecl("xchd_2", "Expression"),
            ChannelDecl("resp_2", "Expression"),
            ChannelDecl("init_2", "InitMessage"),
        ),
        locals_init={"stateA": "initA", "aCKey": None, "aSKey": None},
        assumptions=(MsgBound("resp_1", 2), MsgBound("xchd_1", 1)),
        transitions=transitions,
        where=where,
        private_keys=frozenset({p.adv_key_inv}),
        unguessable=frozenset(),
        local_secrets=frozenset(
            {(p.adv_key,), (p.ca_key,), tuple(server_certificate(p))}
        ),
        observer=True,
    )
