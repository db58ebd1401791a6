"""streamsec: a symbolic security-protocol simulator.

Components are assumption/guarantee state machines exchanging symbolic
messages over discrete-time channels.  Cryptography is free-term
(perfect): encryptions and signatures open only with the matching
inverse key.  An adversary's knowledge is the closure of everything it
observed under decomposition and recomposition, which makes secrecy
questions decidable and lets the built-in handshake scenarios reproduce
a man-in-the-middle secret leak and verify the corrected variant.
"""

from .components import (
    STRONG,
    WEAK,
    AssumptionViolated,
    ChannelDecl,
    ComponentSpec,
    Composite,
    ConflictingUpdates,
    InterfaceMismatch,
    MsgBound,
    SimulationError,
    StepCtx,
    Trace,
    Transition,
    compose,
    ks_union_check,
    run,
    step,
)
from .knowledge import KnowledgeBase, OwnSecretQueryError, SecrecyTarget, leak_check
from .scenarios import Scenario, builtin_names, load, load_builtin, load_file
from .streams import TimedStream, length, msg_bound, render_trace
from .terms import (
    EMPTY,
    FIRST,
    SECOND,
    THIRD,
    Atom,
    AtomKind,
    AtomTable,
    EncTerm,
    Expression,
    OpError,
    SigTerm,
    TagTerm,
    concat,
    decr,
    element,
    enc,
    expr,
    ext,
    is_err,
    render_expression,
    sign,
    singleton,
    term_eq,
)
from .tls import (
    TlsParams,
    init_message,
    make_adversary,
    make_client,
    make_fixed_client,
    make_fixed_server,
    make_params,
    make_server,
)

__version__ = "0.1.0"
