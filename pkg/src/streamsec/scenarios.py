"""Built-in scenarios, the scenario description file format, and the
knowledge-base plumbing that turns a trace into secrecy verdicts.

Scenario files are plain structured text::

    [component client]
    kind = client            # client | server | adversary |
                             # fixed-client | fixed-server

    [wiring]
    client.init -> adversary.init_1
    ...

    [scenario]
    horizon = 10
    targets = secretD

``kind`` defaults to the section name.  Optional ``causality``,
``keys``, ``secrets`` and ``locals`` entries in a component section are
validated against the built-in component.  Each wire connects one
output port to one input port; the channel takes the producer port's
name.  User-defined transition systems are a library-level feature and
cannot be expressed in the file format.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping

from .components import ComponentSpec, Composite, Trace, compose
from .knowledge import KnowledgeBase, SecrecyTarget
from .tls import (
    TlsParams,
    make_adversary,
    make_client,
    make_fixed_client,
    make_fixed_server,
    make_params,
    make_server,
)

DEFAULT_HORIZON = 20


class ScenarioError(ValueError):
    """A scenario file or parameter file is not usable."""


# Channel names as seen at the interceptor: the client's ports map onto
# its _1 side, the server's onto its _2 side.
CLIENT_TAP = {
    "init": "init_1",
    "xchd": "xchd_1",
    "abortC": "abortC_1",
    "resp": "resp_2",
    "abortS": "abortS_2",
}
SERVER_TAP = {
    "init": "init_2",
    "xchd": "xchd_2",
    "abortC": "abortC_2",
    "resp": "resp_1",
    "abortS": "abortS_1",
}

COMPONENT_KINDS: dict[str, Callable[[TlsParams], ComponentSpec]] = {
    "client": make_client,
    "server": make_server,
    "adversary": make_adversary,
    "fixed-client": make_fixed_client,
    "fixed-server": make_fixed_server,
}


@dataclass(frozen=True)
class Scenario:
    name: str
    composite: Composite
    params: TlsParams
    targets: tuple[SecrecyTarget, ...]
    observer: str | None
    horizon: int = DEFAULT_HORIZON


def _secret_target(params: TlsParams, composite: Composite) -> SecrecyTarget:
    watchers = frozenset(p.name for p in composite.parts if p.observer)
    return SecrecyTarget(params.secret_data, owner_exclusion=watchers)


def _validate_targets(scenario: Scenario) -> None:
    for target in scenario.targets:
        for name in sorted(target.owner_exclusion):
            part = scenario.composite.part(name)
            if target.item in part.ks():
                raise ScenarioError(
                    f"target '{target.item.label}' is in the key/secret set of '{name}'"
                )


def _direct(params: TlsParams, fixed: bool) -> Composite:
    client = make_fixed_client(params) if fixed else make_client(params)
    server = make_fixed_server(params) if fixed else make_server(params)
    return compose([client, server])


def _intercepted(params: TlsParams, fixed: bool) -> Composite:
    client = make_fixed_client(params) if fixed else make_client(params)
    server = make_fixed_server(params) if fixed else make_server(params)
    return compose(
        [
            client.rename_channels(CLIENT_TAP),
            make_adversary(params),
            server.rename_channels(SERVER_TAP),
        ]
    )


def builtin_names() -> tuple[str, ...]:
    return ("honest", "attack", "fixed-honest", "fixed-attack")


def load_builtin(name: str, overrides: Mapping[str, str] | None = None) -> Scenario:
    params = make_params(overrides)
    builders = {
        "honest": lambda: _direct(params, fixed=False),
        "attack": lambda: _intercepted(params, fixed=False),
        "fixed-honest": lambda: _direct(params, fixed=True),
        "fixed-attack": lambda: _intercepted(params, fixed=True),
    }
    if name not in builders:
        raise KeyError(name)
    composite = builders[name]()
    observer = next((p.name for p in composite.parts if p.observer), None)
    scenario = Scenario(
        name=name,
        composite=composite,
        params=params,
        targets=(_secret_target(params, composite),),
        observer=observer,
    )
    _validate_targets(scenario)
    return scenario


def component_knowledge(spec: ComponentSpec) -> KnowledgeBase:
    """A component's a-priori knowledge: its local secrets plus its own
    keys and unguessable values, the latter also forming the excluded
    query domain."""
    initial = frozenset(spec.local_secrets) | frozenset((a,) for a in spec.ks())
    return KnowledgeBase(initial=initial, own_ks=spec.ks())


def observer_knowledge(scenario: Scenario, trace: Trace) -> KnowledgeBase | None:
    if scenario.observer is None:
        return None
    spec = scenario.composite.part(scenario.observer)
    return component_knowledge(spec).observe_all(trace.observations[scenario.observer])


def parse_params_file(path: str | Path) -> dict[str, str]:
    """Lines of ``name = label`` overriding the default atom labels."""
    overrides: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{path}:{lineno}: expected 'name = label'")
        name, label = (part.strip() for part in line.split("=", 1))
        if not name or not label:
            raise ScenarioError(f"{path}:{lineno}: expected 'name = label'")
        overrides[name] = label
    return overrides


def _parse_sections(path: Path) -> list[tuple[str, list[tuple[int, str]]]]:
    sections: list[tuple[str, list[tuple[int, str]]]] = []
    current: list[tuple[int, str]] | None = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            header = line[1:-1].strip()
            current = []
            sections.append((header, current))
            continue
        if current is None:
            raise ScenarioError(f"{path}:{lineno}: content before first section")
        current.append((lineno, line))
    return sections


def _split_kv(path: Path, lineno: int, line: str) -> tuple[str, str]:
    if "=" not in line:
        raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
    key, value = (part.strip() for part in line.split("=", 1))
    return key, value


def _check_component_claims(
    path: Path, name: str, spec: ComponentSpec, claims: dict[str, str]
) -> None:
    if "causality" in claims and claims["causality"] != spec.causality:
        raise ScenarioError(
            f"{path}: component '{name}' is {spec.causality}, not {claims['causality']}"
        )
    listed = lambda value: {item.strip() for item in value.split(",") if item.strip()}
    if "keys" in claims:
        actual = {a.label for a in spec.private_keys}
        if listed(claims["keys"]) != actual:
            raise ScenarioError(f"{path}: component '{name}' private keys are {sorted(actual)}")
    if "secrets" in claims:
        actual = {a.label for a in spec.unguessable}
        if listed(claims["secrets"]) != actual:
            raise ScenarioError(f"{path}: component '{name}' secrets are {sorted(actual)}")
    if "locals" in claims:
        actual = set(spec.locals_init)
        if listed(claims["locals"]) != actual:
            raise ScenarioError(f"{path}: component '{name}' locals are {sorted(actual)}")


def load_file(path: str | Path, overrides: Mapping[str, str] | None = None) -> Scenario:
    path = Path(path)
    params = make_params(overrides)
    parts: list[ComponentSpec] = []
    wiring: list[str] = []
    horizon = DEFAULT_HORIZON
    target_labels: list[str] = []

    for header, lines in _parse_sections(path):
        if header.startswith("component"):
            name = header[len("component") :].strip()
            if not name:
                raise ScenarioError(f"{path}: component section without a name")
            claims = dict(_split_kv(path, lineno, line) for lineno, line in lines)
            kind = claims.pop("kind", name)
            if kind not in COMPONENT_KINDS:
                raise ScenarioError(f"{path}: unknown component kind '{kind}'")
            spec = replace(COMPONENT_KINDS[kind](params), name=name)
            _check_component_claims(path, name, spec, claims)
            parts.append(spec)
        elif header == "wiring":
            wiring.extend(line for _, line in lines)
        elif header == "scenario":
            for lineno, line in lines:
                key, value = _split_kv(path, lineno, line)
                if key == "horizon":
                    horizon = int(value)
                elif key == "targets":
                    target_labels = [item.strip() for item in value.split(",") if item.strip()]
                else:
                    raise ScenarioError(f"{path}:{lineno}: unknown scenario key '{key}'")
        else:
            raise ScenarioError(f"{path}: unknown section '[{header}]'")

    if not parts:
        raise ScenarioError(f"{path}: no components declared")
    composite = compose(parts, wiring)
    observer = next((p.name for p in composite.parts if p.observer), None)
    targets = []
    for label in target_labels:
        atom = params.table.lookup(label)
        targets.append(
            SecrecyTarget(
                atom,
                owner_exclusion=frozenset(p.name for p in composite.parts if p.observer),
            )
        )
    scenario = Scenario(
        name=path.stem,
        composite=composite,
        params=params,
        targets=tuple(targets),
        observer=observer,
        horizon=horizon,
    )
    _validate_targets(scenario)
    return scenario


def load(name_or_path: str, overrides: Mapping[str, str] | None = None) -> Scenario:
    """Resolve a built-in scenario name or a scenario file path."""
    if name_or_path in builtin_names():
        return load_builtin(name_or_path, overrides)
    path = Path(name_or_path)
    if path.exists():
        return load_file(path, overrides)
    raise KeyError(name_or_path)
