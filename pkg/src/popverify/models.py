"""Protocol specifications for the six interaction models.

A ``ProtocolSpec`` describes a protocol in one of the concrete models
(two-way and its one-way restrictions, or the send/receive models with
queuing), or directly as a rewriting system over a combined alphabet.
Every spec compiles to a ``RuleSet`` whose successor function drives
simulation and verification uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .multiset import Multiset


class InvalidModel(ValueError):
    """Raised when a spec violates the constraints of its declared kind."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class EmptyInput(ValueError):
    """Raised when an input assignment contains no agents."""


class ModelKind(Enum):
    TWO_WAY = "two-way"
    IMMEDIATE_TRANSMISSION = "immediate-transmission"
    IMMEDIATE_OBSERVATION = "immediate-observation"
    QUEUED_TRANSMISSION = "queued-transmission"
    DELAYED_TRANSMISSION = "delayed-transmission"
    DELAYED_OBSERVATION = "delayed-observation"
    ABSTRACT = "abstract"

    @property
    def is_pairwise(self) -> bool:
        """True for kinds specified by a joint transition table."""
        return self in (
            ModelKind.TWO_WAY,
            ModelKind.IMMEDIATE_TRANSMISSION,
            ModelKind.IMMEDIATE_OBSERVATION,
        )

    @property
    def is_send_receive(self) -> bool:
        """True for kinds specified by send/receive tables."""
        return self in (
            ModelKind.QUEUED_TRANSMISSION,
            ModelKind.DELAYED_TRANSMISSION,
            ModelKind.DELAYED_OBSERVATION,
        )

    @property
    def default_mirrors(self) -> bool:
        # An anonymous message in transit may be delivered to its own
        # sender, so self-delivery is on by default for queued/delayed
        # kinds and off for interaction kinds.
        return self.is_send_receive


# Generality order within each family; used for the specialization chain.
_PAIRWISE_ORDER = [
    ModelKind.IMMEDIATE_OBSERVATION,
    ModelKind.IMMEDIATE_TRANSMISSION,
    ModelKind.TWO_WAY,
]
_SEND_RECEIVE_ORDER = [
    ModelKind.DELAYED_OBSERVATION,
    ModelKind.DELAYED_TRANSMISSION,
    ModelKind.QUEUED_TRANSMISSION,
]


def generalize_kind(a: ModelKind, b: ModelKind) -> ModelKind:
    """The least general kind that both ``a`` and ``b`` specialize."""
    for order in (_PAIRWISE_ORDER, _SEND_RECEIVE_ORDER):
        if a in order and b in order:
            return order[max(order.index(a), order.index(b))]
    raise ValueError(f"kinds {a.value} and {b.value} are in different families")


@dataclass(frozen=True)
class ProtocolSpec:
    """A protocol in one concrete model.

    Pairwise kinds use ``delta`` (a total joint table on states).
    Send/receive kinds use ``send`` (state -> (message, new state)) and
    ``recv`` ((state, message) -> new state; may be partial only for
    queued transmission).  Abstract protocols carry raw ``rules``.
    """

    name: str
    kind: ModelKind
    states: frozenset
    inputs: tuple
    iota: Mapping
    output: Mapping
    messages: frozenset = frozenset()
    delta: Optional[Mapping] = None
    send: Optional[Mapping] = None
    recv: Optional[Mapping] = None
    rules: tuple = ()
    mirrors: Optional[bool] = None

    @property
    def self_delivery(self) -> bool:
        if self.mirrors is None:
            return self.kind.default_mirrors
        return self.mirrors

    @property
    def elements(self) -> frozenset:
        return self.states | self.messages

    def with_kind(self, kind: ModelKind, mirrors: Optional[bool] = None) -> "ProtocolSpec":
        """Re-tag the spec with a more general kind it also satisfies."""
        spec = ProtocolSpec(
            name=self.name,
            kind=kind,
            states=self.states,
            inputs=self.inputs,
            iota=self.iota,
            output=self.output,
            messages=self.messages,
            delta=self.delta,
            send=self.send,
            recv=self.recv,
            rules=self.rules,
            mirrors=self.mirrors if mirrors is None else mirrors,
        )
        bad = validate_model(spec)
        if bad:
            raise InvalidModel(bad)
        return spec


def validate_model(p: ProtocolSpec, kind: Optional[ModelKind] = None) -> list[str]:
    """Check the constraints of ``kind`` (default: the declared kind).

    Returns a list of human-readable violations; an empty list means the
    spec is valid for that kind.
    """
    kind = kind or p.kind
    bad: list[str] = []
    overlap = p.states & p.messages
    if overlap:
        bad.append(f"states and messages overlap: {sorted(overlap)}")
    for sigma in p.inputs:
        q = p.iota.get(sigma) if p.iota else None
        if kind is ModelKind.ABSTRACT:
            continue
        if q is None:
            bad.append(f"iota undefined for input {sigma!r}")
        elif q not in p.states:
            bad.append(f"iota({sigma!r}) = {q!r} is not a state")
    for q in sorted(p.states):
        if q not in p.output:
            bad.append(f"output undefined for state {q!r}")
        elif p.output[q] not in (0, 1):
            bad.append(f"output({q!r}) = {p.output[q]!r} is not a bit")

    if kind.is_pairwise:
        bad.extend(_validate_pairwise(p, kind))
    elif kind.is_send_receive:
        bad.extend(_validate_send_receive(p, kind))
    else:
        for lhs, rhs in p.rules:
            stray = [e for e in set(lhs.support) | set(rhs.support) if e not in p.elements]
            if stray:
                bad.append(f"rule {lhs} -> {rhs} uses undeclared elements {sorted(stray)}")
    return bad


def _validate_pairwise(p: ProtocolSpec, kind: ModelKind) -> list[str]:
    bad: list[str] = []
    if p.delta is None:
        return [f"{kind.value} spec has no joint transition table"]
    for q1 in sorted(p.states):
        for q2 in sorted(p.states):
            if (q1, q2) not in p.delta:
                bad.append(f"delta undefined at ({q1!r}, {q2!r})")
                continue
            r1, r2 = p.delta[(q1, q2)]
            if r1 not in p.states or r2 not in p.states:
                bad.append(f"delta({q1!r}, {q2!r}) leaves the state set")
    if bad:
        return bad
    if kind in (ModelKind.IMMEDIATE_TRANSMISSION, ModelKind.IMMEDIATE_OBSERVATION):
        # Initiator update must not depend on the responder.
        for q1 in sorted(p.states):
            images = {p.delta[(q1, q2)][0] for q2 in p.states}
            if len(images) > 1:
                bad.append(
                    f"initiator update at {q1!r} depends on the responder: {sorted(images)}"
                )
    if kind is ModelKind.IMMEDIATE_OBSERVATION:
        for q1 in sorted(p.states):
            for q2 in sorted(p.states):
                if p.delta[(q1, q2)][0] != q1:
                    bad.append(
                        f"initiator changes state in delta({q1!r}, {q2!r}); "
                        "immediate observation requires the identity"
                    )
                    break
    return bad


def _validate_send_receive(p: ProtocolSpec, kind: ModelKind) -> list[str]:
    bad: list[str] = []
    if p.send is None:
        return [f"{kind.value} spec has no send table"]
    for q in sorted(p.states):
        if q not in p.send:
            bad.append(f"send undefined for state {q!r}")
            continue
        m, q2 = p.send[q]
        if m not in p.messages:
            bad.append(f"send({q!r}) emits undeclared message {m!r}")
        if q2 not in p.states:
            bad.append(f"send({q!r}) leaves the state set")
    recv = p.recv or {}
    for (q, m), q2 in recv.items():
        if q not in p.states or m not in p.messages:
            bad.append(f"recv({q!r}, {m!r}) over undeclared symbols")
        elif q2 not in p.states:
            bad.append(f"recv({q!r}, {m!r}) leaves the state set")
    if kind in (ModelKind.DELAYED_TRANSMISSION, ModelKind.DELAYED_OBSERVATION):
        for q in sorted(p.states):
            for m in sorted(p.messages):
                if (q, m) not in recv:
                    bad.append(f"recv not total: undefined at ({q!r}, {m!r})")
    if kind is ModelKind.DELAYED_OBSERVATION:
        for q in sorted(p.states):
            if q in p.send and p.send[q][1] != q:
                bad.append(
                    f"send({q!r}) changes the sender's state; "
                    "delayed observation requires it unchanged"
                )
    return bad


@dataclass(frozen=True)
class RuleSet:
    """Normalized multiset-rewriting view of a protocol.

    ``output`` maps the elements that carry an output bit; elements
    outside its domain (messages of concrete send/receive kinds) are
    ignored by the configuration output.
    """

    rules: tuple
    output: Mapping
    input_embedding: Mapping
    message_elements: frozenset = frozenset()
    conserves_count: bool = True
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        index: dict = {}
        simple = all(len(lhs) <= 2 for lhs, _ in self.rules)
        if simple:
            for rule in self.rules:
                lhs = rule[0]
                key = tuple(sorted(e for e, n in lhs.items() for _ in range(n)))
                index.setdefault(key, []).append(rule)
            self._index["by_lhs"] = index

    def successors(self, c: Multiset) -> set:
        """All configurations reachable from ``c`` in one rule application."""
        out: set[Multiset] = set()
        by_lhs = self._index.get("by_lhs")
        if by_lhs is None:
            for lhs, rhs in self.rules:
                if lhs <= c:
                    out.add(c - lhs + rhs)
            return out
        present = c.support
        keys: list[tuple] = []
        for i, e in enumerate(present):
            keys.append((e,))
            if c[e] >= 2:
                keys.append((e, e))
            for e2 in present[i + 1 :]:
                keys.append(tuple(sorted((e, e2))))
        for key in keys:
            for lhs, rhs in by_lhs.get(key, ()):
                out.add(c - lhs + rhs)
        return out

    def output_of(self, c: Multiset):
        """Configuration output: the common bit of all output-bearing
        elements present, or ``None`` when they disagree."""
        bits = {self.output[e] for e in c.support if e in self.output}
        if len(bits) == 1:
            return bits.pop()
        return None

    def transit_count(self, c: Multiset) -> int:
        return sum(n for e, n in c.items() if e in self.message_elements)

    def agent_count(self, c: Multiset) -> int:
        return c.total - self.transit_count(c)


def compile_rules(p: ProtocolSpec) -> RuleSet:
    """Compile a valid spec into its rewriting-rule view.

    Pairwise kinds emit one rule ``{q1,q2} -> {q1',q2'}`` per table entry
    (plus unary self-rules when mirrors are on); send/receive kinds emit
    ``{q} -> {q',m}`` and ``{q,m} -> {q'}`` rules.  Identical rules from
    distinct table entries are merged, and no-op rules are dropped.
    """
    bad = validate_model(p)
    if bad:
        raise InvalidModel(bad)

    rules: set[tuple[Multiset, Multiset]] = set()
    if p.kind.is_pairwise:
        for (q1, q2), (r1, r2) in p.delta.items():
            lhs = Multiset([q1, q2])
            rhs = Multiset([r1, r2])
            if lhs != rhs:
                rules.add((lhs, rhs))
        if p.self_delivery:
            # A single agent plays both roles at the table's diagonal and
            # ends in the responder's result state.
            for q in p.states:
                _, r2 = p.delta[(q, q)]
                if r2 != q:
                    rules.add((Multiset([q]), Multiset([r2])))
        output = dict(p.output)
        messages: frozenset = frozenset()
    elif p.kind.is_send_receive:
        for q, (m, q2) in p.send.items():
            rules.add((Multiset([q]), Multiset([q2, m])))
        for (q, m), q2 in (p.recv or {}).items():
            # A receive consumes the message even when the state is kept,
            # so it is never a no-op.
            rules.add((Multiset([q, m]), Multiset([q2])))
        output = dict(p.output)
        messages = p.messages
    else:
        rules = set(p.rules)
        output = dict(p.output)
        messages = frozenset()

    embedding = {s: p.iota.get(s, s) for s in p.inputs}
    if p.kind.is_pairwise:
        conserves = True
    elif p.kind.is_send_receive:
        # A send grows the multiset by one in-transit message and a
        # receive consumes it, so only the agent count (non-message
        # elements) is conserved rule by rule.
        conserves = False
    else:
        conserves = all(len(lhs) == len(rhs) for lhs, rhs in rules)
    return RuleSet(
        rules=tuple(sorted(rules, key=lambda r: (str(r[0]), str(r[1])))),
        output=output,
        input_embedding=embedding,
        message_elements=messages,
        conserves_count=conserves,
    )


def initial_config(p: ProtocolSpec, x: Multiset) -> Multiset:
    """Map an input assignment over the input alphabet to the starting
    configuration: every agent in its initial state, no messages."""
    if not x:
        raise EmptyInput("input assignment is empty")
    stray = [s for s in x.support if s not in p.inputs]
    if stray:
        raise ValueError(f"input uses symbols outside the alphabet: {stray}")
    acc: dict = {}
    for sigma, n in x.items():
        q = sigma if p.kind is ModelKind.ABSTRACT else p.iota[sigma]
        acc[q] = acc.get(q, 0) + n
    return Multiset(acc)


def output_of(p: ProtocolSpec, c: Multiset):
    """Configuration output of ``c`` under spec ``p`` (``None`` if mixed)."""
    if p.kind is ModelKind.ABSTRACT:
        domain = p.output
    else:
        domain = {q: b for q, b in p.output.items() if q in p.states}
    bits = {domain[e] for e in c.support if e in domain}
    if len(bits) == 1:
        return bits.pop()
    return None


def specialization_chain(p: ProtocolSpec) -> list[ModelKind]:
    """Every kind (within the spec's family) that the spec validates as,
    from most special to most general."""
    order = _PAIRWISE_ORDER if p.kind.is_pairwise else _SEND_RECEIVE_ORDER
    return [k for k in order if not validate_model(p, k)]
