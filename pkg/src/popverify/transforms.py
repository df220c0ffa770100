"""Model-to-model compilers.

Two-way to queued transmission (two simulated states per agent, receipt
refused at capacity), the token-metered variant that trades a promise on
the input for a total receive table, and the primed/unprimed transforms
between immediate observation with and without self-interactions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from .models import InvalidModel, ModelKind, ProtocolSpec, validate_model
from .multiset import Multiset

NULL = "null"


@dataclass(frozen=True)
class SimulationCertificate:
    """Links a transformed protocol back to its source.

    ``project`` maps a target configuration to the simulated source
    configuration (held states plus states still in transit); at equal
    input the projection of any reachable target configuration must be
    source-reachable once in-transit states are delivered.
    """

    source: ProtocolSpec
    target: ProtocolSpec
    project: Callable[[Multiset], Multiset]
    description: str


def _require(p: ProtocolSpec, kind: ModelKind) -> None:
    bad = validate_model(p, kind)
    if bad:
        raise InvalidModel(bad)


def two_way_to_queued(p: ProtocolSpec) -> tuple[ProtocolSpec, SimulationCertificate]:
    """Simulate a two-way protocol by queued transmission.

    Every agent stores up to two simulated states and sends the one held
    longest (or a null no-op message when empty); the joint transition
    fires when a second state arrives, with the held state as initiator.
    At capacity two, real messages are refused until a send frees space.
    Empty agents remember the output of the last state they held.
    """
    _require(p, ModelKind.TWO_WAY)
    o = p.output

    def empty(b: int) -> str:
        return f"E{b}"

    def hold(q: str) -> str:
        return f"H.{q}"

    def pair(q1: str, q2: str) -> str:
        return f"D.{q1}.{q2}"

    def msg(q: str) -> str:
        return f"s.{q}"

    Q = sorted(p.states)
    states = [empty(0), empty(1)] + [hold(q) for q in Q]
    states += [pair(q1, q2) for q1 in Q for q2 in Q]
    messages = [NULL] + [msg(q) for q in Q]

    send = {empty(b): (NULL, empty(b)) for b in (0, 1)}
    send.update({hold(q): (msg(q), empty(o[q])) for q in Q})
    send.update({pair(q1, q2): (msg(q1), hold(q2)) for q1 in Q for q2 in Q})

    recv = {}
    for s in states:
        recv[(s, NULL)] = s
    for b in (0, 1):
        for q in Q:
            recv[(empty(b), msg(q))] = hold(q)
    for q1 in Q:
        for q2 in Q:
            r1, r2 = p.delta[(q1, q2)]
            recv[(hold(q1), msg(q2))] = pair(r1, r2)
    # Pairs refuse real messages: (pair(.), msg(.)) stays undefined.

    output = {empty(b): b for b in (0, 1)}
    output.update({hold(q): o[q] for q in Q})
    output.update({pair(q1, q2): o[q1] for q1 in Q for q2 in Q})

    target = ProtocolSpec(
        name=f"{p.name}_queued",
        kind=ModelKind.QUEUED_TRANSMISSION,
        states=frozenset(states),
        messages=frozenset(messages),
        inputs=p.inputs,
        send=send,
        recv=recv,
        iota={s: hold(p.iota[s]) for s in p.inputs},
        output=output,
    )

    held = {hold(q): (q,) for q in Q}
    held.update({pair(q1, q2): (q1, q2) for q1 in Q for q2 in Q})
    transit = {msg(q): q for q in Q}

    def project(c: Multiset) -> Multiset:
        acc: dict = {}
        for e, n in c.items():
            for q in held.get(e, ()):
                acc[q] = acc.get(q, 0) + n
            if e in transit:
                acc[transit[e]] = acc.get(transit[e], 0) + n
        return Multiset(acc)

    cert = SimulationCertificate(
        source=p,
        target=target,
        project=project,
        description="held simulated states plus states in transit",
    )
    return target, cert


def two_way_to_queued_tokens(
    p: ProtocolSpec, sigma_tok: str, k: int
) -> tuple[ProtocolSpec, SimulationCertificate]:
    """Token-metered simulation of a two-way protocol.

    Valid under the promise that the input carries between 1 and k-1
    occurrences of ``sigma_tok``.  Agents hold up to k simulated states;
    sending a state costs the sender one token, delivered to the
    recipient along with the state, so storage can never overflow and the
    receive table is total (the result is a delayed transmission
    protocol).  Receiving a null message rotates the held states, which
    lets the scheduler choose which state is shipped next.
    """
    _require(p, ModelKind.TWO_WAY)
    if sigma_tok not in p.inputs:
        raise ValueError(f"{sigma_tok!r} is not an input symbol")
    if k < 2:
        raise ValueError(f"token bound must be >= 2, got {k}")
    o = p.output
    Q = sorted(p.states)

    structs = []
    for length in range(k + 1):
        for held in itertools.product(Q, repeat=length):
            for tokens in range(k):
                for bit in (0, 1):
                    structs.append((held, tokens, bit))

    def name(struct) -> str:
        held, tokens, bit = struct
        body = "+".join(held) if held else "-"
        return f"T.{body}.{tokens}.{bit}"

    def msg(q: str) -> str:
        return f"c.{q}"

    states = {name(s): s for s in structs}
    messages = [NULL] + [msg(q) for q in Q]

    send = {}
    recv = {}
    for sname, (held, tokens, bit) in states.items():
        if held and tokens >= 1:
            send[sname] = (msg(held[0]), name((held[1:], tokens - 1, o[held[0]])))
        else:
            send[sname] = (NULL, sname)
        rotated = held[1:] + held[:1] if len(held) >= 2 else held
        recv[(sname, NULL)] = name((rotated, tokens, bit))
        for q in Q:
            if not held:
                recv[(sname, msg(q))] = name(((q,), min(tokens + 1, k - 1), bit))
            elif len(held) < k:
                r1, r2 = p.delta[(held[-1], q)]
                recv[(sname, msg(q))] = name(
                    (held[:-1] + (r1, r2), min(tokens + 1, k - 1), bit)
                )
            else:
                # Unreachable under the promise: a full agent already owns
                # every token, so nobody can send it a state.
                recv[(sname, msg(q))] = sname

    output = {
        sname: (o[held[0]] if held else bit)
        for sname, (held, tokens, bit) in states.items()
    }

    target = ProtocolSpec(
        name=f"{p.name}_tokens_{k}",
        kind=ModelKind.DELAYED_TRANSMISSION,
        states=frozenset(states),
        messages=frozenset(messages),
        inputs=p.inputs,
        send=send,
        recv=recv,
        iota={
            s: name(((p.iota[s],), int(s == sigma_tok), o[p.iota[s]]))
            for s in p.inputs
        },
        output=output,
    )

    transit = {msg(q): q for q in Q}

    def project(c: Multiset) -> Multiset:
        acc: dict = {}
        for e, n in c.items():
            if e in states:
                for q in states[e][0]:
                    acc[q] = acc.get(q, 0) + n
            elif e in transit:
                acc[transit[e]] = acc.get(transit[e], 0) + n
        return Multiset(acc)

    cert = SimulationCertificate(
        source=p,
        target=target,
        project=project,
        description=f"held simulated states plus states in transit (tokens from {sigma_tok!r})",
    )
    return target, cert


def token_count(target: ProtocolSpec, c: Multiset) -> int:
    """Total tokens (held by agents or riding on state messages) in a
    configuration of a token-metered simulation."""
    total = 0
    for e, n in c.items():
        if e.startswith("T."):
            total += n * int(e.rsplit(".", 2)[1])
        elif e.startswith("c."):
            total += n
    return total


def _primed(q: str) -> str:
    return q + "'"


def io_add_mirrors(p: ProtocolSpec) -> ProtocolSpec:
    """Compile an immediate observation protocol into one that tolerates
    self-interactions.

    States are doubled into primed and unprimed copies.  Self-interaction
    only flips an agent's primation; the update from a diagonal table
    entry fires only between two agents whose primation differs, which a
    lone agent can never arrange.
    """
    _require(p, ModelKind.IMMEDIATE_OBSERVATION)
    if p.self_delivery:
        raise InvalidModel(["source already permits self-interactions"])
    Q = sorted(p.states)
    variants = {q: (q, _primed(q)) for q in Q}
    states = [v for q in Q for v in variants[q]]
    delta = {}
    for q1 in Q:
        for q2 in Q:
            r = p.delta[(q1, q2)][1]
            if q1 != q2:
                for a in variants[q1]:
                    for b, rb in zip(variants[q2], variants[r]):
                        delta[(a, b)] = (a, rb)
            else:
                q, q_ = variants[q1]
                delta[(q, q)] = (q, q_)
                delta[(q_, q_)] = (q_, q)
                delta[(q, q_)] = (q, r)
                delta[(q_, q)] = (q_, r)
    output = {v: p.output[q] for q in Q for v in variants[q]}
    return ProtocolSpec(
        name=f"{p.name}_mirrored",
        kind=ModelKind.IMMEDIATE_OBSERVATION,
        states=frozenset(states),
        inputs=p.inputs,
        delta=delta,
        iota=dict(p.iota),
        output=output,
        mirrors=True,
    )


def _marked(q: str) -> str:
    # The source of the reverse transform may itself use primed names, so
    # its simulation marker must be a different suffix.
    return q + "^"


def io_remove_mirrors(p: ProtocolSpec) -> ProtocolSpec:
    """Compile an immediate observation protocol that relies on
    self-interactions into one that never needs them.

    Unmarked initiators only flip the responder's marker; a marked
    initiator drives the source's off-diagonal updates against unmarked
    responders, and diagonal updates fire between two marked agents.
    Valid for populations of at least three agents.
    """
    _require(p, ModelKind.IMMEDIATE_OBSERVATION)
    if not p.self_delivery:
        raise InvalidModel(["source does not permit self-interactions"])
    Q = sorted(p.states)
    delta = {}
    for q1 in Q:
        for q2 in Q:
            # Unmarked initiator: flip the responder's marker.
            delta[(q1, q2)] = (q1, _marked(q2))
            delta[(q1, _marked(q2))] = (q1, q2)
            # Marked initiator against an unmarked responder: run the
            # source's off-diagonal rule.
            if q1 != q2:
                delta[(_marked(q1), q2)] = (_marked(q1), p.delta[(q1, q2)][1])
            else:
                delta[(_marked(q1), q2)] = (_marked(q1), q2)
            # Two marked agents: the responder runs its own diagonal rule.
            r = p.delta[(q2, q2)][1]
            delta[(_marked(q1), _marked(q2))] = (_marked(q1), _marked(r))
    states = [v for q in Q for v in (q, _marked(q))]
    output = {v: p.output[q] for q in Q for v in (q, _marked(q))}
    return ProtocolSpec(
        name=f"{p.name}_unmirrored",
        kind=ModelKind.IMMEDIATE_OBSERVATION,
        states=frozenset(states),
        inputs=p.inputs,
        delta=delta,
        iota=dict(p.iota),
        output=output,
        mirrors=False,
    )
