"""Constructions of concrete protocols.

Builders for the simple-threshold tower, the active/passive modulo and
averaging-threshold protocols, their delayed-transmission variants, a
presence detector for the weakest model, a product combinator, and the
unbounded-state set-union protocol used under local fairness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .models import (
    InvalidModel,
    ModelKind,
    ProtocolSpec,
    generalize_kind,
    validate_model,
)


class KindMismatch(ValueError):
    pass


class AlphabetMismatch(ValueError):
    pass


class RangeTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdParams:
    """Parameters of ``x . v >= r`` with ``r`` already normalized to be
    nonnegative."""

    v: tuple
    r: int

    def __init__(self, v: Mapping[str, int], r: int):
        if r < 0:
            raise ValueError(f"threshold must be normalized to r >= 0, got {r}")
        object.__setattr__(self, "v", tuple(sorted(v.items())))
        object.__setattr__(self, "r", r)

    @property
    def coeffs(self) -> dict:
        return dict(self.v)


@dataclass(frozen=True)
class ModuloParams:
    """Parameters of ``x . v = r (mod m)``."""

    v: tuple
    r: int
    m: int

    def __init__(self, v: Mapping[str, int], r: int, m: int):
        if m < 1:
            raise ValueError(f"modulus must be >= 1, got {m}")
        object.__setattr__(self, "v", tuple(sorted(v.items())))
        object.__setattr__(self, "r", r % m)
        object.__setattr__(self, "m", m)

    @property
    def coeffs(self) -> dict:
        return dict(self.v)


@dataclass(frozen=True)
class SimpleThresholdParams:
    """Parameters of ``count(sigma) >= k``."""

    sigma: str
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"threshold must be >= 1, got {self.k}")


def build_simple_threshold(sigma: str, k: int, alphabet: Sequence[str]) -> ProtocolSpec:
    """Tower protocol for ``count(sigma) >= k``.

    States 0..k; in each meeting all but one of the agents at the top of
    the growing tower advance one level, and level k floods.  Only the
    responder ever changes state, so this is an immediate observation
    protocol.
    """
    if sigma not in alphabet:
        raise ValueError(f"{sigma!r} is not in the alphabet {list(alphabet)}")
    if k < 1:
        raise ValueError(f"threshold must be >= 1, got {k}")
    states = [str(i) for i in range(k + 1)]
    delta = {}
    for q1 in range(k + 1):
        for q2 in range(k + 1):
            if q1 == k:
                r2 = k
            elif 1 <= q1 < k and q1 == q2:
                r2 = q2 + 1
            else:
                r2 = q2
            delta[(str(q1), str(q2))] = (str(q1), str(r2))
    return ProtocolSpec(
        name=f"threshold_{sigma}_{k}",
        kind=ModelKind.IMMEDIATE_OBSERVATION,
        states=frozenset(states),
        inputs=tuple(alphabet),
        delta=delta,
        iota={s: ("1" if s == sigma else "0") for s in alphabet},
        output={q: int(q == str(k)) for q in states},
    )


def _active(d: int) -> str:
    return f"A{d}"


def _passive(b: int) -> str:
    return f"P{b}"


def avg_active_value(state: str):
    """Data value carried by an active state of the averaging or modulo
    protocols, or ``None`` for passive states."""
    if state.startswith("A"):
        return int(state[1:])
    return None


def build_modulo(params: ModuloParams) -> ProtocolSpec:
    """Active/passive protocol for ``x . v = r (mod m)``.

    Active agents carry a residue and combine by sum; the initiator of an
    active meeting retires to a passive state remembering its output,
    while the responder absorbs the running sum.  A passive responder
    meeting an active initiator takes over the initiator's active state
    (the initiator retires as always), which both hands the data on and
    copies the current output.  The initiator update depends only on the
    initiator, so the protocol is immediate transmission.
    """
    v, r, m = params.coeffs, params.r, params.m
    out = lambda d: int(d % m == r)
    actives = [_active(d) for d in range(m)]
    passives = [_passive(0), _passive(1)]
    states = actives + passives
    delta = {}
    for q1 in states:
        for q2 in states:
            u = avg_active_value(q1)
            if u is None:
                delta[(q1, q2)] = (q1, q2)
                continue
            w = avg_active_value(q2)
            if w is None:
                delta[(q1, q2)] = (_passive(out(u)), _active(u))
            else:
                delta[(q1, q2)] = (_passive(out(u)), _active((u + w) % m))
    output = {_active(d): out(d) for d in range(m)}
    output.update({_passive(0): 0, _passive(1): 1})
    alphabet = tuple(v)
    return ProtocolSpec(
        name=f"modulo_{r}_{m}",
        kind=ModelKind.IMMEDIATE_TRANSMISSION,
        states=frozenset(states),
        inputs=alphabet,
        delta=delta,
        iota={s: _active(v[s] % m) for s in alphabet},
        output=output,
    )


def build_threshold_avg(
    params: ThresholdParams, low: int | None = None, high: int | None = None
) -> ProtocolSpec:
    """Averaging protocol for ``x . v >= r``.

    Active data values live in [low, high]; two actives either combine
    onto one agent (when the sum is representable) or average, initiator
    taking the ceiling.  The sum of active data values is invariant.
    """
    v, r = params.coeffs, params.r
    initial = sorted(v.values())
    L = min(initial[0], 0) if low is None else low
    U = max(initial[-1], 2 * r - 1) if high is None else high
    outside = [s for s, coef in v.items() if not L <= coef <= U]
    if outside:
        raise RangeTooSmall(
            f"initial values of {outside} fall outside the active range [{L}, {U}]"
        )
    out = lambda d: int(d >= r)
    states = [_active(d) for d in range(L, U + 1)] + [_passive(0), _passive(1)]
    delta = {}
    for q1 in states:
        for q2 in states:
            u = avg_active_value(q1)
            if u is None:
                delta[(q1, q2)] = (q1, q2)
                continue
            w = avg_active_value(q2)
            if w is None:
                delta[(q1, q2)] = (q1, _passive(out(u)))
                continue
            s = u + w
            if L <= s <= U:
                delta[(q1, q2)] = (_passive(out(s)), _active(s))
            else:
                delta[(q1, q2)] = (_active(-((-s) // 2)), _active(s // 2))
    output = {_active(d): out(d) for d in range(L, U + 1)}
    output.update({_passive(0): 0, _passive(1): 1})
    alphabet = tuple(v)
    return ProtocolSpec(
        name=f"threshold_avg_{r}",
        kind=ModelKind.TWO_WAY,
        states=frozenset(states),
        inputs=alphabet,
        delta=delta,
        iota={s: _active(v[s]) for s in alphabet},
        output=output,
    )


def build_delayed_transmission(
    params: ModuloParams | SimpleThresholdParams, alphabet: Sequence[str] | None = None
) -> ProtocolSpec:
    """Delayed-transmission protocol for a modulo or simple-threshold
    predicate.

    A sender ships its whole state and retires passive; passive messages
    are ignored, an active receiver folds an active message's data into
    its own, and a passive receiver adopts an active message's state.
    The receive table is total, so no queuing is needed.
    """
    if isinstance(params, ModuloParams):
        v, m = params.coeffs, params.m
        domain = range(m)
        fold = lambda u, d: (u + d) % m
        out = lambda d: int(d == params.r)
        alphabet = tuple(v) if alphabet is None else tuple(alphabet)
        init = {s: v.get(s, 0) % m for s in alphabet}
        name = f"dt_modulo_{params.r}_{m}"
    else:
        k = params.k
        domain = range(k + 1)
        fold = lambda u, d: min(k, u + d)
        out = lambda d: int(d == k)
        if alphabet is None:
            raise ValueError("simple-threshold variant needs an explicit alphabet")
        alphabet = tuple(alphabet)
        init = {s: int(s == params.sigma) for s in alphabet}
        name = f"dt_threshold_{params.sigma}_{k}"

    states = [_active(d) for d in domain] + [_passive(0), _passive(1)]
    messages = [f"m{_active(d)}" for d in domain] + ["mP"]
    send = {_passive(b): ("mP", _passive(b)) for b in (0, 1)}
    send.update({_active(d): (f"m{_active(d)}", _passive(out(d))) for d in domain})
    recv = {}
    for q in states:
        recv[(q, "mP")] = q
        for d in domain:
            u = avg_active_value(q)
            if u is None:
                recv[(q, f"m{_active(d)}")] = _active(d)
            else:
                recv[(q, f"m{_active(d)}")] = _active(fold(u, d))
    output = {_active(d): out(d) for d in domain}
    output.update({_passive(0): 0, _passive(1): 1})
    return ProtocolSpec(
        name=name,
        kind=ModelKind.DELAYED_TRANSMISSION,
        states=frozenset(states),
        messages=frozenset(messages),
        inputs=alphabet,
        send=send,
        recv=recv,
        iota={s: _active(init[s]) for s in alphabet},
        output=output,
    )


def as_delayed_observation(p: ProtocolSpec) -> ProtocolSpec:
    """Run a pairwise immediate-observation table under delayed
    observation semantics: every agent broadcasts its own state and a
    receiver applies the responder update against the message's state."""
    bad = validate_model(p, ModelKind.IMMEDIATE_OBSERVATION)
    if bad:
        raise InvalidModel(bad)
    messages = {q: f"m.{q}" for q in p.states}
    send = {q: (messages[q], q) for q in p.states}
    recv = {}
    for q2 in p.states:
        for q1 in p.states:
            recv[(q2, messages[q1])] = p.delta[(q1, q2)][1]
    return ProtocolSpec(
        name=f"{p.name}_do",
        kind=ModelKind.DELAYED_OBSERVATION,
        states=p.states,
        messages=frozenset(messages.values()),
        inputs=p.inputs,
        send=send,
        recv=recv,
        iota=dict(p.iota),
        output=dict(p.output),
    )


def product(
    protocols: Sequence[ProtocolSpec],
    f: Callable[[tuple], int],
    name: str = "product",
) -> ProtocolSpec:
    """Cartesian product of protocols over the same alphabet; every
    component advances on the same interaction and the output is
    ``f(component output bits)``.

    Kinds must belong to one family; the result is tagged with the most
    general kind among the components.
    """
    if not protocols:
        raise ValueError("product of no protocols")
    alphabet = protocols[0].inputs
    if any(p.inputs != alphabet for p in protocols):
        raise AlphabetMismatch("component protocols disagree on the input alphabet")
    kind = protocols[0].kind
    try:
        for p in protocols[1:]:
            kind = generalize_kind(kind, p.kind)
    except ValueError as exc:
        raise KindMismatch(str(exc)) from None

    def join(parts) -> str:
        return "|".join(parts)

    combos = list(itertools.product(*(sorted(p.states) for p in protocols)))
    states = {join(c): c for c in combos}
    iota = {s: join(tuple(p.iota[s] for p in protocols)) for s in alphabet}
    output = {
        name_: int(bool(f(tuple(p.output[q] for p, q in zip(protocols, combo)))))
        for name_, combo in states.items()
    }

    if kind.is_pairwise:
        delta = {}
        for n1, c1 in states.items():
            for n2, c2 in states.items():
                res = [p.delta[(q1, q2)] for p, q1, q2 in zip(protocols, c1, c2)]
                delta[(n1, n2)] = (join(tuple(r[0] for r in res)), join(tuple(r[1] for r in res)))
        return ProtocolSpec(
            name=name,
            kind=kind,
            states=frozenset(states),
            inputs=alphabet,
            delta=delta,
            iota=iota,
            output=output,
        )

    msg_combos = list(itertools.product(*(sorted(p.messages) for p in protocols)))
    msgs = {join(c): c for c in msg_combos}
    send = {}
    for n1, c1 in states.items():
        res = [p.send[q] for p, q in zip(protocols, c1)]
        send[n1] = (join(tuple(r[0] for r in res)), join(tuple(r[1] for r in res)))
    recv = {}
    for n1, c1 in states.items():
        for mn, mc in msgs.items():
            res = []
            for p, q, m in zip(protocols, c1, mc):
                r = (p.recv or {}).get((q, m))
                if r is None:
                    res = None
                    break
                res.append(r)
            if res is not None:
                recv[(n1, mn)] = join(tuple(res))
    return ProtocolSpec(
        name=name,
        kind=kind,
        states=frozenset(states),
        messages=frozenset(msgs),
        inputs=alphabet,
        send=send,
        recv=recv,
        iota=iota,
        output=output,
    )


def build_delayed_observation_presence(
    alphabet: Sequence[str], table: Callable[[tuple], int] | None = None
) -> ProtocolSpec:
    """Presence-profile protocol for the weakest model.

    One single-level tower per symbol, run under delayed observation
    semantics and combined by product; the output applies ``table`` to
    the per-symbol presence bits (in alphabet order).  The default table
    reports presence of the first symbol.
    """
    alphabet = tuple(alphabet)
    if table is None:
        table = lambda bits: bits[0]
    detectors = [
        as_delayed_observation(build_simple_threshold(s, 1, alphabet)) for s in alphabet
    ]
    return product(detectors, table, name="presence")


def detect(sigma: str, alphabet: Sequence[str]) -> ProtocolSpec:
    """Delayed-observation protocol accepting iff ``sigma`` is present."""
    alphabet = tuple(alphabet)
    idx = alphabet.index(sigma)
    return build_delayed_observation_presence(alphabet, lambda bits: bits[idx])


@dataclass(frozen=True)
class SetUnionProtocol:
    """Unbounded-state set-union protocol for the local-fairness model.

    Each agent's state is the set of input values it has heard of; a send
    broadcasts the whole set, a receive unions it in, and the output
    applies ``table`` to the final set.  Run it with
    ``verifier.local_fair_run``.
    """

    alphabet: tuple
    table: Callable[[frozenset], int]

    def initial_state(self, sigma: str) -> frozenset:
        if sigma not in self.alphabet:
            raise ValueError(f"{sigma!r} is not in the alphabet {list(self.alphabet)}")
        return frozenset([sigma])

    def receive(self, state: frozenset, message: frozenset) -> frozenset:
        return state | message

    def output(self, state: frozenset) -> int:
        return int(bool(self.table(state)))


def build_set_union(
    alphabet: Sequence[str], table: Callable[[frozenset], int] | None = None
) -> SetUnionProtocol:
    if table is None:
        table = lambda values: 1
    return SetUnionProtocol(alphabet=tuple(alphabet), table=table)
