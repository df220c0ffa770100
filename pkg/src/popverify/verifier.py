"""Exhaustive finite-population verification of stable computation.

For a fixed input the reachable configuration space is finite (message
kinds are explored under a per-element transit cap), so the fairness
quantifier reduces to graph conditions: a protocol stably computes b on
an input iff some output-stable-b configuration is reachable, none with
the opposite output is, and every reachable configuration can still
reach a stable one.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .models import ModelKind, ProtocolSpec, RuleSet, compile_rules, initial_config
from .multiset import Multiset
from .protocols import SetUnionProtocol

DEFAULT_NODE_BUDGET = 10**6

STABLE0 = 0
STABLE1 = 1
UNSTABLE = None


class BudgetExceeded(RuntimeError):
    def __init__(self, budget: int, frontier: int):
        self.budget = budget
        self.frontier = frontier
        super().__init__(
            f"exploration exceeded the node budget of {budget} "
            f"({frontier} configurations still on the frontier)"
        )


@dataclass
class ReachabilityGraph:
    """Complete successor graph from a root configuration."""

    nodes: list
    index: dict
    succ: list
    parent: list
    transit_cap: Optional[int] = None

    @property
    def root(self) -> Multiset:
        return self.nodes[0]

    def path_to(self, i: int) -> list:
        """Configurations along the BFS tree path from the root to node i."""
        path = []
        j: Optional[int] = i
        while j is not None:
            path.append(self.nodes[j])
            j = self.parent[j]
        return path[::-1]


def explore(
    rs: RuleSet,
    c0: Multiset,
    node_budget: int = DEFAULT_NODE_BUDGET,
    transit_cap: Optional[int] = None,
) -> ReachabilityGraph:
    """Breadth-first closure of the successor relation from ``c0``.

    ``transit_cap`` clamps the count of every individual message element;
    successors that would exceed it are not expanded (runs under a cap
    are reported as such by the sweep).
    """
    if not c0:
        raise ValueError("cannot explore from an empty configuration")
    nodes = [c0]
    index = {c0: 0}
    succ: list[list[int]] = [[]]
    parent: list[Optional[int]] = [None]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for nxt in sorted(rs.successors(nodes[i]), key=str):
            if transit_cap is not None and any(
                nxt[m] > transit_cap for m in rs.message_elements
            ):
                continue
            j = index.get(nxt)
            if j is None:
                if len(nodes) >= node_budget:
                    raise BudgetExceeded(node_budget, len(queue) + 1)
                j = len(nodes)
                index[nxt] = j
                nodes.append(nxt)
                succ.append([])
                parent.append(i)
                queue.append(j)
            succ[i].append(j)
    return ReachabilityGraph(nodes, index, succ, parent, transit_cap)


def _condense(succ: list) -> list:
    """Iterative Tarjan; components are produced in reverse topological
    order (each one only after everything reachable from it)."""
    n = len(succ)
    index = [0] * n
    low = [0] * n
    on_stack = [False] * n
    visited = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = [1]
    for root in range(n):
        if visited[root]:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                visited[v] = True
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for k in range(ei, len(succ[v])):
                w = succ[v][k]
                if not visited[w]:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return comps


def label_stability(g: ReachabilityGraph, rs: RuleSet) -> list:
    """Per-node stability label: 0, 1, or ``None`` for unstable.

    A node is stable-b iff its output is the defined bit b and every
    node reachable from it keeps that output; computed by propagating
    over the strongly connected component condensation.
    """
    comps = _condense(g.succ)
    comp_of = [0] * len(g.nodes)
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    labels: list = [UNSTABLE] * len(g.nodes)
    comp_label: list = [UNSTABLE] * len(comps)
    for ci, comp in enumerate(comps):
        bits = {rs.output_of(g.nodes[v]) for v in comp}
        if len(bits) != 1 or None in bits:
            continue
        b = bits.pop()
        ok = True
        for v in comp:
            for w in g.succ[v]:
                cj = comp_of[w]
                if cj != ci and comp_label[cj] != b:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            comp_label[ci] = b
            for v in comp:
                labels[v] = b
    return labels


@dataclass(frozen=True)
class Witness:
    config: Multiset
    path: tuple

    def __str__(self) -> str:
        return " -> ".join(str(c) for c in self.path)


@dataclass(frozen=True)
class Verdict:
    STABLY_COMPUTES = "stably-computes"
    NOT_WELL_SPECIFIED = "not-well-specified"
    DIVERGES = "diverges"

    status: str
    value: Optional[int] = None
    witness: Optional[Witness] = None

    @property
    def stable(self) -> bool:
        return self.status == Verdict.STABLY_COMPUTES

    def __str__(self) -> str:
        if self.stable:
            return f"stably computes {self.value}"
        return self.status


def _backward_closure(succ: list, seeds: Iterable[int]) -> list:
    pred: list[list[int]] = [[] for _ in succ]
    for v, outs in enumerate(succ):
        for w in outs:
            pred[w].append(v)
    seen = [False] * len(succ)
    queue = deque()
    for s in seeds:
        if not seen[s]:
            seen[s] = True
            queue.append(s)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if not seen[u]:
                seen[u] = True
                queue.append(u)
    return seen


def verdict(
    p: ProtocolSpec,
    x: Multiset,
    node_budget: int = DEFAULT_NODE_BUDGET,
    transit_cap: Optional[int] = None,
    ruleset: Optional[RuleSet] = None,
) -> Verdict:
    """Decide how the protocol behaves on one input.

    Stably computes b iff a stable-b configuration exists, none with the
    opposite output does, and every configuration can reach a stable-b
    one; otherwise the verdict carries a witness configuration and a path
    to it.
    """
    rs = ruleset if ruleset is not None else compile_rules(p)
    if transit_cap is None and rs.message_elements:
        transit_cap = len(x)
    c0 = initial_config(p, x)
    g = explore(rs, c0, node_budget=node_budget, transit_cap=transit_cap)
    labels = label_stability(g, rs)
    stable0 = [i for i, lab in enumerate(labels) if lab == STABLE0]
    stable1 = [i for i, lab in enumerate(labels) if lab == STABLE1]
    if stable0 and stable1:
        i = stable1[0]
        return Verdict(
            Verdict.NOT_WELL_SPECIFIED,
            witness=Witness(g.nodes[i], tuple(g.path_to(i))),
        )
    if not stable0 and not stable1:
        return Verdict(Verdict.DIVERGES, witness=Witness(c0, (c0,)))
    b = STABLE1 if stable1 else STABLE0
    reach_stable = _backward_closure(g.succ, stable1 or stable0)
    for i, ok in enumerate(reach_stable):
        if not ok:
            return Verdict(
                Verdict.DIVERGES,
                witness=Witness(g.nodes[i], tuple(g.path_to(i))),
            )
    return Verdict(Verdict.STABLY_COMPUTES, value=b)


def enumerate_inputs(alphabet, max_n: int, min_n: int = 1) -> Iterator[Multiset]:
    """All input multisets with min_n <= size <= max_n, ordered by size
    and then lexicographically by count vector over the sorted alphabet."""
    symbols = sorted(alphabet)

    def compositions(total: int, slots: int):
        if slots == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in compositions(total - head, slots - 1):
                yield (head,) + rest

    for n in range(min_n, max_n + 1):
        for counts in compositions(n, len(symbols)):
            yield Multiset({s: c for s, c in zip(symbols, counts)})


@dataclass(frozen=True)
class SweepEntry:
    input: Multiset
    expected: int
    verdict: Optional[Verdict]
    ok: bool
    error: Optional[str] = None


@dataclass
class VerificationReport:
    protocol: str
    max_n: int
    transit_cap: Optional[int]
    entries: list = field(default_factory=list)

    @property
    def mismatches(self) -> list:
        return [e for e in self.entries if not e.ok and e.error is None]

    @property
    def budget_failures(self) -> list:
        return [e for e in self.entries if e.error is not None]

    @property
    def clean(self) -> bool:
        return all(e.ok for e in self.entries)

    def summary(self) -> str:
        lines = [
            f"protocol {self.protocol}: {len(self.entries)} inputs up to n={self.max_n}"
            + (f" (transit cap {self.transit_cap})" if self.transit_cap else "")
        ]
        for e in self.mismatches:
            got = str(e.verdict)
            lines.append(f"  mismatch at {e.input}: expected {e.expected}, got {got}")
            if e.verdict and e.verdict.witness:
                lines.append(f"    witness: {e.verdict.witness}")
        for e in self.budget_failures:
            lines.append(f"  budget exceeded at {e.input}: {e.error}")
        if self.clean:
            lines.append("  all verdicts match")
        return "\n".join(lines)


def sweep(
    p: ProtocolSpec,
    psi: Callable[[Multiset], bool],
    max_n: int,
    promise: Optional[Callable[[Multiset], bool]] = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    transit_cap: Optional[int] = None,
) -> VerificationReport:
    """Verify every input up to ``max_n`` against the claimed predicate.

    Inputs failing the promise are skipped.  A budget overrun on one
    input is recorded, not fatal.
    """
    rs = compile_rules(p)
    report = VerificationReport(protocol=p.name, max_n=max_n, transit_cap=transit_cap)
    for x in enumerate_inputs(p.inputs, max_n):
        if promise is not None and not promise(x):
            continue
        expected = int(bool(psi(x)))
        cap = transit_cap
        if cap is None and rs.message_elements:
            cap = len(x)
        try:
            v = verdict(p, x, node_budget=node_budget, transit_cap=cap, ruleset=rs)
        except BudgetExceeded as exc:
            report.entries.append(SweepEntry(x, expected, None, False, error=str(exc)))
            continue
        ok = v.stable and v.value == expected
        report.entries.append(SweepEntry(x, expected, v, ok))
    return report


class StabilityOracle:
    """Memoized stability labeling of standalone configurations.

    Exploring from one configuration labels its whole reachable set, so
    repeated queries over overlapping spaces are cheap.
    """

    def __init__(
        self,
        p: ProtocolSpec,
        node_budget: int = DEFAULT_NODE_BUDGET,
        transit_cap: Optional[int] = None,
    ):
        self.ruleset = compile_rules(p)
        self.node_budget = node_budget
        self.transit_cap = transit_cap
        self._cache: dict = {}

    def label(self, c: Multiset):
        """0 or 1 when ``c`` is output stable with that bit, else None."""
        if c in self._cache:
            return self._cache[c]
        g = explore(
            self.ruleset, c, node_budget=self.node_budget, transit_cap=self.transit_cap
        )
        labels = label_stability(g, self.ruleset)
        for node, lab in zip(g.nodes, labels):
            self._cache[node] = lab
        return self._cache[c]

    def is_unstable(self, c: Multiset) -> bool:
        return self.label(c) is UNSTABLE


@dataclass(frozen=True)
class UnstableAnalysis:
    minimal: tuple
    truncation_k: int
    unstable: tuple


def enumerate_configs(p: ProtocolSpec, max_size: int) -> Iterator[Multiset]:
    """All legal configurations with 1..max_size elements: at least one
    agent state, any mix of states and (for message kinds) messages."""
    elems = sorted(p.states) + sorted(p.messages)
    for c in enumerate_inputs(elems, max_size):
        if any(e in p.states for e in c.support):
            yield c


def minimal_unstable(
    p: ProtocolSpec,
    size_bound: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    transit_cap: Optional[int] = None,
) -> UnstableAnalysis:
    """Minimal output-unstable configurations up to the size bound.

    Also reports the implied truncation constant: the largest single
    multiplicity appearing in a minimal unstable configuration (at least
    1), which empirically suffices for truncation to preserve stability.
    """
    oracle = StabilityOracle(p, node_budget=node_budget, transit_cap=transit_cap)
    unstable = [c for c in enumerate_configs(p, size_bound) if oracle.is_unstable(c)]
    minimal = [
        c
        for c in unstable
        if not any(d != c and d <= c for d in unstable)
    ]
    k = max((n for c in minimal for _, n in c.items()), default=1)
    return UnstableAnalysis(tuple(minimal), max(k, 1), tuple(unstable))


@dataclass
class Trace:
    configs: list
    converged: bool
    output: Optional[int]
    step_limit_hit: bool = False

    @property
    def steps(self) -> int:
        return len(self.configs) - 1


class StepLimit(RuntimeError):
    pass


def fair_run(
    p: ProtocolSpec,
    x: Multiset,
    seed: int = 0,
    max_steps: int = 10_000,
    node_budget: int = DEFAULT_NODE_BUDGET,
    transit_cap: Optional[int] = None,
) -> Trace:
    """One random execution: uniformly choose an enabled step until the
    current configuration is output stable (approximating fairness)."""
    rs = compile_rules(p)
    if transit_cap is None and rs.message_elements:
        transit_cap = len(x)
    c0 = initial_config(p, x)
    g = explore(rs, c0, node_budget=node_budget, transit_cap=transit_cap)
    labels = label_stability(g, rs)
    rng = random.Random(seed)
    i = 0
    configs = [c0]
    for _ in range(max_steps):
        if labels[i] is not UNSTABLE:
            return Trace(configs, converged=True, output=labels[i])
        outs = g.succ[i]
        if not outs:
            return Trace(configs, converged=False, output=None)
        i = rng.choice(outs)
        configs.append(g.nodes[i])
    if labels[i] is not UNSTABLE:
        return Trace(configs, converged=True, output=labels[i])
    return Trace(configs, converged=False, output=None, step_limit_hit=True)


@dataclass(frozen=True)
class LocalFairResult:
    states: tuple
    rounds: int
    output: int


def local_fair_run(
    protocol: SetUnionProtocol,
    x: Multiset,
    seed: int = 0,
    max_rounds: Optional[int] = None,
) -> LocalFairResult:
    """Round-based schedule satisfying local fairness for the set-union
    protocol: each round every agent sends, then every distinct pending
    message value is delivered to every agent.  States only grow, so a
    fixpoint is forced; it is reached within one full-delivery round per
    input value."""
    if not x:
        raise ValueError("empty input")
    rng = random.Random(seed)
    states = [protocol.initial_state(s) for s, n in x.items() for _ in range(n)]
    limit = max_rounds if max_rounds is not None else len(protocol.alphabet) + 1
    rounds = 0
    for _ in range(limit):
        messages = list({s for s in states})
        rng.shuffle(messages)
        new_states = list(states)
        for m in messages:
            new_states = [protocol.receive(s, m) for s in new_states]
        rounds += 1
        if new_states == states:
            break
        states = new_states
    out = protocol.output(states[0]) if len({*states}) == 1 else None
    return LocalFairResult(tuple(states), rounds, out)
