"""Ground-truth predicate engine.

Explicit semilinear sets with a membership decision procedure, plus a
quantifier-free predicate AST (threshold / modulo / boolean structure)
used as the oracle that protocol sweeps are checked against.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .multiset import Multiset


def _count(x, sigma: str) -> int:
    if isinstance(x, Multiset):
        return x[sigma]
    return x.get(sigma, 0)


def dot(v: Mapping[str, int], x) -> int:
    return sum(coef * _count(x, sigma) for sigma, coef in v.items())


# ---------------------------------------------------------------------------
# Explicit semilinear sets


@dataclass(frozen=True)
class LinearSet:
    """``{base + k1*p1 + ... + kn*pn | ki >= 0}`` over a fixed symbol tuple.

    Base and periods are nonnegative; zero periods are rejected because
    they generate nothing and break the membership search's pruning.
    """

    symbols: tuple
    base: tuple
    periods: tuple

    def __post_init__(self):
        d = len(self.symbols)
        if len(self.base) != d or any(len(p) != d for p in self.periods):
            raise ValueError("dimension mismatch between symbols and vectors")
        if any(n < 0 for n in self.base) or any(n < 0 for p in self.periods for n in p):
            raise ValueError("base and periods must be nonnegative")
        if any(not any(p) for p in self.periods):
            raise ValueError("zero period vector")
        # Dedup, keep heaviest-first order for the DFS.
        uniq = sorted(set(self.periods), key=lambda p: (-sum(p), p))
        object.__setattr__(self, "periods", tuple(uniq))

    def member(self, x: Sequence[int]) -> bool:
        """Decide membership by DFS over period multiples.

        Residuals only shrink (periods are nonzero and nonnegative), so
        memoizing failed residuals bounds the search by the box under x.
        """
        if len(x) != len(self.symbols):
            raise ValueError("dimension mismatch")
        res = tuple(a - b for a, b in zip(x, self.base))
        if any(n < 0 for n in res):
            return False
        dead: set = set()

        def search(r: tuple) -> bool:
            if not any(r):
                return True
            if r in dead:
                return False
            for p in self.periods:
                if all(pi <= ri for pi, ri in zip(p, r)):
                    if search(tuple(ri - pi for ri, pi in zip(r, p))):
                        return True
            dead.add(r)
            return False

        return search(res)


@dataclass(frozen=True)
class SemilinearSet:
    components: tuple

    def __post_init__(self):
        syms = {L.symbols for L in self.components}
        if len(syms) > 1:
            raise ValueError("components disagree on the symbol tuple")

    def member(self, x: Sequence[int]) -> bool:
        return any(L.member(x) for L in self.components)


def member_linear(L: LinearSet, x: Sequence[int]) -> bool:
    return L.member(x)


def member(S: SemilinearSet, x: Sequence[int]) -> bool:
    return S.member(x)


# ---------------------------------------------------------------------------
# Predicate AST


class PredicateExpr:
    def __call__(self, x) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(PredicateExpr):
    value: bool

    def __call__(self, x) -> bool:
        return self.value


@dataclass(frozen=True)
class Threshold(PredicateExpr):
    """``x . v >= r``"""

    v: tuple
    r: int

    def __init__(self, v: Mapping[str, int], r: int):
        object.__setattr__(self, "v", tuple(sorted(v.items())))
        object.__setattr__(self, "r", r)

    def __call__(self, x) -> bool:
        return dot(dict(self.v), x) >= self.r


@dataclass(frozen=True)
class Modulo(PredicateExpr):
    """``x . v = r  (mod m)``"""

    v: tuple
    r: int
    m: int

    def __init__(self, v: Mapping[str, int], r: int, m: int):
        if m < 1:
            raise ValueError(f"modulus must be >= 1, got {m}")
        object.__setattr__(self, "v", tuple(sorted(v.items())))
        object.__setattr__(self, "r", r % m)
        object.__setattr__(self, "m", m)

    def __call__(self, x) -> bool:
        return dot(dict(self.v), x) % self.m == self.r


def simple_threshold(sigma: str, k: int) -> Threshold:
    """``count(sigma) >= k``"""
    return Threshold({sigma: 1}, k)


@dataclass(frozen=True)
class Member(PredicateExpr):
    sset: SemilinearSet

    def __call__(self, x) -> bool:
        symbols = self.sset.components[0].symbols
        return self.sset.member(tuple(_count(x, s) for s in symbols))


@dataclass(frozen=True)
class Not(PredicateExpr):
    arg: PredicateExpr

    def __call__(self, x) -> bool:
        return not self.arg(x)


@dataclass(frozen=True)
class And(PredicateExpr):
    args: tuple

    def __init__(self, *args: PredicateExpr):
        object.__setattr__(self, "args", tuple(args))

    def __call__(self, x) -> bool:
        return all(a(x) for a in self.args)


@dataclass(frozen=True)
class Or(PredicateExpr):
    args: tuple

    def __init__(self, *args: PredicateExpr):
        object.__setattr__(self, "args", tuple(args))

    def __call__(self, x) -> bool:
        return any(a(x) for a in self.args)


def evaluate(psi: PredicateExpr, x) -> bool:
    """Evaluate a predicate on an input (multiset or mapping)."""
    return bool(psi(x))


def count_k_eval(table, k: int, x) -> bool:
    """Apply a boolean table to the input's counts clamped at ``k``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if isinstance(x, Multiset):
        clipped = x.truncate(k)
    else:
        clipped = Multiset({s: min(k, n) for s, n in x.items()})
    return bool(table(clipped))


def k_rich(x, subalphabet, k: int, alphabet=None) -> bool:
    """True iff every symbol of the subalphabet occurs at least ``k``
    times and no other symbol occurs at all."""
    sub = set(subalphabet)
    if not sub:
        raise ValueError("subalphabet must be nonempty")
    if any(_count(x, s) < k for s in sub):
        return False
    present = x.support if isinstance(x, Multiset) else [s for s, n in x.items() if n]
    return all(s in sub for s in present)


def brute_equivalent(psi1, psi2, symbols: Sequence[str], box: int):
    """Compare two predicates on every nonnegative vector in the box
    ``{0..box}^symbols``.  Returns ``(equivalent, first_counterexample)``."""
    for values in itertools.product(range(box + 1), repeat=len(symbols)):
        x = Multiset({s: n for s, n in zip(symbols, values)})
        if bool(psi1(x)) != bool(psi2(x)):
            return False, x
    return True, None


# ---------------------------------------------------------------------------
# S-expression predicate files
#
#   (and (mod (v (a 1)) 1 2) (ge (v (a 1) (b -1)) 1))
#   operators: and, or, not, true, false,
#              (ge (v (sym coef)...) r), (mod (v ...) r m), (count sym k),
#              (sl (lin (base (sym n)...) (per (sym n)...)*)+)


class PredicateParseError(ValueError):
    pass


_SEXP_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str):
    pos = 0
    for match in _SEXP_TOKEN.finditer(text):
        between = text[pos : match.start()]
        if between.strip():
            raise PredicateParseError(f"stray characters {between.strip()!r}")
        pos = match.end()
        yield match.group()
    if text[pos:].strip():
        raise PredicateParseError(f"stray characters {text[pos:].strip()!r}")


def _read_sexp(tokens: list):
    if not tokens:
        raise PredicateParseError("unexpected end of input")
    tok = tokens.pop(0)
    if tok == "(":
        out = []
        while tokens and tokens[0] != ")":
            out.append(_read_sexp(tokens))
        if not tokens:
            raise PredicateParseError("missing ')'")
        tokens.pop(0)
        return out
    if tok == ")":
        raise PredicateParseError("unexpected ')'")
    return tok


def _as_int(tok) -> int:
    try:
        return int(tok)
    except (TypeError, ValueError):
        raise PredicateParseError(f"expected integer, got {tok!r}") from None


def _read_vector(form) -> dict:
    if not isinstance(form, list) or not form or form[0] != "v":
        raise PredicateParseError(f"expected (v (sym coef)...), got {form!r}")
    v = {}
    for entry in form[1:]:
        if not isinstance(entry, list) or len(entry) != 2:
            raise PredicateParseError(f"bad vector entry {entry!r}")
        v[entry[0]] = _as_int(entry[1])
    return v


def _build(form) -> PredicateExpr:
    if form == "true":
        return Const(True)
    if form == "false":
        return Const(False)
    if not isinstance(form, list) or not form:
        raise PredicateParseError(f"expected a predicate form, got {form!r}")
    head = form[0]
    if head == "and":
        return And(*(_build(f) for f in form[1:]))
    if head == "or":
        return Or(*(_build(f) for f in form[1:]))
    if head == "not":
        if len(form) != 2:
            raise PredicateParseError("not takes one argument")
        return Not(_build(form[1]))
    if head == "ge":
        if len(form) != 3:
            raise PredicateParseError("ge takes a vector and a threshold")
        return Threshold(_read_vector(form[1]), _as_int(form[2]))
    if head == "mod":
        if len(form) != 4:
            raise PredicateParseError("mod takes a vector, residue and modulus")
        return Modulo(_read_vector(form[1]), _as_int(form[2]), _as_int(form[3]))
    if head == "count":
        if len(form) != 3:
            raise PredicateParseError("count takes a symbol and a threshold")
        return simple_threshold(form[1], _as_int(form[2]))
    if head == "sl":
        return Member(_build_semilinear(form))
    raise PredicateParseError(f"unknown operator {head!r}")


def _build_semilinear(form) -> SemilinearSet:
    components = []
    symbols: list[str] = []
    vectors = []
    for lin in form[1:]:
        if not isinstance(lin, list) or not lin or lin[0] != "lin":
            raise PredicateParseError(f"expected (lin ...), got {lin!r}")
        base = None
        periods = []
        for part in lin[1:]:
            if not isinstance(part, list) or not part:
                raise PredicateParseError(f"bad linear component part {part!r}")
            vec = {}
            for entry in part[1:]:
                if not isinstance(entry, list) or len(entry) != 2:
                    raise PredicateParseError(f"bad vector entry {entry!r}")
                vec[entry[0]] = _as_int(entry[1])
                if entry[0] not in symbols:
                    symbols.append(entry[0])
            if part[0] == "base":
                base = vec
            elif part[0] == "per":
                periods.append(vec)
            else:
                raise PredicateParseError(f"expected base or per, got {part[0]!r}")
        if base is None:
            raise PredicateParseError("linear component without a base")
        vectors.append((base, periods))
    symtup = tuple(sorted(symbols))
    for base, periods in vectors:
        components.append(
            LinearSet(
                symtup,
                tuple(base.get(s, 0) for s in symtup),
                tuple(tuple(p.get(s, 0) for s in symtup) for p in periods),
            )
        )
    return SemilinearSet(tuple(components))


def parse_predicate(text: str) -> PredicateExpr:
    stripped = "\n".join(line.split(";", 1)[0] for line in text.splitlines())
    tokens = list(_tokenize(stripped))
    form = _read_sexp(tokens)
    if tokens:
        raise PredicateParseError(f"trailing input after predicate: {tokens!r}")
    return _build(form)
