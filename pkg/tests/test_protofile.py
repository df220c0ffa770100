import pytest

import popverify as pv
from popverify import protofile
from popverify.models import ModelKind

SAMPLE = """
# two-state parity, immediate transmission
[model]
name parity
kind immediate-transmission

[states]
A0 A1 P0 P1

[inputs]
a

[delta]
A0 A0 -> P0 A0
A0 A1 -> P0 A1
A1 A0 -> P1 A1
A1 A1 -> P1 A0
A0 P0 -> P0 A0
A0 P1 -> P0 A0
A1 P0 -> P1 A1
A1 P1 -> P1 A1
P0 A0 -> P0 A0
P0 A1 -> P0 A1
P0 P0 -> P0 P0
P0 P1 -> P0 P1
P1 A0 -> P1 A0
P1 A1 -> P1 A1
P1 P0 -> P1 P0
P1 P1 -> P1 P1

[iota]
a -> A1

[output]
A0 -> 0
A1 -> 1
P0 -> 0
P1 -> 1
"""


def test_parse_sample():
    p = protofile.parse(SAMPLE)
    assert p.name == "parity"
    assert p.kind is ModelKind.IMMEDIATE_TRANSMISSION
    assert p.states == frozenset({"A0", "A1", "P0", "P1"})
    assert p.delta[("A1", "A1")] == ("P1", "A0")
    assert p.iota == {"a": "A1"}
    assert pv.validate_model(p) == []


def test_parsed_protocol_verifies():
    p = protofile.parse(SAMPLE)
    assert pv.verdict(p, pv.Multiset({"a": 3})).value == 1
    assert pv.verdict(p, pv.Multiset({"a": 2})).value == 0


@pytest.mark.parametrize(
    "build",
    [
        lambda: pv.build_simple_threshold("a", 2, ("a", "b")),
        lambda: pv.build_modulo(pv.ModuloParams({"a": 1, "b": 2}, 0, 3)),
        lambda: pv.build_threshold_avg(pv.ThresholdParams({"a": 1, "b": -1}, 1)),
        lambda: pv.build_delayed_transmission(pv.ModuloParams({"a": 1}, 1, 2)),
        lambda: pv.detect("a", ("a", "b")),
        lambda: pv.two_way_to_queued(
            pv.build_threshold_avg(pv.ThresholdParams({"a": 1}, 1))
        )[0],
    ],
)
def test_emit_parse_round_trip(build):
    p = build()
    text = protofile.emit(p)
    p2 = protofile.parse(text)
    assert protofile.emit(p2) == text
    assert p2.kind is p.kind
    assert p2.states == p.states and p2.messages == p.messages
    assert p2.inputs == p.inputs
    assert dict(p2.iota) == dict(p.iota)
    assert p2.self_delivery == p.self_delivery


def test_abstract_round_trip():
    text = """
[model]
kind abstract
[states]
x y
[inputs]
x
[delta]
rule {x:2} -> {y:1}
[iota]
[output]
x -> 0
y -> 1
"""
    p = protofile.parse(text)
    assert p.rules == ((pv.Multiset({"x": 2}), pv.Multiset({"y": 1})),)
    assert protofile.parse(protofile.emit(p)).rules == p.rules


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("x y z", "before any section"),
        ("[nosuch]", "unknown section"),
        ("[model]\nkindless", "expected 'key value'"),
        ("[model]\nkind sideways", "unknown model kind"),
        ("[model]\nkind two-way\n[delta]\nq1 q2 -> q1", "expected 'q1 q2 -> r1 r2'"),
        ("[model]\nkind two-way\n[states]\np\n[delta]\np q -> p p", "undeclared state 'q'"),
        ("[model]\nkind two-way\n[output]\np -> 0", "undeclared element 'p'"),
        ("[model]\nkind two-way\n[states]\np\n[output]\np -> 2", "output bit"),
    ],
)
def test_parse_errors_carry_line_info(text, fragment):
    with pytest.raises(protofile.ParseError) as err:
        protofile.parse(text)
    assert fragment in str(err.value)
    assert str(err.value).startswith("line ")


def test_duplicate_entries_rejected():
    text = SAMPLE + "\n[delta]\nA0 A0 -> A0 A0\n"
    with pytest.raises(protofile.ParseError) as err:
        protofile.parse(text)
    assert "duplicate" in str(err.value)
