"""Construction maps (operator trees, action lists, predicate trees) and
extraction back out of the graph form."""

import pytest

from decstruct import (
    ArchError,
    DecisionStructure,
    Leaf,
    Op,
    Pred,
    compress,
    construct_bt,
    construct_dt,
    construct_kbt,
    construct_tr,
    derived_return,
    extract_kbt,
    format_arch,
    parse_arch,
    structurally_equivalent,
)
from conftest import structure
from oracles import all_states, tick_term


def test_construct_kbt_single_leaf():
    z = construct_kbt(Leaf("ping"))
    assert z.nodes == [("ping", "ping")]
    assert z.arcs == []


def test_construct_bt_frozen_arcs():
    # (fb (seq a b) c): a --s--> b; a,b --f--> c
    z = construct_bt(Op("f", [Op("s", [Leaf("a"), Leaf("b")]), Leaf("c")]))
    assert sorted(z.arcs) == [("a", "b", "s"), ("a", "c", "f"),
                              ("b", "c", "f")]
    assert z.source == "a"


def test_construct_kbt_three_labels():
    term = Op("m", [Op("s", [Leaf("a"), Leaf("b")]), Leaf("c")])
    z = construct_kbt(term)
    # m climbs to the root operator, s stays inside the inner one
    assert sorted(z.arcs) == [("a", "b", "s"), ("a", "c", "m"),
                              ("b", "c", "m")]


def test_construct_kbt_repeated_actions_get_fresh_ids():
    z = construct_kbt(Op("s", [Leaf("go"), Leaf("go"), Leaf("go")]))
    assert z.node_ids() == ["go", "go2", "go3"]
    assert [z.action_of[v] for v in z.node_ids()] == ["go", "go", "go"]


def test_construct_bt_rejects_other_labels():
    with pytest.raises(ArchError):
        construct_bt(Op("m", [Leaf("a"), Leaf("b")]))


def test_construct_tr_chain():
    z = construct_tr([Leaf("watch"), Leaf("steer"), Leaf("brake")])
    assert z.arcs == [("watch", "steer", "d"), ("steer", "brake", "d")]
    with pytest.raises(ArchError):
        construct_tr([])


def test_construct_dt_shape():
    term = Pred("wet", Leaf("walk"), Pred("cold", Leaf("coat"), Leaf("tee")))
    z = construct_dt(term)
    assert sorted(z.arcs) == [
        ("cold", "coat", "top"), ("cold", "tee", "bot"),
        ("wet", "cold", "bot"), ("wet", "walk", "top")]


def test_compress_flattens_and_drops_unary():
    term = Op("s", [Op("s", [Leaf("a"), Leaf("b")]), Op("f", [Leaf("c")])])
    assert compress(term) == Op("s", [Leaf("a"), Leaf("b"), Leaf("c")])
    assert compress(Op("s", [Leaf("a")])) == Leaf("a")


def test_extract_kbt_frozen_corpus_trees():
    assert format_arch(extract_kbt(structure("bt_example"))) == \
        "(fb (seq a b c) (seq (fb d e) f g) h)"
    assert format_arch(extract_kbt(structure("btswitch"))) == \
        "(fb (seq a b) (seq c (fb (seq (fb d e f) g) (seq h i))))"


def test_extract_kbt_none_for_prime_structures():
    assert extract_kbt(structure("not_bt")) is None
    assert extract_kbt(structure("z1")) is None


def test_extract_construct_roundtrip_on_corpus():
    for name in ("bt_example", "btswitch", "z4", "q", "q2"):
        z = structure(name)
        term = extract_kbt(z)
        assert term is not None, name
        assert structurally_equivalent(construct_kbt(term), z), name


def test_parse_format_roundtrip():
    text = "(fb (seq a b c) (seq (fb d e) f g) h)"
    assert format_arch(parse_arch(text)) == text
    term = parse_arch("(op m a (op s b c))")
    assert term == Op("m", [Leaf("a"), Op("s", [Leaf("b"), Leaf("c")])])
    assert parse_arch("(tr a b)") == [Leaf("a"), Leaf("b")]
    assert parse_arch("(dt p a b)") == Pred("p", Leaf("a"), Leaf("b"))
    assert parse_arch("solo") == Leaf("solo")


def test_parse_arch_rejects_malformed_terms():
    for bad in ("(seq a", "(seq a))", "(wat a b)", "(dt p a)", "(op)", ")"):
        with pytest.raises(ArchError):
            parse_arch(bad)


def test_tick_matches_derived_return_small():
    term = parse_arch("(fb (seq a b) (seq c d))")
    z = construct_bt(term)
    for state in all_states(["a", "b", "c", "d"], ("s", "f", "x")):
        assert derived_return(z, state) == tick_term(term, state), state


def test_tick_matches_derived_return_dt():
    term = parse_arch("(dt wet walk (dt cold coat tee))")
    z = construct_dt(term)
    for state in all_states(["wet", "cold", "walk", "coat", "tee"],
                            ("top", "bot")):
        assert derived_return(z, state) == tick_term(term, state)
