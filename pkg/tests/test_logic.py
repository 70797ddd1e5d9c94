"""LTL syntax, worlds as bitmask frames, action specs, derived conditions."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decstruct import (
    DecisionStructure,
    FormatError,
    MissingSpec,
    OverlappingReturns,
    UnknownAtom,
    World,
    build_psi,
    format_formula,
    parse_actions,
    parse_ltl,
    parse_world,
    return_condition,
    selection_condition,
    selection_conditions,
    validate_actions,
)
from decstruct.logic import FALSE, TRUE, f_and, f_not, f_or, ground


def test_parse_ltl_precedence():
    assert parse_ltl("a -> b -> c") == \
        ("implies", ("atom", "a"), ("implies", ("atom", "b"), ("atom", "c")))
    assert parse_ltl("a | b & c") == \
        ("or", (("atom", "a"), ("and", (("atom", "b"), ("atom", "c")))))
    assert parse_ltl("!a & b") == \
        ("and", (("not", ("atom", "a")), ("atom", "b")))
    assert parse_ltl("a U b U c") == \
        ("until", ("atom", "a"), ("until", ("atom", "b"), ("atom", "c")))
    assert parse_ltl("X a & b") == \
        ("and", (("next", ("atom", "a")), ("atom", "b")))
    assert parse_ltl("G (a -> F b)") == \
        ("always", ("implies", ("atom", "a"), ("eventually", ("atom", "b"))))


def test_parse_ltl_rejects_garbage():
    for bad in ("", "a &", "( a", "a b", "&", "a ->", "a @ b"):
        with pytest.raises(FormatError):
            parse_ltl(bad)


def test_format_formula_minimal_parens():
    f = parse_ltl("a & (b | c) -> X !d")
    assert format_formula(f) == "a & (b | c) -> X !d"
    assert parse_ltl(format_formula(f)) == f


ATOMS = st.sampled_from(["p", "q", "r"])


def formulas(depth=3):
    base = st.one_of(ATOMS.map(lambda a: ("atom", a)),
                     st.just(TRUE), st.just(FALSE))
    return st.recursive(
        base,
        lambda sub: st.one_of(
            sub.map(lambda f: ("not", f)),
            st.tuples(sub, sub).map(lambda fg: ("and", fg)),
            st.tuples(sub, sub).map(lambda fg: ("or", fg)),
            st.tuples(sub, sub).map(lambda fg: ("implies",) + fg),
            sub.map(lambda f: ("next", f)),
            st.tuples(sub, sub).map(lambda fg: ("until",) + fg),
            sub.map(lambda f: ("eventually", f)),
            sub.map(lambda f: ("always", f))),
        max_leaves=8)


@settings(max_examples=150, deadline=None)
@given(formulas())
def test_format_parse_roundtrip(f):
    assert parse_ltl(format_formula(f)) == f


def small_world():
    return parse_world("\n".join([
        "var Mode { idle busy broken }",
        "bool hot",
        "rule cools: G (hot -> X !hot)",
        "init: idle & !hot",
    ]))


def test_world_states_and_masks():
    w = small_world()
    assert w.n_states == 6
    assert bin(w.mask(parse_ltl("hot"))).count("1") == 3
    assert bin(w.mask(parse_ltl("idle"))).count("1") == 2
    assert w.mask(parse_ltl("idle & busy")) == 0
    assert w.mask(parse_ltl("idle | !idle")) == w.full_mask
    assert w.mask(parse_ltl("hot -> hot")) == w.full_mask
    with pytest.raises(UnknownAtom):
        w.mask(parse_ltl("cold"))


def test_world_rejects_duplicate_atoms():
    with pytest.raises(FormatError):
        parse_world("var A { x y }\nbool x\n")


def test_parse_world_errors():
    with pytest.raises(FormatError):
        parse_world("var A { solo }\n")
    with pytest.raises(FormatError):
        parse_world("nonsense\n")
    with pytest.raises(FormatError):
        parse_world("bool p\ninit: p\ninit: !p\n")
    with pytest.raises(FormatError):
        parse_world("")


def test_state_rendering():
    w = small_world()
    st0 = w.min_state(w.mask(parse_ltl("busy & hot")))
    assert w.render_state(st0) == "busy & hot"
    assert w.state_dict(st0) == {"Mode": "busy", "hot": "true"}


def test_describe_mask():
    w = small_world()
    assert w.describe_mask(0) == "false"
    assert w.describe_mask(w.full_mask) == "true"
    m = w.mask(parse_ltl("idle & hot"))
    assert w.mask(parse_ltl(w.describe_mask(m))) == m
    # round-trips for arbitrary masks too
    for probe in (0b101010, 0b000111, 0b110001):
        assert w.mask(parse_ltl(w.describe_mask(probe))) == probe


def test_parse_actions():
    specs = parse_actions("""
        # a tiny pair of specifications
        action Work {
            model: busy -> X (busy | idle);
            returns s: idle;
            returns f: broken;
        }
        action Probe { returns s: hot; returns f: !hot; }
    """)
    assert sorted(specs) == ["Probe", "Work"]
    assert specs["Work"].returns["s"] == ("atom", "idle")
    assert specs["Probe"].model == TRUE


def test_parse_actions_errors():
    with pytest.raises(FormatError):
        parse_actions("action A { returns s: p; } junk")
    with pytest.raises(FormatError):
        parse_actions("action A { wat: p; }")
    with pytest.raises(FormatError):
        parse_actions("action A { returns s: p; } action A { }")
    with pytest.raises(FormatError):
        parse_actions("action A { returns s: p; returns s: q; }")


def test_validate_actions_overlap():
    w = small_world()
    specs = parse_actions(
        "action A { returns s: hot; returns f: busy; }")
    with pytest.raises(OverlappingReturns):
        validate_actions(w, specs)
    ok = parse_actions(
        "action A { returns s: hot; returns f: !hot; }")
    validate_actions(w, ok)


def test_validate_actions_requires_propositional_returns():
    w = small_world()
    specs = parse_actions("action A { returns s: X hot; }")
    with pytest.raises(Exception):
        validate_actions(w, specs)


def tiny_structure():
    return DecisionStructure(
        [("a", "A"), ("b", "B"), ("c", "C")],
        [("a", "b", "s"), ("a", "c", "f"), ("b", "c", "s")])


def test_selection_conditions_by_hand():
    z = tiny_structure()
    sel = selection_conditions(z)
    assert sel["a"] == f_and([f_not(("ret", "A", "f")),
                              f_not(("ret", "A", "s"))])
    assert sel["b"] == f_and([("ret", "A", "s"), f_not(("ret", "B", "s"))])
    # c is reached either directly or through b
    assert sel["c"] == f_or([("ret", "A", "f"),
                             f_and([("ret", "A", "s"), ("ret", "B", "s")])])
    assert selection_condition(z, "b") == sel["b"]


def test_selection_conditions_are_exhaustive_and_disjoint():
    w = small_world()
    z = tiny_structure()
    specs = parse_actions("""
        action A { returns s: idle; returns f: busy; }
        action B { returns s: hot; }
        action C { returns s: broken; }
    """)
    grounded = {v: w.mask(ground(f, specs))
                for v, f in selection_conditions(z).items()}
    union = 0
    for v, m in grounded.items():
        for u, m2 in grounded.items():
            if u < v:
                assert not (m & m2), (u, v)
        union |= m
    assert union == w.full_mask


def test_return_condition():
    w = small_world()
    z = tiny_structure()
    specs = parse_actions("""
        action A { returns s: idle; returns f: busy; }
        action B { returns s: hot; }
        action C { returns s: !hot; }
    """)
    got = w.mask(ground(return_condition(z, "s"), specs))
    # only c can derive s: the walk reaches it via A=f or A=s,B=s, and the
    # selection through b demands !B=s, squashing that branch
    want = w.mask(parse_ltl("(busy | idle & hot) & !hot"))
    assert got == want
    assert got == w.mask(parse_ltl("busy & !hot"))


def test_build_psi_missing_spec():
    z = tiny_structure()
    with pytest.raises(MissingSpec):
        build_psi(z, {})


def test_ground_replaces_return_atoms():
    specs = parse_actions("action A { returns s: hot; }")
    f = ground(("and", (("ret", "A", "s"), ("ret", "A", "zz"))), specs)
    assert f == ("and", (("atom", "hot"), FALSE))
    with pytest.raises(MissingSpec):
        ground(("ret", "Nope", "s"), specs)


def test_corpus_world_shape(world, specs, spec_formula):
    assert world.n_states == 864
    assert len(world.rules) == 3
    assert [name for name, _ in world.rules] == \
        ["progression", "fairness", "coupling"]
    validate_actions(world, specs)
    assert spec_formula[0] == "and"
    assert world.mask(parse_ltl("b0 & bLow")) == 0
