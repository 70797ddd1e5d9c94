"""Tree-shaped control architectures and their maps into decision structures.

Three tree languages share one graph target:

* k-ary behavior trees: operators ``*_c`` over return value c; a node
  ticks its children left to right and moves on while each returns c.
  Classic behavior trees are the two-operator case (sequence = ``*_s``,
  fallback = ``*_f``).
* teleo-reactive programs: an ordered action list; the first item not
  returning the idle value d is in charge.
* decision trees: full binary trees of predicates with top/bot branches.
"""

from collections import namedtuple

from .structures import DecisionStructure, StructureError

Leaf = namedtuple("Leaf", ["action"])
Op = namedtuple("Op", ["label", "children"])
Pred = namedtuple("Pred", ["action", "when_true", "when_false"])

TR_LABEL = "d"
DT_LABELS = ("top", "bot")


class ArchError(StructureError):
    """Malformed architecture term."""


def _leaves(tree):
    if isinstance(tree, Leaf):
        yield tree
    elif isinstance(tree, Op):
        for c in tree.children:
            yield from _leaves(c)
    else:
        raise ArchError("not an operator tree: %r" % (tree,))


def _fresh_ids(actions):
    """One node id per leaf: the action name, suffixed on repeats."""
    ids, used = [], {}
    for a in actions:
        used[a] = used.get(a, 0) + 1
        ids.append(a if used[a] == 1 else "%s%d" % (a, used[a]))
    if len(set(ids)) != len(ids):  # e.g. actions literally named "Land2"
        ids = ["n%d_%s" % (i + 1, a) for i, a in enumerate(actions)]
    return ids


def construct_kbt(tree):
    """Map an operator tree to its decision structure.

    Leaves become nodes in left-to-right order. When leaf i returns r,
    control climbs the tree: at an ancestor ``*_r`` that has a next
    sibling, it jumps to that sibling's leftmost leaf (one arc labeled
    r); anywhere else it keeps climbing, and at the root the value is
    returned, so no arc is drawn.
    """
    if isinstance(tree, Leaf):
        return DecisionStructure([(tree.action, tree.action)], [])
    leaves = list(_leaves(tree))
    if not leaves:
        raise ArchError("operator with no leaves")
    ids = _fresh_ids([l.action for l in leaves])
    index = {id(l): i for i, l in enumerate(leaves)}

    def leftmost(t):
        while isinstance(t, Op):
            if not t.children:
                raise ArchError("operator with no children")
            t = t.children[0]
        return index[id(t)]

    labels = set()

    def collect(t):
        if isinstance(t, Op):
            labels.add(t.label)
            for c in t.children:
                collect(c)
    collect(tree)

    arcs = []

    def walk(t, ancestors):
        # ancestors: list of (op, child position) from root down to t's parent
        if isinstance(t, Leaf):
            i = index[id(t)]
            for r in sorted(labels):
                for op, pos in reversed(ancestors):
                    if op.label == r and pos + 1 < len(op.children):
                        j = leftmost(op.children[pos + 1])
                        arcs.append((ids[i], ids[j], r))
                        break
            return
        for pos, c in enumerate(t.children):
            walk(c, ancestors + [(t, pos)])

    walk(tree, [])
    nodes = [(ids[i], leaves[i].action) for i in range(len(leaves))]
    return DecisionStructure(nodes, arcs)


def construct_bt(tree):
    """construct_kbt restricted to the two classic operators."""
    bad = {op.label for op in _ops(tree)} - {"s", "f"}
    if bad:
        raise ArchError("behavior trees only use labels s and f, got %s"
                        % ", ".join(sorted(bad)))
    return construct_kbt(tree)


def _ops(tree):
    if isinstance(tree, Op):
        yield tree
        for c in tree.children:
            yield from _ops(c)


def construct_tr(actions):
    """An action list becomes a chain of arcs labeled with the idle value."""
    names = [a.action if isinstance(a, Leaf) else str(a) for a in actions]
    if not names:
        raise ArchError("empty program")
    ids = _fresh_ids(names)
    nodes = list(zip(ids, names))
    arcs = [(ids[i], ids[i + 1], TR_LABEL) for i in range(len(ids) - 1)]
    return DecisionStructure(nodes, arcs)


def construct_dt(tree):
    """A predicate tree becomes its own shape with top/bot arc labels."""
    actions, spans = [], []

    def collect(t):
        if isinstance(t, Leaf):
            actions.append(t.action)
            return len(actions) - 1
        if isinstance(t, Pred):
            actions.append(t.action)
            me = len(actions) - 1
            spans.append((me, collect(t.when_true), collect(t.when_false)))
            return me
        raise ArchError("not a predicate tree: %r" % (t,))

    collect(tree)
    ids = _fresh_ids(actions)
    arcs = []
    for me, yes, no in spans:
        arcs.append((ids[me], ids[yes], DT_LABELS[0]))
        arcs.append((ids[me], ids[no], DT_LABELS[1]))
    return DecisionStructure(list(zip(ids, actions)), arcs)


def compress(tree):
    """Normal form: no single-child operators, no same-label nesting."""
    if isinstance(tree, Leaf):
        return tree
    if isinstance(tree, Pred):
        return Pred(tree.action, compress(tree.when_true),
                    compress(tree.when_false))
    children = []
    for c in tree.children:
        c = compress(c)
        if isinstance(c, Op) and c.label == tree.label:
            children.extend(c.children)
        else:
            children.append(c)
    if len(children) == 1:
        return children[0]
    return Op(tree.label, children)


def extract_kbt(z):
    """Recover an operator tree from a structure, or None if there is none.

    Works off the modular decomposition: a structure is an operator-tree
    image exactly when every quotient on the way down is a uniformly
    labeled path, which then names the operator at that level.
    """
    from .modules import decompose

    def build(d):
        if d.is_leaf():
            return Leaf(d.action)
        if d.kind != "path":
            return None
        parts = []
        for c in d.children:
            sub = build(c)
            if sub is None:
                return None
            parts.append(sub)
        return Op(d.label, parts)

    tree = build(decompose(z))
    return compress(tree) if tree is not None else None


# -- term syntax -----------------------------------------------------------


def parse_arch(text):
    """Parse architecture terms written as s-expressions.

    ``(seq a (fb b c))`` and ``(fb ...)`` are the classic operators,
    ``(op <label> ...)`` the general one, ``(tr a b c)`` an action list,
    ``(dt pred yes no)`` a predicate node. Bare words are actions.
    """
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def next_token():
        nonlocal pos
        if pos >= len(tokens):
            raise ArchError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_term():
        tok = next_token()
        if tok == ")":
            raise ArchError("unexpected ')'")
        if tok != "(":
            return Leaf(tok)
        head = next_token()
        args = []
        while True:
            if pos >= len(tokens):
                raise ArchError("missing ')'")
            if tokens[pos] == ")":
                pos_advance()
                break
            args.append(parse_term())
        if head == "seq":
            return Op("s", args)
        if head == "fb":
            return Op("f", args)
        if head == "op":
            if not args or not isinstance(args[0], Leaf):
                raise ArchError("(op <label> ...) needs a label")
            return Op(args[0].action, args[1:])
        if head == "tr":
            if not all(isinstance(a, Leaf) for a in args):
                raise ArchError("(tr ...) takes plain actions")
            return args
        if head == "dt":
            if len(args) != 3 or not isinstance(args[0], Leaf):
                raise ArchError("(dt <pred> <yes> <no>) is ternary")
            return Pred(args[0].action, args[1], args[2])
        raise ArchError("unknown operator %r" % head)

    def pos_advance():
        nonlocal pos
        pos += 1

    term = parse_term()
    if pos != len(tokens):
        raise ArchError("trailing input after term")
    return term


def format_arch(term):
    if isinstance(term, Leaf):
        return term.action
    if isinstance(term, Op):
        inner = " ".join(format_arch(c) for c in term.children)
        if term.label == "s":
            return "(seq %s)" % inner
        if term.label == "f":
            return "(fb %s)" % inner
        return "(op %s %s)" % (term.label, inner)
    if isinstance(term, Pred):
        return "(dt %s %s %s)" % (term.action, format_arch(term.when_true),
                                  format_arch(term.when_false))
    if isinstance(term, list):
        return "(tr %s)" % " ".join(format_arch(c) for c in term)
    raise ArchError("not an architecture term: %r" % (term,))
