"""LTL entailment over finite-domain worlds, and the checks built on it.

The checker compiles `premises and not conclusion` to negation normal
form, collapses every maximal propositional subformula into a bitmask
over world states, and unrolls the rest into a tableau: automaton states
are sets of outstanding obligations, edges carry a state mask plus the
until-formulas whose discharge was postponed. A counterexample is then a
lasso through an SCC that postpones no until forever.
"""

from .logic import (FALSE, TRUE, LogicError, MissingSpec, f_and, f_not,
                    format_formula, ground, build_psi, return_condition,
                    validate_actions)
from .modules import NotAModule, is_module


class ResourceLimit(RuntimeError):
    def __init__(self, limit):
        self.limit = limit
        super().__init__("exploration budget exceeded (%d)" % limit)


class Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def spend(self, n=1):
        self.used += n
        if self.used > self.limit:
            raise ResourceLimit(self.limit)


class LassoTrace:
    """World states along a counterexample: a finite prefix, then a cycle
    repeated forever."""

    def __init__(self, prefix, cycle):
        self.prefix = list(prefix)
        self.cycle = list(cycle)

    def states(self):
        return self.prefix + self.cycle

    def pairs(self):
        """All adjacent state pairs, including the wrap around the cycle."""
        seq = self.states()
        out = list(zip(seq, seq[1:]))
        if self.cycle:
            out.append((self.cycle[-1], self.cycle[0]))
        return out

    def render(self, world):
        lines = []
        for i, st in enumerate(self.prefix):
            lines.append("%4d  %s" % (i, world.render_state(st)))
        lines.append("  loop:")
        for j, st in enumerate(self.cycle):
            lines.append("%4d  %s" % (len(self.prefix) + j,
                                      world.render_state(st)))
        return "\n".join(lines)

    def to_dict(self, world):
        return {"prefix": [world.state_dict(s) for s in self.prefix],
                "cycle": [world.state_dict(s) for s in self.cycle]}


class Verdict:
    def __init__(self, holds, counterexample=None, conclusion=None,
                 stats=None):
        self.holds = holds
        self.counterexample = counterexample
        self.conclusion = conclusion
        self.stats = stats or {}

    def __bool__(self):
        return self.holds

    def __repr__(self):
        return "Verdict(holds=%r)" % self.holds


# -- normal form -------------------------------------------------------------


def _mask_node(world, m):
    return ("mask", m)


def _mk_junction(world, op, parts):
    merged = world.full_mask if op == "and" else 0
    rest = []
    for p in parts:
        if p[0] == "mask":
            merged = (merged & p[1]) if op == "and" else (merged | p[1])
        else:
            rest.append(p)
    if op == "and":
        if merged == 0:
            return ("mask", 0)
        if not rest:
            return ("mask", merged)
        if merged != world.full_mask:
            rest = [("mask", merged)] + rest
        return rest[0] if len(rest) == 1 else ("and", tuple(rest))
    if merged == world.full_mask:
        return ("mask", world.full_mask)
    if not rest:
        return ("mask", merged)
    if merged != 0:
        rest = [("mask", merged)] + rest
    return rest[0] if len(rest) == 1 else ("or", tuple(rest))


def compile_nnf(world, f, neg=False):
    """Negation normal form with propositional parts collapsed to masks."""
    if world.is_propositional(f):
        m = world.mask(f)
        return ("mask", (world.full_mask ^ m) if neg else m)
    op = f[0]
    if op == "not":
        return compile_nnf(world, f[1], not neg)
    if op in ("and", "or"):
        out = ("or" if (op == "and") == neg else "and")
        return _mk_junction(world, out,
                            [compile_nnf(world, p, neg) for p in f[1]])
    if op == "implies":
        return compile_nnf(world, ("or", (("not", f[1]), f[2])), neg)
    if op == "next":
        return ("next", compile_nnf(world, f[1], neg))
    if op == "until":
        a, b = compile_nnf(world, f[1], neg), compile_nnf(world, f[2], neg)
        return ("release" if neg else "until", a, b)
    if op == "eventually":
        return compile_nnf(world, ("until", TRUE, f[1]), neg)
    if op == "always":
        sub = compile_nnf(world, f[1], neg)
        if neg:
            return ("until", ("mask", world.full_mask), sub)
        return ("release", ("mask", 0), sub)
    raise LogicError("cannot compile %r" % (f,))


def _untils(f, acc):
    if f[0] == "until":
        acc.add(f)
    if f[0] in ("and", "or"):
        for p in f[1]:
            _untils(p, acc)
    elif f[0] in ("next",):
        _untils(f[1], acc)
    elif f[0] in ("until", "release"):
        _untils(f[1], acc)
        _untils(f[2], acc)
    return acc


# -- tableau automaton -------------------------------------------------------


def _norm_nexts(world, nexts):
    """Normalize a next-step obligation set: conjoin all mask obligations
    (None if their conjunction is absurd) and drop any until whose target
    is itself an obligation in the set, since the target already entails
    the until one step from now."""
    mask = world.full_mask
    rest = []
    seen_mask = False
    for g in nexts:
        if g[0] == "mask":
            mask &= g[1]
            seen_mask = True
        else:
            rest.append(g)
    if seen_mask and mask == 0:
        return None
    if len(rest) > 1:
        present = set(rest)
        rest = [g for g in rest
                if not (g[0] == "until" and g[2] in present)]
    if seen_mask and mask != world.full_mask:
        rest.append(("mask", mask))
    return frozenset(rest)


def _merge(world, covers):
    out = {}
    for mask, nexts, pending in covers:
        nexts = _norm_nexts(world, nexts)
        if nexts is None:
            continue
        key = (nexts, pending)
        out[key] = out.get(key, 0) | mask
    return [(m, n, p) for (n, p), m in out.items()]


def _product(world, left, right, budget):
    budget.spend(len(left) * len(right) if left and right else 1)
    out = {}
    for m1, n1, p1 in left:
        for m2, n2, p2 in right:
            m = m1 & m2
            if not m:
                continue
            nexts = _norm_nexts(world, n1 | n2)
            if nexts is None:
                continue
            key = (nexts, p1 | p2)
            out[key] = out.get(key, 0) | m
    return [(m, n, p) for (n, p), m in out.items()]


_EMPTY = frozenset()


class _Tableau:
    """Turns obligation sets into covers: (state mask, next-step set,
    postponed untils). Per-formula cover lists are memoized, per-state
    covers are their pruned product."""

    def __init__(self, world, budget):
        self.world = world
        self.budget = budget
        self.memo = {}
        self.set_memo = {}
        self.keys = {}

    def formula_covers(self, f):
        got = self.memo.get(f)
        if got is not None:
            return got
        self.budget.spend()
        op = f[0]
        if op == "mask":
            covers = [(f[1], _EMPTY, _EMPTY)] if f[1] else []
        elif op == "and":
            covers = [(self.world.full_mask, _EMPTY, _EMPTY)]
            for p in f[1]:
                covers = _product(self.world, covers,
                                  self.formula_covers(p), self.budget)
        elif op == "or":
            covers = []
            for p in f[1]:
                covers.extend(self.formula_covers(p))
            covers = _merge(self.world, covers)
        elif op == "next":
            covers = [(self.world.full_mask, frozenset([f[1]]), _EMPTY)]
        elif op == "until":
            covers = list(self.formula_covers(f[2]))
            fs, fp = frozenset([f]), frozenset([f])
            covers.extend((m, n | fs, p | fp)
                          for m, n, p in self.formula_covers(f[1]))
            covers = _merge(self.world, covers)
        elif op == "release":
            now = _product(self.world, self.formula_covers(f[2]),
                           self.formula_covers(f[1]), self.budget)
            fs = frozenset([f])
            later = [(m, n | fs, p)
                     for m, n, p in self.formula_covers(f[2])]
            covers = _merge(self.world, now + later)
        else:
            raise LogicError("unexpected obligation %r" % (f,))
        self.memo[f] = covers
        return covers

    def set_covers(self, formulas):
        """Covers of a conjunction of non-mask obligations, memoized."""
        got = self.set_memo.get(formulas)
        if got is not None:
            return got
        covers = [(self.world.full_mask, _EMPTY, _EMPTY)]
        for f in sorted(formulas, key=self.sort_key):
            covers = _product(self.world, covers, self.formula_covers(f),
                              self.budget)
            if not covers:
                break
        self.set_memo[formulas] = covers
        return covers

    def sort_key(self, f):
        key = self.keys.get(f)
        if key is None:
            key = self.keys[f] = repr(f)
        return key

    def state_covers(self, state):
        """Covers of an automaton state: the memoized temporal product,
        filtered through the state's single mask obligation."""
        now = self.world.full_mask
        temporal = []
        for f in state:
            if f[0] == "mask":
                now &= f[1]
            else:
                temporal.append(f)
        base = self.set_covers(frozenset(temporal))
        if now == self.world.full_mask:
            return base
        out = []
        for m, n, p in base:
            m &= now
            if m:
                out.append((m, n, p))
        return out


class _Automaton:
    def __init__(self, init, edges, conditions, truncated):
        self.init = init
        # state -> list of (mask, succ, accept-bitmask); bit i of the
        # bitmask is set when the edge discharges conditions[i], i.e. the
        # until was not postponed across this step.
        self.edges = edges
        self.conditions = conditions
        self.all_bits = (1 << len(conditions)) - 1
        self.truncated = truncated  # states seen but not expanded (bound)


def _build(world, phi, budget, bound=None):
    init = frozenset([phi])
    tableau = _Tableau(world, budget)
    conditions = sorted(_untils(phi, set()), key=repr)
    cond_index = {c: i for i, c in enumerate(conditions)}
    all_bits = (1 << len(conditions)) - 1
    acc_cache = {_EMPTY: all_bits}
    edges = {}
    depth = {init: 0}
    queue = [init]
    truncated = set()
    qi = 0
    while qi < len(queue):
        state = queue[qi]
        qi += 1
        if bound is not None and depth[state] >= bound:
            truncated.add(state)
            edges[state] = []
            continue
        budget.spend()
        outs = []
        for mask, succ, pending in tableau.state_covers(state):
            if succ not in depth:
                depth[succ] = depth[state] + 1
                queue.append(succ)
            acc = acc_cache.get(pending)
            if acc is None:
                acc = all_bits
                for c in pending:
                    acc &= ~(1 << cond_index[c])
                acc_cache[pending] = acc
            outs.append((mask, succ, acc))
        edges[state] = outs
    return _Automaton(init, edges, conditions, truncated)


def _sccs(auto):
    """Iterative Tarjan; returns a list of state sets."""
    index, low, on = {}, {}, set()
    stack, out = [], []
    counter = [0]
    for root in auto.edges:
        if root in index:
            continue
        work = [(root, iter(auto.edges[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for _, succ, _ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on.add(succ)
                    work.append((succ, iter(auto.edges[succ])))
                    advanced = True
                    break
                if succ in on:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = set()
                while True:
                    s = stack.pop()
                    on.discard(s)
                    comp.add(s)
                    if s == node:
                        break
                out.append(comp)
    return out


def _accepting_sccs(auto):
    good = []
    for comp in _sccs(auto):
        seen = 0
        internal = False
        for st in comp:
            for _, succ, acc in auto.edges[st]:
                if succ in comp:
                    internal = True
                    seen |= acc
            if internal and seen == auto.all_bits:
                break
        if internal and seen == auto.all_bits:
            good.append(comp)
    return good


def _bfs_edges(auto, start, goal_test, allowed=None):
    """Shortest edge path from `start` to the first edge satisfying
    goal_test(state, edge); returns the path as a list of edges or None."""
    parent = {start: None}
    queue = [start]
    qi = 0
    while qi < len(queue):
        st = queue[qi]
        qi += 1
        for edge in auto.edges[st]:
            if goal_test(st, edge):
                path = [(st, edge)]
                back = st
                while parent[back] is not None:
                    prev, pedge = parent[back]
                    path.append((prev, pedge))
                    back = prev
                return [e for _, e in reversed(path)]
            succ = edge[1]
            if allowed is not None and succ not in allowed:
                continue
            if succ not in parent:
                parent[succ] = (st, edge)
                queue.append(succ)
    return None


def _extract_lasso(world, auto, sccs):
    inside = {}
    for comp in sccs:
        for st in comp:
            inside[st] = comp

    if auto.init in inside:
        prefix_edges = []
        entry = auto.init
    else:
        prefix_edges = _bfs_edges(auto, auto.init,
                                  lambda st, e: e[1] in inside)
        entry = prefix_edges[-1][1]
    comp = inside[entry]

    cycle_edges = []
    cur = entry
    for k in range(len(auto.conditions)):
        bit = 1 << k
        if any(e[2] & bit for e in cycle_edges):
            continue
        seg = _bfs_edges(auto, cur,
                         lambda st, e: e[1] in comp and e[2] & bit,
                         allowed=comp)
        cycle_edges.extend(seg)
        cur = seg[-1][1]
    if cur != entry or not cycle_edges:
        seg = _bfs_edges(auto, cur,
                         lambda st, e: e[1] == entry,
                         allowed=comp)
        cycle_edges.extend(seg)

    prefix = [world.min_state(e[0]) for e in prefix_edges]
    cycle = [world.min_state(e[0]) for e in cycle_edges]
    return LassoTrace(prefix, cycle)


def entails(world, premises, conclusion, bound=None, limit=5_000_000):
    """Does every world run satisfying the premises satisfy the conclusion?

    Failure comes with a lasso counterexample. With `bound` set, only
    obligation states within that many steps are explored; a pass is then
    conclusive only when the stats report the exploration as exhausted.
    """
    phi = f_and(list(premises) + [f_not(conclusion)])
    budget = Budget(limit)
    compiled = compile_nnf(world, phi)
    auto = _build(world, compiled, budget, bound=bound)
    sccs = _accepting_sccs(auto)
    stats = {
        "automaton_states": len(auto.edges),
        "budget_used": budget.used,
        "bounded": bound is not None,
        "exhausted": not auto.truncated,
    }
    if not sccs:
        return Verdict(True, conclusion=conclusion, stats=stats)
    trace = _extract_lasso(world, auto, sccs)
    return Verdict(False, counterexample=trace, conclusion=conclusion,
                   stats=stats)


# -- structure-level checks ---------------------------------------------------


def _premises(z, world, specs):
    rules = f_and([f for _, f in world.rules])
    psi = ground(build_psi(z, specs), specs)
    return [world.init, ("always", rules), ("always", psi)]


def verify(z, world, specs, phi, bound=None, limit=5_000_000):
    """Check that every run of the structure in the world satisfies phi.

    A top-level conjunction is checked one conjunct at a time, in order,
    and the first failing conjunct provides the counterexample.
    """
    validate_actions(world, specs)
    premises = _premises(z, world, specs)
    conjuncts = list(phi[1]) if phi[0] == "and" else [phi]
    total = {"automaton_states": 0, "budget_used": 0,
             "bounded": bound is not None, "exhausted": True,
             "conjuncts": len(conjuncts)}
    for c in conjuncts:
        v = entails(world, premises, c, bound=bound, limit=limit)
        total["automaton_states"] += v.stats["automaton_states"]
        total["budget_used"] += v.stats["budget_used"]
        total["exhausted"] &= v.stats["exhausted"]
        if not v.holds:
            return Verdict(False, counterexample=v.counterexample,
                           conclusion=c, stats=total)
    return Verdict(True, stats=total)


class ReplacementReport:
    def __init__(self, ok, returns, behavior, notes=()):
        self.ok = ok
        self.returns = returns  # value -> dict(old, new, equal, required_zero)
        self.behavior = behavior
        self.notes = list(notes)

    def __bool__(self):
        return self.ok


def check_action_replacement(world, specs, old, new, limit=5_000_000):
    """May `new` stand in for `old`? Same return conditions value by value,
    and the new model must guarantee the old one under the world rules."""
    validate_actions(world, specs)
    for name in (old, new):
        if name not in specs:
            raise MissingSpec(name)
    so, sn = specs[old], specs[new]
    returns = {}
    ok = True
    for v in sorted(set(so.returns) | set(sn.returns)):
        mo = world.mask(so.returns.get(v, FALSE))
        mn = world.mask(sn.returns.get(v, FALSE))
        equal = mo == mn
        ok &= equal
        returns[v] = {"old": mo, "new": mn, "equal": equal,
                      "required_zero": False}
    rules = f_and([f for _, f in world.rules])
    behavior = entails(world, [("always", rules), sn.model], so.model,
                       limit=limit)
    ok &= behavior.holds
    return ReplacementReport(ok, returns, behavior)


def check_module_replacement(z, members, q, world, specs, limit=5_000_000):
    """May the structure q stand in for the module `members` of z?

    The module and its stand-in must return every value leaving the
    module under equal conditions and nothing else, and one tick of q
    must guarantee one tick of the module under the world rules. When
    the module has no outgoing arcs its returns are invisible to z, so
    only the behavioral check applies.
    """
    validate_actions(world, specs)
    members = frozenset(str(m) for m in members)
    if not is_module(z, members):
        raise NotAModule(members)
    k = z.induced(members)
    r_out = sorted({r for t, h, r in z.arcs
                    if t in members and h not in members})
    notes = []
    returns = {}
    ok = True
    if r_out:
        candidates = set(r_out) | set(k.labels()) | set(q.labels())
        for part in (k, q):
            for _, a in part.nodes:
                if a in specs:
                    candidates |= set(specs[a].returns)
        for v in sorted(candidates):
            mo = world.mask(ground(return_condition(k, v), specs))
            mn = world.mask(ground(return_condition(q, v), specs))
            if v in r_out:
                equal = mo == mn
                returns[v] = {"old": mo, "new": mn, "equal": equal,
                              "required_zero": False}
                ok &= equal
            else:
                good = mo == 0 and mn == 0
                returns[v] = {"old": mo, "new": mn, "equal": mo == mn,
                              "required_zero": True}
                ok &= good
    else:
        notes.append("module has no outgoing arcs; return conditions are "
                     "invisible and were not compared")
    rules = f_and([f for _, f in world.rules])
    psi_k = ground(build_psi(k, specs), specs)
    psi_q = ground(build_psi(q, specs), specs)
    behavior = entails(world, [("always", rules), psi_q], psi_k, limit=limit)
    ok &= behavior.holds
    return ReplacementReport(ok, returns, behavior, notes)


def export_obligation(z, world, specs, phi):
    """The proof obligation verify() discharges, as readable text."""
    validate_actions(world, specs)
    psi = ground(build_psi(z, specs), specs)
    rules = [(name, f) for name, f in world.rules]
    lines = ["obligation v1"]
    lines.append("premise init: %s" % format_formula(world.init))
    for name, f in rules:
        lines.append("premise always (%s): %s" % (name, format_formula(f)))
    lines.append("premise always (step): %s" % format_formula(psi))
    conjuncts = list(phi[1]) if phi[0] == "and" else [phi]
    for c in conjuncts:
        lines.append("conclude: %s" % format_formula(c))
    return "\n".join(lines) + "\n"
