"""Propositional language: formulas, parsing, printing, satisfiability, model sets.

Two interchangeable satisfiability backends:

* truth-table bitmasks over all 2^n worlds (exact and fast up to a configurable
  atom cap, default 16);
* DPLL with unit propagation over a Tseitin-style clausal form, used above the
  cap (large chain-structured games reach 100+ atoms).

Formulas are immutable and hash/compare structurally, so they can be used as
set members directly; set operations on demand sets are syntactic by design.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

DEFAULT_TABLE_CAP = 16

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEYWORDS = {"true", "false"}


class ParseError(ValueError):
    """Syntax or atom error; carries 1-based line/column of the offender."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = "%s (line %d, column %d)" % (message, line, column)
        super().__init__(message)


class UnknownAtomError(ParseError):
    pass


class UniverseCapError(ValueError):
    """Raised when a model-set operation is asked to enumerate too many worlds."""


@dataclass(frozen=True)
class VariableUniverse:
    names: tuple

    def __post_init__(self):
        if not self.names:
            raise ValueError("universe needs at least one variable")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names: %r" % (self.names,))
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @classmethod
    def of(cls, *names):
        return cls(tuple(names))

    @property
    def size(self):
        return len(self.names)

    def bit(self, name):
        return self._index[name]

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self.names)


# ---------------------------------------------------------------------------
# Formula AST


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Const:
    value: bool


TRUE = Const(True)
FALSE = Const(False)

Formula = object  # structural union of the node classes above

_BINOPS = {And: "&", Or: "|", Implies: "->", Iff: "<->"}


def atoms_of(formula):
    """Atom names appearing in the formula, in first-occurrence (in-order) order."""
    out = []
    seen = set()

    def walk(f):
        t = type(f)
        if t is Atom:
            if f.name not in seen:
                seen.add(f.name)
                out.append(f.name)
        elif t is Not:
            walk(f.child)
        elif t in _BINOPS:
            walk(f.left)
            walk(f.right)

    walk(formula)
    return out


def universe_for(formulas):
    """Build a universe from the atoms of `formulas` in first-occurrence order.
    Constant-only input gets a one-variable universe so downstream truth
    tables stay well-formed."""
    names = []
    seen = set()
    for f in formulas:
        for n in atoms_of(f):
            if n not in seen:
                seen.add(n)
                names.append(n)
    if not names:
        names.append("p")
    return VariableUniverse(tuple(names))


# ---------------------------------------------------------------------------
# Parser (recursive descent, precedence per the grammar in the README)


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.toks = []
        self._scan()
        self.i = 0

    def _scan(self):
        text = self.text
        pos = 0
        line, col = 1, 1
        n = len(text)
        while pos < n:
            c = text[pos]
            if c == "\n":
                line += 1
                col = 1
                pos += 1
                continue
            if c in " \t\r":
                pos += 1
                col += 1
                continue
            start_line, start_col = line, col
            m = _NAME_RE.match(text, pos)
            if m:
                word = m.group(0)
                self.toks.append((word if word in _KEYWORDS else "name", word, start_line, start_col))
                col += len(word)
                pos = m.end()
                continue
            for sym in ("<->", "->", "|", "&", "!", "(", ")"):
                if text.startswith(sym, pos):
                    self.toks.append((sym, sym, start_line, start_col))
                    pos += len(sym)
                    col += len(sym)
                    break
            else:
                raise ParseError("unexpected character %r" % c, line, col)
        self.toks.append(("end", "", line, col))

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t


def parse_formula(text, universe=None):
    """Parse a formula. With a universe, unknown atoms raise UnknownAtomError;
    with universe=None atoms are accepted as written (infer mode)."""
    toks = _Tokens(text)

    def expect(kind):
        k, v, ln, col = toks.take()
        if k != kind:
            raise ParseError("expected %r, found %r" % (kind, v or "end of input"), ln, col)
        return v

    def p_unary():
        k, v, ln, col = toks.peek()
        if k == "!":
            toks.take()
            return Not(p_unary())
        if k == "(":
            toks.take()
            f = p_iff()
            expect(")")
            return f
        if k == "true":
            toks.take()
            return TRUE
        if k == "false":
            toks.take()
            return FALSE
        if k == "name":
            toks.take()
            if universe is not None and v not in universe:
                raise UnknownAtomError("unknown atom %r" % v, ln, col)
            return Atom(v)
        raise ParseError("expected a formula, found %r" % (v or "end of input"), ln, col)

    def p_and():
        f = p_unary()
        while toks.peek()[0] == "&":
            toks.take()
            f = And(f, p_unary())
        return f

    def p_or():
        f = p_and()
        while toks.peek()[0] == "|":
            toks.take()
            f = Or(f, p_and())
        return f

    def p_imp():
        f = p_or()
        if toks.peek()[0] == "->":
            toks.take()
            return Implies(f, p_imp())
        return f

    def p_iff():
        f = p_imp()
        while toks.peek()[0] == "<->":
            toks.take()
            f = Iff(f, p_imp())
        return f

    f = p_iff()
    k, v, ln, col = toks.peek()
    if k != "end":
        raise ParseError("trailing input %r" % v, ln, col)
    return f


_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Atom: 6, Const: 6}


def format_formula(f):
    """Minimal-parenthesis rendering; parse_formula(format_formula(f)) == f."""
    t = type(f)
    if t is Atom:
        return f.name
    if t is Const:
        return "true" if f.value else "false"
    if t is Not:
        inner = format_formula(f.child)
        if _PREC[type(f.child)] < _PREC[Not]:
            inner = "(" + inner + ")"
        return "!" + inner
    prec = _PREC[t]
    # <->, |, & associate to the left in the grammar; -> to the right.
    if t is Implies:
        lp = _PREC[type(f.left)] <= prec
        rp = _PREC[type(f.right)] < prec
    else:
        lp = _PREC[type(f.left)] < prec
        rp = _PREC[type(f.right)] <= prec
    left = format_formula(f.left)
    right = format_formula(f.right)
    if lp:
        left = "(" + left + ")"
    if rp:
        right = "(" + right + ")"
    return "%s %s %s" % (left, _BINOPS[t], right)


# ---------------------------------------------------------------------------
# Truth-table backend: every formula is a bitmask over 2^n worlds.
# World w assigns atom i the value (w >> i) & 1.


@lru_cache(maxsize=None)
def _atom_masks(universe):
    nworlds = 1 << universe.size
    masks = []
    for i in range(universe.size):
        m = 0
        for w in range(nworlds):
            if (w >> i) & 1:
                m |= 1 << w
        masks.append(m)
    return tuple(masks)


@lru_cache(maxsize=None)
def formula_mask(f, universe):
    """Bitmask of the worlds satisfying f. Cached per (formula, universe)."""
    full = (1 << (1 << universe.size)) - 1
    t = type(f)
    if t is Atom:
        try:
            return _atom_masks(universe)[universe.bit(f.name)]
        except KeyError:
            raise UnknownAtomError("atom %r not in universe %r" % (f.name, universe.names))
    if t is Const:
        return full if f.value else 0
    if t is Not:
        return full & ~formula_mask(f.child, universe)
    a = formula_mask(f.left, universe)
    b = formula_mask(f.right, universe)
    if t is And:
        return a & b
    if t is Or:
        return a | b
    if t is Implies:
        return (full & ~a) | b
    if t is Iff:
        return full & ~(a ^ b)
    raise TypeError("not a formula: %r" % (f,))


@dataclass(frozen=True)
class ModelSet:
    universe: VariableUniverse
    mask: int

    @property
    def is_empty(self):
        return self.mask == 0

    def count(self):
        return bin(self.mask).count("1")

    def worlds(self):
        for w in range(1 << self.universe.size):
            if (self.mask >> w) & 1:
                yield w

    def contains_world(self, w):
        return bool((self.mask >> w) & 1)

    def issubset(self, other):
        return self.mask & ~other.mask == 0


def models(formulas, universe, table_cap=DEFAULT_TABLE_CAP):
    """Exact satisfying assignments of the conjunction of `formulas`."""
    if universe.size > table_cap:
        raise UniverseCapError(
            "model enumeration needs %d atoms, cap is %d" % (universe.size, table_cap))
    mask = (1 << (1 << universe.size)) - 1
    for f in formulas:
        mask &= formula_mask(f, universe)
    return ModelSet(universe, mask)


def canonical_formula(m):
    """Disjunction of minterms whose models are exactly `m` (False when empty)."""
    full = (1 << (1 << m.universe.size)) - 1
    if m.mask == 0:
        return FALSE
    if m.mask == full:
        return TRUE
    disj = None
    for w in m.worlds():
        term = None
        for i, name in enumerate(m.universe.names):
            lit = Atom(name) if (w >> i) & 1 else Not(Atom(name))
            term = lit if term is None else And(term, lit)
        disj = term if disj is None else Or(disj, term)
    return disj


# ---------------------------------------------------------------------------
# DPLL backend over Tseitin clauses.
#
# Universe atoms get variables 1..n; each distinct non-literal subformula gets
# one auxiliary variable per universe, defined once and shared across calls
# (unused definitions never change satisfiability). Plain literals, top-level
# conjunctions and implications between literals skip the transformation, so
# implication-chain games produce pure 1- and 2-clauses.


class _CnfPool:
    def __init__(self, universe):
        self.universe = universe
        self.next_var = universe.size + 1
        self.defs = []          # defining clauses for aux vars, grows monotonically
        self.enc_memo = {}      # formula -> literal
        self.assert_memo = {}   # formula -> tuple of clauses asserting it

    def _lit(self, f):
        t = type(f)
        if t is Atom:
            return self.universe.bit(f.name) + 1
        if t is Not:
            return -self._lit(f.child)
        if t is Const:
            # a fresh var constrained to the constant
            v = self.next_var
            self.next_var += 1
            self.defs.append((v,) if f.value else (-v,))
            return v
        got = self.enc_memo.get(f)
        if got is not None:
            return got
        a = self._lit(f.left)
        b = self._lit(f.right)
        v = self.next_var
        self.next_var += 1
        if t is And:
            self.defs += [(-v, a), (-v, b), (v, -a, -b)]
        elif t is Or:
            self.defs += [(-v, a, b), (v, -a), (v, -b)]
        elif t is Implies:
            self.defs += [(-v, -a, b), (v, a), (v, -b)]
        elif t is Iff:
            self.defs += [(-v, -a, b), (-v, a, -b), (v, a, b), (v, -a, -b)]
        else:
            raise TypeError("not a formula: %r" % (f,))
        self.enc_memo[f] = v
        return v

    def _is_literal(self, f):
        return type(f) is Atom or (type(f) is Not and type(f.child) is Atom)

    def assert_clauses(self, f):
        got = self.assert_memo.get(f)
        if got is not None:
            return got
        t = type(f)
        if t is Const:
            out = () if f.value else ((),)  # empty clause = unsatisfiable
        elif self._is_literal(f):
            out = ((self._lit(f),),)
        elif t is And:
            out = self.assert_clauses(f.left) + self.assert_clauses(f.right)
        elif t is Implies and self._is_literal(f.left) and self._is_literal(f.right):
            out = ((-self._lit(f.left), self._lit(f.right)),)
        elif t is Or and self._is_literal(f.left) and self._is_literal(f.right):
            out = ((self._lit(f.left), self._lit(f.right)),)
        else:
            out = ((self._lit(f),),)
        self.assert_memo[f] = out
        return out


@lru_cache(maxsize=None)
def _pool_for(universe):
    return _CnfPool(universe)


def _dpll(clauses, nvars):
    """Satisfiability of a clause list. Counting-based unit propagation with
    occurrence lists and a trail; branches on the first unassigned variable of
    the first unresolved clause."""
    assign = [0] * (nvars + 1)  # 0 unknown, 1 true, -1 false
    occ = {}
    for ci, cl in enumerate(clauses):
        if not cl:
            return False
        for lit in cl:
            occ.setdefault(lit, []).append(ci)

    sat_by = [0] * len(clauses)  # how many satisfied literals (any >0 means clause done)
    unassigned = [len(cl) for cl in clauses]

    def set_lit(lit, trail):
        v = abs(lit)
        val = 1 if lit > 0 else -1
        if assign[v]:
            return assign[v] == val
        assign[v] = val
        trail.append(v)
        queue = [lit]
        while queue:
            cur = queue.pop()
            for ci in occ.get(cur, ()):
                sat_by[ci] += 1
            for ci in occ.get(-cur, ()):
                unassigned[ci] -= 1
                if sat_by[ci] == 0:
                    k = unassigned[ci]
                    if k == 0:
                        return False
                    if k == 1:
                        # find the remaining literal
                        for l2 in clauses[ci]:
                            v2 = abs(l2)
                            if assign[v2] == 0:
                                val2 = 1 if l2 > 0 else -1
                                assign[v2] = val2
                                trail.append(v2)
                                queue.append(l2)
                                break
        return True

    def undo(trail, mark):
        while len(trail) > mark:
            v = trail.pop()
            lit = v if assign[v] > 0 else -v
            assign[v] = 0
            for ci in occ.get(lit, ()):
                sat_by[ci] -= 1
            for ci in occ.get(-lit, ()):
                unassigned[ci] += 1

    def pick():
        for ci, cl in enumerate(clauses):
            if sat_by[ci] == 0:
                for lit in cl:
                    if assign[abs(lit)] == 0:
                        return lit
        return None

    def search(trail):
        lit = pick()
        if lit is None:
            return True
        for choice in (lit, -lit):
            mark = len(trail)
            if set_lit(choice, trail) and search(trail):
                return True
            undo(trail, mark)
        return False

    trail = []
    # seed: propagate existing unit clauses
    for ci, cl in enumerate(clauses):
        if len(cl) == 1 and sat_by[ci] == 0:
            if not set_lit(cl[0], trail):
                return False
    return search(trail)


def _dpll_sat(formulas, universe):
    pool = _pool_for(universe)
    clauses = []
    for f in formulas:
        clauses.extend(pool.assert_clauses(f))
    clauses.extend(pool.defs)
    return _dpll(clauses, pool.next_var - 1)


def is_satisfiable(formulas, universe=None, backend="auto", table_cap=DEFAULT_TABLE_CAP):
    """True iff some assignment satisfies every formula.

    backend: "auto" picks truth tables up to `table_cap` atoms, DPLL beyond;
    "table" and "dpll" force one (table raises UniverseCapError above the cap).
    """
    formulas = list(formulas)
    if universe is None:
        if not formulas:
            return True
        universe = universe_for(formulas)
    if backend == "auto":
        backend = "table" if universe.size <= table_cap else "dpll"
    if backend == "table":
        if universe.size > table_cap:
            raise UniverseCapError(
                "truth-table backend over %d atoms exceeds cap %d" % (universe.size, table_cap))
        mask = (1 << (1 << universe.size)) - 1
        for f in formulas:
            mask &= formula_mask(f, universe)
            if mask == 0:
                return False
        return True
    if backend == "dpll":
        return _dpll_sat(formulas, universe)
    raise ValueError("unknown backend %r" % backend)


def entails(premises, goal, universe=None, backend="auto", table_cap=DEFAULT_TABLE_CAP):
    """premises |= goal, decided as unsatisfiability of premises + {!goal}."""
    fs = list(premises) + [Not(goal)]
    return not is_satisfiable(fs, universe=universe, backend=backend, table_cap=table_cap)


class SatContext:
    """A fixed set of formulas against which many small extensions are tested.

    Used on hot paths (deal search, maximal-subset enumeration) to avoid
    re-assembling the base clause list / base mask for every query.
    """

    def __init__(self, formulas, universe, backend="auto", table_cap=DEFAULT_TABLE_CAP):
        self.universe = universe
        if backend == "auto":
            backend = "table" if universe.size <= table_cap else "dpll"
        self.backend = backend
        self.formulas = tuple(formulas)
        if backend == "table":
            if universe.size > table_cap:
                raise UniverseCapError("truth-table context over %d atoms" % universe.size)
            m = (1 << (1 << universe.size)) - 1
            for f in self.formulas:
                m &= formula_mask(f, universe)
            self.base_mask = m
        else:
            pool = _pool_for(universe)
            base = []
            for f in self.formulas:
                base.extend(pool.assert_clauses(f))
            self.base_clauses = base
            self.pool = pool

    def sat_with(self, extra=()):
        if self.backend == "table":
            m = self.base_mask
            for f in extra:
                m &= formula_mask(f, self.universe)
                if m == 0:
                    return False
            return m != 0
        clauses = list(self.base_clauses)
        pool = self.pool
        for f in extra:
            clauses.extend(pool.assert_clauses(f))
        clauses.extend(pool.defs)
        return _dpll(clauses, pool.next_var - 1)

    def extended(self, extra):
        return SatContext(self.formulas + tuple(extra), self.universe, self.backend)


# ---------------------------------------------------------------------------
# Maximal satisfiable subsets.
#
# maximal_satisfiable_subsets enumerates, exactly, every maximal sublist S of
# `items` with sat(S) true, where sat is a caller-supplied oracle over item
# tuples (items are opaque: formulas here, model-class codes in the revision
# engine). The recursion keeps chain-structured inputs linear: a fully
# consistent tail is taken whole, and an individually inconsistent item drops
# out in one call.


def maximal_satisfiable_subsets(items, sat):
    items = tuple(items)

    def rec(avail, ctx):
        if sat(ctx + avail):
            return [frozenset(avail)]
        if not avail:
            return []  # ctx itself inconsistent
        f, rest = avail[0], avail[1:]
        ctx_f = ctx + (f,)
        if not sat(ctx_f):
            return rec(rest, ctx)  # f joins nothing; maximality w.r.t. f is automatic
        with_f = [m | {f} for m in rec(rest, ctx_f)]
        out = list(with_f)
        for m in rec(rest, ctx):
            if not sat(ctx + tuple(m) + (f,)):
                out.append(m)
        return out

    if sat(items):
        return [frozenset(items)]
    if not sat(()):
        return []
    seen = set()
    result = []
    for m in rec(items, ()):
        if m not in seen:
            seen.add(m)
            result.append(m)
    return result


def levelwise_maximal_families(levels, sat):
    """All selections H with H ∩ level_k maximal such that the union of the
    selections for levels 1..k stays sat-consistent (Nebel's removal families;
    also the per-player maximality condition for deals when `sat` closes over
    the opponent's demands)."""
    families = []

    def rec(k, chosen):
        if k == len(levels):
            families.append(frozenset().union(*chosen) if chosen else frozenset())
            return
        prefix = tuple(x for part in chosen for x in part)
        for m in maximal_satisfiable_subsets(levels[k], lambda t, p=prefix: sat(p + t)):
            rec(k + 1, chosen + [tuple(sorted(m, key=levels[k].index))])

    if not sat(()):
        return []
    rec(0, [])
    # distinct by construction except when a level's MSS enumeration yields
    # duplicates through different orders; dedupe defensively
    seen = set()
    out = []
    for fam in families:
        if fam not in seen:
            seen.add(fam)
            out.append(fam)
    return out
