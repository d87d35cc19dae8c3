"""Prioritized base revision and the closed-game fixed-point check.

Two levels of machinery:

* Syntactic: `removal_candidates` / `prioritized_revise` operate on a leveled
  formula base, enumerating the maximal prioritized sub-bases that tolerate a
  new item. Exact but exponential in the worst case; meant for small bases.

* Semantic ("closed"): a logically closed set over a small universe is just
  its set of models, so a whole game collapses to a handful of bitmasks. A
  closed set X with priorities becomes a strictly shrinking chain of cut
  masks; revision by f reduces to "deepest cut that still intersects f, then
  conjoin f". A class-level enumeration of the same revision — every theory
  member is a superset of the model set, ranked by the shallowest cut it
  follows from — serves as an independent oracle on universes small enough to
  enumerate (the two paths are asserted to agree).

The fixed-point check ties the bargaining solution to mutual revision: the
agreement of the closed solution must equal the intersection of each side's
revision by the other side's solution part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .logic import (
    VariableUniverse,
    canonical_formula,
    ModelSet,
    formula_mask,
    is_satisfiable,
    levelwise_maximal_families,
    models,
)

INFINITE = math.inf

CLASS_ORACLE_CAP = 4  # class enumeration is 2^(2^n); keep n tiny


class RevisionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Syntactic prioritized revision


@dataclass(frozen=True)
class RemovalFamily:
    """Maximal prioritized sub-bases of `base` each jointly consistent with
    `new_item`; the revision is the disjunction of their expansions."""

    base: object            # PrioritizedDemandSet
    new_item: object        # formula
    families: tuple         # of frozensets of base formulas

    def revision_models(self, universe):
        m = 0
        for fam in self.families:
            mm = formula_mask(self.new_item, universe)
            for f in fam:
                mm &= formula_mask(f, universe)
            m |= mm
        return ModelSet(universe, m)

    def revision_formula(self, universe):
        return canonical_formula(self.revision_models(universe))


def removal_candidates(ds, new_item, universe=None, backend="auto"):
    """The families of `RemovalFamily` for base `ds` and `new_item`.

    Levelwise-greedy: scanning levels from most entrenched, each family keeps
    a maximal slice of the level consistent with everything kept so far plus
    the new item.
    """
    if not is_satisfiable([new_item], universe=universe, backend=backend):
        raise RevisionError("cannot accommodate a self-contradictory item: %s"
                            % (new_item,))
    memo = {}

    def sat(t):
        key = frozenset(t)
        v = memo.get(key)
        if v is None:
            v = is_satisfiable((new_item,) + tuple(t), universe=universe,
                               backend=backend)
            memo[key] = v
        return v

    fams = levelwise_maximal_families(ds.levels(), sat)
    return RemovalFamily(ds, new_item, tuple(fams))


def prioritized_revise(ds, new_item, universe, backend="auto"):
    """Model set of the prioritized revision of `ds` by `new_item`."""
    fam = removal_candidates(ds, new_item, universe=universe, backend=backend)
    return fam.revision_models(universe)


# ---------------------------------------------------------------------------
# Closed sets as model masks


@dataclass(frozen=True)
class ClosedSetDescriptor:
    """A logically closed set, described by its models. Membership, expansion
    and intersection are pure mask arithmetic: phi is in the set iff every
    model satisfies phi; expanding shrinks the mask; intersecting two closed
    sets unions their masks."""

    universe: VariableUniverse
    mask: int

    def contains(self, formula):
        return self.mask & ~formula_mask(formula, self.universe) == 0

    def expand(self, formula):
        return ClosedSetDescriptor(self.universe,
                                   self.mask & formula_mask(formula, self.universe))

    def intersect(self, other):
        return ClosedSetDescriptor(self.universe, self.mask | other.mask)

    @property
    def is_consistent(self):
        return self.mask != 0

    def to_formula(self):
        return canonical_formula(ModelSet(self.universe, self.mask))

    def classes(self):
        """Every member of the closed set up to logical equivalence, as world
        masks: exactly the supersets of the model set."""
        n = 1 << self.universe.size
        if n > (1 << CLASS_ORACLE_CAP):
            raise RevisionError("class enumeration needs a universe of at most"
                                " %d atoms" % CLASS_ORACLE_CAP)
        free = [w for w in range(n) if not (self.mask >> w) & 1]
        out = []
        for pick in range(1 << len(free)):
            c = self.mask
            for i, w in enumerate(free):
                if pick >> i & 1:
                    c |= 1 << w
            out.append(c)
        return out


@dataclass(frozen=True)
class ClosedGame:
    """Two prioritized closed sets over one universe: per player, a strictly
    shrinking chain of cut masks (cuts[k-1] = models of the closure of levels
    1..k). Levels that add no information are merged away and reported."""

    universe: VariableUniverse
    cuts1: tuple
    cuts2: tuple
    merged: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for cuts in (self.cuts1, self.cuts2):
            if not cuts or cuts[-1] == 0:
                raise RevisionError("each side needs a consistent closed set")
            for a, b in zip(cuts, cuts[1:]):
                if b & ~a or a == b:
                    raise RevisionError("cut masks must strictly shrink")

    @classmethod
    def from_hierarchies(cls, ds1, ds2, universe):
        cuts_all = []
        merged = []
        for name, ds in (("player 1", ds1), ("player 2", ds2)):
            cuts = []
            prev = (1 << (1 << universe.size)) - 1
            for k in range(1, ds.depth + 1):
                m = models(ds.cut(k), universe).mask
                if m == prev:
                    merged.append("%s level %d adds nothing beyond its upper"
                                  " levels; merged" % (name, k))
                    continue
                cuts.append(m)
                prev = m
            if not cuts:
                cuts = [prev]  # everything tautological: one full-universe cut
            cuts_all.append(tuple(cuts))
        return cls(universe, cuts_all[0], cuts_all[1], tuple(merged))

    @property
    def m1(self):
        return self.cuts1[-1]

    @property
    def m2(self):
        return self.cuts2[-1]

    @property
    def common_mask(self):
        """The closed sets' intersection: weakest knowledge both sides hold."""
        return self.m1 | self.m2

    def side(self, i):
        return (self.cuts1, self.cuts2)[i - 1]

    def cut_mask(self, i, k):
        cuts = self.side(i)
        if k <= 0:
            return (1 << (1 << self.universe.size)) - 1
        return cuts[min(k, len(cuts)) - 1]


def closed_pi_max(game):
    depth = max(len(game.cuts1), len(game.cuts2))
    for k in range(1, depth + 1):
        if game.cut_mask(1, k) & game.cut_mask(2, k) & game.common_mask == 0:
            return k - 1
    return INFINITE


@dataclass(frozen=True)
class ClosedSolution:
    pi_max: object
    f1_mask: int
    f2_mask: int

    @property
    def agreement_mask(self):
        return self.f1_mask & self.f2_mask


def solve_closed(game):
    """Solution of a closed game in one mask construction: each side keeps its
    own theory weakened by ("intersected with, as closed sets") the closure of
    both deepest jointly satisfiable cuts and the shared knowledge."""
    pi = closed_pi_max(game)
    k = len(game.cuts1) + len(game.cuts2) if pi is INFINITE else pi
    bridge = game.cut_mask(1, k) & game.cut_mask(2, k) & game.common_mask
    return ClosedSolution(pi, game.m1 | bridge, game.m2 | bridge)


def revise_closed(game, side, f_mask, oracle="auto"):
    """Prioritized revision of one side's closed set by the theory with model
    mask `f_mask`: expand the deepest cut that f does not contradict.

    With oracle="auto" (universe small enough) or oracle=True, the result is
    cross-checked against the class-level enumeration and must agree.
    """
    cuts = game.side(side)
    fast = f_mask
    for k in range(len(cuts), 0, -1):
        if cuts[k - 1] & f_mask:
            fast = cuts[k - 1] & f_mask
            break
    want_oracle = (oracle is True or
                   (oracle == "auto" and game.universe.size <= 3))
    if want_oracle:
        slow = _class_revision(cuts, f_mask, game.universe)
        if slow != fast:
            raise AssertionError(
                "closed revision mismatch: cut scan %x vs class enumeration %x"
                % (fast, slow))
    return fast


def class_ranks(cuts, universe):
    """Rank every member class of the closed set with model mask cuts[-1]:
    the shallowest cut whose models it contains. Returns {class_mask: rank}."""
    desc = ClosedSetDescriptor(universe, cuts[-1])
    ranks = {}
    for c in desc.classes():
        for k, cm in enumerate(cuts, start=1):
            if cm & ~c == 0:
                ranks[c] = k
                break
    return ranks


def class_family_intersections(cuts, constraint_mask, universe):
    """Intersections of the maximal prioritized class families consistent with
    `constraint_mask` (a family is consistent while some constraint world
    survives every member). Per level, a maximal extension corresponds to
    saving one surviving world, which keeps the state space tiny."""
    ranks = class_ranks(cuts, universe)
    depth = max(ranks.values())
    levels = [[c for c, r in ranks.items() if r == k] for k in range(1, depth + 1)]
    full = (1 << (1 << universe.size)) - 1
    memo = {}

    def rec(li, inter):
        if li == len(levels):
            return {inter}
        key = (li, inter)
        got = memo.get(key)
        if got is not None:
            return got
        alive = inter & constraint_mask
        out = set()
        if alive == 0:
            memo[key] = out  # no family survives below an already-dead prefix
            return out
        options = {}
        w = 0
        rest = alive
        while rest:
            w = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            kept = [c for c in levels[li] if (c >> w) & 1]
            options[frozenset(kept)] = kept
        keys = list(options)
        for i, ks in enumerate(keys):
            if any(ks < other for other in keys):
                continue  # not maximal at this level
            nxt = inter
            for c in options[ks]:
                nxt &= c
            out |= rec(li + 1, nxt)
        memo[key] = out
        return out

    return sorted(rec(0, full))


def _class_revision(cuts, f_mask, universe):
    out = 0
    for inter in class_family_intersections(cuts, f_mask, universe):
        out |= inter & f_mask
    return out


@dataclass(frozen=True)
class FixpointReport:
    pi_max: object
    f1_mask: int
    f2_mask: int
    revision1: int
    revision2: int
    lhs_mask: int
    rhs_mask: int

    @property
    def equal(self):
        return self.lhs_mask == self.rhs_mask


def check_fixed_point(game, oracle="auto"):
    """Solve the closed game, revise each side by the other's solution part,
    and compare: agreement models == union of the two revisions' models (i.e.
    the agreement theory equals the intersection of the revision theories)."""
    sol = solve_closed(game)
    pi = sol.pi_max
    k = len(game.cuts1) + len(game.cuts2) if pi is INFINITE else pi
    for f, opp in ((sol.f2_mask, 2), (sol.f1_mask, 1)):
        # the revising theory always carries the opponent's surviving cut and
        # the shared knowledge; this is the regime the cut-scan handles
        assert f & ~(game.cut_mask(opp, k) & game.common_mask) == 0 or k == 0
    rev1 = revise_closed(game, 1, sol.f2_mask, oracle=oracle)
    rev2 = revise_closed(game, 2, sol.f1_mask, oracle=oracle)
    return FixpointReport(pi, sol.f1_mask, sol.f2_mask, rev1, rev2,
                          sol.f1_mask & sol.f2_mask, rev1 | rev2)
