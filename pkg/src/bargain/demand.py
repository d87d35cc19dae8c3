"""Prioritized demand sets: ranked formulas, cuts, and the logical-closure
sanity check that makes rankings meaningful.

A demand set is an ordered sequence of (formula, rank) pairs. Ranks are
arbitrary positive integers on input and are compacted to consecutive levels
1..n, so only the relative order matters; every report is invariant under
order-preserving relabelings. Level 1 is most entrenched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .logic import entails, is_satisfiable, universe_for


class DemandSetError(ValueError):
    pass


@dataclass(frozen=True)
class LCViolation:
    formula: object
    level: int
    kind: str          # "upper-cut-entails" | "pairwise-implication" | "pairwise-conjunction"
    detail: str

    def __str__(self):
        return self.detail


@dataclass(frozen=True)
class PrioritizedDemandSet:
    """Formulas with levels 1..n (compacted), preserving entry order inside a level."""

    entries: tuple  # ((formula, level), ...) with compacted levels
    name: str = field(default="", compare=False)

    @property
    def formulas(self):
        return tuple(f for f, _ in self.entries)

    @property
    def depth(self):
        return max((lv for _, lv in self.entries), default=0)

    def level(self, k):
        """Formulas at exactly level k, in entry order."""
        return tuple(f for f, lv in self.entries if lv == k)

    def levels(self):
        return tuple(self.level(k) for k in range(1, self.depth + 1))

    def rank_of(self, formula):
        for f, lv in self.entries:
            if f == formula:
                return lv
        raise KeyError(formula)

    def cut(self, k):
        """Union of levels 1..k (k may exceed the depth; cut(0) is empty)."""
        if k < 0:
            raise ValueError("cut level must be >= 0")
        return tuple(f for f, lv in self.entries if lv <= k)

    def __contains__(self, formula):
        return any(f == formula for f, _ in self.entries)

    def __len__(self):
        return len(self.entries)


def build_hierarchy(ranked, name="", require_consistent=True, backend="auto"):
    """Build a demand set from (formula, rank) pairs.

    Ranks are any positive integers; they are compacted to 1..n preserving
    order. Rejects duplicate formulas (syntactic) and, unless told otherwise,
    a jointly inconsistent formula set.
    """
    ranked = list(ranked)
    if not ranked:
        return PrioritizedDemandSet((), name=name)
    for _, r in ranked:
        if not isinstance(r, int) or r < 1:
            raise DemandSetError("ranks must be positive integers, got %r" % (r,))
    seen = set()
    for f, _ in ranked:
        if f in seen:
            raise DemandSetError("duplicate demand: %s" % (f,))
        seen.add(f)
    distinct = sorted({r for _, r in ranked})
    remap = {r: i + 1 for i, r in enumerate(distinct)}
    entries = tuple((f, remap[r]) for f, r in ranked)
    if require_consistent and not is_satisfiable([f for f, _ in entries], backend=backend):
        raise DemandSetError("demand set%s is inconsistent" %
                             (" %r" % name if name else ""))
    return PrioritizedDemandSet(entries, name=name)


def validate_lc(ds, backend="auto"):
    """Logical-closure violations of a demand set (empty list = valid).

    The governing criterion: a demand at level k >= 2 must not already follow
    from the strictly-more-entrenched demands (the cut at k-1). A tautology is
    therefore only admissible at level 1. The two pairwise checks are weaker
    necessary conditions, reported with their own kinds because they give
    pithier witnesses: an implication between demands forces the implied one
    at least as deep, and a conjunction present alongside both conjuncts must
    not outrank, in entrenchment, the weaker conjunct.
    """
    out = []
    if not ds.entries:
        return out
    universe = universe_for(ds.formulas)
    for f, lv in ds.entries:
        if lv >= 2 and entails(ds.cut(lv - 1), f, universe=universe, backend=backend):
            out.append(LCViolation(
                f, lv, "upper-cut-entails",
                "level-%d demand %s already follows from levels 1..%d"
                % (lv, _txt(f), lv - 1)))
    for f, lf in ds.entries:
        for g, lg in ds.entries:
            if f == g:
                continue
            if lg > lf and entails([f], g, universe=universe, backend=backend):
                out.append(LCViolation(
                    g, lg, "pairwise-implication",
                    "%s (level %d) implies %s, yet the latter sits lower at level %d"
                    % (_txt(f), lf, _txt(g), lg)))
    from .logic import And
    members = {f: lv for f, lv in ds.entries}
    for f, lv in ds.entries:
        if type(f) is And and f.left in members and f.right in members:
            weakest = max(members[f.left], members[f.right])
            if lv > weakest:
                out.append(LCViolation(
                    f, lv, "pairwise-conjunction",
                    "conjunction %s (level %d) is less entrenched than both of its"
                    " conjuncts (deepest conjunct at level %d)" % (_txt(f), lv, weakest)))
    return out


def _txt(f):
    from .logic import format_formula
    return format_formula(f)
