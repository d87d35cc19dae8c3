"""Bargaining engine: deals, cores, best deals, the solution, utilities,
Pareto checks, subgames, and the staircase cake generator.

A game is a pair of prioritized demand sets over one variable universe.
Demands the two players share syntactically ("common demands") are kept by
both sides in every deal. Deal enumeration has two strategies:

* "brute": iterate candidate subset pairs (bitmask arithmetic over cached
  per-formula world masks when the universe fits the truth-table cap). Exact
  and simple; guarded by a cap on the number of free (non-common) demands.
* "frontier": depth-first search over one player's levels with sound pruning,
  then exact per-level maximal completions for the other player. Every emitted
  pair is re-checked by the deal predicate, so the strategy can only lose
  speed, never correctness. This is what makes 100+ atom chain games feasible.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .demand import PrioritizedDemandSet, build_hierarchy
from .logic import (
    DEFAULT_TABLE_CAP,
    Not,
    SatContext,
    formula_mask,
    format_formula,
    is_satisfiable,
    levelwise_maximal_families,
    maximal_satisfiable_subsets,
    universe_for,
)

INFINITE = math.inf

DEFAULT_ENUM_CAP = 16


class SolverError(RuntimeError):
    """An internal guarantee failed; indicates a bug, not bad input."""


class EnumerationCapError(ValueError):
    pass


@dataclass(frozen=True)
class BargainingGame:
    player1: PrioritizedDemandSet
    player2: PrioritizedDemandSet
    universe: object

    @classmethod
    def of(cls, player1, player2, universe=None):
        if universe is None:
            universe = universe_for(player1.formulas + player2.formulas)
        return cls(player1, player2, universe)

    @property
    def common(self):
        """Demands kept by both players (syntactic intersection), in player-1
        entry order."""
        other = set(self.player2.formulas)
        return tuple(f for f in self.player1.formulas if f in other)

    def demand_sets(self):
        return (self.player1, self.player2)

    @property
    def free_count(self):
        c = len(self.common)
        return (len(self.player1) - c) + (len(self.player2) - c)


@dataclass(frozen=True)
class StrategyProfile:
    part1: tuple
    part2: tuple

    def parts(self):
        return (self.part1, self.part2)


@dataclass(frozen=True)
class CoreResult:
    pi_max: object          # int, or INFINITE when the demand sets agree outright
    profile: StrategyProfile


@dataclass
class SolutionReport:
    game: BargainingGame
    pi_max: object
    core: StrategyProfile
    deals: object           # list of StrategyProfile, or None when not enumerated
    best_deals: list
    solution: StrategyProfile
    utilities: tuple
    strategy: str
    warnings: list = field(default_factory=list)


def _entry_order(ds, chosen):
    chosen = set(chosen)
    return tuple(f for f in ds.formulas if f in chosen)


def make_profile(game, part1, part2):
    """Normalize two formula collections into entry-ordered profile parts."""
    return StrategyProfile(_entry_order(game.player1, part1),
                           _entry_order(game.player2, part2))


def is_compatible(game, profile, backend="auto"):
    """A profile is compatible when both parts keep every shared demand and
    their union is consistent."""
    parts = (set(profile.part1), set(profile.part2))
    if any(f not in side for f in game.common for side in parts):
        return False
    return is_satisfiable(profile.part1 + profile.part2,
                          universe=game.universe, backend=backend)


def deal_witness(game, profile, backend="auto"):
    """None if the profile is a deal, else a sentence naming the first broken
    requirement (who, which level, which formula)."""
    sets = (game.player1, game.player2)
    parts = (set(profile.part1), set(profile.part2))
    for i in (0, 1):
        for f in profile.parts()[i]:
            if f not in sets[i]:
                return "player %d keeps %s, which is not among their demands" % (
                    i + 1, format_formula(f))
    for f in game.common:
        for i in (0, 1):
            if f not in parts[i]:
                return "player %d drops the shared demand %s" % (i + 1, format_formula(f))
    joint_ok = is_compatible(game, profile, backend=backend)
    for i in (0, 1):
        ds, own = sets[i], parts[i]
        opp = profile.parts()[1 - i]
        ctx = SatContext(opp, game.universe, backend=backend)
        prefix = []
        for k in range(1, ds.depth + 1):
            level = ds.level(k)
            prefix.extend(f for f in level if f in own)
            ctx = SatContext(opp + tuple(prefix), game.universe, backend=backend)
            if not joint_ok and not ctx.sat_with():
                return ("player %d's demands through level %d conflict with the"
                        " other side's part" % (i + 1, k))
            for f in level:
                if f not in own and ctx.sat_with((f,)):
                    return ("player %d's part is not greedy at level %d: %s could"
                            " still be kept" % (i + 1, k, format_formula(f)))
    if not joint_ok:
        # unreachable: the last per-level check above covers the full parts
        return "the two parts are jointly inconsistent"
    return None


def is_deal(game, profile, backend="auto"):
    return deal_witness(game, profile, backend=backend) is None


# ---------------------------------------------------------------------------
# pi-max, core, best deals, solution


def _cut_union(game, k):
    extra = [f for f in game.common
             if f not in set(game.player1.cut(k)) and f not in set(game.player2.cut(k))]
    return game.player1.cut(k) + game.player2.cut(k) + tuple(extra)


def pi_max(game, backend="auto", binary_search=False):
    """Deepest level k such that both cuts at k, together with the shared
    demands, are satisfiable; INFINITE when the full demand sets agree."""
    depth = max(game.player1.depth, game.player2.depth)

    def ok(k):
        return is_satisfiable(_cut_union(game, k), universe=game.universe, backend=backend)

    if binary_search:
        lo, hi = 0, depth  # ok(0) holds: each demand set is consistent on its own
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if ok(mid):
                lo = mid
            else:
                hi = mid - 1
        return INFINITE if lo == depth else lo
    for k in range(1, depth + 1):
        if not ok(k):
            return k - 1
    return INFINITE


def core(game, backend="auto", binary_search=False):
    pi = pi_max(game, backend=backend, binary_search=binary_search)
    if pi is INFINITE:
        prof = StrategyProfile(game.player1.formulas, game.player2.formulas)
    else:
        prof = StrategyProfile(game.player1.cut(pi), game.player2.cut(pi))
    return CoreResult(pi, prof)


def _resolve_cap(cap):
    if cap is None:
        try:
            return int(os.environ.get("BARGAIN_ENUM_CAP", DEFAULT_ENUM_CAP))
        except ValueError:
            return DEFAULT_ENUM_CAP
    return cap


def enumerate_deals(game, backend="auto", strategy="auto", enumeration_cap=None,
                    best_only=False):
    """All deals of the game (or only those containing the core), in ascending
    inclusion-mask order, player 1 major."""
    cap = _resolve_cap(enumeration_cap)
    if strategy == "auto":
        strategy = "brute" if game.free_count <= cap else "frontier"
    if strategy == "brute":
        if game.free_count > cap:
            raise EnumerationCapError(
                "%d free demands exceed the enumeration cap %d; raise"
                " BARGAIN_ENUM_CAP, pass a bigger cap, or use the frontier"
                " strategy" % (game.free_count, cap))
        deals = _brute_deals(game, backend=backend)
        if best_only:
            cr = core(game, backend=backend)
            deals = [d for d in deals if _contains(d, cr.profile)]
        return deals
    if strategy == "frontier":
        return _frontier_deals(game, best_only=best_only, backend=backend)
    raise ValueError("unknown enumeration strategy %r" % strategy)


def _contains(profile, inner):
    return (set(profile.part1) >= set(inner.part1)
            and set(profile.part2) >= set(inner.part2))


def best_deals(game, deals=None, backend="auto", strategy="auto", enumeration_cap=None):
    """Deals containing the core, componentwise."""
    if deals is not None:
        cr = core(game, backend=backend)
        return [d for d in deals if _contains(d, cr.profile)]
    return enumerate_deals(game, backend=backend, strategy=strategy,
                           enumeration_cap=enumeration_cap, best_only=True)


def _sort_key(game, profile):
    def mask(ds, part):
        chosen = set(part)
        m = 0
        for i, (f, _) in enumerate(ds.entries):
            if f in chosen:
                m |= 1 << i
        return m
    return (mask(game.player1, profile.part1), mask(game.player2, profile.part2))


# ---------------------------------------------------------------------------
# Brute enumeration


def _brute_deals(game, backend="auto"):
    u = game.universe
    use_table = u.size <= DEFAULT_TABLE_CAP and backend in ("auto", "table")
    # the mask table per player holds 2^n integers of 2^|universe| bits each;
    # keep that well under ~16MB before choosing the fast path
    biggest = max(len(game.player1), len(game.player2))
    if use_table and biggest + u.size <= 24:
        return _brute_deals_masks(game)
    out = []
    e1, e2 = game.player1.entries, game.player2.entries
    req1 = _required_mask(game.player1, game.common)
    req2 = _required_mask(game.player2, game.common)
    for m1 in range(1 << len(e1)):
        if m1 & req1 != req1:
            continue
        part1 = tuple(f for i, (f, _) in enumerate(e1) if m1 >> i & 1)
        for m2 in range(1 << len(e2)):
            if m2 & req2 != req2:
                continue
            part2 = tuple(f for i, (f, _) in enumerate(e2) if m2 >> i & 1)
            prof = StrategyProfile(part1, part2)
            if deal_witness(game, prof, backend=backend) is None:
                out.append(prof)
    return out


def _required_mask(ds, common):
    cs = set(common)
    m = 0
    for i, (f, _) in enumerate(ds.entries):
        if f in cs:
            m |= 1 << i
    return m


def _brute_deals_masks(game):
    """Bitmask sweep: world masks make every deal condition an integer test."""
    u = game.universe
    players = []
    for ds in game.demand_sets():
        ents = ds.entries
        fmask = [formula_mask(f, u) for f, _ in ents]
        depth = ds.depth
        lvl_le = [0] * (depth + 1)
        for i, (_, lv) in enumerate(ents):
            for k in range(lv, depth + 1):
                lvl_le[k] |= 1 << i
        # worlds[m] = worlds jointly allowed by the formulas selected in m
        full = (1 << (1 << u.size)) - 1
        worlds = [full] * (1 << len(ents))
        for m in range(1, 1 << len(ents)):
            low = m & -m
            worlds[m] = worlds[m ^ low] & fmask[low.bit_length() - 1]
        players.append((ents, fmask, lvl_le, worlds, _required_mask(ds, game.common)))

    (e1, fm1, le1, w1, req1), (e2, fm2, le2, w2, req2) = players
    n1, n2 = len(e1), len(e2)
    out = []
    for m1 in range(1 << n1):
        if m1 & req1 != req1 or w1[m1] == 0:
            continue
        for m2 in range(1 << n2):
            if m2 & req2 != req2:
                continue
            jw = w1[m1] & w2[m2]
            if jw == 0:
                continue
            # necessary greediness screen: an excluded demand that survives the
            # full joint worlds would survive its level prefix too
            ok = True
            for i in range(n1):
                if not (m1 >> i & 1) and jw & fm1[i]:
                    ok = False
                    break
            if ok:
                for i in range(n2):
                    if not (m2 >> i & 1) and jw & fm2[i]:
                        ok = False
                        break
            if not ok:
                continue
            # exact per-level greediness; per-level compatibility is implied
            # by jw != 0 since every prefix's worlds contain jw
            if _mask_greedy(e1, fm1, le1, w1, m1, w2[m2]) and \
               _mask_greedy(e2, fm2, le2, w2, m2, w1[m1]):
                out.append((m1, m2))
    return [_profile_from_masks(game, m1, m2) for m1, m2 in out]


def _mask_greedy(ents, fmask, lvl_le, worlds, m, opp_worlds):
    for i, (_, lv) in enumerate(ents):
        if m >> i & 1:
            continue
        pw = worlds[m & lvl_le[lv]] & opp_worlds
        if pw & fmask[i]:
            return False
    return True


def _profile_from_masks(game, m1, m2):
    p1 = tuple(f for i, (f, _) in enumerate(game.player1.entries) if m1 >> i & 1)
    p2 = tuple(f for i, (f, _) in enumerate(game.player2.entries) if m2 >> i & 1)
    return StrategyProfile(p1, p2)


# ---------------------------------------------------------------------------
# Frontier enumeration


def _frontier_deals(game, best_only, backend="auto"):
    u = game.universe
    X1, X2 = game.player1, game.player2
    common = game.common
    common_set = set(common)
    pi = pi_max(game, backend=backend)
    if pi is INFINITE:
        return [StrategyProfile(X1.formulas, X2.formulas)]

    if best_only:
        seed = list(X1.cut(pi))
        base2 = common + tuple(f for f in X2.cut(pi) if f not in common_set)
        start_level = pi
    else:
        seed = []
        base2 = common
        start_level = 0
    base2_set = set(base2)
    opp_free = tuple(f for f in X2.formulas if f not in base2_set)
    levels1 = X1.levels()

    fam_memo = {}
    kill_memo = {}
    ctx_memo = {}

    def ctx_for(formulas_frozen):
        got = ctx_memo.get(formulas_frozen)
        if got is None:
            ds_order = tuple(f for f in X1.formulas if f in formulas_frozen)
            got = SatContext(base2 + ds_order, u, backend=backend)
            ctx_memo[formulas_frozen] = got
        return got

    def families_for(prefix_frozen):
        got = fam_memo.get(prefix_frozen)
        if got is None:
            sctx = ctx_for(prefix_frozen)
            memo = {}

            def sat(t):
                key = frozenset(t)
                v = memo.get(key)
                if v is None:
                    v = sctx.sat_with(t)
                    memo[key] = v
                return v

            got = maximal_satisfiable_subsets(opp_free, sat)
            fam_memo[prefix_frozen] = got
        return got

    def exclusions_killable(prefix_frozen, exclusions):
        fams = families_for(prefix_frozen)
        for x, snap in exclusions:
            key = (x, snap, prefix_frozen)
            got = kill_memo.get(key)
            if got is None:
                sctx = ctx_for(snap)
                got = any(not sctx.sat_with((x,) + tuple(t)) for t in fams)
                kill_memo[key] = got
            if not got:
                return False
        return True

    candidates = []

    def walk(li, pset, exclusions):
        if li == len(levels1):
            candidates.append(pset)
            return
        items = tuple(reversed(levels1[li]))

        def choose(j, pset, new_excl):
            if j == len(items):
                snapped = exclusions + [(x, pset) for x in new_excl]
                if not snapped or exclusions_killable(pset, snapped):
                    walk(li + 1, pset, snapped)
                return
            x = items[j]
            sctx = ctx_for(pset)
            if sctx.sat_with((x,)):
                choose(j + 1, pset | {x}, new_excl)
            if sctx.sat_with((Not(x),)):  # else x is forced in; skipping it is dead
                choose(j + 1, pset, new_excl + [x])

        choose(0, pset, [])

    walk(start_level, frozenset(seed), [])

    cr_profile = None
    if best_only:
        cr_profile = StrategyProfile(X1.cut(pi), X2.cut(pi))
    out = []
    seen = set()
    for d1 in candidates:
        d1_t = _entry_order(X1, d1)
        sctx1 = SatContext(d1_t, u, backend=backend)
        memo = {}

        def sat2(t, _sctx=sctx1, _memo=memo):
            key = frozenset(t)
            v = _memo.get(key)
            if v is None:
                v = _sctx.sat_with(t)
                _memo[key] = v
            return v

        for d2 in levelwise_maximal_families(X2.levels(), sat2):
            pair = (d1, d2)
            if pair in seen:
                continue
            seen.add(pair)
            prof = StrategyProfile(d1_t, _entry_order(X2, d2))
            if best_only and not _contains(prof, cr_profile):
                continue
            if deal_witness(game, prof, backend=backend) is None:
                out.append(prof)
    out.sort(key=lambda p: _sort_key(game, p))
    return out


# ---------------------------------------------------------------------------
# Solution


def solution_from_best(game, gamma):
    inter1 = set(game.player1.formulas)
    inter2 = set(game.player2.formulas)
    for d in gamma:
        inter1 &= set(d.part1)
        inter2 &= set(d.part2)
    if not gamma:
        inter1, inter2 = set(), set()
    return make_profile(game, inter1, inter2)


def solve(game, include_deals=False, backend="auto", strategy="auto",
          enumeration_cap=None, binary_search=False):
    cap = _resolve_cap(enumeration_cap)
    if strategy == "auto":
        strategy = "brute" if game.free_count <= cap else "frontier"
    pi = pi_max(game, backend=backend, binary_search=binary_search)
    cr = core(game, backend=backend, binary_search=binary_search)
    warnings = []
    deals = None
    if strategy == "brute":
        deals = enumerate_deals(game, backend=backend, strategy="brute",
                                enumeration_cap=cap)
        gamma = [d for d in deals if _contains(d, cr.profile)]
        if not include_deals:
            deals = None
    else:
        gamma = enumerate_deals(game, backend=backend, strategy="frontier",
                                best_only=True)
        if include_deals:
            deals = enumerate_deals(game, backend=backend, strategy="frontier")

    if not gamma:
        raise SolverError("no deal contains the core; this should be impossible")
    sol = solution_from_best(game, gamma)
    if not is_satisfiable(sol.part1 + sol.part2, universe=game.universe, backend=backend):
        raise SolverError("solution parts are jointly inconsistent")
    if not _contains(sol, cr.profile):
        raise SolverError("solution lost part of the core")

    if pi == 0:
        warnings.append("no priority level is jointly satisfiable: the core is"
                        " empty and every deal counts as a best deal")
    if pi is INFINITE:
        warnings.append("the demand sets are jointly consistent: the unique"
                        " deal keeps every demand")
    if len(gamma) > 1 and deal_witness(game, sol, backend=backend) is not None:
        warnings.append("the solution intersects %d best deals and is not itself"
                        " a deal (cautious prediction)" % len(gamma))
    if not sol.part1 and not sol.part2:
        warnings.append("empty agreement: the bargaining ends in disagreement")

    utils = (utility(game.player1, sol.part1), utility(game.player2, sol.part2))
    return SolutionReport(game=game, pi_max=pi, core=cr.profile, deals=deals,
                          best_deals=gamma, solution=sol, utilities=utils,
                          strategy=strategy, warnings=warnings)


# ---------------------------------------------------------------------------
# Utilities, Pareto, subgames


def utility(ds, kept):
    """Deepest level whose cut the kept set still contains (0 when even the
    first level was given up; the full depth when everything was kept)."""
    kept = set(kept)
    u = 0
    for k in range(1, ds.depth + 1):
        if set(ds.level(k)) <= kept:
            u = k
        else:
            break
    return u


def utilities(game, profile):
    return (utility(game.player1, profile.part1),
            utility(game.player2, profile.part2))


def is_weakly_pareto(game, profile, backend="auto"):
    """No other deal strictly improves both utilities.

    Utilities are cut-shaped: improving on u means containing the cut at u+1,
    so a strict joint improvement exists exactly when both next cuts (plus the
    shared demands) are jointly satisfiable. A player already at maximum
    utility cannot improve at all.
    """
    u1, u2 = utilities(game, profile)
    if u1 >= game.player1.depth or u2 >= game.player2.depth:
        return True
    extra = [f for f in game.common
             if f not in set(game.player1.cut(u1 + 1))
             and f not in set(game.player2.cut(u2 + 1))]
    return not is_satisfiable(
        game.player1.cut(u1 + 1) + game.player2.cut(u2 + 1) + tuple(extra),
        universe=game.universe, backend=backend)


def subgame(game, k1, k2):
    """The game induced by the top k1 levels of player 1 and top k2 of player 2."""
    subs = []
    for ds, k in ((game.player1, k1), (game.player2, k2)):
        ranked = [(f, lv) for f, lv in ds.entries if lv <= k]
        subs.append(build_hierarchy(ranked, name=ds.name, require_consistent=False))
    return BargainingGame(subs[0], subs[1], game.universe)


def is_subgame(candidate, game):
    """candidate arises from game by cutting each player's hierarchy at some
    level: subset, order preserved, and no gaps above any kept demand."""
    for small, big in zip(candidate.demand_sets(), game.demand_sets()):
        big_levels = {f: lv for f, lv in big.entries}
        for f, _ in small.entries:
            if f not in big_levels:
                return False
        pairs = [(f, lv) for f, lv in small.entries]
        for f, lf in pairs:
            for g, lg in pairs:
                if (lf < lg) != (big_levels[f] < big_levels[g]) and f != g:
                    return False
        if small.entries:
            deepest = max(big_levels[f] for f, _ in small.entries)
            kept = {f for f, _ in small.entries}
            for g, lg in big.entries:
                if lg <= deepest and g not in kept:
                    return False
    return True


def check_contraction_independence(game, cut_levels, backend="auto"):
    """Cut both hierarchies; report (premise, agrees): premise = the full
    game's solution already lives inside the cut sets; agrees = the cut game
    solves to the same solution."""
    k1, k2 = cut_levels
    sub = subgame(game, k1, k2)
    full = solve(game, backend=backend)
    premise = (set(full.solution.part1) <= set(sub.player1.formulas)
               and set(full.solution.part2) <= set(sub.player2.formulas))
    small = solve(sub, backend=backend)
    agrees = (set(small.solution.part1) == set(full.solution.part1)
              and set(small.solution.part2) == set(full.solution.part2))
    return premise, agrees


# ---------------------------------------------------------------------------
# Cake generator


CAKE_A_BOUNDARIES = tuple(range(5, 101, 5))
CAKE_B_BOUNDARIES = (79, 70, 63, 57, 52, 47, 42, 38, 34, 31, 27, 24, 21, 18,
                     15, 12, 9, 7, 4, 2, 1)


def gen_cake(a_boundaries=None, b_boundaries=None):
    """Game text for a 101-slice cake split.

    Atoms p0..p101; pN reads "player A receives at least N slices". Both
    players share the monotonicity chain pN+1 -> pN at their top level. A
    demands p0..p100, blocked by `a_boundaries` (ascending block maxima ending
    at 100 — default: equal blocks of five, a linear stance). B demands
    !p101..!p1, blocked by `b_boundaries` (descending block minima ending at
    1 — default: blocks that shrink quadratically toward the middle, an
    aggressive stance that ranks near-total denial barely above an even split).
    """
    a_bounds = tuple(a_boundaries) if a_boundaries is not None else CAKE_A_BOUNDARIES
    b_bounds = tuple(b_boundaries) if b_boundaries is not None else CAKE_B_BOUNDARIES
    if not a_bounds or list(a_bounds) != sorted(set(a_bounds)) or \
            a_bounds[-1] != 100 or a_bounds[0] < 1:
        raise ValueError("a-boundaries must be strictly increasing in 1..100 and end at 100")
    if not b_bounds or list(b_bounds) != sorted(set(b_bounds), reverse=True) or \
            b_bounds[-1] != 1 or b_bounds[0] > 101:
        raise ValueError("b-boundaries must be strictly decreasing in 1..101 and end at 1")

    def a_block(n):
        for j, b in enumerate(a_bounds):
            if n <= b:
                return j + 1
        raise AssertionError

    def b_block(n):
        j = sum(1 for b in b_bounds if b > n)
        return j + 1

    chain = ["p%d -> p%d" % (n + 1, n) for n in range(101)]
    lines = []
    w = lines.append
    w("# Cake split over 101 slices: pN means player A receives at least N.")
    w("# Player A ranks shares linearly; player B by the square of the share.")
    w('note "the middle priority blocks of both rankings follow an assumed'
      ' interpolation (A: even steps of five, B: a square-of-share scale);'
      ' the agreement window depends on that fill";')
    w('note "the agreement bounds player A\'s share from below and player B\'s'
      ' from above; the exact division inside that window stays open";')
    w("vars %s;" % ", ".join("p%d" % n for n in range(102)))
    w("")
    for player, want, blocks in (
        ("A", ["p%d" % n for n in range(101)],
         [a_block(n) for n in range(101)]),
        ("B", ["!p%d" % n for n in range(101, 0, -1)],
         [b_block(n) for n in range(101, 0, -1)]),
    ):
        w("player %s {" % player)
        w("  level {  # shared: more slices always includes fewer")
        for i in range(0, len(chain), 6):
            w("    " + " ".join(c + ";" for c in chain[i:i + 6]))
        w("  }")
        depth = max(blocks)
        for lv in range(1, depth + 1):
            members = [want[i] for i in range(len(want)) if blocks[i] == lv]
            w("  level { %s }" % " ".join(m + ";" for m in members))
        w("}")
        w("")
    return "\n".join(lines)
