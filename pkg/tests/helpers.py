"""Seeded random-instance generators and brute-force reference
implementations shared by the test suite.

The reference implementations here deliberately avoid every fast path they
are meant to double-check: deals are found by filtering the full subset
lattice, gain indices by scanning cut inclusions, dominance by enumerating
whole strategy profiles. Keep them dumb.
"""

import itertools
import subprocess
import sys
from pathlib import Path

from bargain import (
    And,
    Atom,
    BargainingGame,
    ClosedGame,
    Iff,
    Implies,
    Not,
    Or,
    VariableUniverse,
    build_hierarchy,
    validate_lc,
)
from bargain.logic import formula_mask

REPO_ROOT = Path(__file__).resolve().parent.parent
GAMES = REPO_ROOT / "games"
GOLDENS = Path(__file__).resolve().parent / "goldens"

NAMES = tuple("abcdefgh")


def run_cli(*args, cwd=REPO_ROOT):
    return subprocess.run([sys.executable, "-m", "bargain.cli", *args],
                          capture_output=True, text=True, cwd=str(cwd))


# ---------------------------------------------------------------- generators

def rand_formula(rng, names, depth):
    if depth <= 0 or rng.random() < 0.35:
        return Atom(rng.choice(names))
    kind = rng.random()
    if kind < 0.22:
        return Not(rand_formula(rng, names, depth - 1))
    a = rand_formula(rng, names, depth - 1)
    b = rand_formula(rng, names, depth - 1)
    if kind < 0.55:
        return And(a, b)
    if kind < 0.82:
        return Or(a, b)
    if kind < 0.93:
        return Implies(a, b)
    return Iff(a, b)


def full_mask(universe):
    return (1 << (1 << universe.size)) - 1


def mask_of(formulas, universe):
    m = full_mask(universe)
    for f in formulas:
        m &= formula_mask(f, universe)
    return m


def rand_entries(rng, names, universe, n, pool=()):
    """Up to n distinct formulas forming a consistent set; `pool` is forced in."""
    chosen = list(pool)
    seen = set(chosen)
    guard = 0
    while len(chosen) < n and guard < 300:
        guard += 1
        f = rand_formula(rng, names, rng.randint(0, 2))
        if f in seen:
            continue
        if mask_of(chosen + [f], universe) == 0:
            continue
        chosen.append(f)
        seen.add(f)
    return chosen


def lc_ranked(rng, formulas, universe, max_rank=4):
    """Random ranks, then repaired until the ranking is logically coherent:
    any formula entailed by the levels above it gets pulled up one level."""
    ranked = [(f, rng.randint(1, max_rank)) for f in formulas]
    while True:
        ds = build_hierarchy(ranked, require_consistent=False)
        viols = [v for v in validate_lc(ds) if v.kind == "upper-cut-entails"]
        if not viols:
            assert not validate_lc(ds)
            return list(ds.entries)
        bad = viols[0]
        ranked = [(f, bad.level - 1 if f == bad.formula else lv)
                  for f, lv in ds.entries]


def rand_game(rng, max_atoms=6, max_formulas=8, shared=2, conflict=0.7):
    n_atoms = rng.randint(2, max_atoms)
    names = NAMES[:n_atoms]
    universe = VariableUniverse(tuple(names))
    common = rand_entries(rng, names, universe, rng.randint(0, shared))
    x1 = rand_entries(rng, names, universe,
                      rng.randint(max(1, len(common)), max_formulas), pool=common)
    x2 = rand_entries(rng, names, universe,
                      rng.randint(max(1, len(common)), max_formulas), pool=common)
    if rng.random() < conflict:
        frees = [f for f in x1 if f not in x2]
        if frees:
            g = Not(rng.choice(frees))
            if g not in x2 and g not in x1 and mask_of(x2 + [g], universe):
                x2 = x2 + [g]
    ds1 = build_hierarchy(lc_ranked(rng, x1, universe), name="player 1")
    ds2 = build_hierarchy(lc_ranked(rng, x2, universe), name="player 2")
    return BargainingGame.of(ds1, ds2, universe)


def rand_closed_game(rng, n_atoms=3):
    names = NAMES[:n_atoms]
    universe = VariableUniverse(tuple(names))
    while True:
        x1 = rand_entries(rng, names, universe, rng.randint(1, 4))
        x2 = rand_entries(rng, names, universe, rng.randint(1, 4))
        if not x1 or not x2:
            continue
        ds1 = build_hierarchy([(f, rng.randint(1, 3)) for f in x1])
        ds2 = build_hierarchy([(f, rng.randint(1, 3)) for f in x2])
        return ClosedGame.from_hierarchies(ds1, ds2, universe)


# ------------------------------------------------------------------- oracles

def _level_lists(ds):
    return [tuple(ds.level(k)) for k in range(1, ds.depth + 1)]


def oracle_deals(game):
    """All deals straight from the definition: try every subset pair holding
    the shared demands, and keep a pair iff on each side, level by level, the
    kept slice of the level is a maximal slice whose union with the levels
    above it and the opponent's whole part stays consistent. Returns a set of
    (frozenset, frozenset) pairs."""
    u = game.universe
    common = frozenset(game.common)
    masks = {}
    for ds in game.demand_sets():
        for f in ds.formulas:
            masks[f] = formula_mask(f, u)
    full = full_mask(u)
    levels = (_level_lists(game.player1), _level_lists(game.player2))
    free = tuple([f for f in ds.formulas if f not in common]
                 for ds in game.demand_sets())

    def and_mask(fs):
        m = full
        for f in fs:
            m &= masks[f]
        return m

    def candidates(i):
        out = []
        for take in itertools.chain.from_iterable(
                itertools.combinations(free[i], r) for r in range(len(free[i]) + 1)):
            d = common | frozenset(take)
            out.append((d, and_mask(d)))
        return out

    def greedy_ok(own, own_levels, opp_mask):
        pm = full
        for level in own_levels:
            for f in level:
                if f in own:
                    pm &= masks[f]
            if pm & opp_mask == 0:
                return False
            for x in level:
                if x not in own and pm & masks[x] & opp_mask:
                    return False
        return True

    return {(d1, d2)
            for d1, m1 in candidates(0)
            for d2, m2 in candidates(1)
            if greedy_ok(d1, levels[0], m2) and greedy_ok(d2, levels[1], m1)}


def gain_index(game, profile):
    """Largest k whose top-k cuts both fit inside the profile."""
    d1, d2 = set(profile.part1), set(profile.part2)
    depth = max(game.player1.depth, game.player2.depth)
    best = 0
    for k in range(1, depth + 1):
        if (set(game.player1.cut(k)) <= d1 and set(game.player2.cut(k)) <= d2):
            best = k
        else:
            break
    return best


def profile_table(ds, universe, force=frozenset()):
    """(kept-set mask, utility) for every subset of one player's demands
    containing `force`."""
    fs = list(ds.formulas)
    masks = [formula_mask(f, universe) for f in fs]
    lv = [ds.rank_of(f) for f in fs]
    forced = [i for i, f in enumerate(fs) if f in force]
    full = full_mask(universe)
    want = [0] * (ds.depth + 1)
    for f in fs:
        want[ds.rank_of(f)] += 1
    out = []
    for bits in range(1 << len(fs)):
        if any(not bits >> i & 1 for i in forced):
            continue
        m = full
        kept_levels = [0] * (ds.depth + 1)
        for i in range(len(fs)):
            if bits >> i & 1:
                m &= masks[i]
                kept_levels[lv[i]] += 1
        u = 0
        for k in range(1, ds.depth + 1):
            if kept_levels[k] == want[k]:
                u = k
            else:
                break
        out.append((m, u))
    return out


def oracle_dominates(game, base_utils):
    """True iff some compatible profile (shared demands kept on both sides,
    union satisfiable) strictly beats base_utils on both sides, checked over
    the whole profile lattice."""
    common = frozenset(game.common)
    t1 = profile_table(game.player1, game.universe, force=common)
    t2 = profile_table(game.player2, game.universe, force=common)
    u1b, u2b = base_utils
    best2 = [m for m, u in t2 if u > u2b]
    for m1, u1 in t1:
        if u1 <= u1b:
            continue
        for m2 in best2:
            if m1 & m2:
                return True
    return False
