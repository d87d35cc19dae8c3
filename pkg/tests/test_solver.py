import math
import random

import pytest

from bargain import (
    BargainingGame,
    EnumerationCapError,
    INFINITE,
    best_deals,
    build_hierarchy,
    check_contraction_independence,
    core,
    deal_witness,
    enumerate_deals,
    gen_cake,
    is_compatible,
    is_deal,
    is_subgame,
    is_weakly_pareto,
    make_profile,
    parse_formula,
    pi_max,
    solve,
    subgame,
    utilities,
    utility,
)
from helpers import gain_index, oracle_deals, oracle_dominates, rand_game


def couple_game():
    rules = [parse_formula("!(d & o)"), parse_formula("c & o -> l")]
    c, d, o, l, k = (parse_formula(x) for x in "cdolk")
    not_l = parse_formula("!l")
    ds1 = build_hierarchy([(rules[0], 1), (rules[1], 1), (c, 2), (d, 3)])
    ds2 = build_hierarchy([(rules[0], 1), (rules[1], 1), (o, 2), (k, 3), (not_l, 4)])
    return BargainingGame.of(ds1, ds2), (rules, c, d, o, l, k, not_l)


def test_couple_deals_exact_and_ordered():
    g, (rules, c, d, o, l, k, not_l) = couple_game()
    assert g.common == tuple(rules)
    assert g.free_count == 5
    deals = enumerate_deals(g)
    as_sets = [(set(p.part1), set(p.part2)) for p in deals]
    D3 = (set(rules), set(rules) | {o, k, not_l})
    D2 = (set(rules) | {c}, set(rules) | {o, k})
    D1 = (set(rules) | {c, d}, set(rules) | {k, not_l})
    assert as_sets == [D3, D2, D1]
    for p in deals:
        assert deal_witness(g, p) is None
        assert is_deal(g, p)


def test_couple_core_best_and_solution():
    g, (rules, c, d, o, l, k, not_l) = couple_game()
    assert pi_max(g) == 2
    cr = core(g)
    assert set(cr.profile.part1) == set(rules) | {c}
    assert set(cr.profile.part2) == set(rules) | {o}
    best = best_deals(g)
    assert len(best) == 1
    report = solve(g)
    assert set(report.solution.part1) == set(rules) | {c}
    assert set(report.solution.part2) == set(rules) | {o, k}
    assert report.utilities == (2, 3)
    assert report.warnings == []


def test_witness_explains_broken_profiles():
    g, (rules, c, d, o, l, k, not_l) = couple_game()
    # dropping a shared demand
    w = deal_witness(g, make_profile(g, (rules[0], c), tuple(rules)))
    assert "shared demand" in w
    # keeping something that is not a demand (raw profile: make_profile
    # would filter the stranger out)
    from bargain import StrategyProfile
    w = deal_witness(g, StrategyProfile(tuple(rules) + (parse_formula("z"),),
                                        tuple(rules)))
    assert "not among their demands" in w
    # not greedy: both sides could keep more
    w = deal_witness(g, make_profile(g, tuple(rules), tuple(rules)))
    assert "could still be kept" in w


def test_compatibility():
    g, (rules, c, d, o, l, k, not_l) = couple_game()
    both = tuple(rules)
    assert is_compatible(g, make_profile(g, both + (c,), both + (o,)))
    # shared demands must be kept on both sides
    assert not is_compatible(g, make_profile(g, (c, d), (k,)))
    # and the union must stay satisfiable
    assert not is_compatible(g, make_profile(g, both + (d,), both + (o,)))


def test_jointly_consistent_game_has_unique_deal():
    ds1 = build_hierarchy([(parse_formula("p"), 1), (parse_formula("q"), 2)])
    ds2 = build_hierarchy([(parse_formula("q"), 1), (parse_formula("r"), 2)])
    g = BargainingGame.of(ds1, ds2)
    assert pi_max(g) == INFINITE
    assert math.isinf(pi_max(g))
    deals = enumerate_deals(g)
    assert len(deals) == 1
    assert set(deals[0].part1) == set(ds1.formulas)
    report = solve(g)
    assert report.utilities == (2, 2)
    assert any("every demand" in w or "consistent" in w for w in report.warnings)


def test_totally_conflicting_game_reaches_level_zero():
    ds1 = build_hierarchy([(parse_formula("p"), 1), (parse_formula("q"), 1)])
    ds2 = build_hierarchy([(parse_formula("!p"), 1), (parse_formula("r"), 1)])
    g = BargainingGame.of(ds1, ds2)
    assert pi_max(g) == 0
    cr = core(g)
    assert cr.profile.part1 == () and cr.profile.part2 == ()
    report = solve(g)
    assert set(report.solution.part1) == {parse_formula("q")}
    assert set(report.solution.part2) == {parse_formula("r")}
    assert any("no level" in w or "level" in w for w in report.warnings)


def test_empty_solution_warns_of_disagreement():
    ds1 = build_hierarchy([(parse_formula("p & q"), 1)])
    ds2 = build_hierarchy([(parse_formula("!p & r"), 1)])
    g = BargainingGame.of(ds1, ds2)
    report = solve(g)
    assert report.solution.part1 == () and report.solution.part2 == ()
    assert report.utilities == (0, 0)
    assert any("disagreement" in w for w in report.warnings)


def test_solution_may_be_smaller_than_every_deal():
    ds1 = build_hierarchy([(parse_formula("p"), 1), (parse_formula("r"), 2)])
    ds2 = build_hierarchy([(parse_formula("q"), 1), (parse_formula("!r"), 2)])
    g = BargainingGame.of(ds1, ds2)
    report = solve(g)
    assert set(report.solution.part1) == {parse_formula("p")}
    assert set(report.solution.part2) == {parse_formula("q")}
    assert len(report.best_deals) == 2
    assert any("not itself a deal" in w for w in report.warnings)


def test_enumeration_matches_oracle(rng):
    for _ in range(120):
        g = rand_game(rng, max_atoms=5, max_formulas=6)
        got = {(frozenset(p.part1), frozenset(p.part2)) for p in enumerate_deals(g)}
        assert got == oracle_deals(g)


def test_brute_and_frontier_agree(rng):
    for _ in range(80):
        g = rand_game(rng, max_atoms=5, max_formulas=7)
        brute = enumerate_deals(g, strategy="brute")
        frontier = enumerate_deals(g, strategy="frontier")
        key = lambda p: (frozenset(p.part1), frozenset(p.part2))
        assert {key(p) for p in brute} == {key(p) for p in frontier}
        bb = best_deals(g, deals=brute)
        fb = enumerate_deals(g, strategy="frontier", best_only=True)
        assert {key(p) for p in bb} == {key(p) for p in fb}


def test_best_deals_contain_the_core(rng):
    for _ in range(60):
        g = rand_game(rng, max_atoms=5, max_formulas=6)
        cr = core(g)
        for p in best_deals(g):
            assert set(p.part1) >= set(cr.profile.part1)
            assert set(p.part2) >= set(cr.profile.part2)


def test_solution_is_intersection_of_best_deals(rng):
    for _ in range(60):
        g = rand_game(rng, max_atoms=5, max_formulas=6)
        report = solve(g, include_deals=True)
        best = report.best_deals
        inter1 = set.intersection(*(set(p.part1) for p in best))
        inter2 = set.intersection(*(set(p.part2) for p in best))
        assert set(report.solution.part1) == inter1
        assert set(report.solution.part2) == inter2
        assert report.deals is not None


def test_pi_max_binary_search_agrees(rng):
    for _ in range(120):
        g = rand_game(rng, max_atoms=5, max_formulas=7)
        assert pi_max(g) == pi_max(g, binary_search=True)


def test_pi_max_equals_best_gain_over_deals(rng):
    for _ in range(60):
        g = rand_game(rng, max_atoms=5, max_formulas=6)
        p = pi_max(g)
        deals = enumerate_deals(g)
        if p == INFINITE:
            assert len(deals) == 1
        else:
            assert p == max(gain_index(g, d) for d in deals)


def test_enumeration_cap():
    g = rand_game(random.Random(3), max_atoms=6, max_formulas=12, shared=0)
    assert g.free_count > 8
    with pytest.raises(EnumerationCapError):
        enumerate_deals(g, strategy="brute", enumeration_cap=8)
    # auto falls back to the frontier strategy instead of raising
    key = lambda p: (frozenset(p.part1), frozenset(p.part2))
    auto = enumerate_deals(g, enumeration_cap=8)
    brute = enumerate_deals(g, strategy="brute")
    assert {key(p) for p in auto} == {key(p) for p in brute}


def test_utility_counts_unbroken_top_levels():
    ds = build_hierarchy([(parse_formula("p"), 1), (parse_formula("q"), 2),
                          (parse_formula("r"), 3)])
    assert utility(ds, ds.formulas) == 3
    assert utility(ds, (parse_formula("p"), parse_formula("q"))) == 2
    # a gap stops the count even if deeper levels are kept
    assert utility(ds, (parse_formula("p"), parse_formula("r"))) == 1
    assert utility(ds, ()) == 0


def test_weak_pareto_flags_dominated_profiles():
    g, (rules, c, d, o, l, k, not_l) = couple_game()
    report = solve(g)
    assert is_weakly_pareto(g, report.solution)
    assert not is_weakly_pareto(g, make_profile(g, (), ()))


def test_weak_pareto_matches_profile_enumeration(rng):
    for _ in range(40):
        g = rand_game(rng, max_atoms=4, max_formulas=5)
        report = solve(g)
        fast = is_weakly_pareto(g, report.solution)
        brute = not oracle_dominates(g, report.utilities)
        assert fast == brute


def test_subgame_keeps_upper_cuts():
    g, (rules, c, d, o, l, k, not_l) = couple_game()
    sub = subgame(g, 2, 3)
    assert set(sub.player1.formulas) == set(rules) | {c}
    assert set(sub.player2.formulas) == set(rules) | {o, k}
    assert sub.player1.depth == 2 and sub.player2.depth == 3
    assert is_subgame(sub, g)
    assert is_subgame(g, g)
    # dropping a top level while keeping a lower one is not a subgame
    ds1 = build_hierarchy([(c, 1), (d, 2)])
    not_upward = BargainingGame.of(
        build_hierarchy([(d, 1)]), g.player2, g.universe)
    assert not is_subgame(not_upward, g)


def test_contraction_independence_on_couple():
    g, (rules, c, d, o, l, k, not_l) = couple_game()
    premise, agrees = check_contraction_independence(g, (2, 3))
    assert premise and agrees
    # cutting below the solution's deepest kept level voids the premise
    premise, _ = check_contraction_independence(g, (2, 2))
    assert not premise


def test_gen_cake_validates_boundaries():
    with pytest.raises(ValueError):
        gen_cake(a_boundaries=[5, 5, 100])
    with pytest.raises(ValueError):
        gen_cake(a_boundaries=[5, 99])
    with pytest.raises(ValueError):
        gen_cake(b_boundaries=[1, 2])
    with pytest.raises(ValueError):
        gen_cake(b_boundaries=[102, 1])
    text = gen_cake()
    assert text == gen_cake()
    assert "player A {" in text and "player B {" in text


def test_inconsistent_demand_set_degrades_gracefully():
    # the model assumes consistent demand sets, but a waived hierarchy still
    # solves: the greedy reading simply drops the self-contradictory tail
    ds1 = build_hierarchy([(parse_formula("p"), 1), (parse_formula("!p"), 2)],
                          require_consistent=False)
    ds2 = build_hierarchy([(parse_formula("q"), 1)])
    g = BargainingGame.of(ds1, ds2)
    report = solve(g)
    assert set(report.solution.part1) == {parse_formula("p")}
    assert set(report.solution.part2) == {parse_formula("q")}
