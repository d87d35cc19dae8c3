"""Command-line front end.

Commands: validate, solve, deals, core, utilities, fixpoint, gen cake.
Every report command takes --json and then emits valid JSON on stdout on every
path, including failures ({"error": ...}). Exit codes: 0 success, 1 bad input
or I/O, 2 semantic refusal (ranking violations without --allow-lc-violation;
a fixed-point check that does not hold).
"""

from __future__ import annotations

import argparse
import json
import sys

from .demand import validate_lc
from .gamefile import GameFileError, load_game, load_profile
from .logic import (
    And,
    TRUE,
    UniverseCapError,
    canonical_formula,
    format_formula,
    models,
)
from .revision import ClosedGame, RevisionError, check_fixed_point
from .solver import (
    EnumerationCapError,
    INFINITE,
    deal_witness,
    enumerate_deals,
    gen_cake,
    core as core_of,
    is_weakly_pareto,
    solve,
    utilities as utilities_of,
)

MODEL_CAP = 16


class _Reporter:
    def __init__(self, as_json):
        self.as_json = as_json

    def emit(self, doc, text_lines):
        if self.as_json:
            print(json.dumps(doc, indent=2))
        else:
            for line in text_lines:
                print(line)

    def fail(self, message, code=1):
        if self.as_json:
            print(json.dumps({"error": message}, indent=2))
        else:
            print("error: %s" % message, file=sys.stderr)
        return code


def _fmt_part(part):
    return "; ".join(format_formula(f) for f in part) if part else "(nothing)"


def _profile_doc(profile):
    return {"player1": [format_formula(f) for f in profile.part1],
            "player2": [format_formula(f) for f in profile.part2]}


def _pi_doc(pi):
    return "inf" if pi is INFINITE else pi


def _pi_text(pi):
    return "infinite" if pi is INFINITE else str(pi)


def _agreement_formula(profile):
    seen = set()
    chain = None
    for f in profile.part1 + profile.part2:
        if f in seen:
            continue
        seen.add(f)
        chain = f if chain is None else And(chain, f)
    return TRUE if chain is None else chain


def _load_checked(args, rep):
    """Parse the game file and run the ranking sanity check. Returns
    (gamefile, warnings) or an int exit code."""
    try:
        gf = load_game(args.file)
    except GameFileError as e:
        return rep.fail(str(e))
    warnings = ["note: %s" % n for n in gf.notes]
    violations = []
    for who, ds in ((1, gf.player1), (2, gf.player2)):
        violations += [(who, v) for v in validate_lc(ds)]
    if violations:
        lines = ["player %d: %s" % (who, v.detail) for who, v in violations]
        if not getattr(args, "allow_lc_violation", False):
            return rep.fail("demand rankings are not logically coherent:\n  "
                            + "\n  ".join(lines)
                            + "\nrerun with --allow-lc-violation to proceed", code=2)
        warnings += ["ranking violation tolerated: %s" % l for l in lines]
    return gf, warnings


def cmd_validate(args):
    rep = _Reporter(args.json)
    try:
        gf = load_game(args.file)
    except GameFileError as e:
        return rep.fail(str(e))
    violations = []
    for who, ds in ((1, gf.player1), (2, gf.player2)):
        for v in validate_lc(ds):
            violations.append({
                "player": who,
                "level": v.level,
                "formula": format_formula(v.formula),
                "kind": v.kind,
                "detail": v.detail,
            })
    doc = {"valid": not violations,
           "violations": violations,
           "warnings": ["note: %s" % n for n in gf.notes]}
    text = []
    if violations:
        text += ["player %d: %s" % (v["player"], v["detail"]) for v in violations]
    else:
        text.append("ok: rankings are logically coherent")
    rep.emit(doc, text)
    return 2 if violations else 0


def _cap_args(args):
    return {"enumeration_cap": (10 ** 9 if getattr(args, "no_enumeration_cap", False)
                                else None)}


def cmd_solve(args):
    rep = _Reporter(args.json)
    loaded = _load_checked(args, rep)
    if isinstance(loaded, int):
        return loaded
    gf, warnings = loaded
    game = gf.game()
    try:
        report = solve(game, include_deals=args.deals,
                       binary_search=args.binary_search, **_cap_args(args))
    except EnumerationCapError as e:
        return rep.fail(str(e))
    warnings += report.warnings

    agreement = _agreement_formula(report.solution)
    closed_text = None
    if game.universe.size <= MODEL_CAP:
        closed_text = format_formula(canonical_formula(
            models([agreement], game.universe)))
    else:
        warnings.append("agreement left in syntactic form: %d atoms exceed the"
                        " model-enumeration cap (%d)" % (game.universe.size, MODEL_CAP))

    doc = {
        "pi_max": _pi_doc(report.pi_max),
        "core": _profile_doc(report.core),
        "deals": None if report.deals is None else [_profile_doc(d) for d in report.deals],
        "best_deals": [_profile_doc(d) for d in report.best_deals],
        "solution": _profile_doc(report.solution),
        "agreement": format_formula(agreement),
        "agreement_closed": closed_text,
        "utilities": list(report.utilities),
        "warnings": warnings,
    }
    n1, n2 = gf.names
    text = ["pi-max: %s" % _pi_text(report.pi_max),
            "core:",
            "  %s: %s" % (n1, _fmt_part(report.core.part1)),
            "  %s: %s" % (n2, _fmt_part(report.core.part2))]
    if report.deals is not None:
        text.append("deals (%d):" % len(report.deals))
        for i, d in enumerate(report.deals, 1):
            text.append("  %d. %s: %s | %s: %s"
                        % (i, n1, _fmt_part(d.part1), n2, _fmt_part(d.part2)))
    text.append("best deals (%d):" % len(report.best_deals))
    for i, d in enumerate(report.best_deals, 1):
        text.append("  %d. %s: %s | %s: %s"
                    % (i, n1, _fmt_part(d.part1), n2, _fmt_part(d.part2)))
    text += ["solution:",
             "  %s: %s" % (n1, _fmt_part(report.solution.part1)),
             "  %s: %s" % (n2, _fmt_part(report.solution.part2)),
             "agreement: %s" % format_formula(agreement)]
    if closed_text is not None:
        text.append("agreement (canonical): %s" % closed_text)
    text.append("utilities: %s %d, %s %d"
                % (n1, report.utilities[0], n2, report.utilities[1]))
    if warnings:
        text.append("warnings:")
        text += ["  - %s" % w for w in warnings]
    rep.emit(doc, text)
    return 0


def cmd_deals(args):
    rep = _Reporter(args.json)
    loaded = _load_checked(args, rep)
    if isinstance(loaded, int):
        return loaded
    gf, warnings = loaded
    game = gf.game()
    try:
        cr = core_of(game)
        deals = enumerate_deals(game, **_cap_args(args))
    except EnumerationCapError as e:
        return rep.fail(str(e))
    doc = {
        "pi_max": _pi_doc(cr.pi_max),
        "core": _profile_doc(cr.profile),
        "deals": [_profile_doc(d) for d in deals],
        "warnings": warnings,
    }
    n1, n2 = gf.names
    text = ["deals (%d):" % len(deals)]
    for i, d in enumerate(deals, 1):
        text.append("  %d. %s: %s | %s: %s"
                    % (i, n1, _fmt_part(d.part1), n2, _fmt_part(d.part2)))
    if warnings:
        text.append("warnings:")
        text += ["  - %s" % w for w in warnings]
    rep.emit(doc, text)
    return 0


def cmd_core(args):
    rep = _Reporter(args.json)
    loaded = _load_checked(args, rep)
    if isinstance(loaded, int):
        return loaded
    gf, warnings = loaded
    game = gf.game()
    cr = core_of(game, binary_search=args.binary_search)
    doc = {
        "pi_max": _pi_doc(cr.pi_max),
        "core": _profile_doc(cr.profile),
        "warnings": warnings,
    }
    n1, n2 = gf.names
    text = ["pi-max: %s" % _pi_text(cr.pi_max),
            "core:",
            "  %s: %s" % (n1, _fmt_part(cr.profile.part1)),
            "  %s: %s" % (n2, _fmt_part(cr.profile.part2))]
    if warnings:
        text.append("warnings:")
        text += ["  - %s" % w for w in warnings]
    rep.emit(doc, text)
    return 0


def cmd_utilities(args):
    rep = _Reporter(args.json)
    loaded = _load_checked(args, rep)
    if isinstance(loaded, int):
        return loaded
    gf, warnings = loaded
    game = gf.game()
    try:
        profile = load_profile(args.profile, game.universe)
    except GameFileError as e:
        return rep.fail(str(e))
    u = utilities_of(game, profile)
    witness = deal_witness(game, profile)
    pareto = is_weakly_pareto(game, profile)
    doc = {
        "profile": _profile_doc(profile),
        "utilities": list(u),
        "deal": witness is None,
        "deal_witness": witness,
        "weakly_pareto": pareto,
        "warnings": warnings,
    }
    n1, n2 = gf.names
    text = ["utilities: %s %d, %s %d" % (n1, u[0], n2, u[1]),
            "deal: %s" % ("yes" if witness is None else "no (%s)" % witness),
            "weakly pareto-optimal: %s" % ("yes" if pareto else "no")]
    if warnings:
        text.append("warnings:")
        text += ["  - %s" % w for w in warnings]
    rep.emit(doc, text)
    return 0


def cmd_fixpoint(args):
    rep = _Reporter(args.json)
    try:
        gf = load_game(args.file)
    except GameFileError as e:
        return rep.fail(str(e))
    game = gf.game()
    if game.universe.size > args.atoms_cap:
        return rep.fail("the closed-set reading enumerates worlds: %d atoms"
                        " exceed the cap of %d (--atoms-cap)"
                        % (game.universe.size, args.atoms_cap))
    warnings = ["note: %s" % n for n in gf.notes]
    try:
        cg = ClosedGame.from_hierarchies(gf.player1, gf.player2, game.universe)
    except (RevisionError, UniverseCapError) as e:
        return rep.fail(str(e))
    warnings += list(cg.merged)
    fx = check_fixed_point(cg)

    def txt(mask):
        from .logic import ModelSet
        return format_formula(canonical_formula(ModelSet(game.universe, mask)))

    doc = {
        "pi_max": _pi_doc(fx.pi_max),
        "solution": {"player1": txt(fx.f1_mask), "player2": txt(fx.f2_mask)},
        "agreement": txt(fx.lhs_mask),
        "revisions": {"player1": txt(fx.revision1), "player2": txt(fx.revision2)},
        "equal": fx.equal,
        "warnings": warnings,
    }
    n1, n2 = gf.names
    text = ["pi-max: %s" % _pi_text(fx.pi_max),
            "solution (canonical):",
            "  %s: %s" % (n1, txt(fx.f1_mask)),
            "  %s: %s" % (n2, txt(fx.f2_mask)),
            "agreement (canonical): %s" % txt(fx.lhs_mask),
            "revision of %s by the other part: %s" % (n1, txt(fx.revision1)),
            "revision of %s by the other part: %s" % (n2, txt(fx.revision2)),
            "fixed point: %s" % ("holds" if fx.equal else "FAILS")]
    if warnings:
        text.append("warnings:")
        text += ["  - %s" % w for w in warnings]
    rep.emit(doc, text)
    return 0 if fx.equal else 2


def cmd_gen(args):
    if args.kind != "cake":
        print("error: unknown generator %r" % args.kind, file=sys.stderr)
        return 1

    def csv(s):
        return tuple(int(x) for x in s.split(",")) if s else None

    try:
        text = gen_cake(csv(args.a_boundaries), csv(args.b_boundaries))
    except ValueError as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print("wrote %s" % args.out)
    return 0


def _build_parser():
    p = argparse.ArgumentParser(
        prog="bargain",
        description="Solve logic-based bilateral bargaining games: prioritized"
                    " demands, deals, cores, solutions, and revision fixed points.")
    sub = p.add_subparsers(dest="command", required=True)

    def report_args(sp, lc=True, cap=False, binary=False):
        sp.add_argument("file", help="game file")
        sp.add_argument("--json", action="store_true", help="emit JSON")
        if lc:
            sp.add_argument("--allow-lc-violation", action="store_true",
                            help="proceed despite incoherent rankings")
        if cap:
            sp.add_argument("--no-enumeration-cap", action="store_true",
                            help="lift the free-demand cap on brute enumeration")
        if binary:
            sp.add_argument("--binary-search", action="store_true",
                            help="locate pi-max by bisection instead of a scan")

    sp = sub.add_parser("validate", help="check that rankings are logically coherent")
    sp.add_argument("file")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("solve", help="full report: pi-max, core, best deals,"
                                      " solution, agreement, utilities")
    report_args(sp, cap=True, binary=True)
    sp.add_argument("--deals", action="store_true",
                    help="also enumerate and print every deal")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("deals", help="enumerate every deal")
    report_args(sp, cap=True)
    sp.set_defaults(func=cmd_deals)

    sp = sub.add_parser("core", help="pi-max and the core")
    report_args(sp, binary=True)
    sp.set_defaults(func=cmd_core)

    sp = sub.add_parser("utilities", help="utilities and checks for a profile")
    report_args(sp)
    sp.add_argument("--profile", required=True, help="profile file")
    sp.set_defaults(func=cmd_utilities)

    sp = sub.add_parser("fixpoint", help="closed-set solution vs mutual revision")
    sp.add_argument("file")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--atoms-cap", type=int, default=4,
                    help="largest universe the closed reading will enumerate")
    sp.set_defaults(func=cmd_fixpoint)

    sp = sub.add_parser("gen", help="generate example games")
    sp.add_argument("kind", choices=["cake"])
    sp.add_argument("--a-boundaries", default=None,
                    help="ascending CSV of block maxima for player A (end at 100)")
    sp.add_argument("--b-boundaries", default=None,
                    help="descending CSV of block minima for player B (end at 1)")
    sp.add_argument("--out", required=True, help="output path, or - for stdout")
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
