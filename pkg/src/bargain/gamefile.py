"""Game and profile file format.

    # comments run to end of line
    note "free-text remark surfaced in reports";     (any number)
    vars c, d, o, l, k;                              (optional; fixes atom order)

    player Husband {
      level { !(d & o); (c & o) -> l; }
      level { c; }
      level { d; }
    }
    player Wife { ... }

Exactly two player blocks; the player name is optional. Levels are listed from
most entrenched down; each must hold at least one formula, and a formula may
appear only once per player. Profile files look the same but without level
blocks: `player A { f1; f2; }`.

Without a `vars` line the universe is the atoms in first-occurrence order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .demand import DemandSetError, build_hierarchy
from .logic import ParseError, VariableUniverse, atoms_of, parse_formula
from .solver import BargainingGame, StrategyProfile

_KEYWORDS = ("note", "vars", "player", "level")


class GameFileError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = "%s (line %d, column %d)" % (message, line, column)
        super().__init__(message)


@dataclass(frozen=True)
class GameFile:
    player1: object
    player2: object
    universe: VariableUniverse
    names: tuple
    notes: tuple

    def game(self):
        return BargainingGame(self.player1, self.player2, self.universe)


class _Scanner:
    """Yields words, punctuation, strings, and raw formula slices."""

    def __init__(self, text):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def _advance(self, n):
        for _ in range(n):
            if self.text[self.i] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.i += 1

    def skip_ws(self):
        while self.i < len(self.text):
            c = self.text[self.i]
            if c == "#":
                while self.i < len(self.text) and self.text[self.i] != "\n":
                    self._advance(1)
            elif c in " \t\r\n":
                self._advance(1)
            else:
                return

    def at_end(self):
        self.skip_ws()
        return self.i >= len(self.text)

    def peek_char(self):
        self.skip_ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def take_char(self, expected):
        self.skip_ws()
        if self.i >= len(self.text) or self.text[self.i] != expected:
            found = self.text[self.i] if self.i < len(self.text) else "end of file"
            raise GameFileError("expected %r, found %r" % (expected, found),
                                self.line, self.col)
        self._advance(1)

    def peek_word(self):
        self.skip_ws()
        j = self.i
        while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
            j += 1
        return self.text[self.i:j]

    def take_word(self):
        self.skip_ws()
        w = self.peek_word()
        if not w:
            raise GameFileError("expected a word", self.line, self.col)
        self._advance(len(w))
        return w

    def take_string(self):
        self.skip_ws()
        if self.peek_char() != '"':
            raise GameFileError("expected a quoted string", self.line, self.col)
        self._advance(1)
        out = []
        while self.i < len(self.text):
            c = self.text[self.i]
            if c == "\\" and self.i + 1 < len(self.text):
                out.append(self.text[self.i + 1])
                self._advance(2)
                continue
            if c == '"':
                self._advance(1)
                return "".join(out)
            if c == "\n":
                break
            out.append(c)
            self._advance(1)
        raise GameFileError("unterminated string", self.line, self.col)

    def take_formula_text(self):
        """Raw text up to the next ';' (comments skipped), with its position."""
        self.skip_ws()
        start_line, start_col = self.line, self.col
        parts = []
        while self.i < len(self.text):
            c = self.text[self.i]
            if c == ";":
                self._advance(1)
                text = "".join(parts).strip()
                if not text:
                    raise GameFileError("empty formula", start_line, start_col)
                return text, start_line, start_col
            if c == "#":
                while self.i < len(self.text) and self.text[self.i] != "\n":
                    self._advance(1)
                continue
            if c in "{}":
                raise GameFileError("formula is missing its ';'", self.line, self.col)
            parts.append(c)
            self._advance(1)
        raise GameFileError("formula is missing its ';'", start_line, start_col)


def _parse_formula_at(text, line, col, universe):
    try:
        return parse_formula(text, universe=universe)
    except ParseError as e:
        if e.line is not None:
            abs_line = line + e.line - 1
            abs_col = e.column + (col - 1 if e.line == 1 else 0)
        else:
            abs_line, abs_col = line, col
        raise GameFileError(str(e).split(" (line")[0], abs_line, abs_col)


def _parse_header(sc):
    """Leading note/vars directives. Returns (notes, declared_vars)."""
    notes = []
    declared = None
    while True:
        w = sc.peek_word()
        if w == "note":
            sc.take_word()
            notes.append(sc.take_string())
            sc.take_char(";")
        elif w == "vars":
            if declared is not None:
                raise GameFileError("only one vars line is allowed", sc.line, sc.col)
            sc.take_word()
            declared = []
            while True:
                declared.append(sc.take_word())
                if sc.peek_char() == ",":
                    sc.take_char(",")
                    continue
                break
            sc.take_char(";")
        else:
            return tuple(notes), declared


def _player_header(sc, index):
    w = sc.take_word()
    if w != "player":
        raise GameFileError("expected 'player', found %r" % w, sc.line, sc.col)
    name = ""
    nxt = sc.peek_word()
    if nxt and nxt not in _KEYWORDS:
        name = sc.take_word()
    return name or "player %d" % index


def load_game_text(text):
    sc = _Scanner(text)
    notes, declared = _parse_header(sc)
    universe = VariableUniverse(tuple(declared)) if declared else None

    players = []
    names = []
    while not sc.at_end():
        if len(players) == 2:
            raise GameFileError("expected end of file after two player blocks",
                                sc.line, sc.col)
        names.append(_player_header(sc, len(players) + 1))
        sc.take_char("{")
        levels = []
        while sc.peek_word() == "level":
            sc.take_word()
            sc.take_char("{")
            level = []
            while sc.peek_char() != "}":
                raw, ln, col = sc.take_formula_text()
                level.append((raw, ln, col))
            sc.take_char("}")
            if not level:
                raise GameFileError("a level needs at least one formula",
                                    sc.line, sc.col)
            levels.append(level)
        sc.take_char("}")
        if not levels:
            raise GameFileError("player %r has no levels" % names[-1],
                                sc.line, sc.col)
        players.append(levels)
    if len(players) != 2:
        raise GameFileError("expected two player blocks, found %d" % len(players),
                            sc.line, sc.col)

    # with no vars line, formulas parse in infer mode and the universe is
    # collected afterwards in first-occurrence order
    parsed = []
    for p in players:
        lv = []
        for level in p:
            lv.append([(raw, ln, col, _parse_formula_at(raw, ln, col, universe))
                       for raw, ln, col in level])
        parsed.append(lv)

    if universe is None:
        seen = []
        have = set()
        for p in parsed:
            for level in p:
                for _, _, _, f in level:
                    for a in atoms_of(f):
                        if a not in have:
                            have.add(a)
                            seen.append(a)
        if not seen:
            raise GameFileError("no atoms anywhere in the file", 1, 1)
        universe = VariableUniverse(tuple(seen))

    sets = []
    for idx, p in enumerate(parsed):
        ranked = []
        for k, level in enumerate(p, start=1):
            for raw, ln, col, f in level:
                ranked.append((f, k))
        try:
            sets.append(build_hierarchy(ranked, name=names[idx]))
        except DemandSetError as e:
            raise GameFileError("player %r: %s" % (names[idx], e))
    return GameFile(sets[0], sets[1], universe, tuple(names), notes)


def load_game(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise GameFileError("cannot read %s: %s" % (path, e.strerror or e))
    return load_game_text(text)


def load_profile_text(text, universe):
    """Profile file: two player blocks of plain ';'-separated formulas."""
    sc = _Scanner(text)
    notes, declared = _parse_header(sc)
    parts = []
    names = []
    while not sc.at_end():
        if len(parts) == 2:
            raise GameFileError("expected end of file after two player blocks",
                                sc.line, sc.col)
        names.append(_player_header(sc, len(parts) + 1))
        sc.take_char("{")
        formulas = []
        while sc.peek_char() != "}":
            raw, ln, col = sc.take_formula_text()
            f = _parse_formula_at(raw, ln, col, universe)
            if f in formulas:
                raise GameFileError("duplicate formula %r" % raw, ln, col)
            formulas.append(f)
        sc.take_char("}")
        parts.append(tuple(formulas))
    if len(parts) != 2:
        raise GameFileError("expected two player blocks, found %d" % len(parts),
                            sc.line, sc.col)
    return StrategyProfile(parts[0], parts[1])


def load_profile(path, universe):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise GameFileError("cannot read %s: %s" % (path, e.strerror or e))
    return load_profile_text(text, universe)
