"""S-expression reader shared by the input frontends and the solver driver."""
from __future__ import annotations

from dataclasses import dataclass

import pyparsing as pp

from .errors import ParseError


@dataclass(frozen=True)
class SAtom:
    text: str
    line: int = 0
    column: int = 0

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int = 0
    column: int = 0

    @property
    def head(self):
        if self.items and isinstance(self.items[0], SAtom):
            return self.items[0].text
        return None

    def __len__(self):
        return len(self.items)

    def __getitem__(self, index):
        return self.items[index]

    def __str__(self):
        return "(" + " ".join(str(item) for item in self.items) + ")"


def _make_atom(s, loc, toks):
    return SAtom(toks[0], pp.lineno(loc, s), pp.col(loc, s))


def _make_list(s, loc, toks):
    return SList(tuple(toks[0]), pp.lineno(loc, s), pp.col(loc, s))


def _build_grammar():
    lpar, rpar = pp.Suppress("("), pp.Suppress(")")
    symbol = (
        pp.QuotedString("|", unquote_results=True)
        | pp.QuotedString('"', esc_quote='""', multiline=True, unquote_results=False)
        | pp.Regex(r"[^\s()|;\"]+")
    )
    symbol.set_parse_action(_make_atom)
    sexp = pp.Forward()
    slist = pp.Group(lpar + pp.ZeroOrMore(sexp) + rpar)
    slist.set_parse_action(_make_list)
    sexp <<= symbol | slist
    comment = pp.Regex(r";[^\n]*")
    document = pp.ZeroOrMore(sexp) + pp.StringEnd()
    document.ignore(comment)
    sexp.ignore(comment)
    return document


_DOCUMENT = _build_grammar()


def read_sexprs(text):
    """Parse ``text`` into a list of SAtom/SList nodes carrying line/column."""
    try:
        return list(_DOCUMENT.parse_string(text, parse_all=True))
    except pp.ParseException as e:
        raise ParseError(f"malformed s-expression: {e.msg}", e.lineno, e.col) from e
