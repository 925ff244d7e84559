"""Reader for the discrete subset of the BIF interchange format.

Supported: ``network`` blocks, ``variable`` blocks with ``type discrete``,
``probability`` blocks with ``table``, ``default`` and parenthesized
conditional rows. ``property`` lines are skipped; ``//`` and ``/* */``
comments are ignored.

A ``table`` for a variable with parents lists the child states slowest and
parent configurations fastest, matching the common bnlearn/pgmpy reading.
"""
from __future__ import annotations

import re

import numpy as np

from ..errors import NetworkFormatError, UnsupportedConstructError
from ..network import Network, make_network

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<lcomment>//[^\n]*)|(?P<bcomment>/\*.*?\*/)"
    r"|(?P<punct>[{}()\[\];,|])|(?P<word>[^\s{}()\[\];,|]+)",
    re.S,
)


class _Tokens:
    def __init__(self, text):
        self.toks = []
        line, col_start = 1, 0
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:  # pragma: no cover - the word class matches anything else
                raise NetworkFormatError("unexpected character", line, pos - col_start + 1)
            kind = m.lastgroup
            if kind in ("punct", "word"):
                self.toks.append((m.group(), line, pos - col_start + 1))
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                col_start = pos + chunk.rfind("\n") + 1
            pos = m.end()
        self.i = 0
        self.eof = (line, pos - col_start + 1)

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def where(self):
        if self.i < len(self.toks):
            return self.toks[self.i][1:]
        return self.eof

    def next(self, expected=None):
        if self.i >= len(self.toks):
            raise NetworkFormatError(
                f"unexpected end of input, expected {expected or 'a token'!r}", *self.eof
            )
        tok, line, col = self.toks[self.i]
        if expected is not None and tok != expected:
            raise NetworkFormatError(f"expected {expected!r}, found {tok!r}", line, col)
        self.i += 1
        return tok

    def word(self):
        tok = self.peek()
        if tok is None or (len(tok) == 1 and tok in "{}()[];,|"):
            line, col = self.where()
            raise NetworkFormatError(f"expected a name, found {tok!r}", line, col)
        return self.next()

    def number(self):
        line, col = self.where()
        tok = self.word()
        try:
            return float(tok)
        except ValueError:
            raise NetworkFormatError(f"expected a number, found {tok!r}", line, col) from None

    def skip_statement(self):
        depth = 0
        while True:
            tok = self.next(None)
            if tok == "{":
                depth += 1
            elif tok == "}":
                depth -= 1
            elif tok == ";" and depth == 0:
                return


def _numbers(toks):
    vals = [toks.number()]
    while toks.peek() == ",":
        toks.next(",")
        vals.append(toks.number())
    toks.next(";")
    return vals


def parse_bif_subset(text: str, rescale_tol: float = 1e-6) -> Network:
    """Parse a discrete BIF document.

    Published BIF files print rounded decimals, so columns whose sum is within
    ``rescale_tol`` of 1 are rescaled to sum to 1; larger deviations are left
    for the network's normalization check to reject.
    """
    toks = _Tokens(text)
    if toks.peek() is None:
        raise NetworkFormatError("empty document", 1, 1)
    name = ""
    variables = {}
    probs = {}
    while toks.peek() is not None:
        line, col = toks.where()
        kw = toks.word()
        if kw == "network":
            name = toks.word()
            toks.next("{")
            while toks.peek() != "}":
                toks.skip_statement()
            toks.next("}")
        elif kw == "variable":
            vname = toks.word()
            if vname in variables:
                raise NetworkFormatError(f"variable {vname!r} declared twice", line, col)
            toks.next("{")
            states = None
            while toks.peek() != "}":
                l2, c2 = toks.where()
                item = toks.word()
                if item == "type":
                    kind = toks.word()
                    if kind != "discrete":
                        raise UnsupportedConstructError(
                            f"variable {vname!r} has unsupported type {kind!r}", l2, c2
                        )
                    toks.next("[")
                    count = int(toks.number())
                    toks.next("]")
                    toks.next("{")
                    states = [toks.word()]
                    while toks.peek() == ",":
                        toks.next(",")
                        states.append(toks.word())
                    toks.next("}")
                    toks.next(";")
                    if len(states) != count:
                        raise NetworkFormatError(
                            f"variable {vname!r} declares {count} states but lists {len(states)}",
                            l2, c2,
                        )
                elif item == "property":
                    toks.skip_statement()
                else:
                    raise NetworkFormatError(f"unexpected {item!r} in variable block", l2, c2)
            toks.next("}")
            if states is None:
                raise NetworkFormatError(f"variable {vname!r} has no type declaration", line, col)
            variables[vname] = states
        elif kw == "probability":
            toks.next("(")
            child = toks.word()
            parents = []
            if toks.peek() == "|":
                toks.next("|")
                parents.append(toks.word())
                while toks.peek() == ",":
                    toks.next(",")
                    parents.append(toks.word())
            toks.next(")")
            if child in probs:
                raise NetworkFormatError(f"second probability block for {child!r}", line, col)
            body = {"rows": [], "table": None, "default": None, "where": (line, col)}
            toks.next("{")
            while toks.peek() != "}":
                l2, c2 = toks.where()
                head = toks.peek()
                if head == "(":
                    toks.next("(")
                    key = [toks.word()]
                    while toks.peek() == ",":
                        toks.next(",")
                        key.append(toks.word())
                    toks.next(")")
                    body["rows"].append((tuple(key), _numbers(toks), (l2, c2)))
                elif head == "table":
                    toks.next()
                    body["table"] = (_numbers(toks), (l2, c2))
                elif head == "default":
                    toks.next()
                    body["default"] = (_numbers(toks), (l2, c2))
                elif head == "property":
                    toks.skip_statement()
                else:
                    raise NetworkFormatError(f"unexpected {head!r} in probability block", l2, c2)
            toks.next("}")
            probs[child] = (parents, body)
        else:
            raise NetworkFormatError(f"unexpected {kw!r} at top level", line, col)

    decls, tables = [], {}
    for vname, states in variables.items():
        if vname not in probs:
            raise NetworkFormatError(f"no probability block for {vname!r}")
        parents, body = probs[vname]
        for p in parents:
            if p not in variables:
                raise NetworkFormatError(f"{vname!r} has undeclared parent {p!r}", *body["where"])
        decls.append((vname, states, parents))
        table = _table(vname, states, parents, body, variables)
        sums = table.sum(axis=1, keepdims=True)
        close = np.abs(sums - 1.0) <= rescale_tol
        tables[vname] = np.where(close, table / np.where(close, sums, 1.0), table)
    for child in probs:
        if child not in variables:
            raise NetworkFormatError(f"probability block for undeclared {child!r}", *probs[child][1]["where"])
    return make_network(name, decls, tables)


def _table(vname, states, parents, body, variables):
    card = len(states)
    pcards = [len(variables[p]) for p in parents]
    ncols = int(np.prod(pcards, dtype=np.int64))
    filled = np.zeros(ncols, dtype=bool)
    table = np.zeros((ncols, card))
    if body["table"] is not None:
        vals, where = body["table"]
        if len(vals) != ncols * card:
            raise NetworkFormatError(
                f"table for {vname!r} has {len(vals)} values, expected {ncols * card}", *where
            )
        table[:] = np.array(vals).reshape(card, ncols).T
        filled[:] = True
    strides = np.ones(len(parents), dtype=np.int64)
    for k in range(len(parents) - 2, -1, -1):
        strides[k] = strides[k + 1] * pcards[k + 1]
    for key, vals, where in body["rows"]:
        if len(key) != len(parents):
            raise NetworkFormatError(f"row for {vname!r} names {len(key)} parent states", *where)
        if len(vals) != card:
            raise NetworkFormatError(f"row for {vname!r} has {len(vals)} values, expected {card}", *where)
        cfg = 0
        for p, s, st in zip(parents, key, strides):
            if s not in variables[p]:
                raise NetworkFormatError(f"{p!r} has no state {s!r}", *where)
            cfg += variables[p].index(s) * int(st)
        table[cfg] = vals
        filled[cfg] = True
    if body["default"] is not None:
        vals, where = body["default"]
        if len(vals) != card:
            raise NetworkFormatError(f"default for {vname!r} has {len(vals)} values", *where)
        table[~filled] = vals
        filled[:] = True
    if not filled.all():
        j = int(np.flatnonzero(~filled)[0])
        raise NetworkFormatError(f"CPT of {vname!r} has no entry for parent configuration {j}", *body["where"])
    return table
