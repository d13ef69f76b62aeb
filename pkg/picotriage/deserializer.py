import re
import typing

import attr
import ujson

from .docstrings import docstring_insert, reader_args
from .document import SUPPORTED_VERSIONS, NetworkDocument, check_document
from .errors import (BnetSyntaxError, DuplicateState, SourcePosition,
                     VersionUnsupported)
from .network import CptDeclaration, CptRow, Variable

TOKEN_RE = re.compile(r"""
      (?P<space>[ \t\r]+)
    | (?P<newline>\n)
    | (?P<comment>\#[^\n]*)
    | (?P<number>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?(?![A-Za-z_]))
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<name>[A-Za-z_][A-Za-z0-9_\-]*)
    | (?P<punct>[{}|:,=])
    """, re.VERBOSE)


@attr.s(frozen=True, slots=True)
class Token(object):
    kind = attr.ib()
    text = attr.ib()
    position = attr.ib()

def tokenize(text: str) -> typing.List[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            raise BnetSyntaxError("unexpected character {!r}".format(text[pos]),
                                  SourcePosition(line, pos - line_start + 1))
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("space", "comment"):
            tokens.append(Token(kind, m.group(), SourcePosition(line, pos - line_start + 1)))
        pos = m.end()
    tokens.append(Token("eof", "", SourcePosition(line, pos - line_start + 1)))
    return tokens


class _Parser(object):
    """ Recursive-descent reader over a token list. """

    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self, offset=0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def fail(self, expected, tok=None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise BnetSyntaxError("expected {}, found {}".format(expected, found), tok.position)

    def expect(self, kind, text=None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            self.fail(repr(text) if text is not None else kind)
        return self.next()

    def at(self, kind, text=None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def name_list(self) -> typing.List[Token]:
        names = [self.expect("name")]
        while self.at("punct", ","):
            self.next()
            if self.at("name"):
                names.append(self.next())
        return names

    def document(self) -> NetworkDocument:
        self.expect("name", "version")
        tok = self.expect("number")
        try:
            version = int(tok.text)
        except ValueError:
            raise BnetSyntaxError("version must be an integer", tok.position)
        if version not in SUPPORTED_VERSIONS:
            raise VersionUnsupported(version, tok.position)

        variables, cpts, metadata = [], [], {}
        while not self.at("eof"):
            tok = self.peek()
            if self.at("name", "variable"):
                variables.append(self.variable())
            elif self.at("name", "cpt"):
                cpts.append(self.cpt())
            elif self.at("name", "meta"):
                key, value = self.meta()
                metadata[key] = value
            else:
                self.fail("'variable', 'cpt' or 'meta'", tok)
        return NetworkDocument(version, variables, cpts, metadata)

    def variable(self) -> Variable:
        self.next()
        name = self.expect("name")
        self.expect("punct", "{")
        states = self.name_list()
        self.expect("punct", "}")
        seen = set()
        for s in states:
            if s.text in seen:
                raise DuplicateState(name.text, s.text, s.position)
            seen.add(s.text)
        try:
            return Variable(name.text, [s.text for s in states], position=name.position)
        except ValueError as e:
            raise BnetSyntaxError(str(e), name.position)

    def cpt(self) -> CptDeclaration:
        self.next()
        child = self.expect("name")
        parents = []
        if self.at("punct", "|"):
            self.next()
            parents = [t.text for t in self.name_list()]
        self.expect("punct", "{")
        rows = []
        while not self.at("punct", "}"):
            rows.append(self.row())
        self.next()
        return CptDeclaration(child.text, parents, rows, position=child.position)

    def row(self) -> CptRow:
        start = self.peek()
        key = []
        if not self.at("punct", ":"):
            key = [t.text for t in self.name_list()]
        self.expect("punct", ":")
        probabilities = []
        while self.at("number"):
            probabilities.append(float(self.next().text))
        if not probabilities:
            self.fail("probabilities")
        band = None
        if self.at("name", "band") and self.peek(1).kind == "punct" and self.peek(1).text == "=":
            self.next()
            self.next()
            tok = self.expect("name")
            if tok.text not in ("strong", "moderate", "weak"):
                self.fail("'strong', 'moderate' or 'weak'", tok)
            band = tok.text
        return CptRow(key, probabilities, band, position=start.position)

    def meta(self):
        self.next()
        key = self.expect("name")
        self.expect("punct", "=")
        tok = self.expect("string")
        return key.text, ujson.loads(tok.text)


@docstring_insert(reader_args)
class Deserializer(object):
    """ Reads network documents from `.bnet` text or from the JSON mirror.
    Text is passed by value with fromstring(), by file with fromfile(); JSON
    by value with fromjson() or as a dictionary with fromdict().

    {}"""
    def __init__(self, check: bool = True):
        self.check = check
        return

    def __call__(self, f):
        try:
            return self.fromfile(f)
        except (OSError, TypeError):
            return self.fromstring(f)

    def _checked(self, doc):
        if self.check:
            check_document(doc)
        return doc

    def fromstring(self, s: str) -> NetworkDocument:
        return self._checked(_Parser(tokenize(s)).document())

    def fromfile(self, f) -> NetworkDocument:
        if hasattr(f, "read"):
            return self.fromstring(f.read())
        elif hasattr(f, "open"):
            with f.open() as fobj:
                return self.fromstring(fobj.read())
        with open(f) as fobj:
            return self.fromstring(fobj.read())

    def fromjson(self, s: str) -> NetworkDocument:
        return self.fromdict(ujson.loads(s))

    def fromdict(self, d: dict) -> NetworkDocument:
        version = d.get("version")
        if version not in SUPPORTED_VERSIONS:
            raise VersionUnsupported(version)
        variables = [Variable(v["name"], v["states"]) for v in d.get("variables", [])]
        cpts = [CptDeclaration(c["child"], c.get("parents", []),
                               [CptRow(r.get("key", []), r["probabilities"], r.get("band"))
                                for r in c.get("rows", [])])
                for c in d.get("cpts", [])]
        return self._checked(NetworkDocument(version, variables, cpts,
                                             d.get("metadata", {})))

@docstring_insert(reader_args)
def parse_network(text: str, **kw) -> NetworkDocument:
    """ Read `.bnet` text and return the document with source positions on
    every declaration.
    {} """
    return Deserializer(**kw).fromstring(text)

@docstring_insert(reader_args)
def fromstring(s: str, **kw) -> NetworkDocument:
    """ Read a `.bnet` string.
    {} """
    return Deserializer(**kw).fromstring(s)

@docstring_insert(reader_args)
def fromfile(f: typing.TextIO, **kw) -> NetworkDocument:
    """ Read a `.bnet` file, given as a path, pathlib.Path or file object.
    {} """
    return Deserializer(**kw).fromfile(f)

@docstring_insert(reader_args)
def fromdict(d: dict, **kw) -> NetworkDocument:
    """ Read the JSON mirror of a document, already decoded.
    {} """
    return Deserializer(**kw).fromdict(d)

@docstring_insert(reader_args)
def fromjson(s: str, **kw) -> NetworkDocument:
    """ Read the JSON mirror of a document from a string.
    {} """
    return Deserializer(**kw).fromjson(s)
