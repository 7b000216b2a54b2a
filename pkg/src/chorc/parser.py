"""Textual surface language for choreographies.

Grammar (one statement per calculus construct):

    program   := def* "main" block
    def       := "def" IDENT block
    block     := "{" stmt* "}"
    stmt      := comm | sel | cond | call
    comm      := pid "." expr "->" pid "." IDENT annot? ";"
    sel       := pid "->" pid "[" ("left"|"right") "]" annot? ";"
    cond      := "if" pid "." expr block "else" block
    call      := "call" IDENT ";"
    annot     := "@" STRING
    expr      := or-expr with "and"/"or"/"not", "==" "<", "+" "-" "++", "*",
                 atoms: INT (optionally negative), STRING, "true", "false",
                 IDENT, "opaque(" STRING ")", "(" expr ")"

"//" starts a line comment. Conditionals and calls have no continuation in
the calculus, so they must be the last statement of their block; the
parser reports anything after them instead of silently dropping it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import cc
from .cc import Label, Path, ProcName

KEYWORDS = frozenset({"main", "def", "if", "else", "call", "left", "right",
                      "opaque", "true", "false", "and", "or", "not"})

_PUNCT = {
    "->": "ARROW", "++": "CONCAT", "==": "EQEQ",
    "{": "LBRACE", "}": "RBRACE", "[": "LBRACK", "]": "RBRACK",
    "(": "LPAREN", ")": "RPAREN", ";": "SEMI", "@": "AT", ".": "DOT",
    "+": "PLUS", "-": "MINUS", "*": "STAR", "<": "LT",
}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return (f"{self.file}:{self.start_line}:{self.start_col}"
                f"-{self.end_line}:{self.end_col}")


@dataclass(frozen=True)
class ParseError:
    message: str
    span: SourceSpan
    expected: tuple = ()

    def __str__(self) -> str:
        hint = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{self.span}: {self.message}{hint}"


class ParseFailure(Exception):
    def __init__(self, errors):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = list(errors)


@dataclass
class ParsedProgram:
    program: cc.ChorProgram
    # (owner, path) -> SourceSpan; owner None = main, else procedure name
    spans: dict
    filename: str

    def span_of(self, owner: Optional[ProcName], path: Path) -> Optional[SourceSpan]:
        return self.spans.get((owner, path))


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan
    value: object = None


class _Lexer:
    def __init__(self, source: str, filename: str):
        self.src = source
        self.file = filename
        self.pos = 0
        self.line = 1
        self.col = 1
        self.errors: list = []

    def _span(self, line, col) -> SourceSpan:
        return SourceSpan(self.file, line, col, self.line, self.col)

    def _advance(self, n: int = 1) -> str:
        out = self.src[self.pos:self.pos + n]
        for ch in out:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return out

    def tokens(self) -> list:
        # Identifiers and numbers are ASCII by the lexical rule; unicode
        # "digits" and "letters" are rejected like any other stray byte.
        ascii_digit = set("0123456789")
        ascii_alpha = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz")
        ident_cont = ascii_alpha | ascii_digit | {"_"}
        toks = []
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch in " \t\r\n":
                self._advance()
                continue
            if self.src.startswith("//", self.pos):
                while self.pos < len(self.src) and self.src[self.pos] != "\n":
                    self._advance()
                continue
            line, col = self.line, self.col
            if ch in ascii_digit:
                start = self.pos
                while self.pos < len(self.src) and self.src[self.pos] in ascii_digit:
                    self._advance()
                text = self.src[start:self.pos]
                toks.append(Token("INT", text, self._span(line, col), int(text)))
                continue
            if ch in ascii_alpha:
                start = self.pos
                while self.pos < len(self.src) and self.src[self.pos] in ident_cont:
                    self._advance()
                text = self.src[start:self.pos]
                toks.append(Token("IDENT", text, self._span(line, col)))
                continue
            if ch == '"':
                tok = self._string(line, col)
                if tok is not None:
                    toks.append(tok)
                continue
            two = self.src[self.pos:self.pos + 2]
            if two in _PUNCT:
                self._advance(2)
                toks.append(Token(_PUNCT[two], two, self._span(line, col)))
                continue
            if ch in _PUNCT:
                self._advance()
                toks.append(Token(_PUNCT[ch], ch, self._span(line, col)))
                continue
            self._advance()
            self.errors.append(ParseError(f"unexpected character {ch!r}",
                                          self._span(line, col)))
        toks.append(Token("EOF", "", self._span(self.line, self.col)))
        return toks

    def _string(self, line, col) -> Optional[Token]:
        self._advance()  # opening quote
        out = []
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch == '"':
                self._advance()
                text = self.src
                return Token("STRING", "".join(out), self._span(line, col),
                             "".join(out))
            if ch == "\n":
                break
            if ch == "\\":
                self._advance()
                esc = self._advance()
                mapped = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}.get(esc)
                if mapped is None:
                    self.errors.append(ParseError(
                        f"unknown escape '\\{esc}'", self._span(line, col)))
                    mapped = esc
                out.append(mapped)
                continue
            out.append(self._advance())
        self.errors.append(ParseError("unterminated string literal",
                                      self._span(line, col)))
        return None


# ---------------------------------------------------------------------------
# Parser


class _PErr(Exception):
    def __init__(self, err: ParseError):
        super().__init__(str(err))
        self.err = err


_EXPR_PREC = {"or": 1, "and": 2, "==": 4, "<": 4, "+": 5, "-": 5, "++": 5, "*": 6}
_NOT_PREC = 3


class _Parser:
    def __init__(self, tokens, filename):
        self.toks = tokens
        self.file = filename
        self.i = 0
        self.errors: list = []

    # -- token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def at_keyword(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "IDENT" and t.text == word

    def take(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise _PErr(ParseError(f"found {t.text!r}" if t.kind != "EOF" else "unexpected end of input",
                                   t.span, expected=(what,)))
        return self.take()

    def expect_keyword(self, word: str) -> Token:
        t = self.peek()
        if not self.at_keyword(word):
            raise _PErr(ParseError(f"found {t.text!r}" if t.kind != "EOF" else "unexpected end of input",
                                   t.span, expected=(f"'{word}'",)))
        return self.take()

    def expect_name(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "IDENT" or t.text in KEYWORDS:
            raise _PErr(ParseError(
                f"found {t.text!r}" if t.kind != "EOF" else "unexpected end of input",
                t.span, expected=(what,)))
        return self.take()

    def _sync_stmt(self) -> None:
        while self.peek().kind not in ("SEMI", "RBRACE", "EOF"):
            self.take()
        if self.peek().kind == "SEMI":
            self.take()

    # -- grammar

    def parse_program(self) -> tuple:
        defs = []
        def_spans = {}
        while self.at_keyword("def"):
            try:
                self.take()
                name = self.expect_name("procedure name").text
                body, spans = self.parse_block()
                defs.append((name, body))
                for pth, sp_ in spans.items():
                    def_spans.setdefault((name, pth), sp_)
            except _PErr as e:
                self.errors.append(e.err)
                self._sync_stmt()
        self.expect_keyword("main")
        main, main_spans = self.parse_block()
        t = self.peek()
        if t.kind != "EOF":
            self.errors.append(ParseError(
                f"unexpected {t.text!r} after the main block", t.span))
        spans = {(None, pth): sp_ for pth, sp_ in main_spans.items()}
        spans.update(def_spans)
        return cc.ChorProgram(tuple(defs), main), spans

    def parse_block(self) -> tuple:
        self.expect("LBRACE", "'{'")
        stmts = []
        while self.peek().kind not in ("RBRACE", "EOF"):
            stmt = self.parse_stmt()
            if stmt is not None:
                stmts.append(stmt)
        rb = self.expect("RBRACE", "'}'")
        end_span = SourceSpan(self.file, rb.span.start_line, rb.span.start_col,
                              rb.span.start_line, rb.span.start_col)
        node: cc.Choreography = cc.End()
        spans = {(): end_span}
        for k in range(len(stmts) - 1, -1, -1):
            stmt = stmts[k]
            last = k == len(stmts) - 1
            match stmt:
                case ("seq", eta, ann, span):
                    spans = {(0,) + pth: sp_ for pth, sp_ in spans.items()}
                    spans[()] = span
                    node = cc.Interaction(eta, ann, node)
                case ("cond", decider, guard, (tn, tspans), (en, espans), span):
                    if not last:
                        self.errors.append(ParseError(
                            "a conditional has no continuation; it must be "
                            "the last statement of its block", span))
                        continue
                    spans = {(0,) + pth: sp_ for pth, sp_ in tspans.items()}
                    spans.update({(1,) + pth: sp_ for pth, sp_ in espans.items()})
                    spans[()] = span
                    node = cc.Cond(decider, guard, tn, en)
                case ("call", name, span):
                    if not last:
                        self.errors.append(ParseError(
                            "a call has no continuation; it must be the last "
                            "statement of its block", span))
                        continue
                    spans = {(): span}
                    node = cc.Call(name)
        return node, spans

    def parse_stmt(self):
        try:
            if self.at_keyword("if"):
                return self._parse_cond()
            if self.at_keyword("call"):
                start = self.take()
                name = self.expect_name("procedure name")
                semi = self.expect("SEMI", "';'")
                return ("call", name.text, _join(start.span, semi.span))
            if self.peek().kind == "IDENT" and self.peek().text not in KEYWORDS:
                return self._parse_interaction()
            t = self.peek()
            raise _PErr(ParseError(
                f"found {t.text!r}" if t.kind != "EOF" else "unexpected end of input",
                t.span, expected=("statement",)))
        except _PErr as e:
            self.errors.append(e.err)
            self._sync_stmt()
            return None

    def _parse_cond(self):
        start = self.take()  # 'if'
        decider = self.expect_name("deciding process").text
        self.expect("DOT", "'.'")
        guard = self.parse_expr()
        then_block = self.parse_block()
        self.expect_keyword("else")
        else_block = self.parse_block()
        end = self.toks[self.i - 1]
        return ("cond", decider, guard, then_block, else_block,
                _join(start.span, end.span))

    def _parse_interaction(self):
        start = self.expect_name("process name")
        if self.peek().kind == "DOT":
            self.take()
            expr = self.parse_expr()
            self.expect("ARROW", "'->'")
            receiver = self.expect_name("process name").text
            self.expect("DOT", "'.'")
            target = self.expect_name("variable name").text
            ann = self._parse_annot()
            semi = self.expect("SEMI", "';'")
            eta = cc.Com(start.text, expr, receiver, target)
            return ("seq", eta, ann, _join(start.span, semi.span))
        if self.peek().kind == "ARROW":
            self.take()
            target = self.expect_name("process name").text
            self.expect("LBRACK", "'['")
            t = self.peek()
            if self.at_keyword("left"):
                label = Label.LEFT
            elif self.at_keyword("right"):
                label = Label.RIGHT
            else:
                raise _PErr(ParseError(
                    f"found {t.text!r}", t.span, expected=("'left'", "'right'")))
            self.take()
            self.expect("RBRACK", "']'")
            ann = self._parse_annot()
            semi = self.expect("SEMI", "';'")
            eta = cc.Sel(start.text, target, label)
            return ("seq", eta, ann, _join(start.span, semi.span))
        t = self.peek()
        raise _PErr(ParseError(f"found {t.text!r}", t.span,
                               expected=("'.'", "'->'")))

    def _parse_annot(self) -> Optional[str]:
        if self.peek().kind == "AT":
            self.take()
            return self.expect("STRING", "annotation string").value
        return None

    # -- expressions (precedence climbing; all binary operators associate left)

    def parse_expr(self) -> cc.Expr:
        return self._parse_or()

    def _parse_or(self) -> cc.Expr:
        e = self._parse_and()
        while self.at_keyword("or"):
            self.take()
            e = cc.BinOp("or", e, self._parse_and())
        return e

    def _parse_and(self) -> cc.Expr:
        e = self._parse_not()
        while self.at_keyword("and"):
            self.take()
            e = cc.BinOp("and", e, self._parse_not())
        return e

    def _parse_not(self) -> cc.Expr:
        if self.at_keyword("not"):
            self.take()
            return cc.Not(self._parse_not())
        return self._parse_cmp()

    def _parse_cmp(self) -> cc.Expr:
        e = self._parse_add()
        while self.peek().kind in ("EQEQ", "LT"):
            op = "==" if self.take().kind == "EQEQ" else "<"
            e = cc.BinOp(op, e, self._parse_add())
        return e

    def _parse_add(self) -> cc.Expr:
        e = self._parse_mul()
        while self.peek().kind in ("PLUS", "MINUS", "CONCAT"):
            op = {"PLUS": "+", "MINUS": "-", "CONCAT": "++"}[self.take().kind]
            e = cc.BinOp(op, e, self._parse_mul())
        return e

    def _parse_mul(self) -> cc.Expr:
        e = self._parse_atom()
        while self.peek().kind == "STAR":
            self.take()
            e = cc.BinOp("*", e, self._parse_atom())
        return e

    def _parse_atom(self) -> cc.Expr:
        t = self.peek()
        if t.kind == "INT":
            self.take()
            return cc.Lit(cc.VInt(t.value))
        if t.kind == "MINUS" and self.peek(1).kind == "INT":
            self.take()
            n = self.take()
            return cc.Lit(cc.VInt(-n.value))
        if t.kind == "STRING":
            self.take()
            return cc.Lit(cc.VStr(t.value))
        if self.at_keyword("true"):
            self.take()
            return cc.Lit(cc.VBool(True))
        if self.at_keyword("false"):
            self.take()
            return cc.Lit(cc.VBool(False))
        if self.at_keyword("opaque"):
            self.take()
            self.expect("LPAREN", "'('")
            s = self.expect("STRING", "opaque expression string")
            self.expect("RPAREN", "')'")
            return cc.Opaque(s.value)
        if t.kind == "IDENT" and t.text not in KEYWORDS:
            self.take()
            return cc.Var(t.text)
        if t.kind == "LPAREN":
            self.take()
            e = self.parse_expr()
            self.expect("RPAREN", "')'")
            return e
        raise _PErr(ParseError(
            f"found {t.text!r}" if t.kind != "EOF" else "unexpected end of input",
            t.span, expected=("expression",)))


def _join(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    return SourceSpan(a.file, a.start_line, a.start_col, b.end_line, b.end_col)


def parse(source: str, filename: str = "<input>") -> ParsedProgram:
    """Parse DSL text; raises ParseFailure carrying all diagnostics."""
    lexer = _Lexer(source, filename)
    tokens = lexer.tokens()
    parser = _Parser(tokens, filename)
    if lexer.errors:
        parser.errors.extend(lexer.errors)
    try:
        program, spans = parser.parse_program()
    except _PErr as e:
        parser.errors.append(e.err)
        raise ParseFailure(parser.errors) from e
    if parser.errors:
        raise ParseFailure(parser.errors)
    return ParsedProgram(program, spans, filename)


# ---------------------------------------------------------------------------
# Pretty-printer (parse . pretty_print = identity on ASTs)


def _escape(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return f'"{out}"'


def _prec(e: cc.Expr) -> int:
    match e:
        case cc.BinOp(op, _, _):
            return _EXPR_PREC[op]
        case cc.Not(_):
            return _NOT_PREC
        case _:
            return 10


def format_expr(e: cc.Expr) -> str:
    return _fmt_expr(e, 0, False)


def _fmt_expr(e: cc.Expr, parent: int, right_operand: bool) -> str:
    match e:
        case cc.Lit(cc.VInt(n)):
            text = str(n)
        case cc.Lit(cc.VStr(s)):
            text = _escape(s)
        case cc.Lit(cc.VBool(b)):
            text = "true" if b else "false"
        case cc.Var(name):
            text = name
        case cc.Opaque(s):
            text = f"opaque({_escape(s)})"
        case cc.Not(inner):
            text = "not " + _fmt_expr(inner, _NOT_PREC, False)
        case cc.BinOp(op, l, r):
            p = _EXPR_PREC[op]
            text = (f"{_fmt_expr(l, p, False)} {op} {_fmt_expr(r, p, True)}")
        case _:
            raise TypeError(f"not an expression: {e!r}")
    p = _prec(e)
    if p < parent or (p == parent and right_operand and isinstance(e, cc.BinOp)):
        return f"({text})"
    return text


def _fmt_ann(ann) -> str:
    return f" @ {_escape(ann)}" if ann is not None else ""


def _stmt_lines(c: cc.Choreography) -> list:
    lines: list = []
    node = c
    while True:
        match node:
            case cc.End():
                return lines
            case cc.Interaction(cc.Com(p, e, q, x), ann, cont):
                lines.append(f"{p}.{_fmt_expr(e, 0, False)} -> {q}.{x}{_fmt_ann(ann)};")
                node = cont
            case cc.Interaction(cc.Sel(p, q, label), ann, cont):
                lines.append(f"{p} -> {q} [{label.value}]{_fmt_ann(ann)};")
                node = cont
            case cc.Cond(p, guard, then_branch, else_branch):
                lines.append(f"if {p}.{_fmt_expr(guard, 0, False)} {{")
                lines.extend("  " + l for l in _stmt_lines(then_branch))
                lines.append("} else {")
                lines.extend("  " + l for l in _stmt_lines(else_branch))
                lines.append("}")
                return lines
            case cc.Call(proc):
                lines.append(f"call {proc};")
                return lines
            case _:
                raise TypeError(f"not a choreography: {node!r}")


def _block(c: cc.Choreography) -> str:
    lines = _stmt_lines(c)
    if not lines:
        return "{\n}"
    return "{\n" + "\n".join("  " + l for l in lines) + "\n}"


def pretty_print(program: cc.ChorProgram) -> str:
    parts = [f"def {name} {_block(body)}" for name, body in program.defs]
    parts.append(f"main {_block(program.main)}")
    return "\n\n".join(parts) + "\n"
