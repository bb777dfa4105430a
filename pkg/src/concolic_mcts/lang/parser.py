"""Recursive descent parser and type checker for .mini programs.

The grammar is documented in docs/grammar.md.
"""
import re

from . import ast as A
from .ast import (BOOL, I32, INPUT_WIDTHS, TYPES, IntType, MiniSyntaxError,
                  TypeMismatch, UnknownIdentifier)

KEYWORDS = {"fn", "if", "else", "while", "return", "assert", "abort", "input",
            "choose_concrete", "as", "true", "false"} | set(TYPES)

TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<num>0[xX][0-9a-fA-F]+|0[bB][01]+|[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^~!<>=(){},;:])
""", re.VERBOSE | re.DOTALL)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise MiniSyntaxError(line, col, "a token", text[pos])
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block":
            nls = chunk.count("\n")
            if nls:
                line += nls
                line_start = pos + chunk.rindex("\n") + 1
        elif kind in ("ws", "comment"):
            pass
        elif kind == "ident" and chunk in KEYWORDS:
            tokens.append(Token("kw", chunk, line, col))
        else:
            tokens.append(Token(kind, chunk, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# Binary operator precedence, loosest first. Bitwise operators bind tighter
# than comparisons so that `x & 1 == 0` means `(x & 1) == 0`.
BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!=", "<", "<=", ">", ">="),
    ("|",),
    ("^",),
    ("&",),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]
ARITH_OPS = {"+", "-", "*", "/", "%", "<<", ">>"}
BITWISE_OPS = {"&", "|", "^"}
EQUALITY_OPS = {"==", "!="}
ORDER_OPS = {"<", "<=", ">", ">="}
LOGIC_OPS = {"&&", "||"}


class Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, k=1):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text):
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def advance(self):
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text):
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def fail(self, expected):
        t = self.tok
        raise MiniSyntaxError(t.line, t.col, expected, t.text or "end of input")

    def ident(self):
        if self.tok.kind != "ident":
            self.fail("identifier")
        return self.advance()

    def type_name(self):
        t = self.tok
        if t.kind == "kw" and t.text in TYPES:
            self.advance()
            return TYPES[t.text]
        self.fail("type name")

    # declarations

    def program(self):
        funcs = []
        while self.tok.kind != "eof":
            funcs.append(self.function())
        return funcs

    def function(self):
        start = self.expect("fn")
        name = self.ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.ident().text
                self.expect(":")
                params.append((pname, self.type_name()))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        ret = None
        if self.at("->"):
            self.advance()
            ret = self.type_name()
        body = self.block()
        return A.FunctionDecl(name, params, ret, body, start.line, start.col)

    def block(self):
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("'}'")
            stmts.append(self.statement())
        self.advance()
        return stmts

    # statements

    def statement(self):
        t = self.tok
        if t.kind == "kw":
            if t.text == "if":
                return self.if_stmt()
            if t.text == "while":
                self.advance()
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                return A.While(t.line, t.col, cond, self.block())
            if t.text == "return":
                self.advance()
                value = None
                if not self.at(";"):
                    value = self.expr()
                self.expect(";")
                return A.Return(t.line, t.col, value)
            if t.text == "assert":
                self.advance()
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                self.expect(";")
                return A.Assert(t.line, t.col, cond)
            if t.text == "abort":
                self.advance()
                self.expect("(")
                self.expect(")")
                self.expect(";")
                return A.Abort(t.line, t.col)
            self.fail("statement")
        if t.kind == "ident":
            nxt = self.peek()
            if nxt.text in ("=", ":") and nxt.kind == "op":
                self.advance()
                declared = None
                if self.at(":"):
                    self.advance()
                    declared = self.type_name()
                self.expect("=")
                value = self.expr()
                self.expect(";")
                return A.Assign(t.line, t.col, t.text, declared, value)
            if nxt.text == "(" and nxt.kind == "op":
                call = self.primary()
                self.expect(";")
                return A.ExprStmt(t.line, t.col, call)
        self.fail("statement")

    def if_stmt(self):
        t = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse = []
        if self.at("else"):
            self.advance()
            if self.at("if"):
                orelse = [self.if_stmt()]
            else:
                orelse = self.block()
        return A.If(t.line, t.col, cond, then, orelse)

    # expressions

    def expr(self):
        return self.binary(0)

    def binary(self, level):
        if level == len(BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.advance()
            right = self.binary(level + 1)
            left = A.Binary(t.line, t.col, t.text, left, right)
        return left

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in ("-", "~", "!"):
            self.advance()
            operand = self.unary()
            if t.text == "-" and isinstance(operand, A.IntLit):
                return A.IntLit(t.line, t.col, -operand.value)
            return A.Unary(t.line, t.col, t.text, operand)
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while self.at("as"):
            t = self.advance()
            e = A.Cast(t.line, t.col, e, self.type_name())
        return e

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return A.IntLit(t.line, t.col, int(t.text, 0))
        if t.kind == "kw":
            if t.text in ("true", "false"):
                self.advance()
                return A.BoolLit(t.line, t.col, t.text == "true")
            if t.text == "input":
                self.advance()
                self.expect("(")
                w = self.tok
                if w.kind != "num" or int(w.text, 0) not in INPUT_WIDTHS:
                    self.fail("input width 8, 16 or 32")
                self.advance()
                self.expect(")")
                return A.Input(t.line, t.col, int(w.text, 0))
            if t.text == "choose_concrete":
                self.advance()
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return A.ChooseConcrete(t.line, t.col, inner)
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.at(","):
                            break
                        self.advance()
                self.expect(")")
                return A.Call(t.line, t.col, t.text, args)
            return A.Name(t.line, t.col, t.text)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expression")


class Checker:
    """Resolves names and assigns a type to every expression node."""

    def __init__(self, functions):
        self.functions = {}
        for f in functions:
            if f.name in self.functions:
                raise MiniSyntaxError(f.line, f.col, "a unique function name", f.name)
            self.functions[f.name] = f
        self.fn = None

    def check(self):
        main = self.functions.get("main")
        if main is None:
            raise UnknownIdentifier("main", 1, 1)
        if main.params:
            raise TypeMismatch("main takes no parameters", main.line, main.col)
        for f in self.functions.values():
            self.fn = f
            f.var_types = {}
            for name, ty in f.params:
                if name in f.var_types:
                    raise TypeMismatch(f"duplicate parameter {name!r}", f.line, f.col)
                f.var_types[name] = ty
            self.stmts(f.body)

    def stmts(self, body):
        for s in body:
            self.stmt(s)

    def stmt(self, s):
        f = self.fn
        if isinstance(s, A.Assign):
            known = f.var_types.get(s.target)
            if s.declared is not None and known is not None and known != s.declared:
                raise TypeMismatch(f"{s.target!r} already has type {known}", s.line, s.col)
            ty = s.declared or known
            if ty is None:
                ty = self.infer(s.value) or I32
            self.coerce(s.value, ty)
            f.var_types[s.target] = ty
        elif isinstance(s, A.If):
            self.coerce(s.cond, BOOL)
            self.stmts(s.then)
            self.stmts(s.orelse)
        elif isinstance(s, A.While):
            self.coerce(s.cond, BOOL)
            self.stmts(s.body)
        elif isinstance(s, A.Assert):
            self.coerce(s.cond, BOOL)
        elif isinstance(s, A.Return):
            if s.value is None:
                if f.ret is not None:
                    raise TypeMismatch(f"{f.name} must return {f.ret}", s.line, s.col)
            else:
                if f.ret is None:
                    raise TypeMismatch(f"{f.name} returns no value", s.line, s.col)
                self.coerce(s.value, f.ret)
        elif isinstance(s, A.ExprStmt):
            self.call(s.expr, allow_void=True)

    def mismatch(self, e, want, got):
        raise TypeMismatch(f"expected {want}, found {got}", e.line, e.col)

    def infer(self, e):
        """Type of e, or None for an untyped integer literal expression."""
        if e.ty is not None:
            return e.ty
        if isinstance(e, A.IntLit):
            return None
        if isinstance(e, A.Name):
            ty = self.fn.var_types.get(e.ident)
            if ty is None:
                raise UnknownIdentifier(e.ident, e.line, e.col)
            e.ty = ty
            return ty
        if isinstance(e, A.Unary):
            if e.op == "!":
                self.coerce(e.operand, BOOL)
                e.ty = BOOL
                return BOOL
            ty = self.infer(e.operand)
            if ty is None:
                return None
            if ty == BOOL:
                self.mismatch(e, "an integer operand", ty)
            e.ty = ty
            return ty
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Cast):
            if e.target == BOOL:
                raise TypeMismatch("cannot cast to bool; compare instead", e.line, e.col)
            if self.infer(e.operand) is None:
                self.coerce(e.operand, I32)
            e.ty = e.target
            return e.ty
        if isinstance(e, A.Call):
            return self.call(e)
        if isinstance(e, A.Input):
            e.ty = IntType(e.width, False)
            return e.ty
        if isinstance(e, A.ChooseConcrete):
            ty = self.infer(e.operand)
            if ty is None:
                ty = I32
                self.coerce(e.operand, ty)
            e.ty = ty
            return ty
        raise AssertionError(e)

    def binary(self, e):
        if e.op in LOGIC_OPS:
            self.coerce(e.left, BOOL)
            self.coerce(e.right, BOOL)
            e.ty = BOOL
            return BOOL
        lt = self.infer(e.left)
        rt = self.infer(e.right)
        if lt is None and rt is None:
            if e.op in EQUALITY_OPS or e.op in ORDER_OPS:
                lt = rt = I32
            else:
                return None
        ty = lt or rt
        self.coerce(e.left, ty)
        self.coerce(e.right, ty)
        if ty == BOOL and (e.op in ARITH_OPS or e.op in ORDER_OPS):
            self.mismatch(e, "integer operands", ty)
        e.ty = BOOL if (e.op in EQUALITY_OPS or e.op in ORDER_OPS) else ty
        return e.ty

    def call(self, e, allow_void=False):
        f = self.functions.get(e.func)
        if f is None:
            raise UnknownIdentifier(e.func, e.line, e.col)
        if len(e.args) != len(f.params):
            raise TypeMismatch(f"{e.func} takes {len(f.params)} arguments, "
                               f"got {len(e.args)}", e.line, e.col)
        for arg, (_, pty) in zip(e.args, f.params):
            self.coerce(arg, pty)
        if f.ret is None and not allow_void:
            raise TypeMismatch(f"{e.func} returns no value", e.line, e.col)
        e.ty = f.ret
        return f.ret

    def coerce(self, e, ty):
        got = self.infer(e)
        if got is not None:
            if got != ty:
                self.mismatch(e, ty, got)
            return
        # untyped literal expression: push the type down to the leaves
        if isinstance(e, A.IntLit):
            if not ty.fits(e.value):
                raise TypeMismatch(f"literal {e.value} does not fit {ty}", e.line, e.col)
            e.ty = ty
        elif isinstance(e, A.Unary):
            if ty == BOOL:
                self.mismatch(e, ty, "integer")
            self.coerce(e.operand, ty)
            e.ty = ty
        elif isinstance(e, A.Binary):
            if ty == BOOL and e.op in ARITH_OPS:
                self.mismatch(e, ty, "integer")
            self.coerce(e.left, ty)
            self.coerce(e.right, ty)
            e.ty = ty
        else:
            raise AssertionError(e)


def parse(source):
    """Parse and type-check a SourceProgram (or plain text) into an Ast."""
    if isinstance(source, str):
        source = A.SourceProgram(source)
    funcs = Parser(source.text).program()
    Checker(funcs).check()
    return A.Ast(funcs, source.origin)
