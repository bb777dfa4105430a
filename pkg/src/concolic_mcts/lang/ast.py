"""Syntax tree and value types of the mini language."""
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class IntType:
    width: int
    signed: bool

    @property
    def name(self):
        if self.width == 1:
            return "bool"
        return ("i" if self.signed else "u") + str(self.width)

    @property
    def mask(self):
        return (1 << self.width) - 1

    def fits(self, value):
        if self.width == 1:
            return value in (0, 1)
        if self.signed:
            return -(1 << (self.width - 1)) <= value < (1 << (self.width - 1))
        return 0 <= value <= self.mask

    def __str__(self):
        return self.name


BOOL = IntType(1, False)
I32 = IntType(32, True)
TYPES = {
    "bool": BOOL,
    "i8": IntType(8, True), "u8": IntType(8, False),
    "i16": IntType(16, True), "u16": IntType(16, False),
    "i32": I32, "u32": IntType(32, False),
}
INPUT_WIDTHS = (8, 16, 32)


class LangError(Exception):
    def __init__(self, message, line=0, col=0):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class MiniSyntaxError(LangError):
    def __init__(self, line, col, expected, found=""):
        msg = f"expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg, line, col)
        self.expected = expected
        self.found = found


class UnknownIdentifier(LangError):
    def __init__(self, name, line=0, col=0):
        super().__init__(f"unknown identifier {name!r}", line, col)
        self.name = name


class TypeMismatch(LangError):
    pass


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<memory>"

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("empty program text")

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(fh.read(), str(path))


# Expressions. `ty` is filled in by the checker.

@dataclass(eq=False)
class Expr:
    line: int
    col: int


@dataclass(eq=False)
class IntLit(Expr):
    value: int
    ty: Optional[IntType] = None


@dataclass(eq=False)
class BoolLit(Expr):
    value: bool
    ty: Optional[IntType] = BOOL


@dataclass(eq=False)
class Name(Expr):
    ident: str
    ty: Optional[IntType] = None


@dataclass(eq=False)
class Unary(Expr):
    op: str
    operand: Expr
    ty: Optional[IntType] = None


@dataclass(eq=False)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    ty: Optional[IntType] = None


@dataclass(eq=False)
class Cast(Expr):
    operand: Expr
    target: IntType
    ty: Optional[IntType] = None


@dataclass(eq=False)
class Call(Expr):
    func: str
    args: list
    ty: Optional[IntType] = None


@dataclass(eq=False)
class Input(Expr):
    width: int
    ty: Optional[IntType] = None


@dataclass(eq=False)
class ChooseConcrete(Expr):
    operand: Expr
    ty: Optional[IntType] = None


# Statements

@dataclass(eq=False)
class Stmt:
    line: int
    col: int


@dataclass(eq=False)
class Assign(Stmt):
    target: str
    declared: Optional[IntType]
    value: Expr


@dataclass(eq=False)
class If(Stmt):
    cond: Expr
    then: list
    orelse: list


@dataclass(eq=False)
class While(Stmt):
    cond: Expr
    body: list


@dataclass(eq=False)
class Return(Stmt):
    value: Optional[Expr]


@dataclass(eq=False)
class Assert(Stmt):
    cond: Expr


@dataclass(eq=False)
class Abort(Stmt):
    pass


@dataclass(eq=False)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(eq=False)
class FunctionDecl:
    name: str
    params: list  # (name, IntType) pairs
    ret: Optional[IntType]
    body: list
    line: int = 0
    col: int = 0
    var_types: dict = field(default_factory=dict)


@dataclass(eq=False)
class Ast:
    functions: list
    origin: str = "<memory>"

    def function(self, name):
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)


def walk_exprs(e):
    """Yield e and every sub-expression, parents first."""
    yield e
    if isinstance(e, Unary):
        yield from walk_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from walk_exprs(e.left)
        yield from walk_exprs(e.right)
    elif isinstance(e, (Cast, ChooseConcrete)):
        yield from walk_exprs(e.operand)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_exprs(a)


def walk_stmts(stmts):
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.orelse)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)


def stmt_exprs(s):
    if isinstance(s, Assign):
        return [s.value]
    if isinstance(s, (If, While, Assert)):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, ExprStmt):
        return [s.expr]
    return []
