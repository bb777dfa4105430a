"""Hash-consed bit-vector expressions.

Nodes are interned, so structural equality is identity. The constructor
functions fold constants and apply a handful of local rewrites that keep
path conditions small (offset reassociation, equality normalisation,
extension stripping).
"""
import weakref

_table = weakref.WeakValueDictionary()

ARITH = ("add", "sub", "mul", "udiv", "urem", "sdiv", "srem",
         "and", "or", "xor", "shl", "lshr", "ashr")
COMPARE = ("eq", "ult", "ule", "slt", "sle")
UNARY = ("not", "neg")
EXTEND = ("zext", "sext", "trunc")


class BV:
    __slots__ = ("op", "width", "args", "val", "__weakref__")

    def __repr__(self):
        return to_sexpr(self)

    @property
    def is_const(self):
        return self.op == "const"


def _mk(op, width, args=(), val=None):
    key = (op, width, val) + tuple(id(a) for a in args)
    node = _table.get(key)
    if node is None:
        node = object.__new__(BV)
        node.op = op
        node.width = width
        node.args = args
        node.val = val
        _table[key] = node
    return node


def mask(width):
    return (1 << width) - 1


def to_signed(v, width):
    sb = 1 << (width - 1)
    return (v ^ sb) - sb


def const(width, value):
    return _mk("const", width, (), value & mask(width))


def var(ordinal, width):
    return _mk("var", width, (), ordinal)


TRUE = const(1, 1)
FALSE = const(1, 0)


def boolean(b):
    return TRUE if b else FALSE


# scalar semantics shared by folding and evaluation (SMT-LIB conventions
# for division by zero)

def apply_op(op, width, vals, param=None):
    m = mask(width)
    if op in COMPARE:
        a, b = vals
        w = param
        if op == "eq":
            return int(a == b)
        if op == "ult":
            return int(a < b)
        if op == "ule":
            return int(a <= b)
        if op == "slt":
            return int(to_signed(a, w) < to_signed(b, w))
        return int(to_signed(a, w) <= to_signed(b, w))
    if op == "not":
        return vals[0] ^ m
    if op == "neg":
        return (-vals[0]) & m
    if op == "zext":
        return vals[0]
    if op == "sext":
        return to_signed(vals[0], param) & m
    if op == "trunc":
        return vals[0] & m
    if op == "bit":
        return (vals[0] >> param) & 1
    a, b = vals
    if op == "add":
        return (a + b) & m
    if op == "sub":
        return (a - b) & m
    if op == "mul":
        return (a * b) & m
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "udiv":
        return a // b if b else m
    if op == "urem":
        return a % b if b else a
    if op == "sdiv":
        sa, sb = to_signed(a, width), to_signed(b, width)
        if sb == 0:
            return 1 if sa < 0 else m
        q = abs(sa) // abs(sb)
        return (-q if (sa < 0) != (sb < 0) else q) & m
    if op == "srem":
        sa, sb = to_signed(a, width), to_signed(b, width)
        if sb == 0:
            return a
        r = abs(sa) % abs(sb)
        return (-r if sa < 0 else r) & m
    if op == "shl":
        return (a << b) & m if b < width else 0
    if op == "lshr":
        return a >> b
    if op == "ashr":
        return (to_signed(a, width) >> min(b, width)) & m
    raise ValueError(op)


def _check_same(a, b):
    if a.width != b.width:
        raise ValueError(f"width mismatch {a.width} vs {b.width}")


# constructors

def binop(op, a, b):
    _check_same(a, b)
    w = a.width
    if a.is_const and b.is_const:
        return const(w, apply_op(op, w, (a.val, b.val)))
    return _REWRITE.get(op, _plain)(op, a, b)


def _plain(op, a, b):
    return _mk(op, a.width, (a, b))


def _commutes(a, b):
    # constants go right
    if a.is_const and not b.is_const:
        return b, a
    return a, b


def _add(op, a, b):
    a, b = _commutes(a, b)
    w = a.width
    if b.is_const:
        if b.val == 0:
            return a
        if a.op == "add" and a.args[1].is_const:
            return _add(op, a.args[0], const(w, a.args[1].val + b.val))
    return _mk("add", w, (a, b))


def _sub(op, a, b):
    if a is b:
        return const(a.width, 0)
    if b.is_const:
        return _add("add", a, const(a.width, -b.val))
    return _mk("sub", a.width, (a, b))


def _mul(op, a, b):
    a, b = _commutes(a, b)
    if b.is_const:
        if b.val == 0:
            return b
        if b.val == 1:
            return a
    return _mk("mul", a.width, (a, b))


def _and(op, a, b):
    a, b = _commutes(a, b)
    if a is b:
        return a
    if b.is_const:
        if b.val == 0:
            return b
        if b.val == mask(a.width):
            return a
    return _mk("and", a.width, (a, b))


def _or(op, a, b):
    a, b = _commutes(a, b)
    if a is b:
        return a
    if b.is_const:
        if b.val == 0:
            return a
        if b.val == mask(a.width):
            return b
    return _mk("or", a.width, (a, b))


def _xor(op, a, b):
    a, b = _commutes(a, b)
    w = a.width
    if a is b:
        return const(w, 0)
    if b.is_const:
        if b.val == 0:
            return a
        if w == 1:
            return bnot(a)
        if a.op == "xor" and a.args[1].is_const:
            return _xor(op, a.args[0], const(w, a.args[1].val ^ b.val))
    return _mk("xor", w, (a, b))


def _shift(op, a, b):
    if b.is_const and b.val == 0:
        return a
    if b.is_const and b.val >= a.width and op != "ashr":
        return const(a.width, 0)
    return _mk(op, a.width, (a, b))


def _div(op, a, b):
    if b.is_const and b.val == 1:
        return a if op in ("udiv", "sdiv") else const(a.width, 0)
    return _mk(op, a.width, (a, b))


_REWRITE = {"add": _add, "sub": _sub, "mul": _mul, "and": _and, "or": _or,
            "xor": _xor, "shl": _shift, "lshr": _shift, "ashr": _shift,
            "udiv": _div, "sdiv": _div, "urem": _div, "srem": _div}


def bnot(a):
    """Bitwise not; logical negation on width-1 values."""
    if a.is_const:
        return const(a.width, a.val ^ mask(a.width))
    if a.op == "not":
        return a.args[0]
    return _mk("not", a.width, (a,))


def neg(a):
    if a.is_const:
        return const(a.width, -a.val)
    if a.op == "neg":
        return a.args[0]
    return _mk("neg", a.width, (a,))


def zext(a, width):
    if width == a.width:
        return a
    if width < a.width:
        raise ValueError("zext to narrower width")
    if a.is_const:
        return const(width, a.val)
    if a.op == "zext":
        a = a.args[0]
    return _mk("zext", width, (a,), a.width)


def sext(a, width):
    if width == a.width:
        return a
    if width < a.width:
        raise ValueError("sext to narrower width")
    if a.is_const:
        return const(width, to_signed(a.val, a.width))
    if a.op == "sext":
        a = a.args[0]
    return _mk("sext", width, (a,), a.width)


def trunc(a, width):
    if width == a.width:
        return a
    if width > a.width:
        raise ValueError("trunc to wider width")
    if a.is_const:
        return const(width, a.val)
    if a.op in ("zext", "sext"):
        inner = a.args[0]
        if inner.width == width:
            return inner
        if inner.width > width:
            return trunc(inner, width)
    if a.op == "trunc":
        a = a.args[0]
    return _mk("trunc", width, (a,), a.width)


def bit(a, index):
    if not 0 <= index < a.width:
        raise ValueError("bit index out of range")
    if a.width == 1:
        return a
    if a.is_const:
        return const(1, a.val >> index)
    if a.op == "zext":
        inner = a.args[0]
        return bit(inner, index) if index < inner.width else FALSE
    return _mk("bit", 1, (a,), index)


def _ext_source(a, op):
    return a.args[0] if a.op == op else None


def eq(a, b):
    _check_same(a, b)
    if a is b:
        return TRUE
    if a.is_const and b.is_const:
        return boolean(a.val == b.val)
    a, b = _commutes(a, b)
    w = a.width
    if b.is_const:
        c = b.val
        if w == 1:
            return a if c else bnot(a)
        if a.op == "add" and a.args[1].is_const:
            return eq(a.args[0], const(w, c - a.args[1].val))
        if a.op == "sub" and a.args[0].is_const:
            return eq(a.args[1], const(w, a.args[0].val - c))
        if a.op == "xor" and a.args[1].is_const:
            return eq(a.args[0], const(w, c ^ a.args[1].val))
        if a.op == "not":
            return eq(a.args[0], const(w, c ^ mask(w)))
        if a.op == "neg":
            return eq(a.args[0], const(w, -c))
        if a.op == "zext":
            inner = a.args[0]
            if c > mask(inner.width):
                return FALSE
            return eq(inner, const(inner.width, c))
        if a.op == "sext":
            inner = a.args[0]
            low = c & mask(inner.width)
            if to_signed(low, inner.width) & mask(w) != c:
                return FALSE
            return eq(inner, const(inner.width, low))
    else:
        for op in ("zext", "sext"):
            x, y = _ext_source(a, op), _ext_source(b, op)
            if x is not None and y is not None and x.width == y.width:
                return eq(x, y)
    return _mk("eq", 1, (a, b), w)


def _signed_bounds(width):
    return -(1 << (width - 1)), (1 << (width - 1)) - 1


def _compare(op, a, b):
    _check_same(a, b)
    w = a.width
    if a.is_const and b.is_const:
        return boolean(apply_op(op, 1, (a.val, b.val), w))
    strict = op in ("ult", "slt")
    if a is b:
        return FALSE if strict else TRUE
    signed = op in ("slt", "sle")
    if signed:
        lo, hi = _signed_bounds(w)
        av = to_signed(a.val, w) if a.is_const else None
        bv = to_signed(b.val, w) if b.is_const else None
    else:
        lo, hi = 0, mask(w)
        av = a.val if a.is_const else None
        bv = b.val if b.is_const else None
    # trivially decided by the range of the type
    if strict:
        if bv == lo or av == hi:
            return FALSE
    else:
        if av == lo or bv == hi:
            return TRUE
    # comparisons against a narrower extended value
    ext = "sext" if signed else "zext"
    x, y = _ext_source(a, ext), _ext_source(b, ext)
    if x is not None and y is not None and x.width == y.width:
        return _compare(op, x, y)
    if (x is not None and b.is_const) or (y is not None and a.is_const):
        inner = x if x is not None else y
        n = inner.width
        nlo, nhi = _signed_bounds(n) if signed else (0, mask(n))
        cv = bv if x is not None else av
        if nlo <= cv <= nhi:
            c = const(n, cv)
            return _compare(op, inner, c) if x is not None else _compare(op, c, inner)
        # the constant lies outside the narrow range: decided
        if x is not None:
            return boolean(cv > nhi)
        return boolean(cv < nlo)
    return _mk(op, 1, (a, b), w)


def ult(a, b):
    return _compare("ult", a, b)


def ule(a, b):
    return _compare("ule", a, b)


def slt(a, b):
    return _compare("slt", a, b)


def sle(a, b):
    return _compare("sle", a, b)


def land(a, b):
    return binop("and", a, b)


def lor(a, b):
    return binop("or", a, b)


def ne(a, b):
    return bnot(eq(a, b))


BUILDERS = {
    "not": bnot, "neg": neg, "eq": eq, "ult": ult, "ule": ule, "slt": slt,
    "sle": sle,
}


def rebuild(e, args):
    """Construct a node like e over new arguments (re-simplifying)."""
    op = e.op
    if op in ARITH:
        return binop(op, *args)
    if op in BUILDERS:
        return BUILDERS[op](*args)
    if op == "zext":
        return zext(args[0], e.width)
    if op == "sext":
        return sext(args[0], e.width)
    if op == "trunc":
        return trunc(args[0], e.width)
    if op == "bit":
        return bit(args[0], e.val)
    raise ValueError(op)


def substitute(e, values, memo=None):
    """Replace var(ordinal) by const for ordinals in `values`."""
    if memo is None:
        memo = {}
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if e.op == "var":
        v = values.get(e.val)
        out = e if v is None else const(e.width, v)
    elif e.op == "const":
        out = e
    else:
        args = tuple(substitute(a, values, memo) for a in e.args)
        if all(x is y for x, y in zip(args, e.args)):
            out = e
        else:
            out = rebuild(e, args)
    memo[key] = out
    return out


def evaluate(e, values, memo=None):
    """Value of e under {ordinal: int}; missing ordinals read as 0."""
    if memo is None:
        memo = {}
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    op = e.op
    if op == "const":
        out = e.val
    elif op == "var":
        out = values.get(e.val, 0) & mask(e.width)
    else:
        vals = tuple(evaluate(a, values, memo) for a in e.args)
        param = e.val
        out = apply_op(op, e.width, vals, param)
    memo[key] = out
    return out


def variables(e, acc=None, seen=None):
    """Map of ordinal -> width for every var in e."""
    if acc is None:
        acc = {}
    if seen is None:
        seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if n.op == "var":
            acc[n.val] = n.width
        else:
            stack.extend(n.args)
    return acc


def size(e):
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) not in seen:
            seen.add(id(n))
            stack.extend(n.args)
    return len(seen)


# s-expression text form

def to_sexpr(e):
    op = e.op
    if op == "const":
        return f"(const {e.width} {e.val})"
    if op == "var":
        return f"(var {e.val} {e.width})"
    if op in EXTEND:
        return f"({op} {e.width} {to_sexpr(e.args[0])})"
    if op == "bit":
        return f"(bit {e.val} {to_sexpr(e.args[0])})"
    return "(" + " ".join([op] + [to_sexpr(a) for a in e.args]) + ")"


def _tokens(text):
    out = []
    for line in text.splitlines():
        line = line.split(";", 1)[0]
        out.extend(line.replace("(", " ( ").replace(")", " ) ").split())
    return out


def read_sexprs(text):
    """Parse text into nested lists of atoms."""
    toks = _tokens(text)
    pos = 0

    def item():
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("unexpected end of s-expression")
        t = toks[pos]
        pos += 1
        if t == "(":
            lst = []
            while True:
                if pos >= len(toks):
                    raise ValueError("missing ')'")
                if toks[pos] == ")":
                    pos += 1
                    return lst
                lst.append(item())
        if t == ")":
            raise ValueError("unexpected ')'")
        return t

    forms = []
    while pos < len(toks):
        forms.append(item())
    return forms


def from_form(form):
    if not isinstance(form, list) or not form:
        if form == "true":
            return TRUE
        if form == "false":
            return FALSE
        raise ValueError(f"bad expression {form!r}")
    op = form[0]
    if op == "const":
        return const(int(form[1], 0), int(form[2], 0))
    if op == "var":
        return var(int(form[1], 0), int(form[2], 0))
    if op in EXTEND:
        inner = from_form(form[2])
        return {"zext": zext, "sext": sext, "trunc": trunc}[op](inner, int(form[1]))
    if op == "bit":
        return bit(from_form(form[2]), int(form[1]))
    args = [from_form(f) for f in form[1:]]
    if op in ARITH:
        if len(args) != 2:
            raise ValueError(f"{op} takes two operands")
        return binop(op, *args)
    if op in BUILDERS:
        return BUILDERS[op](*args)
    if op == "ne":
        return ne(*args)
    raise ValueError(f"unknown operator {op!r}")


def parse_sexpr(text):
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise ValueError("expected exactly one expression")
    return from_form(forms[0])
