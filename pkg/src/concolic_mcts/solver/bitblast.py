"""Tseitin bit-blasting of bit-vector expressions to CNF.

Variable 1 is the constant true, so TRUE = 1 and FALSE = -1 are ordinary
literals. Gates are structurally hashed. Words are lists of literals,
least significant bit first.
"""

TRUE = 1
FALSE = -1


class Blaster:
    def __init__(self):
        self.nvars = 1
        self.clauses = [[TRUE]]
        self.input_bits = {}  # ordinal -> list of literals
        self._and = {}
        self._xor = {}
        self._memo = {}

    def new_var(self):
        self.nvars += 1
        return self.nvars

    def declare(self, ordinal, width):
        bits = self.input_bits.get(ordinal)
        if bits is None:
            bits = [self.new_var() for _ in range(width)]
            self.input_bits[ordinal] = bits
        return bits

    # gates

    def AND(self, a, b):
        if a == FALSE or b == FALSE or a == -b:
            return FALSE
        if a == TRUE or a == b:
            return b
        if b == TRUE:
            return a
        key = (a, b) if a < b else (b, a)
        v = self._and.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-v, a], [-v, b], [v, -a, -b]]
            self._and[key] = v
        return v

    def OR(self, a, b):
        return -self.AND(-a, -b)

    def XOR(self, a, b):
        if a == FALSE:
            return b
        if b == FALSE:
            return a
        if a == TRUE:
            return -b
        if b == TRUE:
            return -a
        if a == b:
            return FALSE
        if a == -b:
            return TRUE
        sign = 1
        if a < 0:
            a, sign = -a, -sign
        if b < 0:
            b, sign = -b, -sign
        key = (a, b) if a < b else (b, a)
        v = self._xor.get(key)
        if v is None:
            v = self.new_var()
            self.clauses += [[-v, a, b], [-v, -a, -b], [v, -a, b], [v, a, -b]]
            self._xor[key] = v
        return v * sign

    def MUX(self, s, t, e):
        if s == TRUE or t == e:
            return t
        if s == FALSE:
            return e
        return self.OR(self.AND(s, t), self.AND(-s, e))

    def OR_all(self, lits):
        out = FALSE
        for lit in lits:
            out = self.OR(out, lit)
        return out

    def AND_all(self, lits):
        out = TRUE
        for lit in lits:
            out = self.AND(out, lit)
        return out

    # words

    def add(self, a, b, carry=FALSE):
        out = []
        for x, y in zip(a, b):
            t = self.XOR(x, y)
            out.append(self.XOR(t, carry))
            carry = self.OR(self.AND(x, y), self.AND(carry, t))
        return out, carry

    def neg(self, a):
        return self.add([-x for x in a], [FALSE] * len(a), TRUE)[0]

    def sub(self, a, b):
        # carry out is 1 iff a >= b (unsigned)
        return self.add(a, [-y for y in b], TRUE)

    def mul(self, a, b):
        w = len(a)
        acc = [FALSE] * w
        for i, bi in enumerate(b):
            if bi == FALSE:
                continue
            part = [FALSE] * i + [self.AND(x, bi) for x in a[:w - i]]
            acc = self.add(acc, part)[0]
        return acc

    def udivrem(self, a, b):
        w = len(a)
        r = [FALSE] * w
        q = [FALSE] * w
        bx = b + [FALSE]
        for i in reversed(range(w)):
            rx = [a[i]] + r
            diff, ge = self.sub(rx, bx)
            q[i] = ge
            r = [self.MUX(ge, d, x) for d, x in zip(diff, rx)][:w]
        return q, r

    def mux_word(self, s, t, e):
        return [self.MUX(s, x, y) for x, y in zip(t, e)]

    def sdivrem(self, a, b):
        sa, sb = a[-1], b[-1]
        ua = self.mux_word(sa, self.neg(a), a)
        ub = self.mux_word(sb, self.neg(b), b)
        q, r = self.udivrem(ua, ub)
        q = self.mux_word(self.XOR(sa, sb), self.neg(q), q)
        r = self.mux_word(sa, self.neg(r), r)
        return q, r

    def shift(self, a, b, kind):
        w = len(a)
        fill = a[-1] if kind == "ashr" else FALSE
        x = list(a)
        k = 0
        while (1 << k) < w:
            s = 1 << k
            if kind == "shl":
                moved = [FALSE] * s + x[:w - s]
            else:
                moved = x[s:] + [fill] * s
            x = self.mux_word(b[k], moved, x)
            k += 1
        over = self.OR_all(b[k:])
        return self.mux_word(over, [fill] * w, x)

    def ult(self, a, b):
        return -self.sub(a, b)[1]

    def eq(self, a, b):
        return self.AND_all(-self.XOR(x, y) for x, y in zip(a, b))

    # expressions

    def word(self, e):
        key = id(e)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._word(e)
        self._memo[key] = (e, out)  # keep e alive so ids stay unique
        return out

    def _word(self, e):
        op = e.op
        w = e.width
        if op == "const":
            return [TRUE if (e.val >> i) & 1 else FALSE for i in range(w)]
        if op == "var":
            return list(self.declare(e.val, w))
        args = [self.word(x) for x in e.args]
        if op == "add":
            return self.add(*args)[0]
        if op == "sub":
            return self.sub(*args)[0]
        if op == "mul":
            return self.mul(*args)
        if op == "and":
            return [self.AND(x, y) for x, y in zip(*args)]
        if op == "or":
            return [self.OR(x, y) for x, y in zip(*args)]
        if op == "xor":
            return [self.XOR(x, y) for x, y in zip(*args)]
        if op == "not":
            return [-x for x in args[0]]
        if op == "neg":
            return self.neg(args[0])
        if op in ("udiv", "urem"):
            q, r = self.udivrem(*args)
            return q if op == "udiv" else r
        if op in ("sdiv", "srem"):
            q, r = self.sdivrem(*args)
            return q if op == "sdiv" else r
        if op in ("shl", "lshr", "ashr"):
            return self.shift(args[0], args[1], op)
        if op == "eq":
            return [self.eq(*args)]
        if op == "ult":
            return [self.ult(*args)]
        if op == "ule":
            return [-self.ult(args[1], args[0])]
        if op in ("slt", "sle"):
            a, b = args
            a = a[:-1] + [-a[-1]]
            b = b[:-1] + [-b[-1]]
            return [self.ult(a, b)] if op == "slt" else [-self.ult(b, a)]
        if op == "zext":
            a = args[0]
            return a + [FALSE] * (w - len(a))
        if op == "sext":
            a = args[0]
            return a + [a[-1]] * (w - len(a))
        if op == "trunc":
            return args[0][:w]
        if op == "bit":
            return [args[0][e.val]]
        raise ValueError(op)

    def assert_true(self, e):
        lit = self.word(e)[0]
        self.clauses.append([lit])
        return lit
