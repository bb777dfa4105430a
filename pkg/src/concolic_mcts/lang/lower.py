"""Lowering from the checked AST to the basic-block IR.

Every leaf condition becomes one Branch. Each Branch arm gets an address no
other Branch targets, adding a jump-only block where two arms would share a
destination, so trace addresses identify branch arms unambiguously.
"""
from . import ast as A
from .ast import BOOL, IntType
from .ir import (AbortT, Address, AssertFailT, AssignI, BasicBlock, Branch,
                 CallI, Function, IBinary, ICast, IChoose, IConst, InputI,
                 IrProgram, ISlot, IUnary, Jump, ReturnT)

BINOPS = {"+": "add", "-": "sub", "*": "mul", "/": "div", "%": "rem",
          "&": "and", "|": "or", "^": "xor", "<<": "shl", ">>": "shr",
          "==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}


class Label:
    __slots__ = ("block", "claimed")

    def __init__(self, block):
        self.block = block
        self.claimed = False


class FunctionLowerer:
    def __init__(self, decl, index, func_index):
        self.decl = decl
        self.index = index
        self.func_index = func_index
        self.blocks = []
        self.slot_types = []
        self.slot_names = []
        self.slots = {}
        for name, ty in decl.var_types.items():
            self.slots[name] = self.new_slot(ty, name)
        self.ntemps = 0
        self.cur = self.new_block()

    def new_slot(self, ty, name):
        self.slot_types.append(ty)
        self.slot_names.append(name)
        return len(self.slot_types) - 1

    def temp(self, ty):
        self.ntemps += 1
        return self.new_slot(ty, f"$t{self.ntemps}")

    def new_block(self):
        b = BasicBlock(Address(self.index, len(self.blocks)))
        self.blocks.append(b)
        return b

    def label(self):
        return Label(self.new_block())

    def block(self):
        # code after a terminator lands in a fresh, unreachable block
        if self.cur is None:
            self.cur = self.new_block()
        return self.cur

    def emit(self, instr):
        self.block().instrs.append(instr)

    def terminate(self, term):
        self.block().term = term
        self.cur = None

    def goto(self, label):
        if self.cur is not None:
            self.terminate(Jump(label.block.address))
        self.cur = None

    def enter(self, label):
        self.cur = label.block

    def lower(self):
        self.stmts(self.decl.body)
        if self.cur is not None and self.cur.term is None:
            self.terminate(self.default_return())
        for b in self.blocks:
            if b.term is None:
                b.term = self.default_return()
        params = tuple(self.slots[name] for name, _ in self.decl.params)
        return Function(self.decl.name, self.index, params, self.slot_types,
                        self.slot_names, self.decl.ret, self.blocks)

    def default_return(self):
        ret = self.decl.ret
        return ReturnT(None if ret is None else IConst(0, ret))

    # statements

    def stmts(self, body):
        for s in body:
            self.stmt(s)

    def stmt(self, s):
        if isinstance(s, A.Assign):
            slot = self.slots[s.target]
            v = s.value
            if isinstance(v, A.Input):
                self.emit(InputI(slot, v.width))
            elif isinstance(v, A.Call):
                self.emit(CallI(slot, self.func_index[v.func], self.args(v)))
            else:
                self.emit(AssignI(slot, self.expr(v)))
        elif isinstance(s, A.If):
            then, join = self.label(), None
            orelse = self.label() if s.orelse else None
            join = self.label()
            self.cond(s.cond, then, orelse or join)
            self.enter(then)
            self.stmts(s.then)
            self.goto(join)
            if orelse is not None:
                self.enter(orelse)
                self.stmts(s.orelse)
                self.goto(join)
            self.enter(join)
        elif isinstance(s, A.While):
            head = self.label()
            self.goto(head)
            self.enter(head)
            body, done = self.label(), self.label()
            self.cond(s.cond, body, done)
            self.enter(body)
            self.stmts(s.body)
            self.goto(head)
            self.enter(done)
        elif isinstance(s, A.Return):
            value = None if s.value is None else self.expr(s.value)
            self.terminate(ReturnT(value))
        elif isinstance(s, A.Assert):
            ok, fail = self.label(), self.label()
            self.cond(s.cond, ok, fail)
            fail.block.term = AssertFailT()
            self.enter(ok)
        elif isinstance(s, A.Abort):
            self.terminate(AbortT())
        elif isinstance(s, A.ExprStmt):
            call = s.expr
            slot = None if call.ty is None else self.temp(call.ty)
            self.emit(CallI(slot, self.func_index[call.func], self.args(call)))
        else:
            raise AssertionError(s)

    def args(self, call):
        return tuple(self.expr(a) for a in call.args)

    # conditions

    def arm(self, label):
        if not label.claimed:
            label.claimed = True
            return label.block.address
        tramp = self.new_block()
        tramp.term = Jump(label.block.address)
        return tramp.address

    def cond(self, e, on_true, on_false):
        if isinstance(e, A.Binary) and e.op == "&&":
            mid = self.label()
            self.cond(e.left, mid, on_false)
            self.enter(mid)
            self.cond(e.right, on_true, on_false)
        elif isinstance(e, A.Binary) and e.op == "||":
            mid = self.label()
            self.cond(e.left, on_true, mid)
            self.enter(mid)
            self.cond(e.right, on_true, on_false)
        elif isinstance(e, A.Unary) and e.op == "!":
            self.cond(e.operand, on_false, on_true)
        else:
            v = self.expr(e)
            self.terminate(Branch(v, self.arm(on_true), self.arm(on_false)))

    # expressions

    def expr(self, e):
        ty = e.ty
        if isinstance(e, A.IntLit):
            return IConst(e.value & ty.mask, ty)
        if isinstance(e, A.BoolLit):
            return IConst(int(e.value), BOOL)
        if isinstance(e, A.Name):
            return ISlot(self.slots[e.ident], ty, e.ident)
        if isinstance(e, A.Unary):
            return IUnary("neg" if e.op == "-" else "not", self.expr(e.operand), ty)
        if isinstance(e, A.Binary):
            if e.op in ("&&", "||"):
                return self.logic_value(e)
            left = self.expr(e.left)
            right = self.expr(e.right)
            return IBinary(BINOPS[e.op], left, right, ty)
        if isinstance(e, A.Cast):
            return ICast(self.expr(e.operand), ty)
        if isinstance(e, A.Call):
            slot = self.temp(ty)
            self.emit(CallI(slot, self.func_index[e.func], self.args(e)))
            return ISlot(slot, ty, self.slot_names[slot])
        if isinstance(e, A.Input):
            slot = self.temp(ty)
            self.emit(InputI(slot, e.width))
            return ISlot(slot, ty, self.slot_names[slot])
        if isinstance(e, A.ChooseConcrete):
            return IChoose(self.expr(e.operand), ty)
        raise AssertionError(e)

    def logic_value(self, e):
        slot = self.temp(BOOL)
        yes, no, join = self.label(), self.label(), self.label()
        self.cond(e, yes, no)
        self.enter(yes)
        self.emit(AssignI(slot, IConst(1, BOOL)))
        self.goto(join)
        self.enter(no)
        self.emit(AssignI(slot, IConst(0, BOOL)))
        self.goto(join)
        self.enter(join)
        return ISlot(slot, BOOL, self.slot_names[slot])


def lower(tree):
    """Lower a checked Ast to an IrProgram."""
    func_index = {f.name: i for i, f in enumerate(tree.functions)}
    funcs = [FunctionLowerer(f, i, func_index).lower()
             for i, f in enumerate(tree.functions)]
    return IrProgram(funcs, func_index["main"], tree.origin)


def compile_source(source):
    from .parser import parse
    return lower(parse(source))


def load(path):
    return compile_source(A.SourceProgram.from_file(path))


def unsigned_type(width):
    return IntType(width, False)
