"""Basic-block IR. Expressions are pure; effects live in instructions."""
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .ast import BOOL, IntType


class Address(NamedTuple):
    function_index: int
    block_index: int

    def __str__(self):
        return f"f{self.function_index}.b{self.block_index}"

    @classmethod
    def parse(cls, text):
        f, b = text.strip().split(".")
        if not (f.startswith("f") and b.startswith("b")):
            raise ValueError(f"bad address {text!r}")
        return cls(int(f[1:]), int(b[1:]))


# expressions

@dataclass(frozen=True)
class IConst:
    value: int  # unsigned representation
    ty: IntType

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class ISlot:
    slot: int
    ty: IntType
    name: str = ""

    def __str__(self):
        return self.name or f"%{self.slot}"


@dataclass(frozen=True)
class IUnary:
    op: str  # neg, not
    a: object
    ty: IntType

    def __str__(self):
        return f"({self.op} {self.a})"


@dataclass(frozen=True)
class IBinary:
    # add sub mul div rem and or xor shl shr eq ne lt le gt ge;
    # signedness comes from the operand type
    op: str
    a: object
    b: object
    ty: IntType

    def __str__(self):
        return f"({self.op} {self.a} {self.b})"


@dataclass(frozen=True)
class ICast:
    a: object
    ty: IntType

    def __str__(self):
        return f"({self.a} as {self.ty})"


@dataclass(frozen=True)
class IChoose:
    a: object
    ty: IntType

    def __str__(self):
        return f"(choose_concrete {self.a})"


def operand_type(e):
    """Type the operation is carried out in (operand type for comparisons)."""
    if isinstance(e, IBinary):
        return e.a.ty
    return e.ty


# instructions

@dataclass(frozen=True)
class AssignI:
    slot: int
    value: object

    def __str__(self):
        return f"%{self.slot} = {self.value}"


@dataclass(frozen=True)
class InputI:
    slot: int
    width: int

    def __str__(self):
        return f"%{self.slot} = input({self.width})"


@dataclass(frozen=True)
class CallI:
    slot: Optional[int]
    func: int
    args: tuple

    def __str__(self):
        args = ", ".join(map(str, self.args))
        lhs = f"%{self.slot} = " if self.slot is not None else ""
        return f"{lhs}call f{self.func}({args})"


# terminators

@dataclass(frozen=True)
class Jump:
    target: Address

    def __str__(self):
        return f"jump {self.target}"


@dataclass(frozen=True)
class Branch:
    cond: object
    if_true: Address
    if_false: Address

    def __str__(self):
        return f"branch {self.cond} {self.if_true} {self.if_false}"


@dataclass(frozen=True)
class ReturnT:
    value: Optional[object]

    def __str__(self):
        return "return" if self.value is None else f"return {self.value}"


@dataclass(frozen=True)
class AbortT:
    def __str__(self):
        return "abort"


@dataclass(frozen=True)
class AssertFailT:
    def __str__(self):
        return "assert_fail"


TERMINATORS = (Jump, Branch, ReturnT, AbortT, AssertFailT)


@dataclass
class BasicBlock:
    address: Address
    instrs: list = field(default_factory=list)
    term: object = None


@dataclass
class Function:
    name: str
    index: int
    params: tuple  # slot numbers of the parameters
    slot_types: list
    slot_names: list
    ret: Optional[IntType]
    blocks: list

    @property
    def nslots(self):
        return len(self.slot_types)


@dataclass
class IrProgram:
    functions: list
    main_index: int
    origin: str = "<memory>"
    _compiled: object = field(default=None, repr=False, compare=False)

    @property
    def entry(self):
        return Address(self.main_index, 0)

    @property
    def blocks(self):
        return [b for f in self.functions for b in f.blocks]

    def block(self, addr):
        return self.functions[addr.function_index].blocks[addr.block_index]

    @property
    def input_sites(self):
        """Static input sites as (address, width), in lowering order."""
        out = []
        for b in self.blocks:
            for ins in b.instrs:
                if isinstance(ins, InputI):
                    out.append((b.address, ins.width))
        return out

    @property
    def input_widths(self):
        return [w for _, w in self.input_sites]

    def branch_blocks(self):
        return [b for b in self.blocks if isinstance(b.term, Branch)]

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_compiled"] = None
        return state

    def dump(self):
        return "\n".join(f"{b.address}: {b.term}" for b in self.blocks)


def branch_addresses(p):
    """All Branch arm addresses of p, each once, in program order."""
    seen = {}
    for b in p.branch_blocks():
        seen.setdefault(b.term.if_true, None)
        seen.setdefault(b.term.if_false, None)
    return list(seen)


def is_bool(ty):
    return ty == BOOL
