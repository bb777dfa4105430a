from .ast import (BOOL, Ast, IntType, LangError, MiniSyntaxError, SourceProgram,
                  TypeMismatch, UnknownIdentifier)
from .ir import Address, IrProgram, branch_addresses
from .lower import compile_source, load, lower
from .parser import parse

__all__ = ["Address", "Ast", "BOOL", "IntType", "IrProgram", "LangError",
           "MiniSyntaxError", "SourceProgram", "TypeMismatch", "UnknownIdentifier",
           "branch_addresses", "compile_source", "load", "lower", "parse"]
