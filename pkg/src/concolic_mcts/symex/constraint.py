"""Path conditions as persistent, prefix-sharing conjunct lists."""
from . import expr as E


class Constraint:
    """Immutable conjunction; `extend` shares the prefix with its parent.

    The solver stores a reduced form of each prefix in `_red` and its
    model cache in `_cache`, so extending a solved path condition by one
    conjunct only costs the new conjunct.
    """
    __slots__ = ("parent", "conjunct", "length", "_red", "_cache", "_vars")

    def __init__(self, parent=None, conjunct=None):
        self.parent = parent
        self.conjunct = conjunct
        self.length = 0 if parent is None else parent.length + 1
        self._red = None
        self._cache = None
        self._vars = None

    @classmethod
    def of(cls, conjuncts):
        c = TRUE_PC
        for x in conjuncts:
            c = c.extend(x)
        return c

    def __len__(self):
        return self.length

    def __iter__(self):
        return iter(self.conjuncts)

    @property
    def conjuncts(self):
        out = []
        node = self
        while node.parent is not None:
            out.append(node.conjunct)
            node = node.parent
        out.reverse()
        return tuple(out)

    def contains(self, c):
        node = self
        while node.parent is not None:
            if node.conjunct is c:
                return True
            node = node.parent
        return False

    def extend(self, c):
        """self ∧ c, dropping true and already present conjuncts."""
        if c.width != 1:
            raise ValueError("conjuncts must have width 1")
        if c is E.TRUE or self.contains(c):
            return self
        return Constraint(self, c)

    def variables(self):
        """Map of ordinal -> width; computed once per prefix. Do not mutate."""
        chain = []
        node = self
        while node._vars is None and node.parent is not None:
            chain.append(node)
            node = node.parent
        acc = node._vars if node._vars is not None else {}
        for n in reversed(chain):
            acc = E.variables(n.conjunct, dict(acc))
            n._vars = acc
        return acc

    def holds(self, values):
        memo = {}
        return all(E.evaluate(c, values, memo) == 1 for c in self.conjuncts)

    def __repr__(self):
        return f"Constraint({len(self)} conjuncts)"

    def to_text(self, widths=None):
        lines = []
        if widths is not None:
            lines.append("(sites " + " ".join(str(w) for w in widths) + ")")
        for c in self.conjuncts:
            lines.append(f"(assert {E.to_sexpr(c)})")
        return "\n".join(lines) + "\n"


TRUE_PC = Constraint()


def parse_constraint(text):
    """Read the text form: optional `(sites w...)` then `(assert e)` forms.

    Returns (constraint, widths or None).
    """
    widths = None
    c = TRUE_PC
    for form in E.read_sexprs(text):
        if not isinstance(form, list) or not form:
            raise ValueError(f"unexpected form {form!r}")
        head = form[0]
        if head == "sites":
            widths = [int(w) for w in form[1:]]
        elif head == "assert":
            if len(form) != 2:
                raise ValueError("assert takes one expression")
            e = E.from_form(form[1])
            if e.width != 1:
                raise ValueError("asserted expression must have width 1")
            c = c.extend(e)
        else:
            raise ValueError(f"unknown form {head!r}")
    return c, widths
