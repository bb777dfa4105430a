"""A small CDCL SAT solver: two watched literals, first-UIP learning.

Variables are 1..n; literals are non-zero ints, negative for negation.
Decisions follow a fixed variable order with a per-variable preferred
phase, so results are deterministic for a given (clauses, order, phase).
"""


class CDCL:
    def __init__(self, nvars, clauses):
        self.n = nvars
        self.clauses = []
        self.watches = [[] for _ in range(2 * nvars + 2)]
        self.value = [0] * (nvars + 1)  # 0 unassigned, 1 true, -1 false
        self.level = [0] * (nvars + 1)
        self.reason = [None] * (nvars + 1)
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.units = []
        self.empty = False
        self.conflicts = 0
        for cl in clauses:
            self._add_input(cl)

    @staticmethod
    def _code(lit):
        return 2 * lit if lit > 0 else -2 * lit + 1

    def _lit_value(self, lit):
        v = self.value[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def _add_input(self, cl):
        seen = set()
        out = []
        for lit in cl:
            if -lit in seen:
                return  # tautology
            if lit not in seen:
                seen.add(lit)
                out.append(lit)
        if not out:
            self.empty = True
        elif len(out) == 1:
            self.units.append(out[0])
        else:
            self._attach(out)

    def _attach(self, cl):
        idx = len(self.clauses)
        self.clauses.append(cl)
        self.watches[self._code(cl[0])].append(idx)
        self.watches[self._code(cl[1])].append(idx)
        return idx

    def _assign(self, lit, reason):
        v = lit if lit > 0 else -lit
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        value = self.value
        clauses = self.clauses
        watches = self.watches
        code = self._code
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            ws = watches[code(false_lit)]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                cl = clauses[ci]
                if cl[0] == false_lit:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                fv = value[first if first > 0 else -first]
                if (fv if first > 0 else -fv) == 1:
                    ws[j] = ci
                    j += 1
                    i += 1
                    continue
                moved = False
                for k in range(2, len(cl)):
                    q = cl[k]
                    qv = value[q if q > 0 else -q]
                    if (qv if q > 0 else -qv) != -1:
                        cl[1], cl[k] = q, cl[1]
                        watches[code(q)].append(ci)
                        moved = True
                        break
                i += 1
                if moved:
                    continue
                ws[j] = ci
                j += 1
                if (fv if first > 0 else -fv) == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    return ci
                self._assign(first, ci)
            del ws[j:]
        return None

    def _analyze(self, confl):
        seen = set()
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        cl = self.clauses[confl]
        while True:
            for q in cl:
                v = q if q > 0 else -q
                if p is not None and v == (p if p > 0 else -p):
                    continue
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    if self.level[v] == cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                t = self.trail[idx]
                if (t if t > 0 else -t) in seen:
                    break
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(p if p > 0 else -p)
            counter -= 1
            if counter == 0:
                break
            cl = self.clauses[self.reason[p if p > 0 else -p]]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for k in range(2, len(learnt)):
            if self.level[abs(learnt[k])] > self.level[abs(learnt[best])]:
                best = k
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _backtrack(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        for lit in self.trail[stop:]:
            v = lit if lit > 0 else -lit
            self.value[v] = 0
            self.reason[v] = None
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def solve(self, order=None, phase=None):
        """Return {var: bool} for a satisfying assignment, or None.

        `order` lists variables to decide first (the rest follow by index);
        `phase` maps a variable to its preferred polarity (default False).
        """
        if self.empty:
            return None
        for u in self.units:
            lv = self._lit_value(u)
            if lv == -1:
                return None
            if lv == 0:
                self._assign(u, None)
        if self._propagate() is not None:
            return None
        order = list(order or [])
        listed = set(order)
        order.extend(v for v in range(1, self.n + 1) if v not in listed)
        phase = phase or {}
        ptr = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    return None
                learnt, lvl = self._analyze(confl)
                self._backtrack(lvl)
                ptr = 0
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    ci = self._attach(learnt)
                    self._assign(learnt[0], ci)
                continue
            while ptr < len(order) and self.value[order[ptr]] != 0:
                ptr += 1
            if ptr == len(order):
                return {v: self.value[v] == 1 for v in range(1, self.n + 1)}
            v = order[ptr]
            self.trail_lim.append(len(self.trail))
            self._assign(v if phase.get(v, False) else -v, None)
