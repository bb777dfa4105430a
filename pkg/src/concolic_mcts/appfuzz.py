"""Approximate path-preserving fuzzing.

A sampler turns one path condition into a stream of input bit-strings.
Each batch costs exactly one solver call: the first call yields a model
sigma; every later call flips one bit of sigma through the solver and
combines the result with all earlier strings by

    mutate(sigma, s1, s2) = sigma ^ ((sigma ^ s1) | (sigma ^ s2))

which keeps every bit on which sigma, s1 and s2 agree. Bit-strings are
ints with input site 0 in the low bits.
"""
import random
from dataclasses import dataclass, field

from .concrete import execute
from .solver.core import Model, Solver, bits_to_input

SOLVER = "solver"
MUTANT = "mutant"


class LengthMismatch(ValueError):
    pass


def mutate(sigma, sigma1, sigma2, nbits=None):
    """sigma ^ ((sigma ^ sigma1) | (sigma ^ sigma2))."""
    if isinstance(sigma, str):
        if not len(sigma) == len(sigma1) == len(sigma2):
            raise LengthMismatch("bit-strings differ in length")
        n = len(sigma)
        out = mutate(int(sigma, 2), int(sigma1, 2), int(sigma2, 2))
        return format(out, f"0{n}b") if n else ""
    if nbits is not None and max(sigma, sigma1, sigma2) >> nbits:
        raise LengthMismatch("value wider than the declared length")
    return sigma ^ ((sigma ^ sigma1) | (sigma ^ sigma2))


@dataclass
class SamplerState:
    constraint: object
    widths: tuple
    seed: object = 0
    mutation_depth: int = 1
    sigma: object = None  # Model of the current round, None between rounds
    produced: set = field(default_factory=set)
    next_bit: int = 0
    prior: list = field(default_factory=list)
    exhausted: bool = False
    round: int = 0
    round_fresh: bool = False
    batches: int = 0
    solver_calls: int = 0

    def __post_init__(self):
        self.widths = tuple(self.widths)
        self._prior_set = set(self.prior)

    @property
    def nbits(self):
        return sum(self.widths)

    def round_seed(self):
        # round 0 uses the zero-preferring solver phase; later rounds
        # restart from a seeded random phase
        if self.round == 0:
            return None
        return random.Random(f"{self.seed}:{self.round}").getrandbits(64)


def _add_prior(st, s):
    if s not in st._prior_set:
        st._prior_set.add(s)
        st.prior.append(s)


def next_batch(st, solver):
    """One solver call; returns ([(bits, tag), ...], st).

    Tags say whether a string came straight from the solver or is a
    mutant. Only strings never produced before are returned.
    """
    if st.exhausted:
        return [], st
    st.batches += 1
    st.solver_calls += 1
    if st.sigma is None:
        m = solver.check(st.constraint, st.widths, st.round_seed())
        if m is None:
            st.exhausted = True
            return [], st
        st.sigma = m
        st.next_bit = 0
        st.prior = []
        st._prior_set = set()
        st.round_fresh = False
        out = []
        if m.bits not in st.produced:
            st.produced.add(m.bits)
            out.append((m.bits, SOLVER))
        if st.nbits == 0:
            st.exhausted = True
        return out, st

    sigma = st.sigma.bits
    i = st.next_bit
    st.next_bit += 1
    out = []
    m = solver.check_flip(st.constraint, st.sigma, i, st.round_seed())
    if m is not None:
        s1 = m.bits
        batch = [(s1, SOLVER)]
        for s2 in st.prior:
            batch.append((mutate(sigma, s1, s2), MUTANT))
        if st.mutation_depth > 1:
            batch.extend(_pair_mutants(sigma, s1, st.prior))
        for s, tag in batch:
            if s not in st.produced:
                st.produced.add(s)
                out.append((s, tag))
        for s, _ in batch:
            _add_prior(st, s)
        if out:
            st.round_fresh = True
    if st.next_bit >= st.nbits:
        if not st.round_fresh:
            st.exhausted = True
        else:
            st.round += 1
            st.sigma = None
    return out, st


def _pair_mutants(sigma, s1, prior):
    out = []
    for a in range(len(prior)):
        for b in range(a + 1, len(prior)):
            out.append((mutate(sigma, s1, mutate(sigma, prior[a], prior[b])), MUTANT))
    return out


def app_fuzz(st, n_samples, solver):
    """Batches until at least n_samples strings or exhaustion."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    results = []
    while len(results) < n_samples and not st.exhausted:
        batch, st = next_batch(st, solver)
        results.extend(batch)
    return results, st


def new_sampler(constraint, widths, seed=0, mutation_depth=1):
    return SamplerState(constraint, tuple(widths), seed, mutation_depth)


def to_inputs(strings, widths):
    return [bits_to_input(s, widths) for s in strings]


@dataclass(frozen=True)
class Preservation:
    rate: float
    preserved: int
    total: int
    vacuous: bool


def preservation_rate(p, prefix, inputs, depth_cap=10**5, step_cap=10**6):
    """Fraction of inputs whose trace starts with `prefix`."""
    inputs = list(inputs)
    if not inputs:
        return Preservation(1.0, 0, 0, True)
    hits = sum(execute(p, d, depth_cap, step_cap).starts_with(prefix) for d in inputs)
    return Preservation(hits / len(inputs), hits, len(inputs), False)


def sample(constraint, widths, n, seed=0, solver=None, mutation_depth=1):
    """Standalone sampling loop: returns (strings, sampler state)."""
    solver = solver or Solver()
    st = new_sampler(constraint, widths, seed, mutation_depth)
    out, st = app_fuzz(st, n, solver)
    return [s for s, _ in out], st


def model_of(bits, widths):
    return Model.from_bits(bits, widths)
