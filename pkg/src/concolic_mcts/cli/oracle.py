"""Brute-force path oracle: run every input vector of a small program."""
from collections import Counter

from ..concrete import execute
from ..solver.enumerate import MAX_BITS, TooLarge


class ReadPastEnd(Exception):
    pass


def input_bits(p):
    return sum(p.input_widths)


def _traces(p, depth_cap, step_cap, max_bits):
    nbits = input_bits(p)
    if nbits > max_bits:
        raise TooLarge(f"{nbits} input bits exceed the oracle limit of {max_bits}")
    nbytes = nbits // 8
    for v in range(1 << nbits):
        data = v.to_bytes(nbytes, "little")
        t = execute(p, data, depth_cap, step_cap)
        if t.bytes_read > nbytes:
            raise ReadPastEnd(f"input {data.hex()} reads {t.bytes_read} bytes")
        yield t


def oracle_paths(p, depth_cap=10 ** 5, step_cap=20000, max_bits=MAX_BITS):
    """Counter mapping each distinct trace (address tuple) to its multiplicity.

    The domain is every assignment of the program's static input sites, so
    each site is read at most once per run; reading past the vector raises
    ReadPastEnd.
    """
    return Counter(t.addrs for t in _traces(p, depth_cap, step_cap, max_bits))


def oracle_outcomes(p, depth_cap=10 ** 5, step_cap=20000, max_bits=MAX_BITS):
    """Like oracle_paths, keyed by (addresses, outcome)."""
    return Counter((t.addrs, t.outcome) for t in _traces(p, depth_cap, step_cap, max_bits))
