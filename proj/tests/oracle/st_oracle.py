#!/usr/bin/env python3
"""Throwaway re-derivation of temporary/symbol tables straight from the key.

Used to freeze the vectors in tests/frozen_vectors.hpp. Shares no code with
the C++ library: headers are computed per cell from closed forms, groups are
reversed by index arithmetic, collisions are resolved with a python set.

usage: st_oracle.py "[12,6,1,1,1,14,4,1,3,2]"
"""
import itertools
import string
import sys

SMALL = string.ascii_lowercase
CAPITAL = string.ascii_uppercase
DIGIT = string.digits
SPECIAL = "".join(chr(c) for c in range(32, 127) if not chr(c).isalnum())
CLASSES = [SMALL, CAPITAL, DIGIT, SPECIAL]


def arrangements():
    table = []
    for size in range(1, 5):
        for subset in itertools.combinations(range(4), size):
            table.extend(itertools.permutations(subset))
    table[14], table[21] = table[21], table[14]
    return table


def charset(symbol_type):
    return "".join(CLASSES[c] for c in arrangements()[symbol_type])


def symbol_table(key):
    rows, cols, start_with, row_rev, col_rev, sym, group, rev, width, power = key
    chars = charset(sym)
    n = len(chars)
    # position index -> character, after group reversal
    placed = {}
    for i, ch in enumerate(chars):
        if rev:
            g = i // group
            lo, hi = g * group, min(g * group + group, n)
            pos = lo + (hi - 1 - i)
        else:
            pos = i
        placed[pos] = ch
    row_base = cols if start_with == 1 else 0
    col_base = 0 if start_with == 1 else rows
    out = []
    used = set()
    for pos in sorted(placed):
        r, c = divmod(pos, cols)
        rh = row_base + (rows - r if row_rev else r + 1)
        chh = col_base + (cols - c if col_rev else c + 1)
        value = rh ** power + chh ** power
        diff = width - len(str(value))
        code = value * 10 ** diff if diff >= 0 else value // 10 ** (-diff)
        while code in used:
            code += 1
            if code >= 10 ** width:
                code = 10 ** (width - 1)
        used.add(code)
        out.append((ch_repr(placed[pos]), rh, chh, value, code))
    return out


def ch_repr(c):
    return c


if __name__ == "__main__":
    key = [int(x) for x in sys.argv[1].strip("[]").split(",")]
    for ch, rh, chh, value, code in symbol_table(key):
        print(f"{ord(ch)} {ch!r} rh={rh} ch={chh} value={value} code={code}")
