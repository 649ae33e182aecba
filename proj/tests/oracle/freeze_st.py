#!/usr/bin/env python3
"""Writes tests/frozen_vectors.hpp from st_oracle.py. Run from the repo root."""
import sys
sys.path.insert(0, "tests/oracle")
from st_oracle import symbol_table
keys = ["[12,6,1,1,1,14,4,1,3,2]", "[6,12,1,0,1,14,3,1,3,2]", "[7,10,0,0,1,14,3,0,3,2]",
        "[5,19,0,1,0,63,7,1,4,1]", "[10,10,1,0,0,40,5,0,3,1]", "[4,4,0,1,1,2,3,1,2,1]",
        "[16,16,1,1,0,57,16,1,4,2]", "[8,13,0,0,0,47,1,0,5,3]", "[3,9,1,0,1,1,26,1,4,3]"]
print("#pragma once\n\n// Symbol tables re-derived by tests/oracle/st_oracle.py, frozen.\n// Entries are (character code point, symbol code) in row-major order.\n")
print("#include <cstdint>\n#include <utility>\n#include <vector>\n\nnamespace frozen {\n")
print("struct StVector {\n  const char* key;\n  std::vector<std::pair<int, std::uint64_t>> entries;\n};\n")
print("inline const std::vector<StVector>& st_vectors() {\n  static const std::vector<StVector> v = {")
for k in keys:
    ent = symbol_table([int(x) for x in k.strip("[]").split(",")])
    parts = ["{%d, %d}" % (ord(c), code) for c, rh, ch, val, code in ent]
    lines = [", ".join(parts[i:i+8]) for i in range(0, len(parts), 8)]
    print('      {"%s",\n       {%s}},' % (k, ",\n        ".join(lines)))
print("  };\n  return v;\n}\n\n}  // namespace frozen")
