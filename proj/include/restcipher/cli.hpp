#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "restcipher/composition.hpp"
#include "restcipher/keyxchg.hpp"
#include "restcipher/tables.hpp"

namespace restcipher {

// Runs one command line (without the program name). Module errors are
// printed to `err` as "error: <Name>: <detail>" and yield exit status 1;
// usage errors yield 2; a rejected signature yields 3.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

// Tag-table state file: one "kind TAB word TAB code" line per entry.
std::string dump_tat(const TagTable& tat);
TagTable parse_tat(std::string_view text);

// Every key in a keystore, by key id; the group-role record becomes the group key.
KeyRing ring_from_store(const KeyStore& store);

}  // namespace restcipher
