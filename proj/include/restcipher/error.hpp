#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace restcipher {

// Every failure the library reports. The enumerator name is what the CLI
// prints, so keep them stable.
enum class Errc {
  // keycore
  OutOfRange,
  CapacityExceeded,
  WidthTooSmall,
  NoValidKeyInBounds,
  Malformed,
  // tables
  CodeSpaceExhausted,
  // docmodel
  MalformedXml,
  MalformedJson,
  MixedContentUnsupported,
  UnsupportedShape,
  UnsupportedCharacter,
  // codec
  MalformedWord,
  MalformedMessage,
  UnknownCode,
  UnknownTatCode,
  UnbalancedClosers,
  Unclassifiable,
  AmbiguousEncoding,
  // composition
  MissingKey,
  InvalidPolicy,
  VerificationFailed,
  // keyxchg / restkit
  Io,
  Corrupt,
  StoreFailure,
  Transport,
  Bind,
  BadRequest,
  NoSessionKey,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail, int element = -1);

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }
  // Offending key element for OutOfRange, or line number for Corrupt; -1 otherwise.
  int element() const noexcept { return element_; }

 private:
  Errc code_;
  int element_;
};

}  // namespace restcipher
