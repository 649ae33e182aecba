#include "restcipher/error.hpp"

namespace restcipher {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::WidthTooSmall: return "WidthTooSmall";
    case Errc::NoValidKeyInBounds: return "NoValidKeyInBounds";
    case Errc::Malformed: return "Malformed";
    case Errc::CodeSpaceExhausted: return "CodeSpaceExhausted";
    case Errc::MalformedXml: return "MalformedXml";
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::MixedContentUnsupported: return "MixedContentUnsupported";
    case Errc::UnsupportedShape: return "UnsupportedShape";
    case Errc::UnsupportedCharacter: return "UnsupportedCharacter";
    case Errc::MalformedWord: return "MalformedWord";
    case Errc::MalformedMessage: return "MalformedMessage";
    case Errc::UnknownCode: return "UnknownCode";
    case Errc::UnknownTatCode: return "UnknownTatCode";
    case Errc::UnbalancedClosers: return "UnbalancedClosers";
    case Errc::Unclassifiable: return "Unclassifiable";
    case Errc::AmbiguousEncoding: return "AmbiguousEncoding";
    case Errc::MissingKey: return "MissingKey";
    case Errc::InvalidPolicy: return "InvalidPolicy";
    case Errc::VerificationFailed: return "VerificationFailed";
    case Errc::Io: return "Io";
    case Errc::Corrupt: return "Corrupt";
    case Errc::StoreFailure: return "StoreFailure";
    case Errc::Transport: return "Transport";
    case Errc::Bind: return "Bind";
    case Errc::BadRequest: return "BadRequest";
    case Errc::NoSessionKey: return "NoSessionKey";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail, int element)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
      code_(code),
      element_(element) {}

}  // namespace restcipher
