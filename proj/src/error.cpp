#include "ckidx/error.hpp"

namespace ckidx {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_value: return "invalid value";
    case Errc::overflow: return "overflow";
    case Errc::length_mismatch: return "length mismatch";
    case Errc::embedded_null: return "embedded null byte";
    case Errc::over_length: return "over length";
    case Errc::duplicate_key: return "duplicate key";
    case Errc::unsorted_input: return "unsorted input";
    case Errc::bad_magic: return "bad magic";
    case Errc::truncated: return "truncated";
    case Errc::size_mismatch: return "size mismatch";
    case Errc::search_space_too_large: return "search space too large";
    case Errc::not_found: return "not found";
    case Errc::out_of_range: return "out of range";
    case Errc::io: return "i/o error";
    case Errc::unsupported: return "unsupported";
  }
  return "unknown error";
}

}  // namespace ckidx
