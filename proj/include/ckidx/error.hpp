#pragma once

#include <stdexcept>
#include <string>

namespace ckidx {

enum class Errc {
  invalid_value,
  overflow,
  length_mismatch,
  embedded_null,
  over_length,
  duplicate_key,
  unsorted_input,
  bad_magic,
  truncated,
  size_mismatch,
  search_space_too_large,
  not_found,
  out_of_range,
  io,
  unsupported,
};

const char* errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ckidx
