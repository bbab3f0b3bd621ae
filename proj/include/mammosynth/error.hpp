#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mammosynth {

enum class ErrorKind {
  invalid_argument,  // bad parameter or precondition violation
  out_of_bounds,     // region or index outside the addressed raster
  io,                // file could not be opened, read or written
  format,            // file content is malformed or unsupported
  numeric,           // numerical contract violated (e.g. non-real inverse DFT)
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mammosynth
