#pragma once

#include <cstddef>
#include <ostream>
#include <string>

namespace tracereason {

/// A region of an input file. Lines and columns are 1-based; columns count
/// code points, not bytes.
struct SourceSpan {
  std::string file;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t length = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// A located error message produced by any of the front ends.
struct Diagnostic {
  SourceSpan span;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline std::string format_span(const SourceSpan& span) {
  return span.file + ":" + std::to_string(span.line) + ":" + std::to_string(span.column);
}

inline std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
  return os << format_span(d.span) << ": error: " << d.message;
}

}  // namespace tracereason
