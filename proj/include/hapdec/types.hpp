#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hapdec {

/// Which stimulus interval a response selects. Left (-1) is the first
/// interval and right (+1) the second.
enum class Choice { first = 1, second = 2 };

inline constexpr double side_of(Choice c) { return c == Choice::second ? 1.0 : -1.0; }
inline constexpr Choice choice_from_side(double side) { return side > 0.0 ? Choice::second : Choice::first; }
inline constexpr Choice opposite(Choice c) { return c == Choice::second ? Choice::first : Choice::second; }
inline constexpr int to_int(Choice c) { return static_cast<int>(c); }

inline Choice choice_from_int(int v) {
  if (v == 1) return Choice::first;
  if (v == 2) return Choice::second;
  throw std::invalid_argument("choice must be 1 or 2, got " + std::to_string(v));
}

inline std::string_view to_string(Choice c) { return c == Choice::second ? "second" : "first"; }

/// An operation's precondition on the data does not hold (e.g. asking for the
/// Leader of an agreement trial).
class NotApplicable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hapdec
