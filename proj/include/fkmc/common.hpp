#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace fkmc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy mirrors the CLI exit-code contract:
//   config_error / precondition_error -> exit 2
//   numerical_error                   -> exit 3
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fkmc
