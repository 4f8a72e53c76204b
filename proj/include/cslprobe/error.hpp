#ifndef CSLPROBE_ERROR_HPP
#define CSLPROBE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cslprobe {

/// Invalid physical input or malformed configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No steady state: the drift matrix is not (sufficiently) Hurwitz.
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A self-check on a numerical result failed (residual, eigen-solver
/// convergence, disagreement between independent evaluation paths).
struct NumericalIntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  success = 0,
  failure = 1,
  config_error = 2,
  unstable_everywhere = 3,
  numerical_integrity = 4,
  output_error = 5,
};

} // namespace cslprobe

#endif // CSLPROBE_ERROR_HPP
