#pragma once

#include <stdexcept>
#include <string>

namespace mzweak {

/// Error families. The numeric values are the CLI exit codes.
enum class ErrorFamily : int {
  config = 2,
  non_convergence = 3,
  degenerate = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorFamily family, const std::string& what)
      : std::runtime_error(what), family_(family) {}

  ErrorFamily family() const noexcept { return family_; }

 private:
  ErrorFamily family_;
};

// Bad arguments or configuration values.
struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(ErrorFamily::config, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorFamily::config, what) {}
};

struct NotNormalized : Error {
  explicit NotNormalized(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

struct NotPsd : Error {
  explicit NotPsd(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

struct NotHermitian : Error {
  explicit NotHermitian(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

/// Pre- and post-selected states are (numerically) orthogonal.
struct OrthogonalSelection : Error {
  explicit OrthogonalSelection(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

struct DegenerateScan : Error {
  explicit DegenerateScan(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

struct TooFewExtrema : Error {
  explicit TooFewExtrema(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

struct DegenerateProfile : Error {
  explicit DegenerateProfile(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

struct ZeroPostSelection : Error {
  explicit ZeroPostSelection(const std::string& what) : Error(ErrorFamily::degenerate, what) {}
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& what) : Error(ErrorFamily::non_convergence, what) {}
};

}  // namespace mzweak
