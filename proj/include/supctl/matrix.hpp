#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace supctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy. The CLI maps ConfigError/InvalidScenarioError to exit code 1,
// everything else to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct DegenerateInputError : Error {
    using Error::Error;
};
struct InstabilityError : Error {
    using Error::Error;
};
struct InvalidScenarioError : Error {
    using Error::Error;
};
struct ExcitationError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct GenerationError : Error {
    using Error::Error;
};

[[nodiscard]] inline bool is_finite(const Matrix& m) {
    return m.allFinite();
}

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) {
        throw DegenerateInputError(what + " contains non-finite entries");
    }
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw DimensionError(msg);
    }
}

}  // namespace supctl
