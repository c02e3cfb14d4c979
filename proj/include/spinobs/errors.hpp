#pragma once

#include <stdexcept>
#include <string>

namespace spinobs {

// Base class for numerical failures (as opposed to misuse of the API, which
// throws std::invalid_argument).  CLI entry points map std::invalid_argument
// to exit code 1 and numerical_error to exit code 2.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative solver failed to reach its tolerance within its budget.
struct convergence_error : numerical_error {
    explicit convergence_error(const std::string& msg) : numerical_error(msg) {}
};

// A nominally unique solution turned out to be (numerically) non-unique.
struct degeneracy_error : numerical_error {
    explicit degeneracy_error(const std::string& msg) : numerical_error(msg) {}
};

// A linear system or fit is too ill-conditioned to trust.
struct ill_posed_error : numerical_error {
    explicit ill_posed_error(const std::string& msg) : numerical_error(msg) {}
};

// Training produced non-finite losses or otherwise diverged.
struct training_error : numerical_error {
    explicit training_error(const std::string& msg) : numerical_error(msg) {}
};

}  // namespace spinobs
