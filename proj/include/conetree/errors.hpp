#pragma once

#include <stdexcept>
#include <string>

namespace conetree {

// Bad input: malformed matrices, violated preconditions, unparsable files.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration did not converge within budget.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& msg, double last_step)
        : std::runtime_error(msg), last_step_(last_step) {}
    double last_step() const { return last_step_; }

private:
    double last_step_;
};

// Requested object exceeds a hard size cap (tree vertices, dense matrices).
class SizeCapError : public std::runtime_error {
public:
    explicit SizeCapError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace conetree
