#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nugap {

// Bad input that the caller could have avoided (wrong degree, zero divisor, bad gains).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Numerical failure: non-convergence, ill-posed objective, infinite norm.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PoleAtEvaluation : public NumericalError {
public:
    PoleAtEvaluation(std::complex<double> s, std::complex<double> pole)
        : NumericalError("pole at evaluation point s = (" + std::to_string(s.real()) + ", " +
                         std::to_string(s.imag()) + ")"),
          point(s), pole(pole) {}
    std::complex<double> point;
    std::complex<double> pole;
};

class InfiniteNorm : public NumericalError {
public:
    explicit InfiniteNorm(double omega)
        : NumericalError("infinite norm: pole on the imaginary axis at omega = " + std::to_string(omega)),
          omega(omega) {}
    double omega;
};

class UnboundedAtInfinity : public NumericalError {
public:
    UnboundedAtInfinity() : NumericalError("improper transfer function: unbounded at infinity") {}
};

class IllPosedObjective : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateLoop : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Model construction problems (bad config, degenerate cable, zero denominator in a path formula).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PartitionViolation : public std::runtime_error {
public:
    PartitionViolation(const std::string& param, std::vector<int> paths)
        : std::runtime_error(message(param, paths)), param(param), paths(std::move(paths)) {}
    std::string param;
    std::vector<int> paths;

private:
    static std::string message(const std::string& param, const std::vector<int>& paths) {
        std::string m = "partition violation: " + param + " enters certain paths/self term {";
        for (std::size_t k = 0; k < paths.size(); ++k) {
            if (k) m += ",";
            m += paths[k] == 0 ? std::string("S") : std::to_string(paths[k]);
        }
        return m + "}; move them into J1";
    }
};

class IncomparableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nugap
