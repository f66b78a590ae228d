#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace nugap {

struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
    int order() const { return static_cast<int>(A.rows()); }
};

// Disturbance-to-DC-voltage transfer 1/(G + K). For the loop with plant 1/G and
// controller -C, pass K = -C.
inline RationalFunction closed_loop_transfer(const RationalFunction& g, const RationalFunction& k) {
    RationalFunction sum = g + k;
    if (sum.is_zero()) throw DegenerateLoop("closed loop is degenerate: G + K is identically zero");
    RationalFunction t = sum.inverse();
    if (!t.proper()) throw DomainError("closed-loop transfer is improper (differentiating feedthrough)");
    return t;
}

// Controllable canonical form of T = b/a, then a diagonal similarity (radix-2 balancing) so the
// companion row does not carry coefficients spanning dozens of decades.
inline StateSpace realize(const RationalFunction& t) {
    if (!t.proper()) throw DomainError("cannot realize an improper transfer function");
    const Polynomial& a = t.den();
    const int n = a.degree();
    const double an = a.leading();
    StateSpace ss;
    ss.D = t.num().degree() == n ? t.num()[n] / an : 0.0;
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.B = Eigen::VectorXd::Zero(n);
    ss.C = Eigen::RowVectorXd::Zero(n);
    if (n == 0) return ss;
    for (int k = 0; k + 1 < n; ++k) ss.A(k, k + 1) = 1.0;
    for (int k = 0; k < n; ++k) {
        ss.A(n - 1, k) = -a[k] / an;
        ss.C(k) = t.num()[k] / an - ss.D * a[k] / an;
    }
    ss.B(n - 1) = 1.0;

    detail::Square m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = ss.A(i, j);
    std::vector<double> d = balance(m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) ss.A(i, j) = m(i, j);
        ss.B(i) /= d[static_cast<std::size_t>(i)];
        ss.C(i) *= d[static_cast<std::size_t>(i)];
    }
    return ss;
}

inline StateSpace realize_closed_loop(const RationalFunction& g, const RationalFunction& k) {
    return realize(closed_loop_transfer(g, k));
}

struct EigenVerdict {
    bool stable = true;
    bool marginal = false;
    double abscissa = -std::numeric_limits<double>::infinity();
    double max_modulus = 0.0;
};

inline EigenVerdict eigen_stability(const StateSpace& ss, double tol = 1e-9) {
    EigenVerdict v;
    if (ss.order() == 0) return v;
    Eigen::EigenSolver<Eigen::MatrixXd> es(ss.A, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver did not converge");
    for (const auto& ev : es.eigenvalues()) {
        v.abscissa = std::max(v.abscissa, ev.real());
        v.max_modulus = std::max(v.max_modulus, std::abs(ev));
    }
    v.stable = v.abscissa < -tol;
    v.marginal = std::abs(v.abscissa) < tol;
    return v;
}

inline double dc_gain(const StateSpace& ss) {
    if (ss.order() == 0) return ss.D;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ss.A);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    return ss.D - (ss.C * lu.solve(ss.B))(0);
}

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> y;
    double magnitude = 0.0;
    double y_ss = std::numeric_limits<double>::quiet_NaN();  // expected final value if settling
};

enum class TraceClass { settling, divergent, undecided };

inline const char* to_string(TraceClass c) {
    switch (c) {
        case TraceClass::settling: return "settling";
        case TraceClass::divergent: return "divergent";
        default: return "undecided";
    }
}

// Fixed-step RK4 for x' = A x + B u, y = C x + D u with u = magnitude for t >= 0, x(0) = 0.
inline TimeSeries step_response(const StateSpace& ss, double duration, double dt, double magnitude = 1.0) {
    if (!(dt > 0.0) || !(duration > 0.0)) throw DomainError("step_response: duration and dt must be positive");
    EigenVerdict ev = eigen_stability(ss);
    if (ev.max_modulus > 0.0 && !(dt < 0.1 / ev.max_modulus)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "step_response: dt too large for the fastest mode; use dt < %.3g",
                      0.1 / ev.max_modulus);
        throw DomainError(buf);
    }
    const long steps = static_cast<long>(std::ceil(duration / dt));
    TimeSeries ts;
    ts.magnitude = magnitude;
    double g = dc_gain(ss);
    if (std::isfinite(g)) ts.y_ss = g * magnitude;
    ts.t.reserve(static_cast<std::size_t>(steps) + 1);
    ts.y.reserve(static_cast<std::size_t>(steps) + 1);
    const int n = ss.order();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n), k1(n), k2(n), k3(n), k4(n);
    const Eigen::VectorXd bu = ss.B * magnitude;
    auto output = [&](const Eigen::VectorXd& s) { return (n ? ss.C.dot(s) : 0.0) + ss.D * magnitude; };
    ts.t.push_back(0.0);
    ts.y.push_back(output(x));
    for (long i = 1; i <= steps; ++i) {
        if (n) {
            k1.noalias() = ss.A * x + bu;
            k2.noalias() = ss.A * (x + 0.5 * dt * k1) + bu;
            k3.noalias() = ss.A * (x + 0.5 * dt * k2) + bu;
            k4.noalias() = ss.A * (x + dt * k3) + bu;
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        ts.t.push_back(static_cast<double>(i) * dt);
        double y = output(x);
        ts.y.push_back(y);
        if (!std::isfinite(y)) break;
    }
    return ts;
}

// Compare the deviation envelope of the first and last quarter of the trace.
inline TraceClass classify_trace(const TimeSeries& ts) {
    const std::size_t n = ts.y.size();
    if (n < 8) return TraceClass::undecided;
    for (double v : ts.y)
        if (!std::isfinite(v)) return TraceClass::divergent;
    const double ref = std::isfinite(ts.y_ss) ? ts.y_ss : 0.0;
    double early = 0.0, late = 0.0, peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double e = std::abs(ts.y[k] - ref);
        if (k < n / 4) early = std::max(early, e);
        if (k >= n - n / 4) late = std::max(late, e);
        peak = std::max(peak, std::abs(ts.y[k]));
    }
    const double scale = std::abs(ts.magnitude) * std::max(1.0, std::isfinite(ts.y_ss) ? std::abs(ts.y_ss) : 1.0);
    if (late > 10.0 * early) return TraceClass::divergent;
    if (late >= early && peak > 10.0 * scale) return TraceClass::divergent;
    if (late < 0.1 * early) return TraceClass::settling;
    return TraceClass::undecided;
}

inline void write_csv(std::ostream& os, const TimeSeries& ts) {
    os << "t,y\n";
    char buf[80];
    for (std::size_t k = 0; k < ts.t.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", ts.t[k], ts.y[k]);
        os << buf;
    }
}

}  // namespace nugap
