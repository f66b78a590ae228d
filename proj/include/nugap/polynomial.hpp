#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include "errors.hpp"

namespace nugap {

using cplx = std::complex<double>;

// A coefficient whose magnitude is below this fraction of its rounding bound is treated
// as an exact cancellation and zeroed.
inline constexpr double kCancelRel = 1e-12;

// Real polynomial, ascending powers: c[k] multiplies s^k.
//
// Each coefficient carries a bound: the sum of |terms| that were added to form it. Rounding
// error in c[k] is a small multiple of eps * bound[k], which lets callers tell an exact
// algebraic zero from a genuinely small value.
class Polynomial {
public:
    Polynomial() : c_{0.0}, b_{0.0} {}
    Polynomial(std::initializer_list<double> c) : c_(c) { init_bound(); }
    explicit Polynomial(std::vector<double> c) : c_(std::move(c)) { init_bound(); }
    Polynomial(std::vector<double> c, std::vector<double> bound) : c_(std::move(c)), b_(std::move(bound)) {
        if (b_.size() != c_.size()) init_bound();
        else trim();
    }

    static Polynomial constant(double a) { return Polynomial(std::vector<double>{a}); }
    static Polynomial monomial(int k, double a = 1.0) {
        std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
        c.back() = a;
        return Polynomial(std::move(c));
    }

    // lead * prod (s - r_k). Roots should be closed under conjugation; the imaginary
    // residue of the product is dropped.
    static Polynomial from_roots(std::span<const cplx> roots, double lead = 1.0) {
        std::vector<cplx> p{cplx(lead)};
        std::vector<double> b{std::abs(lead)};
        for (const cplx& r : roots) {
            p.push_back(0.0);
            b.push_back(0.0);
            const double ar = std::abs(r);
            for (std::size_t k = p.size() - 1; k > 0; --k) {
                p[k] = p[k - 1] - r * p[k];
                b[k] = b[k - 1] + ar * b[k];
            }
            p[0] = -r * p[0];
            b[0] = ar * b[0];
        }
        std::vector<double> c(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) c[k] = p[k].real();
        return Polynomial(std::move(c), std::move(b));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
    const std::vector<double>& coeffs() const { return c_; }
    const std::vector<double>& bound() const { return b_; }
    double operator[](int k) const { return k >= 0 && k <= degree() ? c_[static_cast<std::size_t>(k)] : 0.0; }
    double leading() const { return c_.back(); }

    // number of exact zero low-order coefficients (roots at the origin)
    int valuation() const {
        if (is_zero()) return 0;
        int k = 0;
        while (c_[static_cast<std::size_t>(k)] == 0.0) ++k;
        return k;
    }

    double max_abs() const {
        double a = 0;
        for (double v : c_) a = std::max(a, std::abs(v));
        return a;
    }

    template <class T>
    T eval(T s) const {
        T acc = T(c_.back());
        for (int k = degree() - 1; k >= 0; --k) acc = acc * s + T(c_[static_cast<std::size_t>(k)]);
        return acc;
    }

    // sum of bound[k] |s|^k: scale of the rounding error of eval(s)
    double bound_at(double as) const {
        double acc = b_.back();
        for (int k = degree() - 1; k >= 0; --k) acc = acc * as + b_[static_cast<std::size_t>(k)];
        return acc;
    }

    // s^n p(1/s)
    Polynomial reversed() const {
        return Polynomial(std::vector<double>(c_.rbegin(), c_.rend()), std::vector<double>(b_.rbegin(), b_.rend()));
    }

    // p(-s)
    Polynomial reflect() const {
        std::vector<double> c = c_;
        for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
        return Polynomial(std::move(c), b_);
    }

    // divide out s^k (caller guarantees valuation() >= k)
    Polynomial shift_down(int k) const {
        if (k <= 0 || is_zero()) return *this;
        return Polynomial(std::vector<double>(c_.begin() + k, c_.end()), std::vector<double>(b_.begin() + k, b_.end()));
    }

    Polynomial derivative() const {
        if (degree() == 0) return Polynomial();
        std::vector<double> c(c_.size() - 1), b(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) {
            c[k - 1] = static_cast<double>(k) * c_[k];
            b[k - 1] = static_cast<double>(k) * b_[k];
        }
        return Polynomial(std::move(c), std::move(b));
    }

    Polynomial operator-() const {
        std::vector<double> c = c_;
        for (double& v : c) v = -v;
        return Polynomial(std::move(c), b_);
    }

    friend Polynomial operator*(double a, const Polynomial& p) {
        if (a == 0.0) return Polynomial();
        std::vector<double> c = p.c_, b = p.b_;
        for (double& v : c) v *= a;
        for (double& v : b) v *= std::abs(a);
        return Polynomial(std::move(c), std::move(b));
    }
    friend Polynomial operator*(const Polynomial& p, double a) { return a * p; }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::size_t n = std::max(a.c_.size(), b.c_.size());
        std::vector<double> c(n, 0.0), bd(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double x = k < a.c_.size() ? a.c_[k] : 0.0;
            double y = k < b.c_.size() ? b.c_[k] : 0.0;
            double bx = k < a.b_.size() ? a.b_[k] : 0.0;
            double by = k < b.b_.size() ? b.b_[k] : 0.0;
            double r = x + y;
            bd[k] = bx + by;
            if (std::abs(r) <= kCancelRel * bd[k]) r = 0.0;
            c[k] = r;
        }
        return Polynomial(std::move(c), std::move(bd));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial();
        std::size_t n = a.c_.size() + b.c_.size() - 1;
        std::vector<double> c(n, 0.0), bd(n, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) {
                c[i + j] += a.c_[i] * b.c_[j];
                bd[i + j] += a.b_[i] * b.b_[j];
            }
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(c[k]) <= kCancelRel * bd[k]) c[k] = 0.0;
        return Polynomial(std::move(c), std::move(bd));
    }

    // Coefficients only; the bound is bookkeeping.
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

private:
    void init_bound() {
        if (c_.empty()) c_.push_back(0.0);
        b_.resize(c_.size());
        for (std::size_t k = 0; k < c_.size(); ++k) b_[k] = std::abs(c_[k]);
        trim();
    }

    void trim() {
        if (c_.empty()) {
            c_.push_back(0.0);
            b_.assign(1, 0.0);
        }
        while (c_.size() > 1 && c_.back() == 0.0) {
            c_.pop_back();
            b_.pop_back();
        }
        for (double v : c_)
            if (!std::isfinite(v)) throw DomainError("polynomial coefficient is not finite");
    }

    std::vector<double> c_;
    std::vector<double> b_;
};

}  // namespace nugap
