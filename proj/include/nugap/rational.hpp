#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"
#include "roots.hpp"

namespace nugap {

// A numerator root within this relative distance of a pole cancels it.
inline constexpr double kCancelTol = 1e-7;
// Residual test: |p(r)| below this fraction of the rounding bound of p at r counts as a root.
inline constexpr double kResidualTol = 1e-10;
// Leading Laurent coefficients of a sum cancel when they agree to this relative precision.
inline constexpr double kLaurentTol = 1e-8;
// Computed roots closer than this (relative) are candidates for one multiple root.
inline constexpr double kClusterTol = 1e-4;
inline constexpr double kAxisTol = 1e-9;

// A point of the Riemann sphere as a projective pair num : den. den == 0 is infinity.
struct HomPair {
    cplx num;
    cplx den;
};

// chordal distance between two points of the sphere, in [0, 1]
inline double chordal(const HomPair& a, const HomPair& b) {
    double na = std::hypot(std::abs(a.num), std::abs(a.den));
    double nb = std::hypot(std::abs(b.num), std::abs(b.den));
    if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    // normalize first so the cross product cannot overflow
    cplx an = a.num / na, ad = a.den / na, bn = b.num / nb, bd = b.den / nb;
    return std::min(1.0, std::abs(an * bd - bn * ad));
}

struct HalfPlaneCensus {
    int poles_lhp = 0, poles_rhp = 0, poles_axis = 0;
    int zeros_lhp = 0, zeros_rhp = 0, zeros_axis = 0;
    int relative_degree = 0;
    friend bool operator==(const HalfPlaneCensus&, const HalfPlaneCensus&) = default;
};

struct StabilityInfo {
    bool stable = true;
    double abscissa = -std::numeric_limits<double>::infinity();
};

// (s - r)^m for real r, or ((s - r)(s - conj r))^m when Im r > 0.
struct PoleFactor {
    cplx r;
    int m = 1;
    bool pair() const { return r.imag() > 0.0; }
    int degree() const { return pair() ? 2 * m : m; }
};

namespace detail {

inline bool roots_coincide(cplx a, cplx b) {
    return std::abs(a - b) <= kCancelTol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline bool same_factor(cplx a, cplx b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)); }

struct CPoly {
    std::vector<cplx> c;
    std::vector<double> b;
};

inline CPoly to_cpoly(const Polynomial& p) {
    CPoly q;
    q.c.assign(p.coeffs().begin(), p.coeffs().end());
    q.b = p.bound();
    return q;
}

// Quotient of p by (s - r). Each coefficient comes from the forward (top-down) or the backward
// (bottom-up) recurrence, whichever sums smaller terms; the remainder is discarded.
inline CPoly deflate(const CPoly& p, cplx r) {
    const std::size_t n = p.c.size() - 1;
    CPoly q;
    q.c.assign(n, 0.0);
    q.b.assign(n, 0.0);
    const double ar = std::abs(r);
    std::vector<cplx> f(n);
    std::vector<double> F(n);
    f[n - 1] = p.c[n];
    F[n - 1] = p.b[n];
    for (std::size_t k = n - 1; k >= 1; --k) {
        f[k - 1] = p.c[k] + r * f[k];
        F[k - 1] = p.b[k] + ar * F[k];
    }
    if (ar == 0.0) {
        q.c = f;
        q.b = F;
        return q;
    }
    cplx g = -p.c[0] / r;
    double G = p.b[0] / ar;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            g = (g - p.c[k]) / r;
            G = (G + p.b[k]) / ar;
        }
        if (F[k] <= G) {
            q.c[k] = f[k];
            q.b[k] = F[k];
        } else {
            q.c[k] = g;
            q.b[k] = G;
        }
    }
    return q;
}

inline Polynomial deflate_factor(const Polynomial& p, const PoleFactor& f) {
    CPoly q = deflate(to_cpoly(p), f.pair() ? f.r : cplx(f.r.real()));
    if (f.pair()) q = deflate(q, std::conj(f.r));
    std::vector<double> c(q.c.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = q.c[k].real();
    return Polynomial(std::move(c), std::move(q.b));
}

// One Newton step from r lands within kCancelTol of r: p has a simple root that close.
inline bool root_near(const Polynomial& p, cplx r) {
    if (p.degree() < 1) return p.is_zero();
    cplx v = p.eval(r), dv = p.derivative().eval(r);
    return std::abs(dv) > 0.0 && std::abs(v / dv) <= kCancelTol * (1.0 + std::abs(r));
}

// p(r) == 0 up to rounding, or p has a root within kCancelTol of r.
inline bool vanishes_at(const Polynomial& p, cplx r) {
    if (p.degree() < 1) return p.is_zero();
    if (std::abs(p.eval(r)) <= kResidualTol * p.bound_at(std::abs(r))) return true;
    return root_near(p, r);
}

inline Polynomial expand(const std::vector<PoleFactor>& fs) {
    Polynomial d = Polynomial::constant(1.0);
    for (const PoleFactor& f : fs) {
        Polynomial q = f.pair() ? Polynomial{std::norm(f.r), -2.0 * f.r.real(), 1.0} : Polynomial{-f.r.real(), 1.0};
        for (int k = 0; k < f.m; ++k) d = d * q;
    }
    return d;
}

inline void sort_factors(std::vector<PoleFactor>& fs) {
    std::sort(fs.begin(), fs.end(), [](const PoleFactor& a, const PoleFactor& b) {
        if (a.r.real() != b.r.real()) return a.r.real() < b.r.real();
        return a.r.imag() < b.r.imag();
    });
}

// Roots of p grouped into factors. Computed multiple roots come out as a small cloud; a cloud is
// collapsed to its centroid when p really vanishes there to the full multiplicity.
inline std::vector<PoleFactor> factorize(const Polynomial& p) {
    std::vector<PoleFactor> out;
    if (p.is_zero() || p.degree() < 1) return out;
    const int v = p.valuation();
    if (v > 0) out.push_back({cplx(0.0), v});
    Polynomial q = p.shift_down(v);
    if (q.degree() < 1) return out;

    struct Atom {
        cplx z;
        bool real;
    };
    std::vector<Atom> atoms;
    for (cplx z : poly_roots(q)) {
        if (z.imag() == 0.0) atoms.push_back({z, true});
        else if (z.imag() > 0.0) atoms.push_back({z, false});
    }
    const std::size_t n = atoms.size();
    std::vector<std::size_t> group(n);
    for (std::size_t i = 0; i < n; ++i) group[i] = i;
    auto find = [&](std::size_t x) {
        while (group[x] != x) x = group[x];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(atoms[i].z - atoms[j].z) <= kClusterTol * (1.0 + std::abs(atoms[i].z)))
                group[find(j)] = find(i);

    auto verified = [&q](const PoleFactor& f) {
        Polynomial w = q;
        for (int k = 0; k < f.m; ++k) {
            if (!vanishes_at(w, f.r)) return false;
            w = deflate_factor(w, f);
        }
        return true;
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (find(i) != i) continue;
        std::vector<Atom> members;
        for (std::size_t j = 0; j < n; ++j)
            if (find(j) == i) members.push_back(atoms[j]);
        // a complex pair with a tiny imaginary part may be a split double real root
        bool near_axis = true;
        for (const Atom& a : members)
            if (!a.real && a.z.imag() > kClusterTol * (1.0 + std::abs(a.z))) near_axis = false;
        const bool trivial = members.size() == 1 && (members[0].real || !near_axis);
        if (!trivial) {
            PoleFactor f;
            if (near_axis) {
                double sum = 0.0;
                int m = 0;
                for (const Atom& a : members) {
                    int w = a.real ? 1 : 2;
                    sum += w * a.z.real();
                    m += w;
                }
                f = {cplx(sum / m), m};
            } else {
                cplx sum = 0.0;
                for (const Atom& a : members) sum += a.z;
                f = {sum / static_cast<double>(members.size()), static_cast<int>(members.size())};
            }
            bool all_same_kind = true;
            if (!near_axis)
                for (const Atom& a : members) all_same_kind = all_same_kind && !a.real;
            if (all_same_kind && f.r.imag() >= 0.0 && verified(f)) {
                out.push_back(f);
                continue;
            }
        }
        for (const Atom& a : members) out.push_back({a.real ? cplx(a.z.real()) : a.z, 1});
    }
    sort_factors(out);
    return out;
}

// Factors of a and b, multiplicities combined by op (sum for products, max for the lcm).
template <class Op>
inline std::vector<PoleFactor> merge(const std::vector<PoleFactor>& a, const std::vector<PoleFactor>& b, Op op) {
    std::vector<PoleFactor> out = a;
    for (const PoleFactor& f : b) {
        bool found = false;
        for (PoleFactor& g : out)
            if (g.pair() == f.pair() && same_factor(g.r, f.r)) {
                g.m = op(g.m, f.m);
                found = true;
                break;
            }
        if (!found) out.push_back(f);
    }
    return out;
}

// lcm / fs, as a polynomial
inline Polynomial cofactor(const std::vector<PoleFactor>& lcm, const std::vector<PoleFactor>& fs) {
    std::vector<PoleFactor> rest;
    for (const PoleFactor& f : lcm) {
        int m = f.m;
        for (const PoleFactor& g : fs)
            if (g.pair() == f.pair() && same_factor(f.r, g.r)) m -= g.m;
        if (m > 0) rest.push_back({f.r, m});
    }
    return expand(rest);
}

}  // namespace detail

// num / den with den monic and kept as a list of pole factors, so multiple poles shared between
// operands stay exact through products, sums and cancellation.
class RationalFunction {
public:
    RationalFunction() : num_(Polynomial()), den_(Polynomial::constant(1.0)) {}
    RationalFunction(double c) : num_(Polynomial::constant(c)), den_(Polynomial::constant(1.0)) {}  // NOLINT
    RationalFunction(Polynomial num) : num_(std::move(num)), den_(Polynomial::constant(1.0)) {}      // NOLINT
    RationalFunction(const Polynomial& num, const Polynomial& den) {
        if (den.is_zero()) throw DomainError("rational function with zero denominator");
        num_ = num * (1.0 / den.leading());
        poles_ = detail::factorize(den);
        finish(true);
    }

    static RationalFunction s() { return RationalFunction(Polynomial{0.0, 1.0}); }

    // Build without cancellation; only the denominator's leading coefficient is normalized.
    static RationalFunction unreduced(const Polynomial& num, const Polynomial& den) {
        if (den.is_zero()) throw DomainError("rational function with zero denominator");
        RationalFunction g;
        g.num_ = num * (1.0 / den.leading());
        g.poles_ = detail::factorize(den);
        g.finish(false);
        return g;
    }

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    const std::vector<PoleFactor>& pole_factors() const { return poles_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return den_.degree() == 0 && num_.degree() == 0; }
    int relative_degree() const { return is_zero() ? 0 : den_.degree() - num_.degree(); }
    bool proper() const { return is_zero() || num_.degree() <= den_.degree(); }

    std::vector<cplx> poles() const {
        std::vector<cplx> out;
        for (const PoleFactor& f : poles_)
            for (int k = 0; k < f.m; ++k) {
                out.push_back(f.r);
                if (f.pair()) out.push_back(std::conj(f.r));
            }
        return out;
    }
    std::vector<cplx> zeros() const {
        if (num_.is_zero() || num_.degree() < 1) return {};
        return poly_roots(num_);
    }

    // Projective value at s. For |s| > 1 everything is evaluated in t = 1/s and scaled by s^-D,
    // D = max degree, so nothing overflows. The denominator is evaluated as a product of factors.
    HomPair eval_pair(cplx s) const {
        const int dn = num_.degree(), dd = den_.degree(), D = std::max(dn, dd);
        const auto& c = num_.coeffs();
        if (std::abs(s) <= 1.0) {
            cplx d = 1.0;
            for (const PoleFactor& f : poles_) d *= std::pow(f.pair() ? (s - f.r) * (s - std::conj(f.r)) : s - f.r.real(), f.m);
            return {num_.eval(s), d};
        }
        cplx t = 1.0 / s, n = c.front();
        for (std::size_t k = 1; k < c.size(); ++k) n = n * t + c[k];
        cplx d = 1.0;
        for (const PoleFactor& f : poles_)
            d *= std::pow(f.pair() ? (1.0 - f.r * t) * (1.0 - std::conj(f.r) * t) : 1.0 - f.r.real() * t, f.m);
        if (num_.is_zero()) n = 0.0;
        return {n * std::pow(t, D - dn), d * std::pow(t, D - dd)};
    }

    // Limit of G(jw) as w -> infinity, on the sphere.
    HomPair pair_at_infinity() const {
        if (num_.is_zero()) return {0.0, 1.0};
        const int dn = num_.degree(), dd = den_.degree();
        if (dn < dd) return {0.0, 1.0};
        if (dn > dd) return {1.0, 0.0};
        return {num_.leading(), 1.0};
    }

    HomPair pair_at_zero() const { return {num_[0], den_[0]}; }

    cplx operator()(cplx s) const {
        for (const PoleFactor& f : poles_) {
            double tol = 1e-13 * (1.0 + std::abs(f.r));
            if (std::abs(s - f.r) <= tol) throw PoleAtEvaluation(s, f.r);
            if (f.pair() && std::abs(s - std::conj(f.r)) <= tol) throw PoleAtEvaluation(s, std::conj(f.r));
        }
        HomPair h = eval_pair(s);
        if (h.den == 0.0) throw PoleAtEvaluation(s, s);
        return h.num / h.den;
    }

    double dc_gain() const {
        if (den_[0] == 0.0) throw PoleAtEvaluation(0.0, 0.0);
        return num_[0] / den_[0];
    }

    // G(-s)
    RationalFunction reflect() const {
        RationalFunction g;
        const double sign = den_.degree() % 2 ? -1.0 : 1.0;
        g.num_ = sign * num_.reflect();
        g.den_ = sign * den_.reflect();
        g.poles_ = poles_;
        for (PoleFactor& f : g.poles_) f.r = f.pair() ? -std::conj(f.r) : cplx(-f.r.real());
        detail::sort_factors(g.poles_);
        return g;
    }

    RationalFunction inverse() const {
        if (is_zero()) throw DomainError("division by the zero function");
        RationalFunction g;
        g.num_ = den_ * (1.0 / num_.leading());
        g.poles_ = detail::factorize(num_);
        g.finish(false);
        return g;
    }

    RationalFunction operator-() const {
        RationalFunction g = *this;
        g.num_ = -num_;
        return g;
    }

    friend RationalFunction operator*(double a, const RationalFunction& g) {
        if (a == 0.0) return RationalFunction();
        RationalFunction h = g;
        h.num_ = a * g.num_;
        return h;
    }

    // Only a pole both operands carry with the same multiplicity can cancel in a sum. The test
    // compares the leading Laurent coefficients, each computed from its own numerator.
    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        RationalFunction g;
        g.poles_ = detail::merge(a.poles_, b.poles_, [](int x, int y) { return std::max(x, y); });
        g.num_ = a.num_ * detail::cofactor(g.poles_, a.poles_) + b.num_ * detail::cofactor(g.poles_, b.poles_);
        if (g.num_.is_zero()) return RationalFunction();
        for (PoleFactor& f : g.poles_) {
            auto ia = a.find_pole(f.r, f.pair()), ib = b.find_pole(f.r, f.pair());
            if (ia < 0 || ib < 0 || a.poles_[ia].m != f.m || b.poles_[ib].m != f.m) continue;
            cplx ta = a.laurent_top(ia), tb = b.laurent_top(ib);
            if (!(std::abs(ta + tb) <= kLaurentTol * (std::abs(ta) + std::abs(tb))) && !detail::root_near(g.num_, f.r))
                continue;
            g.num_ = detail::deflate_factor(g.num_, f);
            --f.m;
            while (f.m > 0 && detail::vanishes_at(g.num_, f.r)) {
                g.num_ = detail::deflate_factor(g.num_, f);
                --f.m;
            }
        }
        g.finish(false);
        return g;
    }
    friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }

    // A pole of one factor can only cancel against the other factor's numerator.
    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero() || b.is_zero()) return RationalFunction();
        if (a.is_constant()) return a.num_[0] * b;
        if (b.is_constant()) return b.num_[0] * a;
        Polynomial na = a.num_, nb = b.num_;
        std::vector<PoleFactor> pa = a.poles_, pb = b.poles_;
        auto cancel = [](std::vector<PoleFactor>& poles, Polynomial& num) {
            for (PoleFactor& f : poles)
                while (f.m > 0 && num.degree() >= f.degree() / f.m && detail::vanishes_at(num, f.r)) {
                    num = detail::deflate_factor(num, f);
                    --f.m;
                }
            std::erase_if(poles, [](const PoleFactor& f) { return f.m == 0; });
        };
        cancel(pa, nb);
        cancel(pb, na);
        RationalFunction g;
        g.poles_ = detail::merge(pa, pb, [](int x, int y) { return x + y; });
        g.num_ = na * nb;
        g.finish(false);
        return g;
    }
    friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
        if (b.is_zero()) throw DomainError("division by the zero function");
        return a * b.inverse();
    }

    RationalFunction& operator+=(const RationalFunction& b) { return *this = *this + b; }
    RationalFunction& operator-=(const RationalFunction& b) { return *this = *this - b; }
    RationalFunction& operator*=(const RationalFunction& b) { return *this = *this * b; }

private:
    int find_pole(cplx r, bool pair) const {
        for (std::size_t k = 0; k < poles_.size(); ++k)
            if (poles_[k].pair() == pair && detail::same_factor(poles_[k].r, r)) return static_cast<int>(k);
        return -1;
    }

    // lim (s - r)^m G(s) at s = r for pole factor k
    cplx laurent_top(int k) const {
        const PoleFactor& f = poles_[static_cast<std::size_t>(k)];
        cplx rest = 1.0;
        for (std::size_t j = 0; j < poles_.size(); ++j) {
            if (static_cast<int>(j) == k) continue;
            const PoleFactor& g = poles_[j];
            rest *= std::pow(g.pair() ? (f.r - g.r) * (f.r - std::conj(g.r)) : f.r - g.r.real(), g.m);
        }
        if (f.pair()) rest *= std::pow(f.r - std::conj(f.r), f.m);
        return num_.eval(f.r) / rest;
    }

    // Cancel poles the numerator vanishes on, then rebuild the expanded denominator.
    void finish(bool cancel) {
        if (num_.is_zero()) {
            poles_.clear();
            den_ = Polynomial::constant(1.0);
            return;
        }
        if (cancel) {
            for (PoleFactor& f : poles_) {
                while (f.m > 0 && num_.degree() >= f.degree() / f.m && detail::vanishes_at(num_, f.r)) {
                    num_ = detail::deflate_factor(num_, f);
                    --f.m;
                }
            }
        }
        std::erase_if(poles_, [](const PoleFactor& f) { return f.m == 0; });
        detail::sort_factors(poles_);
        den_ = detail::expand(poles_);
    }

    Polynomial num_;
    std::vector<PoleFactor> poles_;
    Polynomial den_;
};

inline HalfPlaneCensus census(const RationalFunction& g, double axis_tol = kAxisTol) {
    HalfPlaneCensus c;
    for (cplx p : g.poles()) {
        if (std::abs(p.real()) <= axis_tol) ++c.poles_axis;
        else if (p.real() < 0) ++c.poles_lhp;
        else ++c.poles_rhp;
    }
    for (cplx z : g.zeros()) {
        if (std::abs(z.real()) <= axis_tol) ++c.zeros_axis;
        else if (z.real() < 0) ++c.zeros_lhp;
        else ++c.zeros_rhp;
    }
    c.relative_degree = g.relative_degree();
    return c;
}

inline StabilityInfo stability_of_roots(const std::vector<cplx>& roots, double axis_tol = kAxisTol) {
    StabilityInfo info;
    for (cplx r : roots) info.abscissa = std::max(info.abscissa, r.real());
    info.stable = roots.empty() || info.abscissa < -axis_tol;
    return info;
}

inline StabilityInfo is_stable(const RationalFunction& g, double axis_tol = kAxisTol) {
    return stability_of_roots(g.poles(), axis_tol);
}

}  // namespace nugap
