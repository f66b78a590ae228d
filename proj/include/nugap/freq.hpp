#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace nugap {

struct SweepSpec {
    double omega_min = 1e-4;
    double omega_max = 1e6;
    int points_per_decade = 50;
    double refine_tol = 1e-8;

    void validate() const {
        if (!(omega_min > 0.0) || !(omega_min < omega_max))
            throw DomainError("sweep: need 0 < omega_min < omega_max");
        if (points_per_decade < 10) throw DomainError("sweep: points_per_decade must be >= 10");
        if (!(refine_tol > 0.0)) throw DomainError("sweep: refine_tol must be positive");
    }
};

struct FreqPoint {
    enum class Kind { finite, zero, infinity };
    Kind kind = Kind::finite;
    double omega = 0.0;

    static FreqPoint at(double w) { return {Kind::finite, w}; }
    static FreqPoint zero() { return {Kind::zero, 0.0}; }
    static FreqPoint infinity() { return {Kind::infinity, std::numeric_limits<double>::infinity()}; }

    std::string str() const {
        if (kind == Kind::zero) return "zero";
        if (kind == Kind::infinity) return "infinity";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", omega);
        return buf;
    }
};

struct Extremum {
    FreqPoint omega_star;
    double value = 0.0;
};

enum class Mode { min, max };

// A real function of frequency with optional analytic limits at 0 and infinity.
struct FrequencyObjective {
    std::function<double(double)> at;
    std::optional<double> at_zero;
    std::optional<double> at_infinity;
    std::vector<double> seeds;  // frequencies worth putting on the grid (modal frequencies)
};

namespace detail {

inline bool better(Mode m, double a, double b) { return m == Mode::min ? a < b : a > b; }

// golden-section search on log(omega) inside [lo, hi]
inline Extremum golden(const std::function<double(double)>& f, Mode mode, double lo, double hi, double tol) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(lo), b = std::log(hi);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    auto val = [&](double x) {
        double v = f(std::exp(x));
        return std::isfinite(v) ? v : (mode == Mode::min ? std::numeric_limits<double>::infinity()
                                                         : -std::numeric_limits<double>::infinity());
    };
    double f1 = val(x1), f2 = val(x2);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
        if (better(mode, f1, f2)) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = val(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = val(x2);
        }
        double cur = better(mode, f1, f2) ? f1 : f2;
        if (it > 30 && std::abs(cur - prev) <= tol * std::max(std::abs(cur), 1e-300) && (b - a) < 1e-9) break;
        prev = cur;
    }
    return better(mode, f1, f2) ? Extremum{FreqPoint::at(std::exp(x1)), f1} : Extremum{FreqPoint::at(std::exp(x2)), f2};
}

}  // namespace detail

// Global min/max over omega >= 0 (conjugate symmetry covers omega < 0).
inline Extremum extremize(const FrequencyObjective& obj, Mode mode, const SweepSpec& spec = {}) {
    spec.validate();
    const double l0 = std::log10(spec.omega_min), l1 = std::log10(spec.omega_max);
    const int n = static_cast<int>(std::ceil((l1 - l0) * spec.points_per_decade)) + 1;
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(n) + obj.seeds.size());
    for (int k = 0; k < n; ++k) w.push_back(std::pow(10.0, l0 + (l1 - l0) * k / (n - 1)));
    for (double sd : obj.seeds)
        if (sd > spec.omega_min && sd < spec.omega_max && std::isfinite(sd)) w.push_back(sd);
    std::sort(w.begin(), w.end());
    // seeds repeat (conjugate pairs, shared poles) up to rounding; a near-duplicate would make
    // a degenerate refinement bracket
    w.erase(std::unique(w.begin(), w.end(), [](double a, double b) { return b - a <= 1e-9 * b; }), w.end());

    std::vector<double> v(w.size());
    std::size_t bad = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        v[k] = obj.at(w[k]);
        if (!std::isfinite(v[k])) ++bad;
    }
    if (2 * bad >= w.size()) throw IllPosedObjective("objective is non-finite on at least half of the grid");

    // local extrema of the grid, best first
    std::vector<std::size_t> cand;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!std::isfinite(v[k])) continue;
        bool left = k == 0 || !std::isfinite(v[k - 1]) || !detail::better(mode, v[k - 1], v[k]);
        bool right = k + 1 == w.size() || !std::isfinite(v[k + 1]) || !detail::better(mode, v[k + 1], v[k]);
        if (left && right) cand.push_back(k);
    }
    std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
        return detail::better(mode, v[a], v[b]) || (v[a] == v[b] && a < b);
    });
    if (cand.size() > 5) cand.resize(5);

    Extremum best{FreqPoint::at(w[cand.front()]), v[cand.front()]};
    for (std::size_t k : cand) {
        double lo = w[k > 0 ? k - 1 : 0], hi = w[k + 1 < w.size() ? k + 1 : k];
        if (lo == hi) continue;
        Extremum e = detail::golden(obj.at, mode, lo, hi, spec.refine_tol);
        if (std::isfinite(e.value) && detail::better(mode, e.value, best.value)) best = e;
    }
    if (obj.at_zero && std::isfinite(*obj.at_zero) && detail::better(mode, *obj.at_zero, best.value))
        best = {FreqPoint::zero(), *obj.at_zero};
    if (obj.at_infinity && std::isfinite(*obj.at_infinity) && detail::better(mode, *obj.at_infinity, best.value))
        best = {FreqPoint::infinity(), *obj.at_infinity};
    return best;
}

// Frequencies where something happens: |p| and |Im p| for every pole and zero.
inline void add_modal_seeds(const RationalFunction& g, std::vector<double>& seeds) {
    auto add = [&](const std::vector<cplx>& rs) {
        for (cplx r : rs) {
            if (std::abs(r.imag()) > 0) seeds.push_back(std::abs(r.imag()));
            if (std::abs(r) > 0) seeds.push_back(std::abs(r));
        }
    };
    add(g.poles());
    add(g.zeros());
}

// Chordal distance of two sphere-valued frequency responses. A pole of one function is just
// the point infinity, so poles on the axis need no special treatment unless both functions
// vanish or blow up together, which the projective form also handles.
inline double chordal(const RationalFunction& g1, const RationalFunction& g2, double omega) {
    cplx s(0.0, omega);
    return chordal(g1.eval_pair(s), g2.eval_pair(s));
}

inline double chordal_at(const RationalFunction& g1, const RationalFunction& g2, const FreqPoint& w) {
    if (w.kind == FreqPoint::Kind::zero) return chordal(g1.pair_at_zero(), g2.pair_at_zero());
    if (w.kind == FreqPoint::Kind::infinity) return chordal(g1.pair_at_infinity(), g2.pair_at_infinity());
    return chordal(g1, g2, w.omega);
}

// Sphere value 0/0 appears only when num and den share a root exactly on the axis, which
// reduction rules out; kept finite by falling back to nearby samples.
inline FrequencyObjective chordal_objective(const RationalFunction& g1, const RationalFunction& g2) {
    FrequencyObjective obj;
    obj.at = [g1, g2](double w) {
        double v = chordal(g1, g2, w);
        if (std::isfinite(v)) return v;
        double a = chordal(g1, g2, w * (1 + 1e-7)), b = chordal(g1, g2, w * (1 - 1e-7));
        return 0.5 * (a + b);
    };
    obj.at_zero = chordal(g1.pair_at_zero(), g2.pair_at_zero());
    obj.at_infinity = chordal(g1.pair_at_infinity(), g2.pair_at_infinity());
    add_modal_seeds(g1, obj.seeds);
    add_modal_seeds(g2, obj.seeds);
    return obj;
}

// ---------------------------------------------------------------- H-infinity norm

struct HinfResult {
    double value = 0.0;
    FreqPoint omega_star;
    bool certified = false;
    int level_iterations = 0;
};

namespace detail {

// p(jw) = E(x) + j w O(x) with x = w^2; returns |p(jw)|^2 = E^2 + x O^2 as a polynomial in x
inline Polynomial magnitude_squared_in_x(const Polynomial& p) {
    std::vector<double> e, o;
    for (int k = 0; k <= p.degree(); ++k) {
        int m = k / 2;
        double sgn = (m % 2 == 0) ? 1.0 : -1.0;
        auto& dst = (k % 2 == 0) ? e : o;
        if (static_cast<int>(dst.size()) <= m) dst.resize(static_cast<std::size_t>(m) + 1, 0.0);
        dst[static_cast<std::size_t>(m)] = sgn * p[k];
    }
    if (e.empty()) e.push_back(0.0);
    if (o.empty()) o.push_back(0.0);
    Polynomial E(e), O(o), x{0.0, 1.0};
    return E * E + x * O * O;
}

}  // namespace detail

// Positive frequencies where |num(jw)| = gamma |den(jw)|, from the real positive roots of
// gamma^2 |den|^2 - |num|^2 in x = w^2.
inline std::vector<double> level_crossings(const Polynomial& num, const Polynomial& den, double gamma) {
    Polynomial q = (gamma * gamma) * detail::magnitude_squared_in_x(den) - detail::magnitude_squared_in_x(num);
    std::vector<double> out;
    if (q.is_zero() || q.degree() < 1) return out;
    for (cplx x : poly_roots(q)) {
        if (x.real() > 0.0 && std::abs(x.imag()) <= 1e-6 * std::abs(x)) out.push_back(std::sqrt(x.real()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<double> level_crossings(const RationalFunction& g, double gamma) {
    return level_crossings(g.num(), g.den(), gamma);
}

// Peak of a magnitude objective whose square is |num(jw)|^2 / |den(jw)|^2. The objective is
// what gets evaluated; num and den only feed the level-set certificate, so they need not be
// reduced or accurate enough for pointwise use.
inline HinfResult hinf_peak(const FrequencyObjective& obj, const Polynomial& num, const Polynomial& den,
                            const SweepSpec& spec = {}) {
    Extremum e = extremize(obj, Mode::max, spec);
    HinfResult res{e.value, e.omega_star, false, 0};
    // Level-set certificate: the crossings of a level just above the candidate split the axis
    // into intervals, and the objective exceeds the level on an interval only if it does at
    // its midpoint. The polynomial crossings are hints; every probe is evaluated directly.
    for (int it = 0; it < 40; ++it) {
        res.level_iterations = it + 1;
        const double level = res.value * (1 + 2e-6);
        std::vector<double> xs = level_crossings(num, den, level);
        std::vector<double> probes;
        for (std::size_t k = 0; k + 1 < xs.size(); ++k) probes.push_back(std::sqrt(xs[k] * xs[k + 1]));
        if (!xs.empty()) {
            probes.push_back(xs.front() * 0.5);
            probes.push_back(xs.back() * 2.0);
        }
        double bestw = res.omega_star.omega, bestv = res.value;
        for (double w : probes) {
            double v = obj.at(w);
            if (v > bestv) {
                bestv = v;
                bestw = w;
            }
        }
        if (!(bestv > level)) {
            res.certified = std::isfinite(bestv);
            break;
        }
        // polish the new peak between its neighbouring crossings
        auto lo = std::lower_bound(xs.begin(), xs.end(), bestw);
        double a = lo == xs.begin() ? bestw * 0.5 : *(lo - 1);
        double b = lo == xs.end() ? bestw * 2.0 : *lo;
        Extremum p = detail::golden(obj.at, Mode::max, a, b, spec.refine_tol);
        if (p.value > bestv) {
            bestv = p.value;
            bestw = p.omega_star.omega;
        }
        res.value = bestv;
        res.omega_star = FreqPoint::at(bestw);
    }
    return res;
}

inline HinfResult hinf_norm(const RationalFunction& g, const SweepSpec& spec = {}) {
    if (g.is_zero()) return {0.0, FreqPoint::zero(), true, 0};
    if (!g.proper()) throw UnboundedAtInfinity();
    for (cplx p : g.poles())
        if (std::abs(p.real()) <= kAxisTol) throw InfiniteNorm(std::abs(p.imag()));

    FrequencyObjective obj;
    obj.at = [g](double w) { return std::abs(g(cplx(0.0, w))); };
    obj.at_zero = std::abs(g.dc_gain());
    HomPair inf = g.pair_at_infinity();
    obj.at_infinity = std::abs(inf.num / inf.den);
    add_modal_seeds(g, obj.seeds);
    return hinf_peak(obj, g.num(), g.den(), spec);
}

}  // namespace nugap
