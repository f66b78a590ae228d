#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "freq.hpp"
#include "rational.hpp"

namespace nugap {

struct Comparability {
    bool comparable = false;
    // a pole or zero sits on the imaginary axis; the census test is then only a heuristic
    bool indeterminate = false;
};

inline Comparability comparability(const RationalFunction& g1, const RationalFunction& g2) {
    HalfPlaneCensus a = census(g1), b = census(g2);
    Comparability c;
    c.comparable = a.poles_lhp == b.poles_lhp && a.poles_rhp == b.poles_rhp && a.zeros_lhp == b.zeros_lhp &&
                   a.zeros_rhp == b.zeros_rhp && a.poles_axis == b.poles_axis && a.zeros_axis == b.zeros_axis;
    c.indeterminate = a.poles_axis + a.zeros_axis + b.poles_axis + b.zeros_axis > 0;
    return c;
}

inline bool comparable(const RationalFunction& g1, const RationalFunction& g2) {
    return comparability(g1, g2).comparable;
}

struct GapResult {
    double value = std::numbers::pi / 2;
    bool comparable = false;
    bool indeterminate = false;
    FreqPoint omega_star;
};

inline GapResult v_gap(const RationalFunction& g1, const RationalFunction& g2, const SweepSpec& spec = {}) {
    Comparability c = comparability(g1, g2);
    GapResult r;
    r.comparable = c.comparable;
    r.indeterminate = c.indeterminate;
    if (!c.comparable) return r;
    Extremum e = extremize(chordal_objective(g1, g2), Mode::max, spec);
    r.value = std::asin(std::clamp(e.value, 0.0, 1.0));
    r.omega_star = e.omega_star;
    return r;
}

inline bool ball_contains(const RationalFunction& center, double radius, const RationalFunction& g,
                          const SweepSpec& spec = {}) {
    if (radius < 0.0 || radius > std::numbers::pi / 2) throw DomainError("ball radius must lie in [0, pi/2]");
    return v_gap(center, g, spec).value <= radius;
}

struct MarginResult {
    double value = 0.0;
    bool closed_loop_stable = false;
    double abscissa = 0.0;  // of the characteristic polynomial
    FreqPoint omega_star;
    std::vector<std::string> warnings;
};

// Loop 1 + P C with characteristic polynomial nP nC + dP dC. An unstable pole of one factor
// sitting on a zero of the other cancels in P C; such a loop is declared unstable even if the
// rounding in chi happens to hide the root.
inline StabilityInfo loop_stability(const RationalFunction& p, const RationalFunction& c) {
    Polynomial chi = p.num() * c.num() + p.den() * c.den();
    if (chi.is_zero()) throw DegenerateLoop("characteristic polynomial is identically zero");
    std::vector<cplx> roots = chi.degree() >= 1 ? poly_roots(chi) : std::vector<cplx>{};
    StabilityInfo info = stability_of_roots(roots);
    if (!info.stable) return info;
    auto cancels = [](const std::vector<cplx>& poles, const std::vector<cplx>& zeros) {
        for (cplx m : poles) {
            if (m.real() < -kAxisTol) continue;
            for (cplx z : zeros)
                if (detail::roots_coincide(m, z)) return true;
        }
        return false;
    };
    if (cancels(p.poles(), c.zeros()) || cancels(c.poles(), p.zeros())) {
        info.stable = false;
        info.abscissa = std::max(info.abscissa, 0.0);
    }
    return info;
}

inline MarginResult stability_margin(const RationalFunction& p, const RationalFunction& c, const SweepSpec& spec = {}) {
    MarginResult r;
    StabilityInfo st = loop_stability(p, c);
    r.closed_loop_stable = st.stable;
    r.abscissa = st.abscissa;
    if (!st.stable) {
        r.value = 0.0;
        return r;
    }
    // -1/C as the projective pair (-dC : nC); C = 0 is the point at infinity
    auto minus_inv_c = [&c](cplx s) {
        HomPair h = c.eval_pair(s);
        return HomPair{-h.den, h.num};
    };
    FrequencyObjective obj;
    obj.at = [&](double w) { return chordal(p.eval_pair(cplx(0, w)), minus_inv_c(cplx(0, w))); };
    HomPair c0 = c.pair_at_zero(), ci = c.pair_at_infinity();
    obj.at_zero = chordal(p.pair_at_zero(), HomPair{-c0.den, c0.num});
    obj.at_infinity = chordal(p.pair_at_infinity(), HomPair{-ci.den, ci.num});
    add_modal_seeds(p, obj.seeds);
    add_modal_seeds(c, obj.seeds);
    Extremum e = extremize(obj, Mode::min, spec);
    r.value = std::asin(std::clamp(e.value, 0.0, 1.0));
    r.omega_star = e.omega_star;
    return r;
}

struct Theorem1Result {
    bool certified_stable = false;
    double margin = 0.0;
    double slack = 0.0;
};

inline Theorem1Result theorem1_certify(const RationalFunction& p, const RationalFunction& c, double r_p, double r_c,
                                       const SweepSpec& spec = {}) {
    if (r_p < 0.0 || r_c < 0.0) throw DomainError("uncertainty radii must be non-negative");
    MarginResult m = stability_margin(p, c, spec);
    Theorem1Result t;
    t.margin = m.value;
    t.slack = m.value - r_p - r_c;
    t.certified_stable = m.value > 0.0 && r_p + r_c <= m.value;
    return t;
}

}  // namespace nugap
