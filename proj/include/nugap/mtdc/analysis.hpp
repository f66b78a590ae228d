#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "../errors.hpp"
#include "../freq.hpp"
#include "../rational.hpp"
#include "../sim.hpp"
#include "../vgap.hpp"
#include "model.hpp"
#include "system.hpp"

namespace nugap::mtdc {

// Sorted, de-duplicated, each in 1..m.
inline std::vector<int> normalize_paths(std::vector<int> j1, int m) {
    for (int k : j1)
        if (k < 1 || k > m) throw ModelError("path index " + std::to_string(k) + " outside 1.." + std::to_string(m));
    std::sort(j1.begin(), j1.end());
    j1.erase(std::unique(j1.begin(), j1.end()), j1.end());
    return j1;
}

struct Partition {
    RationalFunction G;  // G_iJ0: certain part, the plant is 1/G
    RationalFunction C;  // C_iJ1: sum of uncertain paths
};

inline Partition path_partition(const CoefficientSet& cs, const std::vector<int>& j1_raw) {
    const int m = static_cast<int>(cs.FE.size());
    std::vector<int> j1 = normalize_paths(j1_raw, m);
    Partition p;
    p.G = cs.sCU - cs.FS;
    for (int k = 1; k <= m; ++k) {
        const RationalFunction& f = cs.FE[static_cast<std::size_t>(k - 1)];
        if (std::binary_search(j1.begin(), j1.end(), k)) p.C += f;
        else p.G -= f;
    }
    return p;
}

struct IndexResult {
    double zeta = 0.0;
    FreqPoint omega_star;
    double zeta_direct = 0.0;  // from the chordal distance of G and C
    bool nominal_stable = false;
    double abscissa = 0.0;
    std::vector<std::string> warnings;
};

// zeta = b[1/G, -C], cross-checked against min_w arcsin |G - C| / sqrt((1+|G|^2)(1+|C|^2)).
inline IndexResult stability_index(const Partition& p, const SweepSpec& spec = {}, double route_tol = 1e-6) {
    if (p.G.is_zero()) throw ModelError("certain part G is identically zero; the plant 1/G does not exist");
    IndexResult res;
    MarginResult m = stability_margin(p.G.inverse(), -p.C, spec);
    res.nominal_stable = m.closed_loop_stable;
    res.abscissa = m.abscissa;
    res.warnings = m.warnings;
    if (!m.closed_loop_stable) {
        res.warnings.push_back("nominal closed loop is unstable (abscissa " + std::to_string(m.abscissa) +
                               "); stability index set to 0");
        return res;
    }
    res.zeta = m.value;
    res.omega_star = m.omega_star;
    Extremum d = extremize(chordal_objective(p.G, p.C), Mode::min, spec);
    res.zeta_direct = std::asin(std::clamp(d.value, 0.0, 1.0));
    if (std::abs(res.zeta_direct - res.zeta) > route_tol) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "stability index routes disagree: margin %.9f vs direct %.9f", res.zeta,
                      res.zeta_direct);
        throw NumericalError(buf);
    }
    return res;
}

inline IndexResult stability_index(const MtdcSystem& sys, const std::vector<int>& j1, const SweepSpec& spec = {}) {
    return stability_index(path_partition(build_coefficients(sys), j1), spec);
}

namespace detail {

// L-infinity norm of (C - C~) / (1 + C reflect(C~)). Evaluated from the projective values of
// the two functions, since forming the quotient as one reduced rational loses the accuracy of
// its poles at the orders that occur here. The certificate polynomials are never reduced.
inline HinfResult tangent_norm(const RationalFunction& c1, const RationalFunction& c2, const SweepSpec& spec) {
    auto ratio = [](HomPair a, HomPair b) {
        double top = std::abs(a.num * b.den - b.num * a.den);
        double bot = std::abs(a.den * std::conj(b.den) + a.num * std::conj(b.num));
        if (top == 0.0) return 0.0;
        return bot == 0.0 ? std::numeric_limits<double>::infinity() : top / bot;
    };
    Polynomial top = c1.num() * c2.den() - c2.num() * c1.den();
    Polynomial bot = c1.den() * c2.den().reflect() + c1.num() * c2.num().reflect();
    if (bot.is_zero()) throw InfiniteNorm(0.0);
    for (cplx r : bot.degree() >= 1 ? poly_roots(bot) : std::vector<cplx>{}) {
        if (std::abs(r.real()) > 1e-9 * (1.0 + std::abs(r))) continue;
        cplx s(0.0, r.imag());
        if (std::abs(top.eval(s)) > 1e-9 * top.bound_at(std::abs(s))) throw InfiniteNorm(std::abs(r.imag()));
    }
    FrequencyObjective obj;
    obj.at = [c1, c2, ratio](double w) {
        cplx s(0.0, w);
        return ratio(c1.eval_pair(s), c2.eval_pair(s));
    };
    obj.at_zero = ratio(c1.pair_at_zero(), c2.pair_at_zero());
    obj.at_infinity = ratio(c1.pair_at_infinity(), c2.pair_at_infinity());
    add_modal_seeds(c1, obj.seeds);
    add_modal_seeds(c2, obj.seeds);
    HinfResult h = hinf_peak(obj, top, bot, spec);
    if (!std::isfinite(h.value)) throw InfiniteNorm(h.omega_star.omega);
    return h;
}

}  // namespace detail

struct RadiusResult {
    double r = 0.0;
    FreqPoint omega_star;
    double r_sweep = 0.0;
    std::optional<double> r_norm;
    std::vector<std::string> warnings;
};

// r = max_w arcsin of the chordal distance between C and C~, also as arctan of the L-infinity
// norm of (C - C~) / (1 + C reflect(C~)). The larger of the two routes is returned.
inline RadiusResult uncertainty_radius(const RationalFunction& c_nom, const RationalFunction& c_pert,
                                       const SweepSpec& spec = {}, double route_tol = 1e-6) {
    Comparability cmp = comparability(c_nom, c_pert);
    if (!cmp.comparable)
        throw IncomparableError("nominal and perturbed path sums are not comparable (pole/zero census differs)");
    RadiusResult res;
    if (cmp.indeterminate) res.warnings.push_back("pole or zero on the imaginary axis; comparability is heuristic");

    Extremum e = extremize(chordal_objective(c_nom, c_pert), Mode::max, spec);
    res.r_sweep = std::asin(std::clamp(e.value, 0.0, 1.0));
    res.r = res.r_sweep;
    res.omega_star = e.omega_star;

    RationalFunction diff = c_nom - c_pert;
    if (diff.is_zero()) {
        res.r_norm = 0.0;
        res.r = 0.0;
        res.omega_star = FreqPoint::zero();
        return res;
    }
    try {
        HinfResult h = detail::tangent_norm(c_nom, c_pert, spec);
        res.r_norm = std::atan(h.value);
        if (!h.certified) res.warnings.push_back("norm route: level-set certificate did not close");
        if (std::abs(*res.r_norm - res.r_sweep) > route_tol) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "radius routes differ: sweep %.9f, norm %.9f", res.r_sweep, *res.r_norm);
            res.warnings.emplace_back(buf);
        }
        if (*res.r_norm > res.r) {
            res.r = *res.r_norm;
            res.omega_star = h.omega_star;
        }
    } catch (const NumericalError& ex) {
        res.warnings.push_back(std::string("norm route unavailable, sweep only: ") + ex.what());
    } catch (const DomainError& ex) {
        res.warnings.push_back(std::string("norm route unavailable, sweep only: ") + ex.what());
    }
    return res;
}

// ---------------------------------------------------------------- gain dependency table

// Coefficients touched by a gain: 0 stands for F_S, k for path k. Found by perturbing the gain
// and comparing every coefficient at a handful of complex frequencies.
inline std::vector<int> gain_dependencies(const MtdcSystem& sys, const ParamKey& key) {
    const CoefficientSet a = build_coefficients(sys);
    const double v = get_param(sys, key);
    const CoefficientSet b = build_coefficients(with_param(sys, key, v * 1.01 + 0.01));
    static const cplx probes[] = {{0.05, 0.37}, {0.5, 3.1}, {-0.7, 29.0}, {3.0, 240.0}, {10.0, 1900.0}};
    auto differs = [](const RationalFunction& x, const RationalFunction& y) {
        for (cplx s : probes) {
            cplx u = x(s), w = y(s);
            if (std::abs(u - w) > 1e-9 * (1.0 + std::abs(u))) return true;
        }
        return false;
    };
    std::vector<int> deps;
    if (differs(a.FS, b.FS)) deps.push_back(0);
    for (std::size_t k = 0; k < a.FE.size(); ++k)
        if (differs(a.FE[k], b.FE[k])) deps.push_back(static_cast<int>(k) + 1);
    return deps;
}

inline void check_partition(const MtdcSystem& sys, const std::vector<int>& j1, const ParamKey& key) {
    std::vector<int> bad;
    for (int d : gain_dependencies(sys, key))
        if (d == 0 || !std::binary_search(j1.begin(), j1.end(), d)) bad.push_back(d);
    if (!bad.empty()) throw PartitionViolation(key.text, bad);
}

struct DependencyRow {
    std::string vsc;
    std::string gain;
    std::vector<int> coefficients;
};

inline std::vector<DependencyRow> dependency_table(const MtdcSystem& sys) {
    std::vector<DependencyRow> rows;
    for (int k = 0; k < sys.size(); ++k)
        for (auto g : kGainNames) {
            ParamKey key{k, std::string(g), "vsc" + sys.vscs[static_cast<std::size_t>(k)].name + "." + std::string(g)};
            rows.push_back({sys.vscs[static_cast<std::size_t>(k)].name, key.gain, gain_dependencies(sys, key)});
        }
    return rows;
}

// ---------------------------------------------------------------- path-set verdict

struct OracleResult {
    bool stable = false;
    bool marginal = false;
    double abscissa = 0.0;
};

// Eigenvalues of a state-space realization of 1/(G - C), the disturbance-to-voltage loop.
inline OracleResult eigen_oracle(const RationalFunction& g, const RationalFunction& c) {
    EigenVerdict v = eigen_stability(realize_closed_loop(g, -c));
    return {v.stable, v.marginal, v.abscissa};
}

struct StabilityReport {
    double zeta = 0.0;
    double r = 0.0;
    double slack = 0.0;
    bool stable = false;
    FreqPoint omega_star_zeta;
    FreqPoint omega_star_r;
    OracleResult oracle;
    bool oracle_agrees = false;
    std::vector<std::string> warnings;
};

inline StabilityReport theorem2_verdict(const MtdcSystem& sys, const std::vector<int>& j1_raw,
                                        const std::vector<Override>& perturbation, const SweepSpec& spec = {}) {
    const CoefficientSet nominal = build_coefficients(sys);
    const std::vector<int> j1 = normalize_paths(j1_raw, static_cast<int>(nominal.FE.size()));
    MtdcSystem pert = sys;
    for (const Override& o : perturbation) {
        check_partition(sys, j1, o.key);
        pert = with_param(pert, o.key, o.value);
    }
    const Partition p = path_partition(nominal, j1);
    const Partition q = path_partition(build_coefficients(pert), j1);

    StabilityReport rep;
    IndexResult idx = stability_index(p, spec);
    RadiusResult rad = uncertainty_radius(p.C, q.C, spec);
    rep.zeta = idx.zeta;
    rep.omega_star_zeta = idx.omega_star;
    rep.r = rad.r;
    rep.omega_star_r = rad.omega_star;
    rep.slack = rep.zeta - rep.r;
    rep.stable = idx.nominal_stable && rep.r <= rep.zeta;
    rep.warnings = idx.warnings;
    rep.warnings.insert(rep.warnings.end(), rad.warnings.begin(), rad.warnings.end());
    rep.oracle = eigen_oracle(p.G, q.C);
    rep.oracle_agrees = rep.stable == rep.oracle.stable;
    return rep;
}

// ---------------------------------------------------------------- sweeps and boundaries

struct SweepRow {
    double c = 0.0;
    double r = 0.0;
    double zeta = 0.0;
    double slack = 0.0;
    bool stable = false;
    bool oracle_stable = false;
    bool comparable = true;
    bool failed = false;
    std::string error;
};

struct SweepTable {
    std::string param;
    std::vector<SweepRow> rows;
    double sensitivity = 0.0;  // max |dr/dc| between consecutive successful rows
};

namespace detail {

struct SweepContext {
    MtdcSystem sys;
    ParamKey key;
    Partition nominal;
    IndexResult index;
    std::vector<int> j1;
    SweepSpec spec;
};

inline SweepContext make_context(const MtdcSystem& sys, const std::vector<int>& j1_raw, const ParamKey& key,
                                 const SweepSpec& spec) {
    SweepContext ctx{sys, key, {}, {}, {}, spec};
    CoefficientSet cs = build_coefficients(sys);
    ctx.j1 = normalize_paths(j1_raw, static_cast<int>(cs.FE.size()));
    check_partition(sys, ctx.j1, key);
    ctx.nominal = path_partition(cs, ctx.j1);
    ctx.index = stability_index(ctx.nominal, spec);
    return ctx;
}

inline SweepRow evaluate_row(const SweepContext& ctx, double c) {
    SweepRow row;
    row.c = c;
    row.zeta = ctx.index.zeta;
    try {
        Partition q = path_partition(build_coefficients(with_param(ctx.sys, ctx.key, c)), ctx.j1);
        try {
            row.r = uncertainty_radius(ctx.nominal.C, q.C, ctx.spec).r;
        } catch (const IncomparableError&) {
            // the gap of an incomparable pair is pi/2 by definition
            row.r = std::numbers::pi / 2;
            row.comparable = false;
        }
        row.slack = row.zeta - row.r;
        row.stable = ctx.index.nominal_stable && row.r <= row.zeta;
        row.oracle_stable = eigen_oracle(ctx.nominal.G, q.C).stable;
    } catch (const std::exception& ex) {
        row.failed = true;
        row.error = ex.what();
    }
    return row;
}

}  // namespace detail

inline SweepTable sweep_parameter(const MtdcSystem& sys, const std::vector<int>& j1, const ParamKey& key,
                                  const std::vector<double>& values, const SweepSpec& spec = {}) {
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0) throw ModelError("sweep value for " + key.text + " must be finite and >= 0");
    const detail::SweepContext ctx = detail::make_context(sys, j1, key, spec);
    SweepTable t;
    t.param = key.text;
    t.rows.resize(values.size());
    // rows are independent; each worker fills its own slots so the order is the input order
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(values.size(), std::thread::hardware_concurrency()));
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t k = w; k < values.size(); k += workers) t.rows[k] = detail::evaluate_row(ctx, values[k]);
        }));
    for (auto& j : jobs) j.get();
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        const SweepRow &a = t.rows[k - 1], &b = t.rows[k];
        if (a.failed || b.failed || a.c == b.c) continue;
        t.sensitivity = std::max(t.sensitivity, std::abs((b.r - a.r) / (b.c - a.c)));
    }
    return t;
}

struct BoundaryResult {
    bool crossing = false;
    double c0 = 0.0;
    double r_at_c0 = 0.0;
    double zeta = 0.0;
    bool stable_above = false;  // r <= zeta for c >= c0 (else for c <= c0)
    bool monotone = false;      // slack monotone over the bracket samples
    double min_slack = 0.0, max_slack = 0.0;
    int iterations = 0;
    std::string certified_side() const {
        if (!crossing) return "no crossing";
        return stable_above ? "r <= zeta for c >= c0" : "r <= zeta for c <= c0";
    }
};

// Bisection on the sign of r(c) - zeta until |r - zeta| < delta.
inline BoundaryResult find_boundary(const MtdcSystem& sys, const std::vector<int>& j1, const ParamKey& key, double lo,
                                    double hi, double delta = 1e-3, const SweepSpec& spec = {}, int samples = 11) {
    if (!(delta > 0.0)) throw DomainError("boundary tolerance delta must be positive");
    if (!(lo < hi) || lo < 0.0 || !std::isfinite(hi)) throw DomainError("boundary bracket must satisfy 0 <= lo < hi");
    const detail::SweepContext ctx = detail::make_context(sys, j1, key, spec);
    BoundaryResult b;
    b.zeta = ctx.index.zeta;

    std::vector<double> cs;
    for (int k = 0; k < samples; ++k) cs.push_back(lo + (hi - lo) * k / (samples - 1));
    std::vector<double> slack;
    for (double c : cs) {
        SweepRow row = detail::evaluate_row(ctx, c);
        if (row.failed) throw ModelError("boundary sample " + key.text + " = " + std::to_string(c) + ": " + row.error);
        slack.push_back(row.slack);
    }
    b.min_slack = *std::min_element(slack.begin(), slack.end());
    b.max_slack = *std::max_element(slack.begin(), slack.end());
    bool inc = true, dec = true;
    for (std::size_t k = 1; k < slack.size(); ++k) {
        inc = inc && slack[k] >= slack[k - 1];
        dec = dec && slack[k] <= slack[k - 1];
    }
    b.monotone = inc || dec;
    if ((slack.front() < 0.0) == (slack.back() < 0.0)) return b;

    b.crossing = true;
    b.stable_above = slack.back() >= 0.0;
    // first sample pair that straddles zero
    std::size_t k = 1;
    while (k < slack.size() && (slack[k - 1] < 0.0) == (slack[k] < 0.0)) ++k;
    double a = cs[k - 1], z = cs[k];
    double sa = slack[k - 1];
    double c = 0.5 * (a + z), s = 0.0;
    for (int it = 0; it < 80; ++it) {
        b.iterations = it + 1;
        c = 0.5 * (a + z);
        SweepRow row = detail::evaluate_row(ctx, c);
        if (row.failed) throw ModelError("boundary sample " + key.text + " = " + std::to_string(c) + ": " + row.error);
        s = row.slack;
        b.r_at_c0 = row.r;
        if (std::abs(s) < delta || z - a < 1e-12 * std::max(1.0, std::abs(c))) break;
        if ((s < 0.0) == (sa < 0.0)) {
            a = c;
            sa = s;
        } else {
            z = c;
        }
    }
    b.c0 = c;
    return b;
}

}  // namespace nugap::mtdc
