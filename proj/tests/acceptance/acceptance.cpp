// One PASS/FAIL line per acceptance criterion; exit status 1 if any line fails.

#include <chrono>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "../support.hpp"

using namespace nugap;
using namespace nugap::mtdc;
using nugap::testing::Layout;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] %-3s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) v.push_back(a + (b - a) * k / (n - 1));
    return v;
}

void metric_axioms() {
    std::mt19937 rng(1001);
    double worst_sym = 0, worst_self = 0;
    int range_bad = 0, triangle_bad = 0;
    for (int k = 0; k < 500; ++k) {
        Layout base = nugap::testing::random_stable(rng, 3);
        RationalFunction a = base.rf(), b = nugap::testing::nudge(rng, base).rf(), c = nugap::testing::nudge(rng, base).rf();
        double ab = v_gap(a, b).value, ba = v_gap(b, a).value, bc = v_gap(b, c).value, ac = v_gap(a, c).value;
        worst_sym = std::max(worst_sym, std::abs(ab - ba));
        worst_self = std::max(worst_self, v_gap(a, a).value);
        for (double v : {ab, bc, ac})
            if (!(v >= 0 && v <= std::numbers::pi / 2)) ++range_bad;
        if (ac > ab + bc + 1e-6) ++triangle_bad;
    }
    report("1", worst_sym < 1e-10 && worst_self < 1e-10 && range_bad == 0 && triangle_bad == 0, "metric axioms",
           fmt("500 triples, max asymmetry %.2e, max self-distance %.2e, out of range %d, triangle violations %d",
               worst_sym, worst_self, range_bad, triangle_bad));
}

void closed_forms() {
    double g = v_gap(RationalFunction(0.0), RationalFunction(1.0)).value;
    double m = stability_margin(RationalFunction(Polynomial{1}, Polynomial{0, 1}), RationalFunction(1.0)).value;
    double h = hinf_norm(RationalFunction(Polynomial{1}, Polynomial{1, 0.2, 1})).value;
    const double pi4 = std::numbers::pi / 4, peak = 1 / (0.2 * std::sqrt(0.99));
    report("2", std::abs(g - pi4) <= 1e-9 && std::abs(m - pi4) <= 1e-6 && std::abs(h - 5.0252) <= 1e-4,
           "closed-form anchors",
           fmt("vgap(0,1) %.12f, b[1/s,1] %.9f (pi/4 %.9f), resonator peak %.6f (exact %.6f)", g, m, pi4, h, peak));
}

void index_routes(const MtdcSystem& sys) {
    double worst = 0;
    std::string vals;
    for (std::vector<int> j1 : {std::vector<int>{4}, {6}, {4, 6}, {1, 2, 3, 4, 5, 6}}) {
        IndexResult r = stability_index(sys, j1);
        worst = std::max(worst, std::abs(r.zeta - r.zeta_direct));
        vals += fmt(" %zu-path %.6f", j1.size(), r.zeta);
    }
    report("3", worst < 1e-6, "index routes agree", fmt("max |direct - margin form| %.2e;", worst) + vals);
}

struct Sample {
    std::string param;
    double c = 0, r = 0, zeta = 0;
    bool oracle_stable = false, failed = false;
};

// Benchmark perturbation samples for criteria 4, 5 and 9.
std::vector<Sample> benchmark_samples(const MtdcSystem& sys, double& worst_route, int& route_count) {
    std::vector<Sample> out;
    worst_route = 0;
    route_count = 0;
    auto run = [&](const MtdcSystem& s, std::vector<int> j1, const std::string& key, std::vector<double> values) {
        ParamKey pk = parse_param_key(s, key);
        Partition nominal = path_partition(build_coefficients(s), j1);
        SweepTable t = sweep_parameter(s, j1, pk, values);
        for (const SweepRow& row : t.rows) {
            out.push_back({key, row.c, row.r, row.zeta, row.oracle_stable, row.failed});
        }
        // each radius is recomputed to read both routes
        for (std::size_t k = 0; k < values.size(); ++k) {
            Partition q = path_partition(build_coefficients(with_param(s, pk, values[k])), j1);
            RadiusResult r = uncertainty_radius(nominal.C, q.C);
            if (r.r_norm) worst_route = std::max(worst_route, std::abs(*r.r_norm - r.r_sweep));
            else worst_route = std::max(worst_route, 1.0);
            ++route_count;
        }
    };
    run(sys, {2, 6}, "kbp1", linspace(0.05, 2.0, 100));
    run(sys, {4, 6}, "kcp1", linspace(0.5, 2.0, 100));
    run(sys, {4, 6}, "kci2", linspace(500, 4000, 60));
    // kad enters the self term, so it cannot be an uncertain parameter of any path set; each kad
    // value becomes the nominal and kcp1 is perturbed around it
    std::mt19937 rng(1005);
    std::uniform_real_distribution<double> kc(0.5, 2.0);
    for (double kad : linspace(1.5, 15.0, 12)) {
        MtdcSystem s = with_param(sys, parse_param_key(sys, "kad"), kad);
        std::vector<double> vs;
        for (int k = 0; k < 5; ++k) vs.push_back(kc(rng));
        std::size_t before = out.size();
        run(s, {4, 6}, "kcp1", vs);
        for (std::size_t k = before; k < out.size(); ++k) out[k].param = fmt("kad=%.2f/kcp1", kad);
    }
    return out;
}

void radius_routes(double worst_bench, int bench_count) {
    std::mt19937 rng(1004);
    double worst = 0;
    for (int k = 0; k < 200; ++k) {
        Layout base = nugap::testing::random_stable(rng, 3);
        RadiusResult r = uncertainty_radius(base.rf(), nugap::testing::nudge(rng, base).rf());
        worst = std::max(worst, r.r_norm ? std::abs(*r.r_norm - r.r_sweep) : 1.0);
    }
    RationalFunction g(Polynomial{1, 2}, Polynomial{3, 1, 1});
    double zero = uncertainty_radius(g, g).r;
    report("4", worst < 1e-6 && worst_bench < 1e-6 && zero == 0.0, "sweep and norm radius routes agree",
           fmt("200 random pairs max diff %.2e; %d benchmark perturbations max diff %.2e; r at zero perturbation %g",
               worst, bench_count, worst_bench, zero));
}

void theorem2_oracle(const std::vector<Sample>& samples) {
    int used = 0, certified = 0, counter = 0, conservative = 0, failed = 0;
    for (const Sample& s : samples) {
        if (s.failed) {
            ++failed;
            continue;
        }
        ++used;
        if (s.r <= s.zeta - 1e-3) {
            ++certified;
            if (!s.oracle_stable) {
                ++counter;
                std::printf("      counterexample %s = %g: r %.6f zeta %.6f\n", s.param.c_str(), s.c, s.r, s.zeta);
            }
        } else if (s.r > s.zeta + 1e-3 && s.oracle_stable) {
            ++conservative;
        }
    }
    report("5", used >= 300 && counter == 0 && failed == 0, "radius-vs-index certificate vs eigenvalue oracle",
           fmt("%d samples, %d certified, %d counterexamples, %d uncertified but oracle-stable, %d failed", used,
               certified, counter, conservative, failed));
}

void table2(const MtdcSystem& sys) {
    double z6 = stability_index(sys, {6}).zeta, z4 = stability_index(sys, {4}).zeta,
           z46 = stability_index(sys, {4, 6}).zeta;
    report("6a", z6 < z4 && z4 < z46, "path-set ordering zeta{6} < zeta{4} < zeta{4,6}",
           fmt("zeta{6} %.6f, zeta{4} %.6f, zeta{4,6} %.6f", z6, z4, z46));
    bool close = std::abs(z6 - 0.275) <= 0.05 && std::abs(z4 - 0.51) <= 0.05 && std::abs(z46 - 0.58) <= 0.05;
    report("6b", close, "path-set index values within 0.05 of 0.275 / 0.51 / 0.58",
           fmt("got %.4f / %.4f / %.4f", z6, z4, z46));
}

void table1(const MtdcSystem& sys) {
    const double kad[] = {1.5, 5, 10, 15}, target[] = {0.58, 0.43, 0.37, 0.27};
    double z[4];
    for (int k = 0; k < 4; ++k) z[k] = stability_index(with_param(sys, parse_param_key(sys, "kad"), kad[k]), {4, 6}).zeta;
    report("7a", z[0] > z[1] && z[1] > z[2] && z[2] > z[3], "zeta strictly decreasing in kad",
           fmt("kad 1.5/5/10/15: %.6f / %.6f / %.6f / %.6f", z[0], z[1], z[2], z[3]));
    bool close = true;
    for (int k = 0; k < 4; ++k) close = close && std::abs(z[k] - target[k]) <= 0.05;
    report("7b", close, "kad index values within 0.05 of 0.58 / 0.43 / 0.37 / 0.27",
           fmt("got %.4f / %.4f / %.4f / %.4f", z[0], z[1], z[2], z[3]));
}

struct Boundaries {
    BoundaryResult kbp1, kcp1;
};

Boundaries boundaries(const MtdcSystem& sys) {
    Boundaries b{find_boundary(sys, {2, 6}, parse_param_key(sys, "kbp1"), 0.05, 0.8),
                 find_boundary(sys, {4, 6}, parse_param_key(sys, "kcp1"), 0.5, 2.0)};
    bool side = b.kbp1.crossing && b.kbp1.stable_above && b.kcp1.crossing && b.kcp1.stable_above;
    report("8a", side, "sign change in each bracket, stable side is the larger gain",
           fmt("kbp1: %s; kcp1: %s", b.kbp1.certified_side().c_str(), b.kcp1.certified_side().c_str()));
    bool close = b.kbp1.crossing && b.kcp1.crossing && std::abs(b.kbp1.c0 - 0.16) <= 0.05 &&
                 std::abs(b.kcp1.c0 - 1.125) <= 0.15;
    report("8b", close, "boundaries kbp1 0.16 +- 0.05 and kcp1 1.125 +- 0.15",
           fmt("kbp1 c0 %.4f, kcp1 c0 %.4f", b.kbp1.c0, b.kcp1.c0));
    return b;
}

void pll_insensitivity(const std::vector<Sample>& samples) {
    double rmax = 0, zeta = 0;
    bool all_stable = true;
    int n = 0;
    for (const Sample& s : samples) {
        if (s.param != "kci2") continue;
        ++n;
        rmax = std::max(rmax, s.r);
        zeta = s.zeta;
        all_stable = all_stable && s.oracle_stable && !s.failed;
    }
    report("9", n > 0 && rmax < 0.05 && rmax < 0.1 * zeta && all_stable, "PLL integral gain kci2 insensitive",
           fmt("%d samples on [500, 4000], max r %.6f, zeta %.6f, all oracle-stable %s", n, rmax, zeta,
               all_stable ? "yes" : "no"));
}

void triangulation(const MtdcSystem& sys, const Boundaries& b) {
    struct Case {
        std::string name;
        MtdcSystem nominal;
        std::vector<int> j1;
        std::string key;
        double value;
    };
    std::vector<Case> cases;
    for (double kad : {1.5, 5.0, 10.0, 15.0})
        cases.push_back({fmt("kad=%g", kad), with_param(sys, parse_param_key(sys, "kad"), kad), {4, 6}, "", 0});
    for (double f : {0.9, 1.1}) {
        if (b.kbp1.crossing) cases.push_back({fmt("kbp1=%.4f", b.kbp1.c0 * f), sys, {2, 6}, "kbp1", b.kbp1.c0 * f});
        if (b.kcp1.crossing) cases.push_back({fmt("kcp1=%.4f", b.kcp1.c0 * f), sys, {4, 6}, "kcp1", b.kcp1.c0 * f});
    }
    int checked = 0, mismatched = 0, marginal = 0;
    std::string detail;
    for (const Case& c : cases) {
        MtdcSystem pert = c.key.empty() ? c.nominal : with_param(c.nominal, parse_param_key(sys, c.key), c.value);
        Partition p = path_partition(build_coefficients(c.nominal), c.j1);
        Partition q = path_partition(build_coefficients(pert), c.j1);
        StateSpace ss = realize_closed_loop(p.G, -q.C);
        EigenVerdict ev = eigen_stability(ss);
        if (ev.marginal) {
            ++marginal;
            continue;
        }
        double duration = std::min(60.0, 12.0 / std::abs(ev.abscissa));
        TimeSeries ts = step_response(ss, duration, 0.05 / ev.max_modulus, 0.01);
        TraceClass tc = classify_trace(ts);
        bool ok = (tc == TraceClass::settling && ev.stable) || (tc == TraceClass::divergent && !ev.stable);
        ++checked;
        if (!ok) ++mismatched;
        detail += fmt(" %s %s/%s;", c.name.c_str(), to_string(tc), ev.stable ? "stable" : "unstable");
    }
    report("10", checked > 0 && mismatched == 0, "step-response class matches eigenvalue oracle",
           fmt("%d checked, %d mismatched, %d marginal skipped;", checked, mismatched, marginal) + detail);
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    const MtdcSystem sys = nugap::testing::benchmark();
    try {
        metric_axioms();
        closed_forms();
        index_routes(sys);
        double worst_route = 0;
        int route_count = 0;
        std::vector<Sample> samples = benchmark_samples(sys, worst_route, route_count);
        radius_routes(worst_route, route_count);
        theorem2_oracle(samples);
        table2(sys);
        table1(sys);
        Boundaries b = boundaries(sys);
        pll_insensitivity(samples);
        triangulation(sys, b);
    } catch (const std::exception& e) {
        std::printf("[FAIL] aborted: %s\n", e.what());
        return 2;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d failing line(s), %.1f s\n", failures, secs);
    return failures ? 1 : 0;
}
