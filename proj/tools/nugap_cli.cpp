// nugap: command-line front end for the nu-gap and MTDC stability tools.
//
// Exit codes: 0 success, 2 invalid input (flags, config, partition, comparability),
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <nugap/nugap.hpp>

namespace {

using namespace nugap;
using namespace nugap::mtdc;

struct Common {
    std::string config;
    std::string focus;
    std::vector<int> j1;
    std::vector<std::string> set;
    std::string csv;
    int ppd = 0;
};

SweepSpec sweep_spec(const Common& c) {
    SweepSpec s;
    if (const char* env = std::getenv("NUGAP_SWEEP_POINTS")) {
        try {
            std::size_t used = 0;
            s.points_per_decade = std::stoi(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument(env);
        } catch (const std::exception&) {
            throw DomainError(std::string("NUGAP_SWEEP_POINTS: not an integer: ") + env);
        }
    }
    if (c.ppd > 0) s.points_per_decade = c.ppd;
    s.validate();
    return s;
}

MtdcSystem load(const Common& c) {
    if (c.config.empty()) throw ModelError("--config is required");
    MtdcSystem sys = load_system(c.config);
    if (!c.focus.empty()) sys.focus = sys.index_of(c.focus);
    if (!c.j1.empty()) sys.j1 = c.j1;
    for (const std::string& s : c.set) {
        Override o = parse_override(sys, s);
        sys = with_param(sys, o.key, o.value);
    }
    return sys;
}

void print_warnings(const std::vector<std::string>& ws) {
    for (const auto& w : ws) std::cerr << "warning: " << w << '\n';
}

std::string paths_str(const std::vector<int>& j1) {
    std::string s = "{";
    for (std::size_t k = 0; k < j1.size(); ++k) s += (k ? "," : "") + std::to_string(j1[k]);
    return s + "}";
}

// lo:hi or lo:hi:n
std::vector<double> parse_range(const std::string& text, int default_n) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t next = text.find(':', pos);
        std::string tok = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw DomainError("range '" + text + "': expected lo:hi[:n]");
        parts.push_back(v);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) throw DomainError("range '" + text + "': expected lo:hi[:n]");
    int n = parts.size() == 3 ? static_cast<int>(parts[2]) : default_n;
    if (n < 2 || (parts.size() == 3 && parts[2] != n)) throw DomainError("range '" + text + "': n must be an integer >= 2");
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(parts[0] + (parts[1] - parts[0]) * k / (n - 1));
    return out;
}

void add_system_flags(CLI::App* cmd, Common& c, bool with_j1 = true) {
    cmd->add_option("--config", c.config, "system config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--focus", c.focus, "focus VSC name (default: config)");
    if (with_j1) cmd->add_option("--j1", c.j1, "uncertain paths, e.g. 4,6")->delimiter(',');
    cmd->add_option("--set", c.set, "nominal override vsc<ID>.<gain>=value (repeatable)");
    cmd->add_option("--points-per-decade", c.ppd, "frequency grid density");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write " + path);
    out << text;
}

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int run(int argc, char** argv) {
    CLI::App app{"nu-gap metric, robust stability margin and MTDC stability index"};
    app.require_subcommand(1);
    Common c;

    // vgap
    std::string g1, g2;
    auto* vg = app.add_subcommand("vgap", "nu-gap between two transfer functions");
    vg->add_option("--g1", g1, "first transfer function file")->required()->check(CLI::ExistingFile);
    vg->add_option("--g2", g2, "second transfer function file")->required()->check(CLI::ExistingFile);
    vg->add_option("--points-per-decade", c.ppd, "frequency grid density");

    // margin
    std::string pf, cf;
    double rp = 0, rc = 0;
    auto* mg = app.add_subcommand("margin", "robust stability margin b[P, C]");
    mg->add_option("--p", pf, "plant transfer function file")->required()->check(CLI::ExistingFile);
    mg->add_option("--c", cf, "controller transfer function file")->required()->check(CLI::ExistingFile);
    mg->add_option("--rp", rp, "plant uncertainty radius for the certification test");
    mg->add_option("--rc", rc, "controller uncertainty radius for the certification test");
    mg->add_option("--points-per-decade", c.ppd, "frequency grid density");

    auto* ix = app.add_subcommand("index", "stability index for a path set");
    add_system_flags(ix, c);

    std::vector<std::string> perturb;
    auto* vd = app.add_subcommand("verdict", "uncertainty radius, index and verdict for perturbed gains");
    add_system_flags(vd, c);
    vd->add_option("--perturb", perturb, "perturbed gain vsc<ID>.<gain>=value (repeatable)")->required();

    std::string param, range, bracket;
    std::vector<double> values;
    const int npoints = 40;
    auto* sw = app.add_subcommand("sweep", "uncertainty radius over a range of one gain");
    add_system_flags(sw, c);
    sw->add_option("--param", param, "gain key, e.g. vscB.kp1")->required();
    auto* vopt = sw->add_option("--values", values, "explicit values")->delimiter(',');
    auto* ropt = sw->add_option("--range", range, "lo:hi[:n], linear");
    vopt->excludes(ropt);
    sw->add_option("--csv", c.csv, "write rows to this CSV file");

    double delta = 1e-3;
    int samples = 11;
    auto* bd = app.add_subcommand("boundary", "gain value where the radius meets the index");
    add_system_flags(bd, c);
    bd->add_option("--param", param, "gain key, e.g. vscB.kp1")->required();
    bd->add_option("--bracket", bracket, "lo:hi")->required();
    bd->add_option("--delta", delta, "tolerance on |r - zeta|, radians");
    bd->add_option("--samples", samples, "bracket samples for the monotonicity check")->check(CLI::Range(3, 1000));

    double duration = 2.0, dt = 1e-5, magnitude = 0.01;
    auto* sm = app.add_subcommand("simulate", "step response of the closed loop 1/(G - C)");
    add_system_flags(sm, c);
    sm->add_option("--perturb", perturb, "perturbed gain vsc<ID>.<gain>=value (repeatable)");
    sm->add_option("--duration", duration, "seconds of per-unit time");
    sm->add_option("--dt", dt, "RK4 step");
    sm->add_option("--magnitude", magnitude, "power step, per-unit");
    sm->add_option("--csv", c.csv, "write t,y to this CSV file");

    std::string outdir = ".";
    auto* cc = app.add_subcommand("coeffs", "write the coefficient set as transfer function files");
    add_system_flags(cc, c);
    cc->add_option("--out", outdir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (vg->parsed()) {
        GapResult r = v_gap(load_rational(g1), load_rational(g2), sweep_spec(c));
        if (r.indeterminate) print_warnings({"pole or zero on the imaginary axis; comparability is heuristic"});
        std::printf("vgap        %.6f\ncomparable  %s\nomega*      %s\n", r.value, r.comparable ? "yes" : "no",
                    r.comparable ? r.omega_star.str().c_str() : "-");
        return 0;
    }
    if (mg->parsed()) {
        RationalFunction p = load_rational(pf), k = load_rational(cf);
        MarginResult m = stability_margin(p, k, sweep_spec(c));
        std::printf("margin      %.6f\nloop        %s\nomega*      %s\n", m.value, m.closed_loop_stable ? "stable" : "unstable",
                    m.closed_loop_stable ? m.omega_star.str().c_str() : "-");
        if (mg->count("--rp") || mg->count("--rc")) {
            Theorem1Result t = theorem1_certify(p, k, rp, rc, sweep_spec(c));
            std::printf("slack       %.6f\ncertified   %s\n", t.slack, t.certified_stable ? "yes" : "no");
        }
        return 0;
    }

    const MtdcSystem sys = load(c);
    const SweepSpec spec = sweep_spec(c);
    const std::string focus = sys.vscs[static_cast<std::size_t>(sys.focus)].name;

    if (ix->parsed()) {
        IndexResult r = stability_index(sys, sys.j1, spec);
        print_warnings(r.warnings);
        std::printf("focus       %s\nJ1          %s\nzeta        %.6f\nomega*      %s\nnominal     %s\n", focus.c_str(),
                    paths_str(normalize_paths(sys.j1, 6)).c_str(), r.zeta, r.omega_star.str().c_str(),
                    r.nominal_stable ? "stable" : "unstable");
        return 0;
    }
    if (vd->parsed()) {
        std::vector<Override> os;
        for (const auto& s : perturb) os.push_back(parse_override(sys, s));
        StabilityReport rep = theorem2_verdict(sys, sys.j1, os, spec);
        print_warnings(rep.warnings);
        std::printf("zeta        %.6f\nr           %.6f\nslack       %.6f\nverdict     %s\n", rep.zeta, rep.r, rep.slack,
                    rep.stable ? "stable" : "not certified");
        std::printf("omega*_zeta %s\nomega*_r    %s\n", rep.omega_star_zeta.str().c_str(), rep.omega_star_r.str().c_str());
        std::printf("oracle      %s (abscissa %.6f)\nagrees      %s\n", rep.oracle.marginal ? "marginal" : (rep.oracle.stable ? "stable" : "unstable"),
                    rep.oracle.abscissa, rep.oracle_agrees ? "yes" : "no");
        return 0;
    }
    if (sw->parsed()) {
        ParamKey key = parse_param_key(sys, param);
        if (!range.empty()) values = parse_range(range, npoints);
        if (values.empty()) throw DomainError("sweep needs --values or --range");
        SweepTable t = sweep_parameter(sys, sys.j1, key, values, spec);
        std::printf("%-12s %-10s %-10s %-10s %-9s %s\n", key.text.c_str(), "r", "zeta", "slack", "verdict", "oracle");
        for (const SweepRow& row : t.rows) {
            if (row.failed) {
                std::printf("%-12.6f failed: %s\n", row.c, row.error.c_str());
                continue;
            }
            std::printf("%-12.6f %-10.6f %-10.6f %-10.6f %-9s %s%s\n", row.c, row.r, row.zeta, row.slack,
                        row.stable ? "stable" : "-", row.oracle_stable ? "stable" : "unstable",
                        row.comparable ? "" : "  (incomparable)");
        }
        std::printf("sensitivity max|dr/dc| %.6f\n", t.sensitivity);
        if (!c.csv.empty()) {
            std::string out = "c,r,zeta,slack,stable,oracle_stable,comparable,failed\n";
            for (const SweepRow& row : t.rows)
                out += g17(row.c) + "," + g17(row.r) + "," + g17(row.zeta) + "," + g17(row.slack) + "," +
                       (row.stable ? "1" : "0") + "," + (row.oracle_stable ? "1" : "0") + "," +
                       (row.comparable ? "1" : "0") + "," + (row.failed ? "1" : "0") + "\n";
            write_file(c.csv, out);
        }
        return 0;
    }
    if (bd->parsed()) {
        ParamKey key = parse_param_key(sys, param);
        std::vector<double> lh = parse_range(bracket, 2);
        if (lh.size() != 2) throw DomainError("--bracket expects lo:hi");
        BoundaryResult b = find_boundary(sys, sys.j1, key, lh[0], lh[1], delta, spec, samples);
        std::printf("zeta        %.6f\n", b.zeta);
        if (!b.crossing) {
            std::printf("result      no crossing\nmin slack   %.6f\nmax slack   %.6f\n", b.min_slack, b.max_slack);
            return 0;
        }
        std::printf("c0          %.6f\nr(c0)       %.6f\ncertified   %s\nmonotone    %s\n", b.c0, b.r_at_c0,
                    b.certified_side().c_str(), b.monotone ? "yes" : "no");
        return 0;
    }
    if (sm->parsed()) {
        const std::vector<int>& j1 = sys.j1;
        MtdcSystem pert = sys;
        for (const auto& s : perturb) {
            Override o = parse_override(sys, s);
            pert = with_param(pert, o.key, o.value);
        }
        Partition nominal = path_partition(build_coefficients(sys), j1);
        Partition q = path_partition(build_coefficients(pert), j1);
        StateSpace ss = realize_closed_loop(nominal.G, -q.C);
        EigenVerdict ev = eigen_stability(ss);
        TimeSeries ts = step_response(ss, duration, dt, magnitude);
        std::printf("order       %d\nabscissa    %.6f\ntrace       %s\nfinal y     %.6f\n", ss.order(), ev.abscissa,
                    to_string(classify_trace(ts)), ts.y.back());
        if (!c.csv.empty()) {
            std::ofstream out(c.csv);
            if (!out) throw ModelError("cannot write " + c.csv);
            write_csv(out, ts);
        }
        return 0;
    }
    if (cc->parsed()) {
        CoefficientSet cs = build_coefficients(sys);
        std::filesystem::create_directories(outdir);
        auto path = [&](const std::string& name) { return (std::filesystem::path(outdir) / name).string(); };
        save_rational(path("FS.tf"), cs.FS);
        for (std::size_t k = 0; k < cs.FE.size(); ++k) save_rational(path("FE" + std::to_string(k + 1) + ".tf"), cs.FE[k]);
        Partition p = path_partition(cs, sys.j1);
        // margin --p plant.tf --c controller.tf reproduces the index
        save_rational(path("plant.tf"), p.G.inverse());
        save_rational(path("controller.tf"), -p.C);
        std::printf("wrote FS.tf, FE1..FE%zu.tf, plant.tf, controller.tf to %s (J1 %s)\n", cs.FE.size(), outdir.c_str(),
                    paths_str(normalize_paths(sys.j1, 6)).c_str());
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const PartitionViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IncomparableError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
