#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "../errors.hpp"
#include "../rational.hpp"

namespace nugap::mtdc {

struct ControllerGains {
    double kp1 = 0, ki1 = 0;  // DC voltage control PI
    double kp2 = 0, ki2 = 0;  // PLL PI
    double kd = 0;            // I-U droop
    double kp6 = 0, ki6 = 0;  // AC current control PI
};

inline constexpr std::array<std::string_view, 7> kGainNames{"kp1", "ki1", "kp2", "ki2", "kd", "kp6", "ki6"};

inline double* gain_ptr(ControllerGains& g, std::string_view name) {
    if (name == "kp1") return &g.kp1;
    if (name == "ki1") return &g.ki1;
    if (name == "kp2") return &g.kp2;
    if (name == "ki2") return &g.ki2;
    if (name == "kd") return &g.kd;
    if (name == "kp6") return &g.kp6;
    if (name == "ki6") return &g.ki6;
    return nullptr;
}

struct OperatingPoint {
    double P0 = 0, Q0 = 0;
    double Udc0 = 1, Ut0 = 1, Us0 = 1;
    // filled by solve_operating_point
    double theta0 = 0, thetat0 = 0, thetas0 = 0;
    double E0 = 1;
};

struct VscParams {
    std::string name;
    double C = 0;
    double Xf = 0, Xg = 0;
    double Cf = 0;
    OperatingPoint op;
    ControllerGains gains;
};

struct Cable {
    int from = 0, to = 0;
    double R = 0, L = 0;
};

struct BaseValues {
    double Sbase = 1000;    // MVA
    double Ubase = 270;     // kV, AC
    double fbase = 50;      // Hz
    double Udcbase = 400;   // kV, DC
    double omega() const { return 2.0 * 3.14159265358979323846 * fbase; }
};

enum class BlockModel { droop_current, pll_phase };
enum class Fe12Form { printed, index_consistent };
enum class G0U2Term { gdc, zero };

struct ModelOptions {
    BlockModel blocks = BlockModel::droop_current;
    Fe12Form fe12 = Fe12Form::printed;
    G0U2Term g0u2 = G0U2Term::gdc;
};

// User-supplied blocks replace the built-in construction for one VSC.
struct BlockOverride {
    std::optional<RationalFunction> gin;
    std::optional<RationalFunction> gdc;
    std::optional<double> kp0;
};

struct MtdcSystem {
    BaseValues base;
    std::vector<VscParams> vscs;
    std::vector<Cable> cables;
    int focus = 0;
    std::vector<int> j1;
    ModelOptions options;
    std::vector<BlockOverride> overrides;  // empty or one per VSC

    int size() const { return static_cast<int>(vscs.size()); }

    int index_of(std::string_view name) const {
        for (int k = 0; k < size(); ++k)
            if (vscs[static_cast<std::size_t>(k)].name == name) return k;
        throw ModelError("unknown VSC '" + std::string(name) + "'");
    }
};

// Newton iteration for the internal-voltage angle. Q0 at the internal voltage fixes E0:
//   Q0 = (E0^2 - E0 Us cos th) / X,   P0 = E0 Us sin th / X.
inline void solve_operating_point(VscParams& v) {
    const double X = v.Xf + v.Xg;
    if (!(X > 0.0)) throw DomainError("VSC " + v.name + ": Xf + Xg must be positive");
    OperatingPoint& op = v.op;
    if (!(op.Udc0 > 0.0) || !(op.Us0 > 0.0) || !(op.Ut0 > 0.0))
        throw ModelError("VSC " + v.name + ": voltages must be positive");
    const double Us = op.Us0;
    auto emag = [&](double th) {
        double c = Us * std::cos(th);
        double disc = c * c + 4.0 * X * op.Q0;
        if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
        return 0.5 * (c + std::sqrt(disc));
    };
    auto f = [&](double th) { return emag(th) * Us * std::sin(th) / X - op.P0; };
    double th = std::asin(std::clamp(op.P0 * X / (Us * Us), -1.0, 1.0));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        double fv = f(th);
        if (!std::isfinite(fv)) break;
        if (std::abs(fv) < 1e-12) {
            converged = true;
            break;
        }
        double h = 1e-7;
        double df = (f(th + h) - f(th - h)) / (2 * h);
        if (!std::isfinite(df) || df <= 0.0) break;
        th -= fv / df;
        if (std::abs(th) >= 0.5 * 3.14159265358979323846) break;
    }
    if (!converged) throw ModelError("VSC " + v.name + ": no steady state for P0 = " + std::to_string(op.P0));
    op.thetas0 = 0.0;
    op.theta0 = th;
    op.E0 = emag(th);
    // terminal voltage between Xf and Xg: Ut = Us + Xg/X (E - Us)
    cplx E = std::polar(op.E0, th), Ut = Us + (v.Xg / X) * (E - cplx(Us));
    op.thetat0 = std::arg(Ut);
}

// "vscB.kp1", or the short form "kbp1" (letter = lowercase VSC name, then the gain).
struct ParamKey {
    int vsc = 0;
    std::string gain;
    std::string text;
};

inline ParamKey parse_param_key(const MtdcSystem& sys, std::string_view key) {
    ParamKey pk;
    pk.text = std::string(key);
    if (key.substr(0, 3) == "vsc") {
        auto dot = key.find('.');
        if (dot == std::string_view::npos) throw ModelError("parameter key '" + pk.text + "': expected vsc<ID>.<gain>");
        pk.vsc = sys.index_of(key.substr(3, dot - 3));
        pk.gain = std::string(key.substr(dot + 1));
    } else if (key.size() >= 3 && key[0] == 'k') {
        std::string name(1, static_cast<char>(std::toupper(static_cast<unsigned char>(key[1]))));
        pk.vsc = sys.index_of(name);
        pk.gain = "k" + std::string(key.substr(2));
    } else {
        throw ModelError("parameter key '" + pk.text + "': expected vsc<ID>.<gain>");
    }
    ControllerGains g;
    if (!gain_ptr(g, pk.gain)) throw ModelError("parameter key '" + pk.text + "': unknown gain '" + pk.gain + "'");
    return pk;
}

inline double get_param(const MtdcSystem& sys, const ParamKey& k) {
    ControllerGains g = sys.vscs[static_cast<std::size_t>(k.vsc)].gains;
    return *gain_ptr(g, k.gain);
}

inline MtdcSystem with_param(MtdcSystem sys, const ParamKey& k, double value) {
    if (!std::isfinite(value) || value < 0.0)
        throw ModelError("gain " + k.text + " must be finite and non-negative");
    *gain_ptr(sys.vscs[static_cast<std::size_t>(k.vsc)].gains, k.gain) = value;
    return sys;
}

struct Override {
    ParamKey key;
    double value = 0;
};

// "vscB.kp1=0.1"
inline Override parse_override(const MtdcSystem& sys, std::string_view text) {
    auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ModelError("override '" + std::string(text) + "': expected key=value");
    Override o;
    o.key = parse_param_key(sys, text.substr(0, eq));
    std::string v(text.substr(eq + 1));
    std::size_t used = 0;
    try {
        o.value = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ModelError("override '" + std::string(text) + "': bad number");
    return o;
}

inline void validate(const MtdcSystem& sys) {
    const int n = sys.size();
    if (n < 2) throw ModelError("need at least two VSCs");
    if (sys.focus < 0 || sys.focus >= n) throw ModelError("focus VSC out of range");
    for (const auto& v : sys.vscs) {
        if (!(v.C > 0.0)) throw ModelError("VSC " + v.name + ": C must be positive");
        if (!(v.Xf + v.Xg > 0.0)) throw ModelError("VSC " + v.name + ": Xf + Xg must be positive");
        ControllerGains g = v.gains;
        for (auto name : kGainNames) {
            double x = *gain_ptr(g, name);
            if (!std::isfinite(x) || x < 0.0) throw ModelError("VSC " + v.name + ": gain " + std::string(name) + " must be >= 0");
        }
    }
    std::vector<int> parent(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) parent[static_cast<std::size_t>(k)] = k;
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    for (const auto& c : sys.cables) {
        if (c.from < 0 || c.from >= n || c.to < 0 || c.to >= n || c.from == c.to)
            throw ModelError("cable endpoints invalid");
        if (c.R < 0.0 || c.L < 0.0) throw ModelError("cable R and L must be >= 0");
        if (c.R == 0.0 && c.L == 0.0)
            throw ModelError("degenerate cable between " + sys.vscs[static_cast<std::size_t>(c.from)].name + " and " +
                             sys.vscs[static_cast<std::size_t>(c.to)].name + ": R = L = 0");
        parent[static_cast<std::size_t>(find(c.from))] = find(c.to);
    }
    for (int k = 1; k < n; ++k)
        if (find(k) != find(0)) throw ModelError("cable graph is not connected");
    if (!sys.overrides.empty() && static_cast<int>(sys.overrides.size()) != n)
        throw ModelError("block overrides must be given per VSC");
}

}  // namespace nugap::mtdc
