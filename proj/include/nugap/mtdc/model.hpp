#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "../errors.hpp"
#include "../rational.hpp"
#include "system.hpp"

namespace nugap::mtdc {

using Matrix = std::vector<std::vector<RationalFunction>>;

// DC network seen from each converter: dP_in,i = A_ii dU_i + sum_j A_ij dU_j.
// Cable current U_i0 (dU_i - dU_j)/(R + sL); the own-flow term comes from P_in = U I.
inline Matrix build_dc_couplings(const MtdcSystem& sys) {
    validate(sys);
    const int n = sys.size();
    Matrix a(static_cast<std::size_t>(n), std::vector<RationalFunction>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        const OperatingPoint& op = sys.vscs[static_cast<std::size_t>(i)].op;
        a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = RationalFunction(op.P0 / op.Udc0);
    }
    for (const Cable& c : sys.cables) {
        for (auto [i, j] : {std::pair{c.from, c.to}, std::pair{c.to, c.from}}) {
            double u = sys.vscs[static_cast<std::size_t>(i)].op.Udc0;
            RationalFunction y(Polynomial::constant(u), Polynomial{c.R, c.L});
            auto& aij = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            auto& aii = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            aij = aij + y;
            aii = aii - y;
        }
    }
    return a;
}

struct Blocks {
    RationalFunction gin;
    RationalFunction gdc;
    double kp0 = 0;
};

inline double power_angle_gain(const VscParams& v) {
    const OperatingPoint& op = v.op;
    return op.E0 * op.Us0 * std::cos(op.theta0 - op.thetas0) / (v.Xf + v.Xg);
}

namespace detail {

inline RationalFunction pi_block(double kp, double ki) {
    // kp + ki/s
    if (ki == 0.0) return RationalFunction(kp);
    return RationalFunction(Polynomial{ki, kp}, Polynomial{0.0, 1.0});
}

// closed current loop on the filter inductance L_f = Xf/w_b
inline RationalFunction current_loop(const VscParams& v, double wb) {
    const ControllerGains& g = v.gains;
    double lf = v.Xf / wb;
    if (g.kp6 == 0.0 && g.ki6 == 0.0) return RationalFunction();
    return RationalFunction(Polynomial{g.ki6, g.kp6}, Polynomial{g.ki6, g.kp6, lf});
}

// PLL tracking of the terminal-voltage angle
inline RationalFunction pll_loop(const VscParams& v, double u) {
    const ControllerGains& g = v.gains;
    if (g.kp2 == 0.0 && g.ki2 == 0.0) return RationalFunction();
    return RationalFunction(Polynomial{u * g.ki2, u * g.kp2}, Polynomial{u * g.ki2, u * g.kp2, 1.0});
}

}  // namespace detail

// dP_out / dP_ref: current loop, derated by the PLL through the terminal-voltage magnitude.
inline RationalFunction power_loop(const VscParams& v, double wb) {
    const OperatingPoint& op = v.op;
    double id0 = op.P0 / op.Ut0;
    double a = (v.Xg * id0 / op.Ut0) * (v.Xg * id0 / op.Ut0);
    RationalFunction hcc = detail::current_loop(v, wb);
    return hcc * (RationalFunction(1.0) - a * detail::pll_loop(v, op.Ut0));
}

// Converter blocks for the channel dP_out = K_P0 dtheta with dtheta = -G_in dP_in + G_dc dU_dc,
// so that dP_dc = (1 + K_P0 G_in) dP_in - K_P0 G_dc dU_dc.
inline Blocks build_blocks(const VscParams& v, const BaseValues& base, BlockModel model) {
    if (!(v.Xf + v.Xg > 0.0)) throw DomainError("VSC " + v.name + ": Xf + Xg must be positive");
    const double k0 = power_angle_gain(v);
    if (!(k0 > 0.0)) throw ModelError("VSC " + v.name + ": power-angle gain is not positive");
    const ControllerGains& g = v.gains;
    const OperatingPoint& op = v.op;
    Blocks b;
    b.kp0 = k0;
    if (model == BlockModel::pll_phase) {
        b.gin = g.kp2 == 0.0 && g.ki2 == 0.0
                    ? RationalFunction()
                    : RationalFunction(Polynomial{g.ki2, g.kp2}, Polynomial{op.Us0 * g.ki2, op.Us0 * g.kp2, 1.0});
        b.gdc = k0 * (detail::pi_block(g.kp1 + g.kd, g.ki1) * detail::current_loop(v, base.omega()));
        return b;
    }
    // DVC PI on dU_dc plus I-U droop on the DC current (measured as injection into the grid,
    // dI = (I0 dU - dP_in)/U0), both feeding the power reference.
    RationalFunction hp = power_loop(v, base.omega());
    const double i0 = op.P0 / op.Udc0;
    b.gdc = (1.0 / k0) * (hp * detail::pi_block(g.kp1 + g.kd * i0 / op.Udc0, g.ki1));
    b.gin = (g.kd / (k0 * op.Udc0)) * hp;
    return b;
}

inline std::vector<Blocks> build_all_blocks(const MtdcSystem& sys) {
    std::vector<Blocks> out;
    for (int k = 0; k < sys.size(); ++k) {
        const VscParams& v = sys.vscs[static_cast<std::size_t>(k)];
        Blocks b = build_blocks(v, sys.base, sys.options.blocks);
        if (!sys.overrides.empty()) {
            const BlockOverride& o = sys.overrides[static_cast<std::size_t>(k)];
            if (o.gin) b.gin = *o.gin;
            if (o.gdc) b.gdc = *o.gdc;
            if (o.kp0) b.kp0 = *o.kp0;
        }
        out.push_back(std::move(b));
    }
    return out;
}

// Solve the steady state of every converter in place.
inline MtdcSystem prepared(MtdcSystem sys) {
    for (auto& v : sys.vscs) solve_operating_point(v);
    validate(sys);
    return sys;
}

struct CoefficientSet {
    int focus = 0;
    std::array<int, 2> others{};
    RationalFunction FS;
    std::vector<RationalFunction> FE;  // FE[k-1] is path k
    Matrix A;
    std::vector<Blocks> blocks;
    RationalFunction sCU;  // s C_i U_dci0 of the focus converter
};

namespace detail {

inline RationalFunction checked_div(const RationalFunction& n, const RationalFunction& d, const char* formula) {
    if (d.is_zero()) throw ModelError(std::string("zero denominator in ") + formula);
    return n / d;
}

}  // namespace detail

inline RationalFunction self_coefficient(const Matrix& a, const std::vector<Blocks>& blocks, int i) {
    const Blocks& b = blocks[static_cast<std::size_t>(i)];
    RationalFunction g = RationalFunction(1.0) + b.kp0 * b.gin;
    return g * a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] - b.kp0 * b.gdc;
}

// The six interaction paths for a three-terminal system. Indices follow the focus as 1 and
// the two other converters, in config order, as 2 and 3.
inline std::vector<RationalFunction> en_coefficients(const MtdcSystem& sys, const Matrix& am,
                                                     const std::vector<Blocks>& blocks, int focus) {
    if (sys.size() != 3) throw ModelError("path decomposition needs exactly three converters");
    int o[3] = {focus, 0, 0};
    for (int k = 0, m = 1; k < 3; ++k)
        if (k != focus) o[m++] = k;
    auto A = [&](int i, int j) -> const RationalFunction& {
        return am[static_cast<std::size_t>(o[i - 1])][static_cast<std::size_t>(o[j - 1])];
    };
    auto B = [&](int i) -> const Blocks& { return blocks[static_cast<std::size_t>(o[i - 1])]; };
    auto sCU = [&](int i) {
        const VscParams& v = sys.vscs[static_cast<std::size_t>(o[i - 1])];
        return RationalFunction(Polynomial{0.0, v.C * v.op.Udc0});
    };
    const RationalFunction one(1.0);
    auto gin = [&](int i) { return one + B(i).kp0 * B(i).gin; };            // K_P0i G_ini + 1
    auto hdc = [&](int i) { return B(i).kp0 * B(i).gdc + sCU(i); };         // K_P0i G_dci + s C_i U_dci0
    using detail::checked_div;

    std::vector<RationalFunction> fe(6);
    const RationalFunction g1 = gin(1);
    const RationalFunction a12a21 = A(1, 2) * A(2, 1), a13a31 = A(1, 3) * A(3, 1);

    fe[0] = checked_div(a12a21 * g1, sCU(2) - A(2, 2), "F_E11");

    if (sys.options.fe12 == Fe12Form::printed) {
        const Blocks& b1 = B(1);
        RationalFunction den = sCU(1) + b1.kp0 * b1.gdc - A(2, 2) * (b1.kp0 * b1.gin) - A(2, 2);
        if (!a12a21.is_zero())
            fe[1] = (checked_div(a12a21 * g1, den, "F_E12") - checked_div(a12a21, sCU(1) - A(2, 2), "F_E12")) * g1;
    } else {
        RationalFunction g2 = gin(2);
        if (!a12a21.is_zero())
            fe[1] = (checked_div(a12a21 * g2, hdc(2) - A(2, 2) * g2, "F_E12") -
                     checked_div(a12a21, sCU(2) - A(2, 2), "F_E12")) *
                    g1;
    }

    fe[2] = checked_div(a13a31 * g1, sCU(3) - A(3, 3), "F_E13");

    {
        RationalFunction g3 = gin(3);
        if (!a13a31.is_zero())
            fe[3] = (checked_div(a13a31 * g3, hdc(3) - A(3, 3) * g3, "F_E14") -
                     checked_div(a13a31, sCU(3) - A(3, 3), "F_E14")) *
                    g1;
    }

    {
        // DC network only: both neighbours as bare capacitors
        RationalFunction d0 = sCU(2) * sCU(3) - A(2, 2) * sCU(3) - A(3, 3) * sCU(2) + A(2, 2) * A(3, 3) - A(2, 3) * A(3, 2);
        RationalFunction u2 = A(1, 2) * (A(2, 1) * sCU(3) - A(2, 1) * A(3, 3) + A(3, 1) * A(2, 3));
        RationalFunction u3 = A(1, 3) * (A(3, 1) * sCU(2) + A(2, 1) * A(3, 2) - A(2, 2) * A(3, 1));
        RationalFunction bracket = checked_div(u2 + u3, d0, "F_E15");
        if (!a12a21.is_zero()) bracket -= checked_div(a12a21, sCU(2) - A(2, 2), "F_E15");
        if (!a13a31.is_zero()) bracket -= checked_div(a13a31, sCU(3) - A(3, 3), "F_E15");
        fe[4] = bracket * g1;
    }

    {
        RationalFunction g2 = gin(2), g3 = gin(3), h2 = hdc(2), h3 = hdc(3);
        // K_P02 G_0U2 + s C_2 U_dc20; G_0U2 read as G_dc2 unless switched off
        RationalFunction h2_0u2 = sys.options.g0u2 == G0U2Term::gdc ? h2 : sCU(2);
        RationalFunction det_a = A(2, 2) * A(3, 3) - A(2, 3) * A(3, 2);
        RationalFunction num = (A(1, 3) * A(2, 1) * A(3, 2) + A(1, 2) * A(2, 3) * A(3, 1) - A(2, 1) * A(3, 3) * A(1, 2) -
                                A(1, 3) * A(2, 2) * A(3, 1)) *
                                   g3 * g2 +
                               a12a21 * g2 * h3 + a13a31 * g3 * h2;
        RationalFunction den = det_a * g3 * g2 - A(2, 2) * h3 * g2 - A(3, 3) * h2_0u2 * g3 + h3 * h2;
        RationalFunction full = checked_div(num, den, "F_E16") * g1;
        fe[5] = full - fe[0] - fe[1] - fe[2] - fe[3] - fe[4];
    }
    return fe;
}

inline CoefficientSet build_coefficients(const MtdcSystem& raw) {
    MtdcSystem sys = prepared(raw);
    CoefficientSet cs;
    cs.focus = sys.focus;
    for (int k = 0, m = 0; k < sys.size(); ++k)
        if (k != sys.focus && m < 2) cs.others[static_cast<std::size_t>(m++)] = k;
    cs.A = build_dc_couplings(sys);
    cs.blocks = build_all_blocks(sys);
    cs.FS = self_coefficient(cs.A, cs.blocks, sys.focus);
    cs.FE = en_coefficients(sys, cs.A, cs.blocks, sys.focus);
    const VscParams& v = sys.vscs[static_cast<std::size_t>(sys.focus)];
    cs.sCU = RationalFunction(Polynomial{0.0, v.C * v.op.Udc0});
    return cs;
}

// ---------------------------------------------------------------- direct assembly oracle

struct NetworkResponse {
    cplx self;  // F_S(s)
    cplx en;    // full en-stabilizing coefficient dP_E,i/dU_dc,i
};

// Evaluates the linearized network at one complex frequency by solving the neighbours'
// balance equations numerically, with no use of the path formulas.
inline NetworkResponse assemble_direct(const CoefficientSet& cs, const MtdcSystem& raw, cplx s) {
    MtdcSystem sys = prepared(raw);
    const int n = sys.size(), i = cs.focus;
    auto Av = [&](int r, int c) { return cs.A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)](s); };
    std::vector<cplx> g(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const Blocks& b = cs.blocks[static_cast<std::size_t>(k)];
        const VscParams& v = sys.vscs[static_cast<std::size_t>(k)];
        g[static_cast<std::size_t>(k)] = 1.0 + b.kp0 * b.gin(s);
        h[static_cast<std::size_t>(k)] = s * v.C * v.op.Udc0 + b.kp0 * b.gdc(s);
    }
    std::vector<int> idx;
    for (int k = 0; k < n; ++k)
        if (k != i) idx.push_back(k);
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXcd M(m, m);
    Eigen::VectorXcd rhs(m);
    for (int r = 0; r < m; ++r) {
        int j = idx[static_cast<std::size_t>(r)];
        for (int c = 0; c < m; ++c) {
            int k = idx[static_cast<std::size_t>(c)];
            M(r, c) = (j == k ? h[static_cast<std::size_t>(j)] : cplx(0.0)) - g[static_cast<std::size_t>(j)] * Av(j, k);
        }
        rhs(r) = g[static_cast<std::size_t>(j)] * Av(j, i);
    }
    Eigen::VectorXcd u = M.fullPivLu().solve(rhs);
    cplx en = 0.0;
    for (int r = 0; r < m; ++r) en += Av(i, idx[static_cast<std::size_t>(r)]) * u(r);
    en *= g[static_cast<std::size_t>(i)];
    const Blocks& bi = cs.blocks[static_cast<std::size_t>(i)];
    cplx self = g[static_cast<std::size_t>(i)] * Av(i, i) - bi.kp0 * bi.gdc(s);
    return {self, en};
}

}  // namespace nugap::mtdc
