#pragma once

#include <complex>
#include <random>
#include <string>
#include <vector>

#include <nugap/nugap.hpp>

namespace nugap::testing {

inline std::string data_path(const std::string& name) { return std::string(NUGAP_DATA_DIR) + "/" + name; }

inline mtdc::MtdcSystem benchmark() { return load_system(data_path("benchmark_3t.cfg")); }

// Random roots closed under conjugation, real parts in [-hi, -lo] (or mirrored when rhp).
inline std::vector<cplx> random_roots(std::mt19937& rng, int n, bool rhp = false, double lo = 0.1, double hi = 5.0) {
    std::uniform_real_distribution<double> re(lo, hi), im(0.2, 5.0), coin(0.0, 1.0);
    std::vector<cplx> out;
    while (static_cast<int>(out.size()) < n) {
        double a = rhp ? re(rng) : -re(rng);
        if (n - static_cast<int>(out.size()) >= 2 && coin(rng) < 0.5) {
            double b = im(rng);
            out.emplace_back(a, b);
            out.emplace_back(a, -b);
        } else {
            out.emplace_back(a, 0.0);
        }
    }
    return out;
}

struct Layout {
    std::vector<cplx> zeros, poles;
    double gain = 1.0;
    RationalFunction rf() const {
        return RationalFunction(Polynomial::from_roots(zeros, gain), Polynomial::from_roots(poles));
    }
};

// Stable, proper, low order.
inline Layout random_stable(std::mt19937& rng, int max_order = 3) {
    std::uniform_int_distribution<int> ord(1, max_order);
    std::uniform_real_distribution<double> g(0.2, 3.0), sign(-1.0, 1.0);
    Layout l;
    int n = ord(rng);
    std::uniform_int_distribution<int> zo(0, n);
    l.poles = random_roots(rng, n);
    l.zeros = random_roots(rng, zo(rng), sign(rng) < -0.5);
    l.gain = g(rng) * (sign(rng) < 0 ? -1.0 : 1.0);
    return l;
}

// Every root scaled a little, so each stays in its half plane and the census is unchanged.
inline Layout nudge(std::mt19937& rng, Layout l, double rel = 0.3) {
    std::uniform_real_distribution<double> f(1.0 - rel, 1.0 + rel);
    auto move = [&](std::vector<cplx>& rs) {
        for (std::size_t k = 0; k < rs.size(); ++k) {
            if (rs[k].imag() < 0) continue;
            cplx m(rs[k].real() * f(rng), rs[k].imag() * f(rng));
            if (rs[k].imag() > 0) {
                for (std::size_t j = 0; j < rs.size(); ++j)
                    if (rs[j] == std::conj(rs[k])) {
                        rs[j] = std::conj(m);
                        break;
                    }
            }
            rs[k] = m;
        }
    };
    move(l.zeros);
    move(l.poles);
    l.gain *= f(rng);
    return l;
}

}  // namespace nugap::testing
