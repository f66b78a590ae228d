#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"

namespace nugap {

namespace detail {

// Dense row-major square matrix, 0-based.
struct Square {
    int n = 0;
    std::vector<double> a;
    explicit Square(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

}  // namespace detail

// Parlett-Reinsch balancing with radix-2 scaling. Returns the diagonal scale d such that
// the balanced matrix is D^-1 A D.
inline std::vector<double> balance(detail::Square& m) {
    const double radix = 2.0, sqrdx = radix * radix;
    const int n = m.n;
    std::vector<double> d(static_cast<std::size_t>(n), 1.0);
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) {
                    c += std::abs(m(j, i));
                    r += std::abs(m(i, j));
                }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0, s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                d[static_cast<std::size_t>(i)] *= f;
                for (int j = 0; j < n; ++j) m(i, j) *= g;
                for (int j = 0; j < n; ++j) m(j, i) *= f;
            }
        }
    }
    return d;
}

// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR iteration.
// The matrix is destroyed.
inline std::vector<cplx> hessenberg_eigenvalues(detail::Square& h) {
    const int n = h.n;
    // 1-based view to keep the classic index arithmetic readable
    auto a = [&](int i, int j) -> double& { return h(i - 1, j - 1); };
    std::vector<cplx> out(static_cast<std::size_t>(n));
    auto put = [&](int i, double re, double im) { out[static_cast<std::size_t>(i - 1)] = cplx(re, im); };

    double anorm = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));

    int nn = n, l = 1;
    double t = 0.0;
    double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
    while (nn >= 1) {
        int its = 0;
        do {
            for (l = nn; l >= 2; --l) {
                s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) + s == s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            x = a(nn, nn);
            if (l == nn) {
                put(nn--, x + t, 0.0);
            } else {
                y = a(nn - 1, nn - 1);
                w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + std::copysign(z, p);
                        double r1 = x + z, r2 = z != 0.0 ? x - w / z : x + z;
                        put(nn - 1, r1, 0.0);
                        put(nn, r2, 0.0);
                    } else {
                        put(nn - 1, x + p, -z);
                        put(nn, x + p, z);
                    }
                    nn -= 2;
                } else {
                    if (its == 60) throw NumericalError("root finder: QR iteration did not converge");
                    if (its > 0 && its % 10 == 0) {
                        // exceptional shift
                        t += x;
                        for (int i = 1; i <= nn; ++i) a(i, i) -= x;
                        s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m = nn - 2;
                    for (; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                        if (u + v == v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = a(k + 2, k - 1);
                            if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        if ((s = std::copysign(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k != nn - 1) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return out;
}

namespace detail {

// One guarded Newton step on the original coefficients; kept only if it lowers |p|.
inline cplx polish(const Polynomial& p, const Polynomial& dp, cplx z) {
    for (int it = 0; it < 3; ++it) {
        cplx f = p.eval(z);
        cplx df = dp.eval(z);
        if (f == 0.0 || df == 0.0) break;
        cplx zn = z - f / df;
        if (!(std::abs(p.eval(zn)) < std::abs(f))) break;
        z = zn;
    }
    return z;
}

}  // namespace detail

// Roots with multiplicity. Exact zero low-order coefficients give exact zero roots;
// the rest come from the balanced companion matrix.
inline std::vector<cplx> poly_roots(const Polynomial& p) {
    if (p.is_zero() || p.degree() < 1) throw DomainError("poly_roots: need a nonzero polynomial of degree >= 1");
    const int v = p.valuation();
    std::vector<cplx> roots(static_cast<std::size_t>(v), cplx(0.0));
    Polynomial q = p.shift_down(v);
    const int n = q.degree();
    const auto& c = q.coeffs();
    if (n == 1) {
        roots.emplace_back(-c[0] / c[1]);
    } else if (n == 2) {
        double a = c[2], b = c[1], cc = c[0];
        double disc = b * b - 4 * a * cc;
        if (disc >= 0) {
            double qq = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            roots.emplace_back(qq / a);
            roots.emplace_back(qq != 0.0 ? cc / qq : 0.0);
        } else {
            double re = -b / (2 * a), im = std::sqrt(-disc) / (2 * std::abs(a));
            roots.emplace_back(re, im);
            roots.emplace_back(re, -im);
        }
    } else if (n > 2) {
        detail::Square m(n);
        for (int k = 0; k < n; ++k) m(0, k) = -c[static_cast<std::size_t>(n - 1 - k)] / c[static_cast<std::size_t>(n)];
        for (int k = 1; k < n; ++k) m(k, k - 1) = 1.0;
        balance(m);
        auto ev = hessenberg_eigenvalues(m);
        Polynomial dq = q.derivative();
        for (std::size_t k = 0; k < ev.size(); ++k) {
            cplx z = ev[k];
            if (z.imag() == 0.0) {
                roots.emplace_back(detail::polish(q, dq, z).real(), 0.0);
            } else if (k + 1 < ev.size() && ev[k + 1] == std::conj(z)) {
                // polish one member of the pair and mirror it, so the set stays conjugate-closed
                cplx zp = detail::polish(q, dq, cplx(z.real(), std::abs(z.imag())));
                roots.push_back(zp);
                roots.push_back(std::conj(zp));
                ++k;
            } else {
                roots.push_back(detail::polish(q, dq, z));
            }
        }
    }
    return roots;
}

}  // namespace nugap
