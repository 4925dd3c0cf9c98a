#pragma once

// Bounded derivative-free scalar minimizers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>

namespace eadkit {

struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

// Golden-section search for a unimodal f on [a, b].
template <typename F>
ScalarMinimum golden_section_minimize(F&& f, double a, double b, double tol, int max_iterations = 500) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    int it = 0;
    while (std::abs(b - a) > tol && it < max_iterations) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++it;
    }
    const double x = fc <= fd ? c : d;
    return {x, fc <= fd ? fc : fd, it};
}

// Brent's method: successive parabolic interpolation with golden-section
// fallback, restricted to [a, b].
template <typename F>
ScalarMinimum brent_minimize(F&& f, double a, double b, double tol, int max_iterations = 200) {
    const double golden = 0.5 * (3.0 - std::sqrt(5.0));
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    double x = a + golden * (b - a);
    double w = x;
    double v = x;
    double fx = f(x);
    double fw = fx;
    double fv = fx;
    double d = 0.0;
    double e = 0.0;
    int it = 0;
    for (; it < max_iterations; ++it) {
        const double m = 0.5 * (a + b);
        const double tol1 = eps * std::abs(x) + tol / 3.0;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) {
            break;
        }
        bool use_golden = true;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) {
                p = -p;
            } else {
                q = -q;
            }
            const double e_prev = e;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
                e = d;
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) {
                    d = x < m ? tol1 : -tol1;
                }
                use_golden = false;
            }
        }
        if (use_golden) {
            e = (x < m ? b : a) - x;
            d = golden * e;
        }
        const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x) {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x) {
                a = u;
            } else {
                b = u;
            }
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return {x, fx, it};
}

// Golden-section search for the maximum of a unimodal f over the integers
// [lo, hi]. Among equal maxima the smallest index wins.
template <typename F>
std::size_t discrete_golden_maximize(F&& f, std::size_t lo, std::size_t hi) {
    std::map<std::size_t, double> cache;
    auto eval = [&](std::size_t i) {
        auto it = cache.find(i);
        if (it != cache.end()) {
            return it->second;
        }
        const double value = f(i);
        cache.emplace(i, value);
        return value;
    };
    const double inv_phi2 = (3.0 - std::sqrt(5.0)) / 2.0;
    while (hi - lo > 3) {
        const auto offset = static_cast<std::size_t>(std::lround(inv_phi2 * static_cast<double>(hi - lo)));
        const std::size_t c = lo + std::max<std::size_t>(offset, 1);
        const std::size_t d = hi - std::max<std::size_t>(offset, 1);
        if (c >= d) {
            break;
        }
        if (eval(c) < eval(d)) {
            lo = c + 1;
        } else {
            hi = d - 1;
        }
    }
    std::size_t best = lo;
    double best_value = eval(lo);
    for (std::size_t i = lo + 1; i <= hi; ++i) {
        const double value = eval(i);
        if (value > best_value) {
            best = i;
            best_value = value;
        }
    }
    return best;
}

}  // namespace eadkit
