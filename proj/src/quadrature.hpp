#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace chemokin::detail {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const auto a = static_cast<std::size_t>(i);
        const auto b = static_cast<std::size_t>(n - 1 - i);
        x[a] = -z;
        x[b] = z;
        w[a] = w[b] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
template <class F>
double integrate(F&& f, double a, double b, int order = 16, int panels = 4) {
    static thread_local std::vector<double> xs, ws;
    static thread_local int cached = 0;
    if (cached != order) {
        auto [x, w] = gauss_legendre(order);
        xs = std::move(x);
        ws = std::move(w);
        cached = order;
    }
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        double s = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) s += ws[k] * f(lo + 0.5 * h * (xs[k] + 1.0));
        total += 0.5 * h * s;
    }
    return total;
}

}  // namespace chemokin::detail
