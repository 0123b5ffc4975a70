#include "wsm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "wsm/errors.hpp"

namespace wsm {

namespace {

GaussLegendre build_rule(int n) {
    GaussLegendre rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on the three-term recurrence.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return rule;
}

double panel(const std::function<double(double)>& f, double a, double b, const GaussLegendre& rule) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return s * half;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole, const GaussLegendre& rule,
             double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = panel(f, a, m, rule);
    const double right = panel(f, m, b, rule);
    const double both = left + right;
    if (depth <= 0 || std::abs(both - whole) <= tol * std::max(1.0, std::abs(both))) {
        return both;
    }
    return adapt(f, a, m, left, rule, 0.5 * tol, depth - 1) + adapt(f, m, b, right, rule, 0.5 * tol, depth - 1);
}

} // namespace

const GaussLegendre& gauss_legendre(int n) {
    if (n < 1) {
        throw ConfigError("quadrature node count must be at least 1");
    }
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    const std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, build_rule(n)).first;
    }
    return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
    return panel(f, a, b, gauss_legendre(n));
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, int n, double tol,
                          int max_depth) {
    if (a == b) {
        return 0.0;
    }
    const GaussLegendre& rule = gauss_legendre(n);
    return adapt(f, a, b, panel(f, a, b, rule), rule, tol, max_depth);
}

} // namespace wsm
