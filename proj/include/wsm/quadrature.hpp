#pragma once

#include <functional>
#include <vector>

namespace wsm {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

/// Rule with n points, computed by Newton iteration on P_n. Results are
/// cached per n, so repeated calls are cheap.
const GaussLegendre& gauss_legendre(int n);

/// Fixed rule mapped to [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n);

/// Adaptive Gauss-Legendre: bisects until two levels agree to `tol`
/// (absolute plus relative), or the depth limit is reached.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, int n = 15,
                          double tol = 1e-12, int max_depth = 30);

} // namespace wsm
