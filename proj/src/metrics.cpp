#include "wsm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "wsm/errors.hpp"
#include "wsm/quadrature.hpp"
#include "wsm/rng.hpp"

namespace wsm {

MaeReport mae_report(const std::vector<Eigen::VectorXd>& runs, const Eigen::VectorXd& truth) {
    if (runs.empty()) {
        throw ConfigError("mae_report needs at least one run");
    }
    const Eigen::Index p = truth.size();
    Eigen::MatrixXd err(p, static_cast<Eigen::Index>(runs.size()));
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (runs[r].size() != p) {
            throw ConfigError("mae_report: run " + std::to_string(r) + " has the wrong size");
        }
        err.col(static_cast<Eigen::Index>(r)) = (runs[r] - truth).cwiseAbs();
    }
    MaeReport out;
    out.mean = err.rowwise().mean();
    out.std = Eigen::VectorXd::Zero(p);
    if (runs.size() > 1) {
        for (Eigen::Index i = 0; i < p; ++i) {
            const double ss = (err.row(i).array() - out.mean(i)).square().sum();
            out.std(i) = std::sqrt(ss / static_cast<double>(runs.size() - 1));
        }
    }
    return out;
}

double kolmogorov_sf(double lambda) {
    if (lambda < 0.2) {
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-17) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniform(std::vector<double> u) {
    KsResult out;
    out.n = u.size();
    if (u.empty()) {
        return out;
    }
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = std::clamp(u[i], 0.0, 1.0);
        out.statistic = std::max({out.statistic, (static_cast<double>(i) + 1.0) / n - v, v - static_cast<double>(i) / n});
    }
    const double sn = std::sqrt(n);
    out.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * out.statistic);
    return out;
}

std::vector<double> time_rescaling_residuals(const ProcessFamily& f, const Params& theta, SeqSpan seqs) {
    const double t_max = f.domain().t_max();
    std::vector<double> u;
    for (const PointSequence& seq : seqs) {
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const double e = f.integrated_intensity(theta, seq, n, seq.times[n]);
            const double a = f.integrated_intensity(theta, seq, n, t_max);
            u.push_back(std::expm1(-e) / std::expm1(-a));
        }
    }
    return u;
}

std::vector<double> mark_residuals(const ProcessFamily& f, const Params& theta, SeqSpan seqs, std::uint64_t seed) {
    std::vector<double> u;
    Stream rng(seed, 0);
    for (const PointSequence& seq : seqs) {
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const auto lam = f.mark_intensities(theta, seq, n, seq.times[n]);
            double total = 0.0;
            double below = 0.0;
            for (std::size_t k = 0; k < lam.size(); ++k) {
                total += lam[k];
                if (static_cast<int>(k) < seq.marks[n]) {
                    below += lam[k];
                }
            }
            u.push_back((below + rng.uniform() * lam[static_cast<std::size_t>(seq.marks[n])]) / total);
        }
    }
    return u;
}

std::vector<double> expsin2d_residuals(const PoissonExpSin2D& f, const Params& theta, SeqSpan seqs) {
    const Rect& r = f.domain().space();
    const double th = theta(0);
    const auto fx = [th](double x) { return std::exp(th * std::sin(x)); };
    const auto fy = [th](double y) { return std::exp(th * std::cos(y)); };
    const double zx = integrate_adaptive(fx, r.x_lo, r.x_hi);
    const double zy = integrate_adaptive(fy, r.y_lo, r.y_hi);
    std::vector<double> u;
    for (const PointSequence& seq : seqs) {
        for (const Point2& p : seq.locs) {
            u.push_back(integrate_adaptive(fx, r.x_lo, p[0]) / zx);
            u.push_back(integrate_adaptive(fy, r.y_lo, p[1]) / zy);
        }
    }
    return u;
}

std::vector<double> st_location_residuals(const GaussianSTHawkes& f, const Params& theta, SeqSpan seqs) {
    const Rect& r = f.domain().space();
    const double mu = theta(0);
    const double beta = theta(1);
    const double c = theta(2);
    const auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    std::vector<double> u;
    for (const PointSequence& seq : seqs) {
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const double t = seq.times[n];
            const double x = seq.locs[n][0];
            double below = mu * (x - r.x_lo) * r.height();
            for (std::size_t i = 0; i < n; ++i) {
                const double tau = std::max(t - seq.times[i], GaussianSTHawkes::kMinLag);
                const double sd = std::sqrt(f.variance(tau));
                const Point2& ci = seq.locs[i];
                const double qy = phi((r.y_hi - ci[1]) / sd) - phi((r.y_lo - ci[1]) / sd);
                const double qx = phi((x - ci[0]) / sd) - phi((r.x_lo - ci[0]) / sd);
                below += c * std::exp(-beta * tau) * qx * qy;
            }
            u.push_back(below / f.temporal_jet(theta, seq, n, t, false).lam);
        }
    }
    return u;
}

} // namespace wsm
