#include "wsm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "wsm/errors.hpp"
#include "wsm/rng.hpp"

namespace wsm {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Draw from N(center, sigma^2) truncated to [lo, hi] by inversion.
double truncated_normal(Stream& rng, double center, double sigma, double lo, double hi) {
    const double pa = norm_cdf((lo - center) / sigma);
    const double pb = norm_cdf((hi - center) / sigma);
    const double u = pa + rng.uniform() * (pb - pa);
    if (!(u > 0.0 && u < 1.0)) {
        return std::clamp(center, lo, hi);
    }
    const double z = -kSqrt2 * boost::math::erfc_inv(2.0 * u);
    return std::clamp(center + sigma * z, lo, hi);
}

std::size_t categorical(Stream& rng, const std::vector<double>& w) {
    double total = 0.0;
    for (const double v : w) {
        total += v;
    }
    double target = rng.uniform() * total;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        if (target < w[k]) {
            return k;
        }
        target -= w[k];
    }
    return w.size() - 1;
}

template <class Fn>
std::vector<PointSequence> per_sequence(const SimConfig& cfg, Fn&& fn) {
    cfg.validate();
    std::vector<PointSequence> out(cfg.n_sequences);
    for (std::size_t i = 0; i < cfg.n_sequences; ++i) {
        Stream rng(cfg.seed, i);
        out[i] = fn(rng);
        cfg.family->domain().validate(out[i]);
    }
    return out;
}

// Generic Ogata loop: the ground intensity at the current time bounds it
// until the next event. `on_accept` fills in the mark or location.
template <class OnAccept>
PointSequence thin(const SimConfig& cfg, Stream& rng, OnAccept&& on_accept) {
    const ProcessFamily& f = *cfg.family;
    const double t_max = f.domain().t_max();
    PointSequence seq;
    double t = 0.0;
    while (true) {
        const std::size_t n = seq.size();
        const double bound = f.temporal_jet(cfg.theta, seq, n, t, false).lam;
        if (!std::isfinite(bound)) {
            throw NumericError(f.name() + ": non-finite intensity bound during thinning");
        }
        if (bound <= 0.0) {
            break;
        }
        t += rng.exponential(bound);
        if (t >= t_max) {
            break;
        }
        const double lam = f.temporal_jet(cfg.theta, seq, n, t, false).lam;
        if (rng.uniform() * bound <= lam) {
            seq.times.push_back(t);
            on_accept(seq, n, t);
            if (seq.size() >= cfg.max_events) {
                seq.truncated = true;
                break;
            }
        }
    }
    return seq;
}

} // namespace

void SimConfig::validate() const {
    if (!family) {
        throw ConfigError("simulation config has no family");
    }
    family->check_params(theta);
    if (n_sequences < 1) {
        throw ConfigError("n_sequences must be at least 1");
    }
    if (max_events < 1) {
        throw ConfigError("max_events must be at least 1");
    }
}

std::vector<PointSequence> simulate_poisson(const SimConfig& cfg) {
    cfg.validate();
    const ProcessFamily& f = *cfg.family;
    if (!f.is_poisson()) {
        throw ConfigError(f.name() + " is not a Poisson family");
    }
    const double bound = f.intensity_bound(cfg.theta);
    if (!std::isfinite(bound) || bound < 0.0) {
        throw ConfigError(f.name() + ": intensity bound is not finite");
    }
    const ObservationDomain& dom = f.domain();
    return per_sequence(cfg, [&](Stream& rng) {
        PointSequence seq;
        if (bound == 0.0) {
            return seq;
        }
        // Homogeneous proposals: arrivals of rate `bound` along the volume of V.
        const double volume = dom.volume();
        double v = rng.exponential(bound);
        PointVec x(static_cast<Eigen::Index>(dom.point_dim()));
        while (v < volume) {
            Eigen::Index j = 0;
            if (dom.has_time()) {
                x(j++) = v / volume * dom.t_max();
            }
            if (dom.has_space()) {
                const Rect& s = dom.space();
                x(j++) = rng.uniform(s.x_lo, s.x_hi);
                x(j++) = rng.uniform(s.y_lo, s.y_hi);
            }
            if (rng.uniform() * bound <= f.point_intensity(cfg.theta, x)) {
                j = 0;
                if (dom.has_time()) {
                    seq.times.push_back(x(j++));
                }
                if (dom.has_space()) {
                    seq.locs.push_back({x(j), x(j + 1)});
                }
                if (seq.size() >= cfg.max_events) {
                    seq.truncated = true;
                    break;
                }
            }
            v += rng.exponential(bound);
        }
        return seq;
    });
}

std::vector<PointSequence> simulate_hawkes(const SimConfig& cfg) {
    cfg.validate();
    const ProcessFamily& f = *cfg.family;
    if (!f.has_temporal() || f.domain().has_space()) {
        throw ConfigError(f.name() + " cannot be simulated by temporal thinning");
    }
    const bool marked = f.domain().is_marked();
    return per_sequence(cfg, [&](Stream& rng) {
        return thin(cfg, rng, [&](PointSequence& seq, std::size_t n, double t) {
            if (marked) {
                const auto w = f.mark_intensities(cfg.theta, seq, n, t);
                seq.marks.push_back(static_cast<int>(categorical(rng, w)));
            }
        });
    });
}

std::vector<PointSequence> simulate_st_hawkes(const SimConfig& cfg) {
    cfg.validate();
    const auto* st = dynamic_cast<const GaussianSTHawkes*>(cfg.family.get());
    if (st == nullptr) {
        throw ConfigError("simulate_st_hawkes needs a gaussian_st_hawkes family");
    }
    const Rect& space = st->domain().space();
    const double mu = cfg.theta(0);
    const double beta = cfg.theta(1);
    const double c = cfg.theta(2);
    return per_sequence(cfg, [&](Stream& rng) {
        std::vector<double> w;
        return thin(cfg, rng, [&](PointSequence& seq, std::size_t n, double t) {
            w.assign(n + 1, 0.0);
            w[0] = mu * space.area();
            for (std::size_t i = 0; i < n; ++i) {
                const double tau = std::max(t - seq.times[i], GaussianSTHawkes::kMinLag);
                w[i + 1] = c * std::exp(-beta * tau) * st->mass_in_space(seq.locs[i], tau).p;
            }
            const std::size_t pick = categorical(rng, w);
            if (pick == 0) {
                seq.locs.push_back({rng.uniform(space.x_lo, space.x_hi), rng.uniform(space.y_lo, space.y_hi)});
            } else {
                const Point2 center = seq.locs[pick - 1];
                const double sigma = std::sqrt(st->variance(std::max(t - seq.times[pick - 1], GaussianSTHawkes::kMinLag)));
                seq.locs.push_back({truncated_normal(rng, center[0], sigma, space.x_lo, space.x_hi),
                                    truncated_normal(rng, center[1], sigma, space.y_lo, space.y_hi)});
            }
        });
    });
}

std::vector<PointSequence> simulate_logistic(const SimConfig& cfg) {
    cfg.validate();
    if (dynamic_cast<const LogisticIntensity*>(cfg.family.get()) == nullptr) {
        throw ConfigError("simulate_logistic needs a logistic family");
    }
    const double c = cfg.theta(0);
    const double beta = cfg.theta(1);
    const double t_max = cfg.family->domain().t_max();
    if (!(c > 0.0) || beta < 0.0) {
        throw ConfigError("logistic simulation needs c > 0 and beta >= 0");
    }
    // After the first event the compensator is bounded by log((1 + beta) / beta),
    // so each further event exists with probability 1 / (1 + beta).
    const double cap = beta > 0.0 ? std::log1p(1.0 / beta) : std::numeric_limits<double>::infinity();
    return per_sequence(cfg, [&](Stream& rng) {
        PointSequence seq;
        double t = rng.exponential(c);
        while (t < t_max) {
            seq.times.push_back(t);
            if (seq.size() >= cfg.max_events) {
                seq.truncated = true;
                break;
            }
            const double e = rng.exponential(1.0);
            if (e >= cap) {
                break;
            }
            const double r = std::exp(e) / (1.0 + beta);
            const double z = r / (1.0 - beta * r);
            t += std::log(z) / c;
        }
        return seq;
    });
}

std::vector<PointSequence> simulate(const SimConfig& cfg) {
    cfg.validate();
    const ProcessFamily* f = cfg.family.get();
    if (f->is_poisson()) {
        return simulate_poisson(cfg);
    }
    if (dynamic_cast<const MultivariateExpHawkes*>(f) != nullptr) {
        return simulate_hawkes(cfg);
    }
    if (dynamic_cast<const GaussianSTHawkes*>(f) != nullptr) {
        return simulate_st_hawkes(cfg);
    }
    if (dynamic_cast<const LogisticIntensity*>(f) != nullptr) {
        return simulate_logistic(cfg);
    }
    throw ConfigError("no sampler for family " + f->name());
}

} // namespace wsm
