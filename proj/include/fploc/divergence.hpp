#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fploc/geometry.hpp"
#include "fploc/propagation.hpp"

// All divergences are in nats (natural logarithms).

namespace fploc::divergence {

struct DiscreteDistribution {
    std::vector<double> probs;

    DiscreteDistribution() = default;
    explicit DiscreteDistribution(std::vector<double> p) : probs(std::move(p)) { validate(); }

    static DiscreteDistribution bernoulli(double p1) {
        return DiscreteDistribution({p1, 1.0 - p1});
    }

    std::size_t alphabet_size() const { return probs.size(); }

    void validate() const {
        if (probs.empty()) throw std::invalid_argument("distribution: empty alphabet");
        double sum = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw std::invalid_argument("distribution: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("distribution: probabilities must sum to 1");
    }
};

// Pair of hypothesized transmitter environments: the anchors plus one set of
// analytic channel parameters shared by all of them.
struct Scenario {
    std::vector<propagation::Anchor> anchors;
    propagation::AnalyticChannelParams params;

    void validate() const {
        if (anchors.empty()) throw std::invalid_argument("scenario: need at least one anchor");
        params.validate();
    }
};

// KL divergence between the Gaussian observation vectors at u1 and u2,
// equal noise variance at both locations:
//   sum_j P_j^2 / (2 N) * (1/d(w_j,u1)^a - 1/d(w_j,u2)^a)^2.
inline double kl_gaussian_rss(const geometry::Point& u1, const geometry::Point& u2,
                              const Scenario& scen) {
    scen.validate();
    if (scen.params.model != propagation::AnalyticModel::noisy)
        throw std::invalid_argument("kl_gaussian_rss: scenario is not the noisy model");
    const double alpha = scen.params.alpha;
    double total = 0.0;
    for (const propagation::Anchor& a : scen.anchors) {
        const double d1 = propagation::path_distance(u1, a.location);
        const double d2 = propagation::path_distance(u2, a.location);
        const double diff = std::pow(d1, -alpha) - std::pow(d2, -alpha);
        total += a.tx_power * a.tx_power / (2.0 * scen.params.noise_var) * diff * diff;
    }
    return total;
}

// KL divergence under unit-mean exponential fading of the received power,
// per anchor: a*log(d2/d1) + (d1/d2)^a - 1 with d_i the distance to u_i.
// The ambient floor is ignored; the closed form holds for floor 0.
inline double kl_fading_rss(const geometry::Point& u1, const geometry::Point& u2,
                            const Scenario& scen) {
    scen.validate();
    if (scen.params.model != propagation::AnalyticModel::fading)
        throw std::invalid_argument("kl_fading_rss: scenario is not the fading model");
    const double alpha = scen.params.alpha;
    double total = 0.0;
    for (const propagation::Anchor& a : scen.anchors) {
        const double d1 = propagation::path_distance(u1, a.location);
        const double d2 = propagation::path_distance(u2, a.location);
        total += alpha * std::log(d2 / d1) + std::pow(d1 / d2, alpha) - 1.0;
    }
    return total;
}

// Divergence between u and the displaced point u+e; the level curves of this
// field over u show which displacements are hard to detect.
inline double level_curve_value(const geometry::Point& u, const geometry::Point& e,
                                const Scenario& scen) {
    return kl_gaussian_rss(u, {u.x + e.x, u.y + e.y}, scen);
}

// Placement-quality proxy: sum_j 1/d(u, w_j)^(2a+2). Larger means small
// displacements around u are easier to detect.
inline double level_field_approx(const geometry::Point& u, const Scenario& scen) {
    scen.validate();
    const double expo = 2.0 * scen.params.alpha + 2.0;
    double total = 0.0;
    for (const propagation::Anchor& a : scen.anchors)
        total += std::pow(propagation::path_distance(u, a.location), -expo);
    return total;
}

// Spatial-robustness bound: two locations within KL divergence L of each
// other, anywhere in a region of diameter D, are at most this far apart.
inline double robustness_bound(double L, double D, double alpha, double P_T, double N1) {
    if (L < 0.0 || !(D > 0.0) || !(alpha > 0.0) || !(P_T > 0.0) || !(N1 > 0.0))
        throw std::invalid_argument("robustness_bound: parameters must be positive");
    return std::pow(D, alpha + 1.0) / (alpha * P_T) * std::sqrt(2.0 * N1 * L);
}

// sum p log(p/q), 0 log 0 = 0. Infinite mass outside q's support is a
// support violation (the divergence would be undefined rather than large).
inline double kl_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.alphabet_size() != q.alphabet_size())
        throw std::invalid_argument("kl_discrete: alphabet size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] == 0.0) continue;
        if (q.probs[i] == 0.0)
            throw std::domain_error("kl_discrete: p puts mass where q has none");
        total += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
    }
    return std::max(total, 0.0);
}

// Same sum but returning +infinity on support violations; used by decision
// rules that compare the divergence against a threshold.
inline double kl_discrete_or_inf(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.alphabet_size() != q.alphabet_size())
        throw std::invalid_argument("kl_discrete: alphabet size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] == 0.0) continue;
        if (q.probs[i] == 0.0) return std::numeric_limits<double>::infinity();
        total += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
    }
    return std::max(total, 0.0);
}

inline double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.alphabet_size() != q.alphabet_size())
        throw std::invalid_argument("tv_distance: alphabet size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i)
        total += std::abs(p.probs[i] - q.probs[i]);
    return 0.5 * total;
}

namespace detail {

inline double chernoff_objective(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                 double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] == 0.0 && q.probs[i] == 0.0) continue;
        sum += std::pow(p.probs[i], 1.0 - t) * std::pow(q.probs[i], t);
    }
    return sum;
}

}  // namespace detail

// Chernoff information: -log min over t in [0,1] of sum p^(1-t) q^t.
// The objective is convex in t; a coarse grid locates the basin and
// golden-section search refines it.
inline double chernoff_information(const DiscreteDistribution& p,
                                   const DiscreteDistribution& q) {
    if (p.alphabet_size() != q.alphabet_size())
        throw std::invalid_argument("chernoff_information: alphabet size mismatch");
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if ((p.probs[i] == 0.0) != (q.probs[i] == 0.0))
            throw std::domain_error("chernoff_information: supports differ");
    }
    double best_t = 0.0;
    double best = detail::chernoff_objective(p, q, 0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double t = i / 1000.0;
        const double v = detail::chernoff_objective(p, q, t);
        if (v < best) {
            best = v;
            best_t = t;
        }
    }
    double lo = std::max(0.0, best_t - 1e-3);
    double hi = std::min(1.0, best_t + 1e-3);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = detail::chernoff_objective(p, q, x1);
    double f2 = detail::chernoff_objective(p, q, x2);
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = detail::chernoff_objective(p, q, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = detail::chernoff_objective(p, q, x2);
        }
    }
    best = std::min({best, f1, f2});
    if (best <= 0.0) return std::numeric_limits<double>::infinity();
    return std::max(0.0, -std::log(best));
}

namespace detail {

// Moves probability mass between coordinate pairs of q while keeping
// tv(q, p) >= a, shrinking the step until no move improves kl(q, p).
inline double sanov_refine(std::vector<double> q, const DiscreteDistribution& p, double a) {
    const std::size_t k = p.alphabet_size();
    auto kl = [&](const std::vector<double>& v) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (v[i] == 0.0) continue;
            if (p.probs[i] == 0.0) return std::numeric_limits<double>::infinity();
            total += v[i] * std::log(v[i] / p.probs[i]);
        }
        return std::max(total, 0.0);
    };
    auto tv = [&](const std::vector<double>& v) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) total += std::abs(v[i] - p.probs[i]);
        return 0.5 * total;
    };
    double cur = kl(q);
    double step = 0.01;
    while (step > 1e-9) {
        bool improved = false;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (i == j || q[j] < step) continue;
                std::vector<double> cand = q;
                cand[i] += step;
                cand[j] -= step;
                if (tv(cand) < a - 1e-12) continue;
                const double v = kl(cand);
                if (v < cur - 1e-15) {
                    q = std::move(cand);
                    cur = v;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return cur;
}

inline void sanov_enumerate(std::vector<double>& q, std::size_t coord, double remaining,
                            double grid, const DiscreteDistribution& p, double a,
                            double& best, std::vector<double>& best_q) {
    const std::size_t k = p.alphabet_size();
    if (coord + 1 == k) {
        q[coord] = remaining;
        double tv = 0.0;
        for (std::size_t i = 0; i < k; ++i) tv += std::abs(q[i] - p.probs[i]);
        if (0.5 * tv < a - 1e-12) return;
        double kl = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (q[i] == 0.0) continue;
            if (p.probs[i] == 0.0) return;
            kl += q[i] * std::log(q[i] / p.probs[i]);
        }
        if (kl < best) {
            best = kl;
            best_q = q;
        }
        return;
    }
    for (double v = 0.0; v <= remaining + 1e-12; v += grid) {
        q[coord] = std::min(v, remaining);
        sanov_enumerate(q, coord + 1, remaining - q[coord], grid, p, a, best, best_q);
    }
}

}  // namespace detail

// Large-deviations exponent of Sanov's theorem: the smallest kl(q, p) over
// distributions q at total-variation distance greater than a from p. The
// infimum is attained on the closed boundary tv = a; a coarse simplex grid
// finds the basin and pairwise mass moves refine it.
inline double sanov_exponent(const DiscreteDistribution& p, double a) {
    if (p.alphabet_size() > 4)
        throw std::invalid_argument("sanov_exponent: alphabet larger than 4 unsupported");
    if (!(a > 0.0) || !(a < 1.0))
        throw std::invalid_argument("sanov_exponent: radius must be in (0,1)");
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> q(p.alphabet_size(), 0.0);
    std::vector<double> best_q;
    detail::sanov_enumerate(q, 0, 1.0, 0.005, p, a, best, best_q);
    if (best_q.empty()) return std::numeric_limits<double>::infinity();
    return detail::sanov_refine(best_q, p, a);
}

// Both sides of the per-anchor fading-vs-Gaussian comparison, distances
// ordered so the first point is the closer one: (fading KL term,
// (1/2) r1^(2a) (1/r1^a - 1/r2^a)^2). The first dominates once r1 >= 1.
inline std::pair<double, double> fading_noise_gap(const geometry::Point& u1,
                                                  const geometry::Point& u2,
                                                  const propagation::Anchor& anchor,
                                                  double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("fading_noise_gap: alpha must be positive");
    double r1 = propagation::path_distance(u1, anchor.location);
    double r2 = propagation::path_distance(u2, anchor.location);
    if (r1 > r2) std::swap(r1, r2);
    const double fading = alpha * std::log(r2 / r1) + std::pow(r1 / r2, alpha) - 1.0;
    const double diff = std::pow(r1, -alpha) - std::pow(r2, -alpha);
    const double gaussian = 0.5 * std::pow(r1, 2.0 * alpha) * diff * diff;
    return {fading, gaussian};
}

}  // namespace fploc::divergence
