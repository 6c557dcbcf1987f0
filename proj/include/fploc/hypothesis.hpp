#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "fploc/divergence.hpp"
#include "fploc/rng.hpp"

namespace fploc::hypothesis {

using divergence::DiscreteDistribution;
using divergence::Scenario;

struct SampleBatch {
    std::vector<int> samples;

    std::size_t size() const { return samples.size(); }
};

inline DiscreteDistribution empirical_distribution(const SampleBatch& batch,
                                                   std::size_t alphabet_size) {
    if (batch.samples.empty())
        throw std::invalid_argument("empirical_distribution: empty batch");
    std::vector<double> probs(alphabet_size, 0.0);
    for (int s : batch.samples) {
        if (s < 0 || static_cast<std::size_t>(s) >= alphabet_size)
            throw std::invalid_argument("empirical_distribution: index outside alphabet");
        probs[static_cast<std::size_t>(s)] += 1.0;
    }
    for (double& p : probs) p /= static_cast<double>(batch.samples.size());
    return DiscreteDistribution(std::move(probs));
}

// Normalized log-likelihood ratio (1/n) sum log(p1(x_i)/p2(x_i)).
inline double llr_statistic(const SampleBatch& batch, const DiscreteDistribution& p1,
                            const DiscreteDistribution& p2) {
    if (batch.samples.empty()) throw std::invalid_argument("llr_statistic: empty batch");
    if (p1.alphabet_size() != p2.alphabet_size())
        throw std::invalid_argument("llr_statistic: alphabet size mismatch");
    double total = 0.0;
    for (int s : batch.samples) {
        const auto i = static_cast<std::size_t>(s);
        if (i >= p1.alphabet_size())
            throw std::invalid_argument("llr_statistic: index outside alphabet");
        if (p1.probs[i] == 0.0 || p2.probs[i] == 0.0)
            throw std::domain_error("llr_statistic: observed symbol has zero probability");
        total += std::log(p1.probs[i] / p2.probs[i]);
    }
    return total / static_cast<double>(batch.samples.size());
}

enum class Decision { location1, location2 };

// Threshold rule on the normalized LLR; the tie goes to location2.
inline Decision np_decide(double t_n, double gamma) {
    return t_n > gamma ? Decision::location1 : Decision::location2;
}

enum class SetMembership { inside, outside };

// Membership in the typicality region built around -T_n: inside iff
// |(1/n) sum log(p2(x_i)/p1(x_i)) + KL(p1||p2)| <= epsilon.
inline SetMembership typical_set_test(const SampleBatch& batch, const DiscreteDistribution& p1,
                                      const DiscreteDistribution& p2, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("typical_set_test: epsilon must be positive");
    const double statistic = -llr_statistic(batch, p1, p2) + divergence::kl_discrete(p1, p2);
    return std::abs(statistic) <= epsilon ? SetMembership::inside : SetMembership::outside;
}

inline double hoeffding_bound(std::size_t n, double a) {
    if (n < 1 || !(a > 0.0)) throw std::invalid_argument("hoeffding_bound: need n >= 1, a > 0");
    return 2.0 * std::exp(-2.0 * static_cast<double>(n) * a * a);
}

// Decision rules whose error decay estimate_error_exponent measures.
struct TypicalSetRule {
    double epsilon = 0.05;
};
struct NeymanPearsonRule {
    double gamma = 0.0;
};
struct MapRule {
    double prior1 = 0.5;
};
using TestRule = std::variant<TypicalSetRule, NeymanPearsonRule, MapRule>;

struct ExponentEstimate {
    std::vector<std::size_t> n_values;      // usable batch sizes (>= 1 observed error)
    std::vector<double> log_error;          // log of the empirical error frequency
    std::vector<std::uint64_t> error_counts;  // raw error counts, aligned with n_values
    std::vector<std::size_t> dropped;       // batch sizes with zero observed errors
    double slope = 0.0;                  // decay rate: LS slope of -log_error vs n
    double slope_stderr = 0.0;
    std::size_t trials = 0;
};

namespace detail {

// Per-symbol log(p1/p2), used to accumulate LLR statistics sample by sample.
inline std::vector<double> llr_table(const DiscreteDistribution& p1,
                                     const DiscreteDistribution& p2) {
    std::vector<double> table(p1.alphabet_size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if ((p1.probs[i] == 0.0) != (p2.probs[i] == 0.0))
            throw std::domain_error("error exponent: distributions must share support");
        table[i] = (p1.probs[i] == 0.0) ? 0.0 : std::log(p1.probs[i] / p2.probs[i]);
    }
    return table;
}

struct TrialContext {
    const std::vector<double>& cdf1;
    const std::vector<double>& cdf2;
    const std::vector<double>& llr;
    double kl_p1_p2;
    const TestRule& rule;
    std::size_t n;
};

// One simulated batch; returns whether the rule decided incorrectly.
inline bool trial_is_error(const TrialContext& ctx, rng::Stream& stream) {
    if (const auto* ts = std::get_if<TypicalSetRule>(&ctx.rule)) {
        // Truth is location2; the error event is the batch still looking
        // typical for location1 (the miss whose decay is Stein's exponent).
        double sum = 0.0;
        for (std::size_t i = 0; i < ctx.n; ++i)
            sum += ctx.llr[static_cast<std::size_t>(stream.categorical(ctx.cdf2))];
        const double statistic = -sum / static_cast<double>(ctx.n) + ctx.kl_p1_p2;
        return std::abs(statistic) <= ts->epsilon;
    }
    if (const auto* np = std::get_if<NeymanPearsonRule>(&ctx.rule)) {
        // Truth is location2; error = threshold rule announces location1.
        double sum = 0.0;
        for (std::size_t i = 0; i < ctx.n; ++i)
            sum += ctx.llr[static_cast<std::size_t>(stream.categorical(ctx.cdf2))];
        return np_decide(sum / static_cast<double>(ctx.n), np->gamma) == Decision::location1;
    }
    const auto& map = std::get<MapRule>(ctx.rule);
    const bool truth_is_1 = stream.uniform01() < map.prior1;
    const auto& cdf = truth_is_1 ? ctx.cdf1 : ctx.cdf2;
    double sum = 0.0;
    for (std::size_t i = 0; i < ctx.n; ++i)
        sum += ctx.llr[static_cast<std::size_t>(stream.categorical(cdf))];
    const double gamma =
        std::log((1.0 - map.prior1) / map.prior1) / static_cast<double>(ctx.n);
    const Decision d = np_decide(sum / static_cast<double>(ctx.n), gamma);
    return truth_is_1 ? (d != Decision::location1) : (d != Decision::location2);
}

}  // namespace detail

// Raised when too many batch sizes had zero observed errors to fit a slope.
class InsufficientErrorData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Monte Carlo estimate of the error-probability decay rate of a decision
// rule: per batch size, the empirical error frequency over `trials`
// independent batches; the decay rate is the least-squares slope of
// -log(frequency) against n. Deterministic for a fixed master seed at any
// thread count (per-trial streams, order-independent integer counts).
inline ExponentEstimate estimate_error_exponent(
    const DiscreteDistribution& p1, const DiscreteDistribution& p2, const TestRule& rule,
    const std::vector<std::size_t>& n_values, std::size_t trials, std::uint64_t master_seed,
    unsigned threads = 1) {
    if (n_values.size() < 5)
        throw std::invalid_argument("estimate_error_exponent: need at least 5 batch sizes");
    if (trials < 10000)
        throw std::invalid_argument("estimate_error_exponent: need at least 10^4 trials");
    for (std::size_t n : n_values)
        if (n < 1) throw std::invalid_argument("estimate_error_exponent: batch sizes must be >= 1");
    if (threads == 0) threads = 1;

    const auto cdf1 = rng::cumulative(p1.probs);
    const auto cdf2 = rng::cumulative(p2.probs);
    const auto llr = detail::llr_table(p1, p2);
    const double kl12 = divergence::kl_discrete(p1, p2);

    ExponentEstimate est;
    est.trials = trials;
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
        const detail::TrialContext ctx{cdf1, cdf2, llr, kl12, rule, n_values[ni]};
        std::vector<std::uint64_t> errors_per_thread(threads, 0);
        auto worker = [&](unsigned t) {
            std::uint64_t local = 0;
            for (std::size_t trial = t; trial < trials; trial += threads) {
                rng::Stream stream(
                    rng::derive_seed(master_seed, rng::Domain::exponent, ni, trial));
                if (detail::trial_is_error(ctx, stream)) ++local;
            }
            errors_per_thread[t] = local;
        };
        if (threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }
        std::uint64_t errors = 0;
        for (std::uint64_t e : errors_per_thread) errors += e;
        if (errors == 0) {
            est.dropped.push_back(n_values[ni]);
        } else {
            est.n_values.push_back(n_values[ni]);
            est.error_counts.push_back(errors);
            est.log_error.push_back(
                std::log(static_cast<double>(errors) / static_cast<double>(trials)));
        }
    }

    if (est.n_values.size() < 5)
        throw InsufficientErrorData(
            "estimate_error_exponent: only " + std::to_string(est.n_values.size()) +
            " of " + std::to_string(n_values.size()) +
            " batch sizes produced any errors; need 5 usable points (increase trials or "
            "shrink the batch sizes)");

    // Least squares of y = -log_error against n.
    const std::size_t m = est.n_values.size();
    double mean_n = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mean_n += static_cast<double>(est.n_values[i]);
        mean_y += -est.log_error[i];
    }
    mean_n /= static_cast<double>(m);
    mean_y /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = static_cast<double>(est.n_values[i]) - mean_n;
        sxx += dx * dx;
        sxy += dx * (-est.log_error[i] - mean_y);
    }
    est.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double fit = mean_y + est.slope * (static_cast<double>(est.n_values[i]) - mean_n);
        const double r = -est.log_error[i] - fit;
        ssr += r * r;
    }
    est.slope_stderr = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
    return est;
}

// Divergence between a sampled region and an outside point: the smallest
// model KL over the sampled locations (the region's nearest hypothesis).
inline double region_kl(const std::vector<geometry::Point>& region_samples,
                        const geometry::Point& u2, const Scenario& scen) {
    if (region_samples.empty()) throw std::invalid_argument("region_kl: no sample points");
    double best = std::numeric_limits<double>::infinity();
    for (const geometry::Point& u : region_samples) {
        const double d = scen.params.model == propagation::AnalyticModel::noisy
                             ? divergence::kl_gaussian_rss(u, u2, scen)
                             : divergence::kl_fading_rss(u, u2, scen);
        best = std::min(best, d);
    }
    return best;
}

// Uniform scalar quantizer; out-of-range values fold into the edge bins, so
// bin 0 and bin bins-1 absorb the distribution tails.
struct Quantizer {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 64;

    void validate() const {
        if (!(hi > lo)) throw std::invalid_argument("quantizer: hi must exceed lo");
        if (bins < 2) throw std::invalid_argument("quantizer: need at least 2 bins");
    }

    int index(double x) const {
        const double t = (x - lo) / (hi - lo) * static_cast<double>(bins);
        if (t <= 0.0) return 0;
        if (t >= static_cast<double>(bins)) return static_cast<int>(bins) - 1;
        return static_cast<int>(t);
    }
};

inline SampleBatch quantize(const std::vector<double>& values, const Quantizer& q) {
    q.validate();
    SampleBatch batch;
    batch.samples.reserve(values.size());
    for (double v : values) batch.samples.push_back(q.index(v));
    return batch;
}

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

// Exact bin probabilities of the single-anchor analytic observation at u
// under the quantizer, tails folded into the edge bins.
inline DiscreteDistribution model_pmf_quantized(const geometry::Point& u, const Scenario& scen,
                                                const Quantizer& q) {
    scen.validate();
    q.validate();
    if (scen.anchors.size() != 1)
        throw std::invalid_argument("model_pmf_quantized: single-anchor scenarios only");
    const propagation::Anchor& a = scen.anchors.front();
    const double width = (q.hi - q.lo) / static_cast<double>(q.bins);
    auto cdf = [&](double x) {
        if (scen.params.model == propagation::AnalyticModel::noisy) {
            const double mu = propagation::mean_rss_linear(u, a, scen.params);
            return detail::normal_cdf((x - mu) / std::sqrt(scen.params.noise_var));
        }
        const double scale = a.tx_power / std::pow(propagation::path_distance(u, a.location),
                                                   scen.params.alpha);
        const double shifted = x - scen.params.noise_floor;
        return shifted <= 0.0 ? 0.0 : -std::expm1(-shifted / scale);
    };
    std::vector<double> probs(q.bins);
    double prev = 0.0;  // tail below the first upper edge folds into bin 0
    for (std::size_t i = 0; i < q.bins; ++i) {
        const double upper = (i + 1 == q.bins)
                                 ? 1.0
                                 : cdf(q.lo + width * static_cast<double>(i + 1));
        probs[i] = std::max(0.0, upper - prev);
        prev = upper;
    }
    double sum = 0.0;
    for (double p : probs) sum += p;
    for (double& p : probs) p /= sum;
    return DiscreteDistribution(std::move(probs));
}

enum class RegionDecision { in_region, out_of_region };

// Critical-region rule: declare the batch out of the region when its
// empirical distribution is at least delta_n away (in KL) from every
// sampled in-region model, delta_n = c * |alphabet| * log(n+1) / n.
inline RegionDecision region_test(const SampleBatch& batch,
                                  const std::vector<geometry::Point>& region_samples,
                                  const Scenario& scen, const Quantizer& q, double c = 1.0) {
    if (region_samples.empty()) throw std::invalid_argument("region_test: no sample points");
    const double n = static_cast<double>(batch.size());
    const DiscreteDistribution emp = empirical_distribution(batch, q.bins);
    const double delta = c * static_cast<double>(q.bins) * std::log(n + 1.0) / n;
    double best = std::numeric_limits<double>::infinity();
    for (const geometry::Point& u : region_samples) {
        best = std::min(best, divergence::kl_discrete_or_inf(emp, model_pmf_quantized(u, scen, q)));
        if (best < delta) break;
    }
    return best >= delta ? RegionDecision::out_of_region : RegionDecision::in_region;
}

}  // namespace fploc::hypothesis
