#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "fploc/hypothesis.hpp"
#include "fploc/rng.hpp"

using namespace fploc;
using divergence::DiscreteDistribution;
using hypothesis::Decision;
using hypothesis::SampleBatch;
using hypothesis::SetMembership;

namespace {

// Exact error probabilities for Bernoulli pairs (binomial sums), used as
// oracles for the Monte Carlo estimates below.
constexpr double kD64 = 0.08109302162163282;  // KL(Bern(0.6)||Bern(0.4))

void check_counts(const hypothesis::ExponentEstimate& est,
                  const std::vector<double>& exact) {
    REQUIRE(est.error_counts.size() == exact.size());
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const double rate =
            static_cast<double>(est.error_counts[i]) / static_cast<double>(est.trials);
        const double sd =
            std::sqrt(exact[i] * (1.0 - exact[i]) / static_cast<double>(est.trials));
        INFO("n = " << est.n_values[i]);
        CHECK(std::abs(rate - exact[i]) <= 5.0 * sd);
    }
}

}  // namespace

TEST_CASE("empirical distribution and llr statistic", "[hypothesis]") {
    const SampleBatch batch{{0, 1, 1, 2}};
    const auto emp = hypothesis::empirical_distribution(batch, 4);
    CHECK(emp.probs == std::vector<double>{0.25, 0.5, 0.25, 0.0});
    CHECK_THROWS_AS(hypothesis::empirical_distribution(SampleBatch{}, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(hypothesis::empirical_distribution(batch, 2), std::invalid_argument);

    const auto p1 = DiscreteDistribution::bernoulli(0.6);
    const auto p2 = DiscreteDistribution::bernoulli(0.4);
    CHECK(hypothesis::llr_statistic(SampleBatch{{0, 1, 0}}, p1, p2) ==
          Catch::Approx(0.13515503603605480).epsilon(1e-14));
    CHECK_THROWS_AS(hypothesis::llr_statistic(SampleBatch{{0}}, p1,
                                              DiscreteDistribution({0.0, 1.0})),
                    std::domain_error);
}

TEST_CASE("threshold decision rule", "[hypothesis]") {
    CHECK(hypothesis::np_decide(0.31, 0.3) == Decision::location1);
    CHECK(hypothesis::np_decide(0.3, 0.3) == Decision::location2);  // tie
    CHECK(hypothesis::np_decide(-0.1, 0.0) == Decision::location2);

    // Shifting statistic and threshold together never changes the decision.
    rng::Stream s(5);
    for (int i = 0; i < 100; ++i) {
        const double t = s.uniform(-2.0, 2.0);
        const double g = s.uniform(-2.0, 2.0);
        const double c = s.uniform(-10.0, 10.0);
        CHECK(hypothesis::np_decide(t, g) == hypothesis::np_decide(t + c, g + c));
    }
}

TEST_CASE("typicality membership", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.6);
    const auto p2 = DiscreteDistribution::bernoulli(0.4);
    // All-zero batch: statistic = -ln(1.5) + KL = -0.32437...
    const SampleBatch zeros{{0, 0, 0, 0, 0}};
    CHECK(hypothesis::typical_set_test(zeros, p1, p2, 0.05) == SetMembership::outside);
    CHECK(hypothesis::typical_set_test(zeros, p1, p2, 0.33) == SetMembership::inside);
    // Balanced batch: statistic = KL itself.
    const SampleBatch balanced{{0, 1}};
    CHECK(hypothesis::typical_set_test(balanced, p1, p2, kD64 + 1e-9) ==
          SetMembership::inside);
    CHECK(hypothesis::typical_set_test(balanced, p1, p2, kD64 - 1e-3) ==
          SetMembership::outside);
    CHECK_THROWS_AS(hypothesis::typical_set_test(zeros, p1, p2, 0.0),
                    std::invalid_argument);
}

TEST_CASE("hoeffding tail bound values", "[hypothesis]") {
    CHECK(hypothesis::hoeffding_bound(100, 0.1) ==
          Catch::Approx(0.2706705664732254).epsilon(1e-14));
    CHECK(hypothesis::hoeffding_bound(50, 0.2) ==
          Catch::Approx(0.03663127777746836).epsilon(1e-14));
    CHECK_THROWS_AS(hypothesis::hoeffding_bound(10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(hypothesis::hoeffding_bound(0, 0.1), std::invalid_argument);
}

TEST_CASE("typical-set miss rate matches the binomial oracle", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.6);
    const auto p2 = DiscreteDistribution::bernoulli(0.4);
    const hypothesis::TestRule rule = hypothesis::TypicalSetRule{0.05};
    const std::vector<std::size_t> ns{40, 60, 80, 100, 120};
    const auto est =
        hypothesis::estimate_error_exponent(p1, p2, rule, ns, 20000, 2024, 4);

    REQUIRE(est.dropped.empty());
    check_counts(est, {0.03876558272990393, 0.01325648864675109, 0.004705529261518213,
                       0.0031978891155512506, 0.001178722703206996});

    // Exact least-squares slope over these batch sizes is 0.042041.
    CHECK(std::abs(est.slope - 0.04204099513140629) < 0.012);
    // The measured decay lands in [KL - eps, KL + eps], stderr-widened.
    CHECK(est.slope >= kD64 - 0.05 - 3.0 * est.slope_stderr);
    CHECK(est.slope <= kD64 + 0.05 + 3.0 * est.slope_stderr);
}

TEST_CASE("threshold-rule miss rate matches the binomial oracle", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.6);
    const auto p2 = DiscreteDistribution::bernoulli(0.4);
    const hypothesis::TestRule rule = hypothesis::NeymanPearsonRule{0.0};
    const std::vector<std::size_t> ns{20, 40, 60, 80, 100};
    const auto est =
        hypothesis::estimate_error_exponent(p1, p2, rule, ns, 10000, 91, 2);

    REQUIRE(est.dropped.empty());
    check_counts(est, {0.12752124614721697, 0.0743515567569122, 0.04448031418421953,
                       0.027123558439777252, 0.01676168650316132});
    CHECK(std::abs(est.slope - 0.025333882432629275) < 0.005);
}

TEST_CASE("map-rule error rate matches the binomial oracle", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.7);
    const auto p2 = DiscreteDistribution::bernoulli(0.3);
    const hypothesis::TestRule rule = hypothesis::MapRule{0.5};
    const std::vector<std::size_t> ns{10, 20, 30, 40, 50};
    const auto est =
        hypothesis::estimate_error_exponent(p1, p2, rule, ns, 10000, 314, 3);

    REQUIRE(est.dropped.empty());
    check_counts(est, {0.09880865999999973, 0.032553356881301024, 0.011653828934930964,
                       0.0043369321347842184, 0.0016513635811191381});
    CHECK(std::abs(est.slope - 0.10198881063190308) < 0.028);
}

TEST_CASE("identical hypotheses give a flat error curve", "[hypothesis]") {
    const auto p = DiscreteDistribution::bernoulli(0.5);
    const auto est = hypothesis::estimate_error_exponent(
        p, p, hypothesis::MapRule{0.5}, {10, 20, 30, 40, 50}, 10000, 8, 2);
    // Degenerate LLR: the rule always says location2, so the error rate is
    // the prior on location1 at every n.
    for (std::size_t i = 0; i < est.error_counts.size(); ++i) {
        const double rate = static_cast<double>(est.error_counts[i]) / 10000.0;
        CHECK(std::abs(rate - 0.5) < 0.025);
    }
    CHECK(std::abs(est.slope) < 0.005);
}

TEST_CASE("zero-error batch sizes are dropped, not fitted", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.6);
    const auto p2 = DiscreteDistribution::bernoulli(0.4);
    const auto est = hypothesis::estimate_error_exponent(
        p1, p2, hypothesis::NeymanPearsonRule{0.0}, {20, 40, 60, 80, 100, 2000}, 10000,
        91, 2);
    CHECK(est.dropped == std::vector<std::size_t>{2000});
    REQUIRE(est.n_values.size() == 5);
    CHECK(std::abs(est.slope - 0.025333882432629275) < 0.005);
}

TEST_CASE("too few measurable batch sizes raises", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.9);
    const auto p2 = DiscreteDistribution::bernoulli(0.1);
    CHECK_THROWS_AS(hypothesis::estimate_error_exponent(
                        p1, p2, hypothesis::TypicalSetRule{0.01},
                        {400, 500, 600, 700, 800}, 10000, 1, 4),
                    hypothesis::InsufficientErrorData);
}

TEST_CASE("estimator input validation", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.6);
    const auto p2 = DiscreteDistribution::bernoulli(0.4);
    const hypothesis::TestRule rule = hypothesis::NeymanPearsonRule{0.0};
    CHECK_THROWS_AS(
        hypothesis::estimate_error_exponent(p1, p2, rule, {10, 20, 30, 40}, 10000, 1),
        std::invalid_argument);
    CHECK_THROWS_AS(hypothesis::estimate_error_exponent(p1, p2, rule,
                                                        {10, 20, 30, 40, 50}, 9999, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(hypothesis::estimate_error_exponent(p1, p2, rule,
                                                        {0, 20, 30, 40, 50}, 10000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(hypothesis::estimate_error_exponent(DiscreteDistribution({1.0, 0.0}),
                                                        p2, rule, {10, 20, 30, 40, 50},
                                                        10000, 1),
                    std::domain_error);
}

TEST_CASE("estimates are reproducible across thread counts", "[hypothesis]") {
    const auto p1 = DiscreteDistribution::bernoulli(0.6);
    const auto p2 = DiscreteDistribution::bernoulli(0.4);
    const hypothesis::TestRule rule = hypothesis::NeymanPearsonRule{0.0};
    const std::vector<std::size_t> ns{10, 20, 30, 40, 50};
    const auto a = hypothesis::estimate_error_exponent(p1, p2, rule, ns, 10000, 7, 1);
    const auto b = hypothesis::estimate_error_exponent(p1, p2, rule, ns, 10000, 7, 4);
    CHECK(a.error_counts == b.error_counts);
    CHECK(a.slope == b.slope);
    CHECK(a.slope_stderr == b.slope_stderr);

    const auto c = hypothesis::estimate_error_exponent(p1, p2, rule, ns, 10000, 8, 1);
    CHECK(a.error_counts != c.error_counts);
}

TEST_CASE("region divergence takes the nearest sampled hypothesis", "[hypothesis]") {
    divergence::Scenario scen;
    scen.anchors = {{{0.0, 0.0}, 1.0}};
    scen.params.alpha = 2.0;
    scen.params.noise_var = 0.5;
    scen.params.model = propagation::AnalyticModel::noisy;

    const geometry::Point outside{3.0, 0.0};
    CHECK(hypothesis::region_kl({{2.0, 0.0}}, outside, scen) ==
          Catch::Approx(0.019290123456790126).epsilon(1e-14));
    CHECK(hypothesis::region_kl({{1.0, 0.0}, {2.0, 0.0}}, outside, scen) ==
          Catch::Approx(0.019290123456790126).epsilon(1e-14));
    CHECK_THROWS_AS(hypothesis::region_kl({}, outside, scen), std::invalid_argument);
}

TEST_CASE("quantizer folds tails into the edge bins", "[hypothesis]") {
    const hypothesis::Quantizer q{0.0, 1.0, 4};
    CHECK(q.index(-5.0) == 0);
    CHECK(q.index(0.0) == 0);
    CHECK(q.index(0.25) == 1);
    CHECK(q.index(0.999) == 3);
    CHECK(q.index(1.0) == 3);
    CHECK(q.index(7.0) == 3);
    CHECK_THROWS_AS((hypothesis::Quantizer{1.0, 1.0, 4}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS((hypothesis::Quantizer{0.0, 1.0, 1}).validate(),
                    std::invalid_argument);

    const auto batch = hypothesis::quantize({-1.0, 0.3, 0.6, 2.0}, q);
    CHECK(batch.samples == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("quantized model pmf matches the channel cdf", "[hypothesis]") {
    divergence::Scenario scen;
    scen.anchors = {{{0.0, 0.0}, 1.0}};
    scen.params.alpha = 2.0;
    scen.params.noise_var = 0.25;
    scen.params.model = propagation::AnalyticModel::noisy;

    const hypothesis::Quantizer q{0.0, 2.0, 8};
    const auto pmf = hypothesis::model_pmf_quantized({1.0, 0.0}, scen, q);
    REQUIRE(pmf.alphabet_size() == 8);
    double sum = 0.0;
    for (double p : pmf.probs) sum += p;
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(pmf.probs[3] == Catch::Approx(0.19146246127401312).epsilon(1e-12));
    CHECK(pmf.probs[4] == Catch::Approx(pmf.probs[3]).epsilon(1e-12));
    CHECK(pmf.probs[0] == Catch::Approx(0.06680720126885809).epsilon(1e-12));

    divergence::Scenario fading = scen;
    fading.params.model = propagation::AnalyticModel::fading;
    fading.params.noise_floor = 0.0;
    const auto fpmf =
        hypothesis::model_pmf_quantized({1.0, 0.0}, fading, {0.0, 4.0, 8});
    CHECK(fpmf.probs[2] == Catch::Approx(0.14474928102301252).epsilon(1e-12));
    CHECK(fpmf.probs[0] == Catch::Approx(-std::expm1(-0.5)).epsilon(1e-12));
    CHECK(fpmf.probs[7] == Catch::Approx(std::exp(-3.5)).epsilon(1e-12));

    fading.params.noise_floor = 2.0;
    const auto shifted =
        hypothesis::model_pmf_quantized({1.0, 0.0}, fading, {2.0, 6.0, 8});
    CHECK(shifted.probs[2] == Catch::Approx(0.14474928102301252).epsilon(1e-12));

    divergence::Scenario two = scen;
    two.anchors.push_back({{1.0, 1.0}, 1.0});
    CHECK_THROWS_AS(hypothesis::model_pmf_quantized({1.0, 0.0}, two, q),
                    std::invalid_argument);
}

TEST_CASE("region membership test separates near from far", "[hypothesis]") {
    divergence::Scenario scen;
    scen.anchors = {{{0.0, 0.0}, 1.0}};
    scen.params.alpha = 2.0;
    scen.params.noise_var = 0.04;
    scen.params.model = propagation::AnalyticModel::noisy;

    const hypothesis::Quantizer q{-0.5, 1.5, 8};
    const geometry::Point u_in{1.0, 0.0};   // mean rss 1.0
    const geometry::Point u_out{3.0, 0.0};  // mean rss 1/9

    auto draw_batch = [&](const geometry::Point& u, std::uint64_t seed) {
        rng::Stream s(seed);
        const double mu = propagation::mean_rss_linear(u, scen.anchors[0], scen.params);
        std::vector<double> values(1000);
        for (double& v : values) v = mu + 0.2 * s.normal();
        return hypothesis::quantize(values, q);
    };

    CHECK(hypothesis::region_test(draw_batch(u_in, 123), {u_in}, scen, q) ==
          hypothesis::RegionDecision::in_region);
    CHECK(hypothesis::region_test(draw_batch(u_out, 77), {u_in}, scen, q) ==
          hypothesis::RegionDecision::out_of_region);
    // A region that contains the emitter keeps the batch inside.
    CHECK(hypothesis::region_test(draw_batch(u_out, 77), {u_in, u_out}, scen, q) ==
          hypothesis::RegionDecision::in_region);
    CHECK_THROWS_AS(hypothesis::region_test(draw_batch(u_in, 1), {}, scen, q),
                    std::invalid_argument);
}
