#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evnet/pricing.hpp"

using namespace evnet;

TEST_CASE("effective rate sums the pricing-block streams") {
    CHECK(effective_rate({5.0, 0.0, 0.0, 0.0, 0.0, 0.0}) == doctest::Approx(5.0));
    CHECK(effective_rate({5.0, 1.0, 0.5, 2.0, 0.0, 0.0}) == doctest::Approx(6.5));
    CHECK(effective_rate({}) == 0.0);
    ArrivalStreams bad;
    bad.lambda_bl = -1.0;
    CHECK_THROWS_AS(effective_rate(bad), std::invalid_argument);
}

TEST_CASE("acceptance fraction") {
    CHECK(acceptance_fraction(2.5, 5.0) == 1.0);
    CHECK(acceptance_fraction(5.0, 5.0) == 1.0);
    CHECK(acceptance_fraction(10.0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(acceptance_fraction(0.0, 5.0) == 1.0);
    CHECK_THROWS_AS(acceptance_fraction(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("acceptance throttles to the admissible rate") {
    const double star = 3.7;
    for (double tilde : {3.8, 5.0, 11.0, 300.0})
        CHECK(acceptance_fraction(tilde, star) * tilde <= star + 1e-12);
}

TEST_CASE("price below and at the threshold") {
    const auto sig = price(4.0, 5.0, 4.0, 0.5);
    CHECK(sig.price == 4.0);
    CHECK_FALSE(sig.congested);
    CHECK(price(5.0, 5.0, 4.0, 0.5).price == 4.0);
    CHECK_FALSE(price(5.0, 5.0, 4.0, 0.5).congested);
    CHECK(price(5.0 * (1.0 + 1e-9), 5.0, 4.0, 0.5).congested);
    CHECK(price(0.0, 5.0, 4.0, 0.5).price == 4.0);
}

TEST_CASE("congestion surcharge closed form") {
    const double e = std::exp(1.0);
    const auto sig = price(e * 5.0, 5.0, 4.0, 0.5);
    CHECK(sig.congested);
    CHECK(sig.price == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(price(e * 5.0, 5.0, 4.0, 0.0).price == doctest::Approx(4.0));
    // surcharge formula evaluated exactly at the threshold collapses to p_normal
    const double at_threshold = 4.0 * (1.0 + 0.5 * std::sqrt(-std::log(5.0 / 5.0)));
    CHECK(std::abs(at_threshold - 4.0) <= 1e-12);
}

TEST_CASE("price is nondecreasing in the effective rate") {
    double prev = 0.0;
    for (double tilde = 0.5; tilde <= 20.0; tilde += 0.25) {
        const double p = price(tilde, 5.0, 4.0, 0.5).price;
        CHECK(p >= prev - 1e-12);
        CHECK(p >= 4.0);
        prev = p;
    }
    // strictly increasing beyond the threshold
    CHECK(price(7.0, 5.0, 4.0, 0.5).price > price(6.0, 5.0, 4.0, 0.5).price);
}

TEST_CASE("price parameter validation") {
    CHECK_THROWS_AS(price(1.0, -1.0, 4.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(price(1.0, 5.0, 4.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(price(-1.0, 5.0, 4.0, 0.5), std::invalid_argument);
}

TEST_CASE("retry streams") {
    const auto [bl, rb] = retry_streams(3.0, 0.0, 1.0 / 3.0);
    CHECK(bl == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rb == 0.0);
    CHECK(retry_streams(0.0, 0.0, 1.0 / 3.0) == std::pair{0.0, 0.0});
    CHECK(retry_streams(3.0, 1.5, 0.0) == std::pair{0.0, 0.0});
    CHECK_THROWS_AS(retry_streams(1.0, 1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(retry_streams(-1.0, 0.0, 0.5), std::invalid_argument);
}
