// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <string>

#include "helmdd/opalgebra.hpp"

using namespace helmdd;

namespace {

std::string render(const Monomial& m) {
    std::string s;
    bool x = m.starts_with_x;
    for (int run : m.runs) {
        s += std::string(run, x ? 'x' : 'y');
        x = !x;
    }
    return s;
}

}  // namespace

TEST_CASE("order two with one transition is {xy, yx}") {
    const auto set = enumerate_monomials(2, 1);
    REQUIRE(set.size() == 2);
    std::set<std::string> rendered{render(set[0]), render(set[1])};
    CHECK(rendered == std::set<std::string>{"xy", "yx"});
}

TEST_CASE("order four with one transition has six members") {
    CHECK(enumerate_monomials(4, 1).size() == 6);  // 2 * C(3, 1)
}

TEST_CASE("cardinalities match the binomial count and sum to 2^n") {
    for (int n = 1; n <= 12; ++n) {
        std::size_t total = 0;
        std::set<std::string> all;
        for (int j = 0; j <= n - 1; ++j) {
            const auto set = enumerate_monomials(n, j);
            CHECK(set.size() == static_cast<std::size_t>(2.0 * binomial(n - 1, j) + 0.5));
            for (const auto& m : set) {
                CHECK(m.order() == n);
                CHECK(m.transitions() == j);
                all.insert(render(m));  // duplicates would collapse here
            }
            total += set.size();
        }
        CHECK(total == (std::size_t{1} << n));
        CHECK(all.size() == total);
    }
    CHECK_THROWS_AS(enumerate_monomials(3, 3), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_monomials(3, -1), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_monomials(0, 0), std::invalid_argument);
}

TEST_CASE("monomial expansion reproduces the binomial power of noncommuting matrices") {
    CHECK(expansion_defect(1, 3, 11) == 0.0);
    CHECK(expansion_defect(2, 3, 12) <= 1e-12);
    CHECK(expansion_defect(6, 3, 13) <= 1e-10);
    for (int n = 3; n <= 8; ++n) {
        CHECK(expansion_defect(n, 3, 100 + n) <= 1e-10);
        CHECK(expansion_defect(n, 4, 200 + n) <= 1e-10);
    }
    CHECK_THROWS_AS(expansion_defect(13, 3, 1), std::invalid_argument);
}

TEST_CASE("power bound vanishes with the transmitted norm") {
    for (double g : {0.3, 0.9, 1.1})
        for (int N : {2, 3, 6}) CHECK(error_power_bound(0.0, g, N) == 0.0);
}

TEST_CASE("power bound at N=2 reduces to the two-factor form") {
    for (double r : {0.05, 0.2})
        for (double g : {0.4, 0.95}) {
            const double expect = 2.0 * r * std::sqrt(g * g + r * r);
            CHECK(error_power_bound(r, g, 2) == Catch::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("batched bound at s=1 equals the binomial expansion of the power bound") {
    for (double r : {0.03, 0.15})
        for (double g : {0.5, 0.9})
            for (int N : {2, 4, 7})
                CHECK(error_power_bound_batched(r, g, N, 1) ==
                      Catch::Approx(error_power_bound(r, g, N)).epsilon(1e-12));
}

TEST_CASE("batched bound improves with the batch count for small transmitted norm") {
    const int N = 4;
    const double g = 0.9;
    const double r = g / (N * std::exp(1.0)) * 0.5;
    double prev = 1e300;
    for (int s = 1; s <= 4; ++s) {
        const double v = error_power_bound_batched(r, g, N, s);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("bound preconditions are enforced") {
    CHECK_THROWS_AS(error_power_bound(-0.1, 0.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(error_power_bound(0.1, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(error_power_bound_small_rho(0.3, 0.5, 4, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(error_power_bound_small_rho(0.1, 0.5, 2, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(error_power_bound_batched(0.1, 0.5, 3, 0), std::invalid_argument);
}

TEST_CASE("small-rho bound evaluates its closed form") {
    const double r = 0.05, g = 0.9, r0 = 0.1;
    const int N = 5;
    const double c = std::sqrt(2.0) * (N - 1) * (N - 2) * g * std::pow(g + r0, N - 3);
    const double expect = 2.0 * std::sqrt(2.0) * std::pow(g, N - 1) * (N - 1) * r + c * r * r;
    CHECK(error_power_bound_small_rho(r, g, N, r0) == Catch::Approx(expect).epsilon(1e-12));
}
