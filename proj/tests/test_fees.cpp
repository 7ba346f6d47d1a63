#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rpoa/fees.hpp"

using namespace rpoa::fees;

TEST_CASE("entrance fee")
{
    FeeSchedule s;
    CHECK(entrance_fee(0, s) == 0.0);
    s.entrance_base_gamma_e = 10.0;
    CHECK(entrance_fee(4, s) == 20.0);
    s.entrance_base_gamma_e = 1.0;
    CHECK(entrance_fee(10000, s) == 100.0);
    CHECK_THROWS_AS(entrance_fee(-1, s), std::invalid_argument);
    double prev = 0.0;
    for (std::int64_t h = 0; h < 100000; h += 37) {
        const double cur = entrance_fee(h, s);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("base service fee")
{
    FeeSchedule s;
    CHECK(base_service_fee(s.max_block_worth_omega_w, s) == s.service_base_alpha_fee);
    CHECK(base_service_fee(0.0, s) == 0.0);
    s.service_base_alpha_fee = 8.0;
    CHECK(base_service_fee(s.max_block_worth_omega_w / 4, s) == 2.0);
    CHECK_THROWS_AS(base_service_fee(s.max_block_worth_omega_w * 1.0001, s), std::invalid_argument);
    CHECK_THROWS_AS(base_service_fee(-1.0, s), std::invalid_argument);
}

TEST_CASE("upload fee")
{
    FeeSchedule s;
    CHECK(upload_fee(300.0, 1.0, s) == doctest::Approx(s.upload_base_gamma_u * base_service_fee(300.0, s)));
    CHECK(upload_fee(0.0, 57.0, s) == 0.0);
    s.upload_base_gamma_u = 2.0;
    s.service_base_alpha_fee = 8.0;
    // 2 * (8 * 1/4) * 3
    CHECK(upload_fee(s.max_block_worth_omega_w / 4, 3.0, s) == doctest::Approx(12.0).epsilon(1e-12));
    CHECK_THROWS_AS(upload_fee(10.0, 0.99, s), std::invalid_argument);
    CHECK(upload_fee(10.0, 2.5, s) > upload_fee(10.0, 2.0, s));
    CHECK(upload_fee(11.0, 2.0, s) > upload_fee(10.0, 2.0, s));
}

TEST_CASE("splitting an identity never lowers the entrance cost")
{
    FeeSchedule s;
    s.entrance_base_gamma_e = 3.0;
    for (int k = 1; k <= 8; ++k) {
        const std::int64_t h1 = 50;
        double total = 0.0;
        for (int i = 0; i < k; ++i)
            total += entrance_fee(h1 + 7 * i, s);
        CHECK(total >= k * entrance_fee(h1, s));
    }
}

TEST_CASE("fee schedule validation")
{
    FeeSchedule s;
    CHECK_NOTHROW(s.validate());
    s.block_reward = 0.0;
    CHECK_NOTHROW(s.validate());
    s.max_block_worth_omega_w = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.stake_lock_blocks = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
