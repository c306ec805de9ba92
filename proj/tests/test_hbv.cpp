#include <doctest.h>

#include <ecograph/autodiff.hpp>
#include <ecograph/forcing.hpp>
#include <ecograph/hbv.hpp>
#include <ecograph/numerics.hpp>
#include <ecograph/rng.hpp>

#include <cmath>

using namespace ecograph;

namespace {

HbvParams<double> reference_params() {
    return {0.0, 3.0, 200.0, 1.0, 1.0, 0.2, 0.1, 0.05, 20.0, 2.0, 1};
}

HbvParams<double> random_valid_params(Rng& rng) {
    HbvParams<double> p;
    p.tt = rng.uniform(-2.0, 2.0);
    p.cfmax = rng.uniform(0.0, 8.0);
    p.fc = rng.uniform(60.0, 450.0);
    p.beta = rng.uniform(0.5, 5.0);
    p.lp = rng.uniform(0.3, 1.0);
    // deliberately allow k0 + k1 > 1: the outflow limiter must hold
    p.k0 = rng.uniform(0.5, 3.0);
    p.k1 = rng.uniform(0.1, std::min(0.5, p.k0));
    p.k2 = rng.uniform(0.001, std::min(0.1, p.k1));
    p.uzl = rng.uniform(0.0, 80.0);
    p.perc = rng.uniform(0.0, 5.0);
    p.maxbas = 1 + static_cast<int>(rng.below(5));
    return p;
}

}  // namespace

TEST_CASE("hand-traced single step") {
    // worked by hand, phase by phase:
    //   rain 10 (temp above TT), melt min(10, 3*5)=10, w=20
    //   recharge 20*(100/200)=10, sm 110
    //   et 2*min(110/200,1)=1.1, sm 108.9
    //   suz 20, perc 2 -> suz 18, slz 52
    //   q0 0.2*max(18-20,0)=0, q1 1.8 -> suz 16.2; q2 2.6 -> slz 49.4
    //   maxbas 1 -> q_out 4.4
    HbvParams<double> p = reference_params();
    HbvState<double> s = make_hbv_state(10.0, 100.0, 10.0, 50.0, 1);
    ForcingRecord f{Date{2015, 1, 1}, 10.0, 5.0, 2.0};
    double storage_before = s.total_storage();
    HbvFluxes<double> out = hbv_step(s, p, f);

    CHECK(out.melt == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(out.recharge == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(out.et == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(out.q_out == doctest::Approx(4.4).epsilon(1e-15));
    CHECK(s.snow == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.sm == doctest::Approx(108.9).epsilon(1e-15));
    CHECK(s.suz == doctest::Approx(16.2).epsilon(1e-15));
    CHECK(s.slz == doctest::Approx(49.4).epsilon(1e-15));
    double balance = f.precip - out.et - out.q_out - (s.total_storage() - storage_before);
    CHECK(std::abs(balance) < 1e-9);
}

TEST_CASE("precipitation below TT accumulates as snow and leaves recharge alone") {
    HbvParams<double> p = reference_params();
    HbvState<double> s = make_hbv_state(3.0, 80.0, 5.0, 20.0, 1);
    ForcingRecord f{Date{2015, 1, 1}, 5.0, -4.0, 0.5};
    HbvFluxes<double> out = hbv_step(s, p, f);
    CHECK(s.snow == 8.0);
    CHECK(out.melt == 0.0);
    CHECK(out.recharge == 0.0);
}

TEST_CASE("saturated soil passes all water through") {
    HbvParams<double> p = reference_params();
    p.beta = 3.7;  // arbitrary: (sm/fc)^beta = 1 at saturation regardless
    HbvState<double> s = make_hbv_state(0.0, 200.0, 0.0, 0.0, 1);
    ForcingRecord f{Date{2015, 1, 1}, 6.0, 10.0, 0.0};
    HbvFluxes<double> out = hbv_step(s, p, f);
    CHECK(out.recharge == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("triangular routing weights") {
    CHECK(triangular_weights(1) == std::vector<double>{1.0});
    {
        auto w = triangular_weights(2);
        CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    for (int maxbas : {3, 4, 7}) {
        auto w = triangular_weights(maxbas);
        // independent oracle: fine Riemann sum of the triangle over each day
        double m = static_cast<double>(maxbas);
        const int steps = 200000;
        std::vector<double> expected(static_cast<std::size_t>(maxbas), 0.0);
        for (int i = 0; i < maxbas * steps; ++i) {
            double u = (i + 0.5) * (m / (m * steps));
            double f = 2.0 / m - std::abs(u - m / 2.0) * 4.0 / (m * m);
            expected[static_cast<std::size_t>(u)] += f * (1.0 / steps);
        }
        double total = 0.0;
        for (int i = 0; i < maxbas; ++i) {
            CHECK(w[static_cast<std::size_t>(i)] ==
                  doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-6));
            total += w[static_cast<std::size_t>(i)];
            // symmetry
            CHECK(w[static_cast<std::size_t>(i)] ==
                  doctest::Approx(w[static_cast<std::size_t>(maxbas - 1 - i)]).epsilon(1e-12));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)triangular_weights(0), InvariantViolation);
}

TEST_CASE("routing spreads an impulse over maxbas days") {
    HbvParams<double> p = reference_params();
    p.maxbas = 3;
    p.cfmax = 0.0;
    p.perc = 0.0;
    p.k2 = 1e-9;
    p.k1 = 1.0;
    p.k0 = 1.0;
    p.uzl = 1e9;
    p.fc = 1e-6;  // everything becomes recharge immediately
    p.beta = 1e-9;
    HbvState<double> s = make_hbv_state(0.0, 0.0, 0.0, 0.0, 3);
    auto w = triangular_weights(3);
    ForcingRecord wet{Date{2015, 1, 1}, 10.0, 10.0, 0.0};
    ForcingRecord dry{Date{2015, 1, 2}, 0.0, 10.0, 0.0};
    // q1 = k1 * suz drains the whole upper zone in one day
    double q0 = hbv_step(s, p, wet).q_out;
    double q1 = hbv_step(s, p, dry).q_out;
    double q2 = hbv_step(s, p, dry).q_out;
    CHECK(q0 == doctest::Approx(10.0 * w[0]).epsilon(1e-5));
    CHECK(q1 == doctest::Approx(10.0 * w[1]).epsilon(1e-5));
    CHECK(q2 == doctest::Approx(10.0 * w[2]).epsilon(1e-5));
}

TEST_CASE("water balance closes over a ten-year run") {
    Rng rng(17);
    for (int trial = 0; trial < 3; ++trial) {
        HbvParams<double> p = random_valid_params(rng);
        HbvState<double> s =
            make_hbv_state(0.0, p.fc * 0.4, 5.0, 20.0, p.maxbas);
        ForcingSeries forcing = synthetic_daily_forcing(3650, 100 + trial);
        double storage0 = s.total_storage();
        KahanSum precip, et, q;
        for (std::size_t t = 0; t < forcing.length(); ++t) {
            HbvFluxes<double> out = hbv_step(s, p, forcing.at(0, t));
            precip.add(forcing.at(0, t).precip);
            et.add(out.et);
            q.add(out.q_out);
        }
        double residual =
            precip.value() - et.value() - q.value() - (s.total_storage() - storage0);
        CHECK(std::abs(residual) < 1e-6);
    }
}

TEST_CASE("storages stay non-negative under arbitrary forcing and valid params") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        HbvParams<double> p = random_valid_params(rng);
        HbvState<double> s = make_hbv_state(0.0, rng.uniform(0.0, p.fc), rng.uniform(0.0, 50.0),
                                            rng.uniform(0.0, 80.0), p.maxbas);
        for (int t = 0; t < 400; ++t) {
            ForcingRecord f{Date{2015, 1, 1}, rng.uniform(0.0, 80.0),
                            rng.uniform(-15.0, 30.0), rng.uniform(0.0, 6.0)};
            (void)hbv_step(s, p, f);
            CHECK(s.snow >= 0.0);
            CHECK(s.sm >= 0.0);
            CHECK(s.sm <= p.fc + 1e-9);
            CHECK(s.suz >= -1e-12);
            CHECK(s.slz >= -1e-12);
        }
    }
}

TEST_CASE("one-step outputs are differentiable in every parameter") {
    // interior point: forcing temps away from TT, suz away from UZL and PERC
    ForcingRecord f{Date{2015, 1, 1}, 7.0, 6.3, 1.7};
    std::vector<double> x = {0.4, 3.0, 200.0, 1.8, 0.8, 0.25, 0.11, 0.04, 20.0, 2.0};
    auto one_step = [f](Tape& tape, std::span<const Var> v) {
        (void)tape;
        HbvParams<Var> p{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], 1};
        HbvState<Var> s = make_hbv_state(v[2] * 0.05, v[2] * 0.5, v[2] * 0.08, v[2] * 0.2, 1);
        HbvFluxes<Var> out = hbv_step(s, p, f);
        return out.q_out + out.et * 2.0 + s.sm * 0.1;
    };
    CHECK(gradient_check(one_step, x) < 1e-4);
}

TEST_CASE("thirty-step streamflow is differentiable in every parameter") {
    ForcingSeries forcing = synthetic_daily_forcing(30, 321);
    std::vector<double> x = {-3.3, 3.0, 220.0, 1.8, 0.8, 0.25, 0.11, 0.04, 20.0, 2.0};
    auto run = [&forcing](Tape& tape, std::span<const Var> v) {
        HbvParams<Var> p{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], 2};
        HbvState<Var> s = make_hbv_state(v[2] * 0.0, v[2] * 0.5, v[2] * 0.05, v[2] * 0.1, 2);
        Var total = tape.constant(0.0);
        for (std::size_t t = 0; t < forcing.length(); ++t)
            total = total + hbv_step(s, p, forcing.at(0, t)).q_out;
        return total;
    };
    CHECK(gradient_check(run, x) < 1e-4);
}

TEST_CASE("parameter validation") {
    HbvParams<double> p = reference_params();
    p.fc = 0.0;
    CHECK_THROWS_AS(validate_hbv_params(p), InvariantViolation);
    p = reference_params();
    p.k1 = 0.3;  // violates k0 >= k1
    CHECK_THROWS_AS(validate_hbv_params(p), InvariantViolation);
    p = reference_params();
    p.lp = 1.2;
    CHECK_THROWS_AS(validate_hbv_params(p), InvariantViolation);
}
