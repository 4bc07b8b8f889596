#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ozonecast/errors.hpp"
#include "ozonecast/metrics.hpp"
#include "ozonecast/rng.hpp"

using namespace ozonecast;

TEST_CASE("perfect forecast scores perfectly") {
    const std::vector<double> v = {1, 2, 3};
    const auto rep = global_fit_report(v, v);
    CHECK(rep.mbe == doctest::Approx(0.0));
    CHECK(rep.mae == doctest::Approx(0.0));
    CHECK(rep.rmse == doctest::Approx(0.0));
    CHECK(rep.rmse_s == doctest::Approx(0.0));
    CHECK(rep.rmse_u == doctest::Approx(0.0));
    CHECK(rep.d == doctest::Approx(1.0));
}

TEST_CASE("hand-computed two-point example") {
    const std::vector<double> o = {1, 3}, p = {2, 2};
    const auto rep = global_fit_report(p, o);
    CHECK(rep.mbe == doctest::Approx(0.0));
    CHECK(rep.mae == doctest::Approx(1.0));
    CHECK(rep.rmse == doctest::Approx(1.0));
    // d = 1 - 2 / ((0+1)^2 + (0+1)^2) = 0
    CHECK(rep.d == doctest::Approx(0.0));
}

TEST_CASE("purely systematic bias: P = 2O") {
    const std::vector<double> o = {1, 2, 3}, p = {2, 4, 6};
    const auto rep = global_fit_report(p, o);
    CHECK(rep.b1 == doctest::Approx(2.0));
    CHECK(rep.b0 == doctest::Approx(0.0));
    CHECK(rep.rmse_u == doctest::Approx(0.0));
    CHECK(rep.rmse_s == doctest::Approx(rep.rmse).epsilon(1e-12));
}

TEST_CASE("RMSE decomposes orthogonally on random pairs") {
    Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(40);
        std::vector<double> o(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            o[i] = rng.uniform(0.0, 100.0);
            p[i] = rng.uniform(0.0, 100.0);
        }
        // guard the precondition: observations must vary
        bool constant = true;
        for (std::size_t i = 1; i < n; ++i) constant = constant && o[i] == o[0];
        if (constant) continue;
        const auto rep = global_fit_report(p, o);
        const double lhs = rep.rmse_s * rep.rmse_s + rep.rmse_u * rep.rmse_u;
        const double rhs = rep.rmse * rep.rmse;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
        CHECK(rep.d >= 0.0);
        CHECK(rep.d <= 1.0);
    }
}

TEST_CASE("d is invariant under a shared positive affine transform") {
    Rng rng(2);
    std::vector<double> o(25), p(25);
    for (std::size_t i = 0; i < 25; ++i) {
        o[i] = rng.uniform(20.0, 180.0);
        p[i] = o[i] + rng.normal(0.0, 15.0);
    }
    const auto base = global_fit_report(p, o);
    std::vector<double> o2 = o, p2 = p;
    for (std::size_t i = 0; i < 25; ++i) {
        o2[i] = 3.5 * o[i] + 40.0;
        p2[i] = 3.5 * p[i] + 40.0;
    }
    const auto scaled = global_fit_report(p2, o2);
    CHECK(scaled.d == doctest::Approx(base.d).epsilon(1e-12));
}

TEST_CASE("global fit error cases") {
    const std::vector<double> a = {1, 2}, b = {1, 2, 3};
    CHECK_THROWS_AS(global_fit_report(a, b), LengthMismatch);
    const std::vector<double> constant = {5, 5, 5};
    const std::vector<double> p = {4, 5, 6};
    CHECK_THROWS_AS(global_fit_report(p, constant), ConstantObservations);
}

TEST_CASE("contingency counting") {
    {
        std::vector<bool> flags(10, false);
        for (int i = 0; i < 3; ++i) flags[i] = true;
        const auto t = contingency(flags, flags);
        CHECK(t.a == 3);
        CHECK(t.f == 3);
        CHECK(t.m == 3);
        CHECK(t.n == 10);
    }
    {
        const std::vector<bool> none(6, false);
        std::vector<bool> obs(6, false);
        obs[2] = true;
        const auto t = contingency(none, obs);
        CHECK(t.a == 0);
        CHECK(t.f == 0);
        CHECK(t.m == 1);
    }
    {
        const std::vector<bool> p = {true, true, false, false};
        const std::vector<bool> o = {true, false, true, false};
        const auto t = contingency(p, o);
        CHECK(t.a == 1);
        CHECK(t.f == 2);
        CHECK(t.m == 2);
        CHECK(t.n == 4);
    }
    const std::vector<bool> small = {true};
    const std::vector<bool> big = {true, false};
    CHECK_THROWS_AS(contingency(small, big), LengthMismatch);
}

TEST_CASE("exceedance indices") {
    {
        ContingencyTable t{3, 3, 3, 10};
        const auto r = exceedance_report(t);
        CHECK(r.tpr == doctest::Approx(1.0));
        CHECK(r.far == doctest::Approx(0.0));
        CHECK(r.si == doctest::Approx(1.0));
    }
    {
        ContingencyTable t{1, 2, 2, 4};
        const auto r = exceedance_report(t);
        CHECK(r.tpr == doctest::Approx(0.5));
        CHECK(r.far == doctest::Approx(0.5));
        CHECK(r.si == doctest::Approx(0.0));
    }
    {
        // an operational validation season:
        // M = 7 observed, A = 6 hits, 6 false alarms (F = 12), N = 105
        ContingencyTable t{6, 12, 7, 105};
        const auto r = exceedance_report(t);
        CHECK(r.tpr == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
        CHECK(r.far == doctest::Approx(6.0 / 98.0).epsilon(1e-12));
        CHECK(r.si == doctest::Approx(6.0 / 7.0 - 6.0 / 98.0).epsilon(1e-12));
        CHECK(r.tpr == doctest::Approx(0.857).epsilon(1e-3));
        CHECK(r.far == doctest::Approx(0.061).epsilon(2e-2));
        CHECK(r.si == doctest::Approx(0.796).epsilon(1e-3));
    }
}

TEST_CASE("exceedance report preconditions") {
    CHECK_THROWS_AS(exceedance_report(ContingencyTable{0, 0, 0, 5}), NoObservedExceedances);
    CHECK_THROWS_AS(exceedance_report(ContingencyTable{5, 5, 5, 5}), AllExceedances);
}

TEST_CASE("SI = TPR - FAR against a brute-force category count") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + rng.below(60);
        std::vector<bool> p(n), o(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = rng.uniform01() < 0.3;
            o[i] = rng.uniform01() < 0.25;
        }
        std::size_t hits = 0, false_alarms = 0, misses = 0, rejections = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i] && o[i]) ++hits;
            if (p[i] && !o[i]) ++false_alarms;
            if (!p[i] && o[i]) ++misses;
            if (!p[i] && !o[i]) ++rejections;
        }
        const auto t = contingency(p, o);
        CHECK(t.a == hits);
        CHECK(t.f == hits + false_alarms);
        CHECK(t.m == hits + misses);
        CHECK(t.n == hits + false_alarms + misses + rejections);
        if (t.m >= 1 && t.n > t.m) {
            const auto r = exceedance_report(t);
            const double tpr = static_cast<double>(hits) / (hits + misses);
            const double far = static_cast<double>(false_alarms) / (false_alarms + rejections);
            CHECK(r.tpr == doctest::Approx(tpr).epsilon(1e-12));
            CHECK(r.far == doctest::Approx(far).epsilon(1e-12));
            CHECK(r.si == doctest::Approx(tpr - far).epsilon(1e-12));
            CHECK(r.si >= -1.0);
            CHECK(r.si <= 1.0);
        }
    }
}

TEST_CASE("standardized residuals") {
    {
        const std::vector<double> o = {1, 2, 3};
        const auto sr = standardized_residuals(o, o);
        for (const double v : sr) CHECK(v == doctest::Approx(0.0));
    }
    {
        // std of (0, 2) with the n-1 denominator is sqrt(2)
        const std::vector<double> o = {0, 2}, p = {1, 3};
        const auto sr = standardized_residuals(p, o);
        CHECK(sr[0] == doctest::Approx(0.707106781186548).epsilon(1e-12));
        CHECK(sr[1] == doctest::Approx(0.707106781186548).epsilon(1e-12));
    }
    {
        Rng rng(4);
        std::vector<double> o(12), p(12);
        for (std::size_t i = 0; i < 12; ++i) {
            o[i] = rng.uniform(10.0, 100.0);
            p[i] = o[i] + rng.normal(0.0, 5.0);
        }
        const auto base = standardized_residuals(p, o);
        std::vector<double> o2(12), p2(12);
        for (std::size_t i = 0; i < 12; ++i) {
            o2[i] = 4.0 * o[i];
            p2[i] = 4.0 * p[i];
        }
        const auto scaled = standardized_residuals(p2, o2);
        for (std::size_t i = 0; i < 12; ++i)
            CHECK(scaled[i] == doctest::Approx(base[i]).epsilon(1e-12));
    }
    const std::vector<double> constant = {3, 3};
    const std::vector<double> p = {1, 2};
    CHECK_THROWS_AS(standardized_residuals(p, constant), ConstantObservations);
}
