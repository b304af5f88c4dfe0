#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kamlab/twist.hpp"

using namespace kamlab;
using namespace kamlab::twist;

namespace {
gevrey::BumpSpec toy_bump(double Delta = 0.2, double tau = 0.5) {
    return gevrey::BumpSpec::toy(Delta, tau, gevrey::Params::summable_params(6.0, 0.1));
}
}  // namespace

TEST_CASE("generating function values") {
    Family in = Family::integrable();
    CHECK(in.h(0.3, 0.5) == doctest::Approx(0.02).epsilon(1e-14));
    Family hyp = Family::hyperbolic(0.3);
    CHECK(hyp.h(0.0, 0.0) == 0.0);
    CHECK(hyp.V(0.25) == doctest::Approx(0.3));
    Family bump = Family::hyperbolic_bump(0.04, toy_bump());
    double tau = 0.5;
    double want = 0.5 * (0.2 - tau) * (0.2 - tau) +
                  0.04 * (1 - std::cos(2 * std::numbers::pi * tau)) +
                  gevrey::bump_xi(tau, *bump.bump);
    CHECK(bump.h(0.2, tau) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("gradients match a central-difference oracle") {
    Family fams[] = {Family::integrable(), Family::hyperbolic(0.3),
                     Family::hyperbolic_bump(0.04, toy_bump()), Family::rescaled(0.1, 3)};
    for (const Family& f : fams) {
        for (double x : {0.13, 0.48, 0.52, 0.9}) {
            for (double x1 : {0.07, 0.5, 0.51, 0.73}) {
                auto g = f.grad_h(x, x1);
                double h = 1e-6;
                double d1 = (f.h(x + h, x1) - f.h(x - h, x1)) / (2 * h);
                double d2 = (f.h(x, x1 + h) - f.h(x, x1 - h)) / (2 * h);
                CHECK(g[0] == doctest::Approx(d1).epsilon(1e-8));
                CHECK(g[1] == doctest::Approx(d2).epsilon(1e-8).scale(1.0));
            }
        }
        // twist: dx'/dy = 1 exactly for this family
        Point p{0.2, 0.4};
        Point a = map_apply(f, p), b = map_apply(f, {p.x, p.y + 0.125});
        CHECK(b.x - a.x == doctest::Approx(0.125).epsilon(1e-15));
    }
}

TEST_CASE("orbit of the integrable map is a rigid rotation") {
    Family f = Family::integrable();
    double om = 0.381966;
    auto orb = orbit(f, {0.0, om}, 3);
    for (int k = 0; k <= 3; ++k) {
        CHECK(orb[k].x == doctest::Approx(k * om).epsilon(1e-15));
        CHECK(orb[k].y == om);
    }
}

TEST_CASE("hyperbolic fixed point stays put") {
    Family f = Family::hyperbolic(0.25);
    auto orb = orbit(f, {0.0, 0.0}, 10);
    for (auto& p : orb) {
        CHECK(p.x == 0.0);
        CHECK(p.y == 0.0);
    }
}

TEST_CASE("standard-map orbit matches an independent iteration oracle") {
    Family f = Family::hyperbolic(0.1);
    double x = 0.123, y = 0.456;
    auto orb = orbit(f, {x, y}, 1000);
    // independent re-implementation
    double ox = x, oy = y;
    for (int k = 1; k <= 1000; ++k) {
        double nx = ox + oy;
        double arg = nx - std::floor(nx);
        oy = oy + 0.1 * 2.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * arg);
        ox = nx;
    }
    CHECK(orb[1000].x == doctest::Approx(ox).epsilon(1e-12));
    CHECK(orb[1000].y == doctest::Approx(oy).epsilon(1e-12));
}

TEST_CASE("lift property is exact") {
    Family fams[] = {Family::hyperbolic(0.3), Family::hyperbolic_bump(0.04, toy_bump()),
                     Family::rescaled(0.2, 2)};
    for (const Family& f : fams) {
        for (double x : {0.11, 0.5, 0.999}) {
            Point a = map_apply(f, {x, 0.37});
            Point b = map_apply(f, {x + 1.0, 0.37});
            // exact up to one rounding of x + y on the cover
            CHECK(std::fabs(b.x - (a.x + 1.0)) <= 4e-16 * std::fabs(b.x));
            CHECK(std::fabs(b.y - a.y) <= 1e-13);
        }
    }
}

TEST_CASE("exact symplectic checks") {
    SymplecticReport in = check_exact_symplectic(Family::integrable(), 1000, 42);
    CHECK(in.pass);
    CHECK(in.max_gen_res1 <= 1e-15);  // one rounding of x + y

    SymplecticReport hy = check_exact_symplectic(Family::hyperbolic(0.3), 10000, 42);
    CHECK(hy.pass);
    CHECK(hy.max_det_err <= 1e-10);

    SymplecticReport bu =
        check_exact_symplectic(Family::hyperbolic_bump(0.04, toy_bump()), 2000, 42);
    CHECK(bu.pass);

    // fault injection: V' shifted by 1e-6 must be caught with a witness
    auto corrupted = +[](const Family& f, double x) { return f.dV(x) + 1e-6; };
    SymplecticReport bad = check_exact_symplectic(Family::hyperbolic(0.3), 1000, 42, 1e-10,
                                                  corrupted);
    CHECK(!bad.pass);
    CHECK(bad.witness.has_value());
    CHECK(bad.max_gen_res2 >= 1e-6 * 0.99);
}

TEST_CASE("rescaled family is the finite cover of the base family") {
    // Phi(x, y) = (qx, qy) conjugates the rescaled map to the base map
    for (long q : {2L, 3L, 5L}) {
        Family base = Family::hyperbolic(0.15);
        Family cover = Family::rescaled(0.15, q);
        for (double x : {0.05, 0.21, 0.73}) {
            for (double y : {-0.3, 0.04, 0.8}) {
                Point up = map_apply(base, {q * x, q * y});
                Point dn = map_apply(cover, {x, y});
                CHECK(up.x == doctest::Approx(q * dn.x).epsilon(1e-12));
                CHECK(up.y == doctest::Approx(q * dn.y).epsilon(1e-12));
            }
        }
    }
    // with the bump attached, matching the rescaled generating function
    gevrey::BumpSpec spec = toy_bump();
    Family base = Family::hyperbolic_bump(0.15, spec);
    Family cover = Family::rescaled(0.15, 2, spec);
    for (double x : {0.1, 0.26, 0.6}) {
        Point up = map_apply(base, {2 * x, 2 * 0.1});
        Point dn = map_apply(cover, {x, 0.1});
        CHECK(up.x == doctest::Approx(2 * dn.x).epsilon(1e-12));
        CHECK(up.y == doctest::Approx(2 * dn.y).epsilon(1e-12));
    }
}
