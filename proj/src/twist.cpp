#include "kamlab/twist.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "kamlab/errors.hpp"

namespace kamlab::twist {

namespace {
constexpr double TWO_PI = 2.0 * std::numbers::pi;

double reduce01(double x) { return x - std::floor(x); }
long double reduce01l(long double x) { return x - std::floor(static_cast<double>(x)); }

long double flat_exp_l(long double x, const gevrey::Params& g) {
    if (x <= 0.0L) return 0.0L;
    long double p = 1.0L / (static_cast<long double>(g.alpha) - 1.0L);
    return expl(-static_cast<long double>(g.lambda) * 1.4142135623730950488L * powl(x, -p));
}

long double flat_exp_d1_l(long double x, const gevrey::Params& g) {
    if (x <= 0.0L) return 0.0L;
    long double p = 1.0L / (static_cast<long double>(g.alpha) - 1.0L);
    return static_cast<long double>(g.lambda) * 1.4142135623730950488L * p * powl(x, -p - 1.0L) *
           flat_exp_l(x, g);
}

long double bump_xi_d1_l(long double x, const gevrey::BumpSpec& s) {
    long double t = reduce01l(x - (static_cast<long double>(s.tau) - 0.5L));
    long double D = s.Delta;
    long double a = D / 8.0L - 0.5L + t;
    long double b = D / 8.0L + 0.5L - t;
    if (a <= 0.0L || b <= 0.0L) return 0.0L;
    return D * D * (flat_exp_d1_l(a, s.g) * flat_exp_l(b, s.g) -
                    flat_exp_l(a, s.g) * flat_exp_d1_l(b, s.g));
}

// dV in long double, for the finite-difference Jacobian oracle.
long double dV_l(const Family& f, long double x) {
    const long double twopi = 2.0L * 3.14159265358979323846264338327950288L;
    switch (f.kind) {
        case Family::Kind::integrable:
            return 0.0L;
        case Family::Kind::hyperbolic:
            return static_cast<long double>(f.delta) * twopi * sinl(twopi * reduce01l(x));
        case Family::Kind::hyperbolic_bump:
            return static_cast<long double>(f.delta) * twopi * sinl(twopi * reduce01l(x)) +
                   bump_xi_d1_l(x, *f.bump);
        case Family::Kind::rescaled: {
            long double q = static_cast<long double>(f.qcover);
            long double h =
                static_cast<long double>(f.delta) / q * twopi * sinl(twopi * q * reduce01l(x));
            if (f.bump) h += bump_xi_d1_l(q * x, *f.bump) / q;
            return h;
        }
    }
    return 0.0L;
}
}  // namespace

Family Family::integrable() { return Family{}; }

Family Family::hyperbolic(double delta) {
    Family f;
    f.kind = Kind::hyperbolic;
    f.delta = delta;
    return f;
}

Family Family::hyperbolic_bump(double delta, gevrey::BumpSpec spec) {
    Family f;
    f.kind = Kind::hyperbolic_bump;
    f.delta = delta;
    f.bump = std::move(spec);
    return f;
}

Family Family::rescaled(double delta_q, long q, std::optional<gevrey::BumpSpec> spec) {
    if (q < 1) throw Error("cover degree must be >= 1");
    Family f;
    f.kind = Kind::rescaled;
    f.delta = delta_q;
    f.qcover = q;
    f.bump = std::move(spec);
    return f;
}

double Family::V(double x) const {
    switch (kind) {
        case Kind::integrable:
            return 0.0;
        case Kind::hyperbolic:
            return delta * (1.0 - std::cos(TWO_PI * reduce01(x)));
        case Kind::hyperbolic_bump:
            return delta * (1.0 - std::cos(TWO_PI * reduce01(x))) + gevrey::bump_xi(x, *bump);
        case Kind::rescaled: {
            double q = static_cast<double>(qcover);
            double v = delta / (q * q) * (1.0 - std::cos(TWO_PI * q * reduce01(x)));
            if (bump) v += gevrey::bump_xi(q * x, *bump) / (q * q);
            return v;
        }
    }
    return 0.0;
}

double Family::dV(double x) const {
    switch (kind) {
        case Kind::integrable:
            return 0.0;
        case Kind::hyperbolic:
            return delta * TWO_PI * std::sin(TWO_PI * reduce01(x));
        case Kind::hyperbolic_bump:
            return delta * TWO_PI * std::sin(TWO_PI * reduce01(x)) + gevrey::bump_xi_d1(x, *bump);
        case Kind::rescaled: {
            double q = static_cast<double>(qcover);
            double v = delta / q * TWO_PI * std::sin(TWO_PI * q * reduce01(x));
            if (bump) v += gevrey::bump_xi_d1(q * x, *bump) / q;
            return v;
        }
    }
    return 0.0;
}

double Family::d2V(double x) const {
    switch (kind) {
        case Kind::integrable:
            return 0.0;
        case Kind::hyperbolic:
            return delta * TWO_PI * TWO_PI * std::cos(TWO_PI * reduce01(x));
        case Kind::hyperbolic_bump:
            return delta * TWO_PI * TWO_PI * std::cos(TWO_PI * reduce01(x)) +
                   gevrey::bump_xi_d2(x, *bump);
        case Kind::rescaled: {
            double q = static_cast<double>(qcover);
            double v = delta * TWO_PI * TWO_PI * std::cos(TWO_PI * q * reduce01(x));
            if (bump) v += gevrey::bump_xi_d2(q * x, *bump);
            return v;
        }
    }
    return 0.0;
}

double Family::h(double x, double x1) const {
    double d = x - x1;
    return 0.5 * d * d + V(x1);
}

std::array<double, 2> Family::grad_h(double x, double x1) const {
    return {x - x1, x1 - x + dV(x1)};
}

Point map_apply(const Family& f, Point p) {
    double x1 = p.x + p.y;
    return Point{x1, p.y + f.dV(x1)};
}

std::vector<Point> orbit(const Family& f, Point p, int n) {
    if (n < 0) throw Error("orbit length must be >= 0");
    std::vector<Point> out;
    out.reserve(n + 1);
    out.push_back(p);
    for (int i = 0; i < n; ++i) out.push_back(map_apply(f, out.back()));
    return out;
}

SymplecticReport check_exact_symplectic(const Family& f, int samples, unsigned long seed,
                                        double tol,
                                        double (*dV_override)(const Family&, double)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> uy(-1.0, 1.0);

    auto dv = [&](double x) { return dV_override ? dV_override(f, x) : f.dV(x); };
    auto dvl = [&](long double x) -> long double {
        return dV_override ? static_cast<long double>(dV_override(f, static_cast<double>(x)))
                           : dV_l(f, x);
    };

    SymplecticReport rep;
    for (int i = 0; i < samples; ++i) {
        Point p{ux(rng), uy(rng)};
        double x1 = p.x + p.y;
        double y1 = p.y + dv(x1);
        auto g = f.grad_h(p.x, x1);
        double r1 = std::fabs(p.y + g[0]);
        double r2 = std::fabs(y1 - g[1]);

        // area preservation, Jacobian by long-double central differences of
        // the actual update rule
        const long double h = 1e-7L;
        auto fx = [&](long double x, long double y) {
            long double xx = x + y;
            return std::array<long double, 2>{xx, y + dvl(xx)};
        };
        auto jx = fx(p.x + h, p.y), jxm = fx(p.x - h, p.y);
        auto jy = fx(p.x, p.y + h), jym = fx(p.x, p.y - h);
        long double a11 = (jx[0] - jxm[0]) / (2 * h), a12 = (jy[0] - jym[0]) / (2 * h);
        long double a21 = (jx[1] - jxm[1]) / (2 * h), a22 = (jy[1] - jym[1]) / (2 * h);
        double det_err = std::fabs(static_cast<double>(a11 * a22 - a12 * a21 - 1.0L));

        rep.max_gen_res1 = std::max(rep.max_gen_res1, r1);
        rep.max_gen_res2 = std::max(rep.max_gen_res2, r2);
        rep.max_det_err = std::max(rep.max_det_err, det_err);
        if ((r1 > tol || r2 > tol || det_err > tol) && rep.pass) {
            rep.pass = false;
            rep.witness = p;
        }
    }
    return rep;
}

}  // namespace kamlab::twist
