#include "kamlab/lindstedt.hpp"

#include <algorithm>
#include <cmath>

#include "kamlab/errors.hpp"

namespace kamlab::lindstedt {

namespace {
constexpr long double TWO_PI_L = 6.283185307179586476925286766559L;

long double ld_of(const Real& r) { return mpfr_get_ld(r.get(), MPFR_RNDN); }
}  // namespace

DivisorOracle::DivisorOracle(cf::RotationValue omega) : omega_(std::move(omega)) {
    Real m(omega_.prec);
    mpfr_add(m.get(), omega_.value.lo().get(), omega_.value.hi().get(), MPFR_RNDN);
    mpfr_div_ui(m.get(), m.get(), 2, MPFR_RNDN);
    omega_mid_ = ld_of(m);
}

Interval DivisorOracle::gamma_interval(long nu) const {
    mpfr_prec_t pr = omega_.prec;
    Interval t = omega_.times(nu);
    // reduce around the nearest integer of the midpoint and use
    // gamma = -4 sin^2(pi d)
    Real mid(pr);
    mpfr_add(mid.get(), t.lo().get(), t.hi().get(), MPFR_RNDN);
    mpfr_div_ui(mid.get(), mid.get(), 2, MPFR_RNDN);
    Real k(pr);
    mpfr_rint(k.get(), mid.get(), MPFR_RNDN);
    Interval d = t - Interval::point(k);
    Real pi_lo(pr), pi_hi(pr);
    mpfr_const_pi(pi_lo.get(), MPFR_RNDD);
    mpfr_const_pi(pi_hi.get(), MPFR_RNDU);
    Interval pid = d * Interval(pi_lo, pi_hi);
    Interval s = pid.sin_enclosure();
    // s^2 as an interval
    Real a_lo = mul(s.lo(), s.lo(), MPFR_RNDD), a_hi = mul(s.lo(), s.lo(), MPFR_RNDU);
    Real b_lo = mul(s.hi(), s.hi(), MPFR_RNDD), b_hi = mul(s.hi(), s.hi(), MPFR_RNDU);
    Real sq_lo = a_lo.cmp(b_lo) <= 0 ? a_lo : b_lo;
    Real sq_hi = a_hi.cmp(b_hi) >= 0 ? a_hi : b_hi;
    if (s.contains_zero()) sq_lo = Real::of(0.0, pr);
    Interval sq(sq_lo, sq_hi);
    return -sq.mul_int(4);
}

long double DivisorOracle::gamma(long nu) const {
    auto it = cache_.find(nu);
    if (it != cache_.end()) return it->second;
    Interval g = gamma_interval(nu);
    if (nu != 0 && g.hi().sign() >= 0)
        throw PrecisionExhausted("divisor enclosure touches zero at nu = " + std::to_string(nu));
    long double v = (ld_of(g.lo()) + ld_of(g.hi())) / 2.0L;
    cache_.emplace(nu, v);
    return v;
}

long double DivisorOracle::dist(long nu) const {
    Interval d = omega_.dist(nu);
    return (ld_of(d.lo()) + ld_of(d.hi())) / 2.0L;
}

nlohmann::ordered_json Table::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int k = 1; k <= K; ++k)
        for (long j = -k; j <= k; ++j) {
            C c = coeff(k, j);
            if (c == C(0, 0)) continue;
            arr.push_back({{"k", k},
                           {"j", j},
                           {"re", static_cast<double>(c.real())},
                           {"im", static_cast<double>(c.imag())}});
        }
    return {{"qm", qm}, {"K", K}, {"coeff", arr}};
}

Table compute_coefficients(const DivisorOracle& oracle, long qm, int K) {
    if (K < 1) throw Error("order K must be >= 1");
    Table t;
    t.qm = qm;
    t.K = K;
    t.omega_mid = oracle.omega_mid();
    t.rows.assign(K, {});
    for (int k = 1; k <= K; ++k) t.rows[k - 1].assign(2 * k + 1, C(0, 0));

    // E_sigma = exp(i 2 pi sigma qm u) as a Fourier-Taylor series; order n has
    // modes |j| <= n. E[s][n][j+n].
    std::vector<std::vector<std::vector<C>>> E(2);
    for (int s = 0; s < 2; ++s) E[s].push_back({C(1, 0)});  // order 0: just mode 0

    auto emode = [&](int s, int n, long j) -> C {
        if (j < -n || j > n) return C(0, 0);
        return E[s][n][j + n];
    };

    for (int k = 1; k <= K; ++k) {
        // coefficient of eps^{k-1} at mode j of sum_s (-i s/2) e^{i 2 pi s qm th} E_s
        for (long j = -k; j <= k; ++j) {
            if (j == 0) continue;
            C rhs(0, 0);
            for (int si = 0; si < 2; ++si) {
                long double sgn = si == 0 ? 1.0L : -1.0L;
                rhs += C(0, -0.5L) * sgn * emode(si, k - 1, j - static_cast<long>(sgn));
            }
            if (rhs == C(0, 0)) continue;
            long double g = oracle.gamma(j * qm);
            t.rows[k - 1][j + k] = rhs / g;
        }
        if (k == K) break;
        // extend E by one order: n E^{(n)} = (i 2 pi s qm) sum_r r u^{(r)} E^{(n-r)}
        for (int si = 0; si < 2; ++si) {
            long double sgn = si == 0 ? 1.0L : -1.0L;
            C pref = C(0, 1) * (TWO_PI_L * sgn * static_cast<long double>(qm));
            int n = k;
            std::vector<C> row(2 * n + 1, C(0, 0));
            for (int r = 1; r <= n; ++r) {
                for (long j1 = -r; j1 <= r; ++j1) {
                    C u = t.coeff(r, j1);
                    if (u == C(0, 0)) continue;
                    for (long j2 = -(n - r); j2 <= n - r; ++j2) {
                        C e = emode(si, n - r, j2);
                        if (e == C(0, 0)) continue;
                        row[j1 + j2 + n] += static_cast<long double>(r) * u * e;
                    }
                }
            }
            for (auto& c : row) c *= pref / static_cast<long double>(n);
            E[si].push_back(std::move(row));
        }
    }
    return t;
}

long double order_eval(const Table& t, int k, long double theta) {
    C s(0, 0);
    long double base = TWO_PI_L * static_cast<long double>(t.qm) * theta;
    for (long j = -k; j <= k; ++j) {
        C c = t.coeff(k, j);
        if (c == C(0, 0)) continue;
        s += c * std::polar(1.0L, base * static_cast<long double>(j));
    }
    return s.real();
}

long double evaluate_u(const Table& t, long double theta, long double eps, int trunc) {
    int K = (trunc <= 0 || trunc > t.K) ? t.K : trunc;
    long double u = 0.0L;
    long double ek = 1.0L;
    for (int k = 1; k <= K; ++k) {
        ek *= eps;
        u += ek * order_eval(t, k, theta);
    }
    return u;
}

long double evaluate_v(const Table& t, long double theta, long double eps, int trunc) {
    long double w = t.omega_mid;
    long double u0 = evaluate_u(t, theta, eps, trunc);
    long double um = evaluate_u(t, theta - w, eps, trunc);
    return u0 - um + eps * sinl(TWO_PI_L * static_cast<long double>(t.qm) * (theta + u0));
}

long double residual(const Table& t, long double eps, int grid, int trunc) {
    long double w = t.omega_mid;
    long double worst = 0.0L;
    for (int i = 0; i < grid; ++i) {
        long double theta = static_cast<long double>(i) / grid;
        long double u0 = evaluate_u(t, theta, eps, trunc);
        long double up = evaluate_u(t, theta + w, eps, trunc);
        long double um = evaluate_u(t, theta - w, eps, trunc);
        long double lhs = up - 2.0L * u0 + um;
        long double rhs = eps * sinl(TWO_PI_L * static_cast<long double>(t.qm) * (theta + u0));
        worst = std::max(worst, fabsl(lhs - rhs));
    }
    return worst;
}

double scaling_slope(const Table& t, int trunc, double eps_lo, double eps_hi, int npts) {
    // least-squares slope of ln r against ln eps
    std::vector<double> xs, ys;
    for (int i = 0; i < npts; ++i) {
        double f = static_cast<double>(i) / (npts - 1);
        double eps = eps_lo * std::pow(eps_hi / eps_lo, f);
        long double r = residual(t, eps, 128, trunc);
        if (r <= 0) continue;
        xs.push_back(std::log(eps));
        ys.push_back(static_cast<double>(logl(r)));
    }
    if (xs.size() < 2) throw Error("not enough residual points for a slope");
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

RadiusReport radius_estimate(const Table& t, int grid) {
    if (t.K < 8) throw Error("radius estimate needs K >= 8");
    RadiusReport rep;
    for (int k = 1; k <= t.K; ++k) {
        long double sup = 0.0L;
        for (int i = 0; i < grid; ++i) {
            long double theta = static_cast<long double>(i) / grid;
            sup = std::max(sup, fabsl(order_eval(t, k, theta)));
        }
        rep.sup_uk.push_back(static_cast<double>(sup));
        if (sup <= 0.0L) {
            rep.skipped.push_back(k);
            rep.r_k.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            rep.r_k.push_back(static_cast<double>(powl(sup, -1.0L / k)));
        }
    }
    std::vector<double> valid;
    int tail = (t.K + 2) / 3;
    for (int k = t.K - tail + 1; k <= t.K; ++k) {
        double v = rep.r_k[k - 1];
        if (std::isfinite(v)) valid.push_back(v);
    }
    if (valid.empty()) {
        rep.infinite = true;
        return rep;
    }
    std::sort(valid.begin(), valid.end());
    rep.rho = valid[valid.size() / 2];
    // spread of the last 5 valid values
    std::vector<double> last5;
    for (int k = t.K; k >= 1 && last5.size() < 5; --k)
        if (std::isfinite(rep.r_k[k - 1])) last5.push_back(rep.r_k[k - 1]);
    if (last5.size() == 5) {
        double mn = *std::min_element(last5.begin(), last5.end());
        double mx = *std::max_element(last5.begin(), last5.end());
        rep.stable = (mx - mn) < 0.1 * rep.rho;
    }
    return rep;
}

BoundReport bound_report(const Table& t, const cf::Schedule& s, int m, double margin) {
    BoundReport rep;
    int N = static_cast<int>(s.levels()) - m - 1;
    if (N < 0) throw Error("schedule too short for bound report");
    N = std::min(N, 40);
    rep.brjuno1 = cf::brjuno_sum(s, 1.0, m, N).sum.mid();
    rep.bound_rate = 2.0 * std::log(2.0 * static_cast<double>(t.qm)) +
                     4.0 * static_cast<double>(t.qm) * rep.brjuno1;
    RadiusReport rr = radius_estimate(t);
    for (int k = 1; k <= t.K; ++k)
        rep.log_sup.push_back(rr.sup_uk[k - 1] > 0 ? std::log(rr.sup_uk[k - 1])
                                                   : -std::numeric_limits<double>::infinity());
    double fitted = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= t.K / 2; ++k) {
        if (!std::isfinite(rep.log_sup[k - 1])) continue;
        fitted = std::max(fitted, rep.log_sup[k - 1] / k - rep.bound_rate);
    }
    rep.fitted_logC = fitted;
    double measured = -std::numeric_limits<double>::infinity();
    for (int k = t.K / 2 + 1; k <= t.K; ++k) {
        if (!std::isfinite(rep.log_sup[k - 1])) continue;
        measured = std::max(measured, rep.log_sup[k - 1] / k);
    }
    rep.measured_rate = measured;
    rep.gap = rep.bound_rate + rep.fitted_logC + margin - rep.measured_rate;
    rep.pass = std::isfinite(rep.fitted_logC) && rep.gap >= 0;
    return rep;
}

InvarianceReport circle_invariance(const Table& t, long double eps, int grid) {
    InvarianceReport rep;
    long double w = t.omega_mid;
    long double qm = static_cast<long double>(t.qm);
    rep.series_residual = residual(t, eps, grid);
    for (int i = 0; i < grid; ++i) {
        long double theta = static_cast<long double>(i) / grid;
        long double x = theta + evaluate_u(t, theta, eps);
        long double y = w + evaluate_v(t, theta, eps);
        long double x1 = x + y;
        long double y1 = y + eps * sinl(TWO_PI_L * qm * (x + y));
        long double xe = (theta + w) + evaluate_u(t, theta + w, eps);
        long double ye = w + evaluate_v(t, theta + w, eps);
        rep.max_dev_x = std::max(rep.max_dev_x, fabsl(x1 - xe));
        rep.max_dev_y = std::max(rep.max_dev_y, fabsl(y1 - ye));
    }
    return rep;
}

}  // namespace kamlab::lindstedt
