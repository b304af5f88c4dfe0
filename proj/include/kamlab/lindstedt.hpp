#pragma once

#include <complex>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "kamlab/cf.hpp"

namespace kamlab::lindstedt {

using C = std::complex<long double>;

/// Small divisors gamma(nu) = 2(cos(2 pi omega nu) - 1), interval-checked:
/// an enclosure touching 0 for nu != 0 aborts instead of regularizing.
class DivisorOracle {
public:
    explicit DivisorOracle(cf::RotationValue omega);
    long double gamma(long nu) const;
    Interval gamma_interval(long nu) const;
    long double dist(long nu) const;  // midpoint of ||omega nu||
    long double omega_mid() const { return omega_mid_; }
    const cf::RotationValue& omega() const { return omega_; }

private:
    cf::RotationValue omega_;
    long double omega_mid_;
    mutable std::unordered_map<long, long double> cache_;
};

/// Fourier-Taylor coefficients u^{(k)}_nu with nu = j * qm. Zero mode absent;
/// coefficients are purely imaginary with c(k,-j) = -c(k,j), and c(k,j) = 0
/// unless |j| <= k and j = k (mod 2).
struct Table {
    long qm = 1;
    int K = 0;
    std::vector<std::vector<C>> rows;  // rows[k-1][j+k] for j in [-k, k]
    long double omega_mid = 0;

    C coeff(int k, long j) const {
        if (k < 1 || k > K || j < -k || j > k) return C(0, 0);
        return rows[k - 1][j + k];
    }
    nlohmann::ordered_json to_json() const;
};

/// Order-by-order solve of the conjugacy equation
/// u(t+w) - 2u(t) + u(t-w) = eps sin(2 pi qm (t + u(t))).
Table compute_coefficients(const DivisorOracle& oracle, long qm, int K);

/// u^{(k)}(theta) for a single order.
long double order_eval(const Table& t, int k, long double theta);

/// Truncated series; trunc <= 0 means all computed orders.
long double evaluate_u(const Table& t, long double theta, long double eps, int trunc = 0);
long double evaluate_v(const Table& t, long double theta, long double eps, int trunc = 0);

/// Max over a theta grid of |u(t+w) - 2u(t) + u(t-w) - eps sin(2 pi qm(t+u))|.
long double residual(const Table& t, long double eps, int grid = 256, int trunc = 0);

/// Log-log slope of residual against eps; the truncation error of a K-term
/// series scales like eps^{K+1}.
double scaling_slope(const Table& t, int trunc, double eps_lo, double eps_hi, int npts = 9);

struct RadiusReport {
    std::vector<double> r_k;      // (sup |u^{(k)}|)^{-1/k}; NaN for skipped orders
    std::vector<double> sup_uk;
    std::vector<int> skipped;     // identically-zero orders
    double rho = 0;               // median of the last ceil(K/3) valid values
    bool stable = false;          // last-5 spread < 10% of median
    bool infinite = false;        // all orders vanished
};
RadiusReport radius_estimate(const Table& t, int grid = 2048);

struct BoundReport {
    double brjuno1 = 0;        // sum ln q_{n+m+1} / q_{n+m}
    double bound_rate = 0;     // 2 ln(2 qm) + 4 qm * brjuno1
    double fitted_logC = 0;    // from the first half of the orders
    double measured_rate = 0;  // max of ln(sup|u^{(k)}|)/k over the last half
    double gap = 0;            // bound_rate + fitted_logC + margin - measured_rate
    bool pass = false;
    std::vector<double> log_sup;
};

/// Compares coefficient growth against the multiscale bound
/// sup|u^{(k)}| <= C^k (2 qm)^{2k} exp(4 qm k sum_n ln q_{n+m+1}/q_{n+m}).
BoundReport bound_report(const Table& t, const cf::Schedule& s, int m, double margin = 0.5);

struct InvarianceReport {
    long double max_dev_x = 0;
    long double max_dev_y = 0;
    long double series_residual = 0;
};

/// Pushes the parametrized circle through the map and compares with the
/// rotated parametrization.
InvarianceReport circle_invariance(const Table& t, long double eps, int grid = 256);

}  // namespace kamlab::lindstedt
