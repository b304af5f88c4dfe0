#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "kamlab/errors.hpp"

namespace kamlab::gevrey {

/// Parameters of the flat exponential f_lambda(x) = exp(-lambda sqrt(2) x^{-p})
/// for x > 0 (zero for x <= 0), with p = 1/(alpha-1).
struct Params {
    double alpha = 2.0;
    double L = 0.5;
    double lambda = 1.0;

    double p() const { return 1.0 / (alpha - 1.0); }
    double sigma() const;
    bool summable() const { return lambda > lambda_threshold(alpha, L); }

    /// Threshold (2 L^alpha / sin sigma)^p / p above which the derivative
    /// series with weight L is summable.
    static double lambda_threshold(double alpha, double L);
    /// lambda = threshold + 1.
    static Params summable_params(double alpha, double L);
};

/// f_lambda. Values below the double underflow threshold clamp to exact 0.
double flat_exp(double x, const Params& g);
double flat_exp_d1(double x, const Params& g);
double flat_exp_d2(double x, const Params& g);
/// ln f_lambda; finite wherever f_lambda > 0 mathematically, so paper-scale
/// parameters that underflow the direct evaluation stay representable.
double flat_exp_log(double x, const Params& g);

/// Uniform bound on |f_lambda^(k)| over x > 0:
/// (2/sin sigma)^k (k/(lambda p e))^{k/p} k!, and 1 for k = 0.
double cauchy_bound(int k, const Params& g);
double cauchy_bound_log(int k, const Params& g);

/// Bump description. The bump is supported on [tau - Delta/8, tau + Delta/8]
/// (mod 1), symmetric about tau, with height Delta^2 * exp(..) per
/// bump_max_value.
struct BumpSpec {
    int m = 0;
    double delta = 0;  // delta_m
    double Delta = 0;  // sqrt(delta_m)
    double tau = 0.5;
    Params g;

    /// Paper-scale spec: delta = exp(-b m^beta).
    static BumpSpec from_level(int m, double b, double beta, double tau, Params g);
    /// Desk-scale spec with Delta given directly; m is back-solved for reports.
    static BumpSpec toy(double Delta, double tau, Params g);

    nlohmann::ordered_json to_json() const;
};

/// Two-sided product bump, symmetric about 1/2, 1-periodic.
double bump_v(double x, const BumpSpec& spec);
/// Shifted bump, symmetric about tau: xi(x) = v(x - (tau - 1/2)).
double bump_xi(double x, const BumpSpec& spec);
double bump_xi_d1(double x, const BumpSpec& spec);
double bump_xi_d2(double x, const BumpSpec& spec);

/// Closed form of max v = v(1/2) = Delta^2 exp(-lambda 2^{3p+3/2} Delta^{-p}).
/// (Evaluating the two-sided product at its symmetry point doubles the
/// exponent relative to a single factor; the constant here is the one the
/// product formula actually attains.)
double bump_max_value(const BumpSpec& spec);

/// Log-scale evaluation for regimes where the bump underflows doubles:
/// ln xi(x), -inf outside the support, and the closed-form ln of the maximum.
double bump_xi_log(double x, const BumpSpec& spec);
double bump_max_log(const BumpSpec& spec);

/// Truncated derivative-weighted norm sum_{k<=K} L^{k alpha} bounds[k] / (k!)^alpha.
/// Sets *converging when the last three consecutive-term ratios are < 1/2.
double norm_truncated(std::span<const double> derivative_bounds, double alpha, double L, int K,
                      bool* converging = nullptr);

/// Derivative bounds of bump_v via the Leibniz rule on the analytic Cauchy
/// bounds (not by numerical differentiation).
std::vector<double> bump_derivative_bounds(const BumpSpec& spec, int K);

}  // namespace kamlab::gevrey
