#include "kamlab/gevrey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kamlab::gevrey {

double Params::sigma() const {
    double pp = p();
    return (std::numbers::pi / 4.0) * std::min(1.0, 1.0 / pp);
}

double Params::lambda_threshold(double alpha, double L) {
    double p = 1.0 / (alpha - 1.0);
    double sigma = (std::numbers::pi / 4.0) * std::min(1.0, 1.0 / p);
    return std::pow(2.0 * std::pow(L, alpha) / std::sin(sigma), p) / p;
}

Params Params::summable_params(double alpha, double L) {
    Params g;
    g.alpha = alpha;
    g.L = L;
    g.lambda = lambda_threshold(alpha, L) + 1.0;
    return g;
}

double flat_exp(double x, const Params& g) {
    if (x <= 0.0) return 0.0;
    double e = -g.lambda * std::numbers::sqrt2 * std::pow(x, -g.p());
    return std::exp(e);  // underflow clamps to exact 0
}

double flat_exp_d1(double x, const Params& g) {
    if (x <= 0.0) return 0.0;
    double p = g.p();
    return g.lambda * std::numbers::sqrt2 * p * std::pow(x, -p - 1.0) * flat_exp(x, g);
}

double flat_exp_log(double x, const Params& g) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return -g.lambda * std::numbers::sqrt2 * std::pow(x, -g.p());
}

double flat_exp_d2(double x, const Params& g) {
    if (x <= 0.0) return 0.0;
    double p = g.p();
    double c = g.lambda * std::numbers::sqrt2 * p;
    double f = flat_exp(x, g);
    return (c * std::pow(x, -p - 1.0) * c * std::pow(x, -p - 1.0) -
            c * (p + 1.0) * std::pow(x, -p - 2.0)) *
           f;
}

double cauchy_bound(int k, const Params& g) {
    if (k < 0) throw Error("derivative order must be >= 0");
    if (k == 0) return 1.0;
    return std::exp(cauchy_bound_log(k, g));
}

double cauchy_bound_log(int k, const Params& g) {
    if (k < 0) throw Error("derivative order must be >= 0");
    if (k == 0) return 0.0;
    double p = g.p();
    double kk = static_cast<double>(k);
    return kk * std::log(2.0 / std::sin(g.sigma())) +
           (kk / p) * std::log(kk / (g.lambda * p * std::numbers::e)) + std::lgamma(kk + 1.0);
}

BumpSpec BumpSpec::from_level(int m, double b, double beta, double tau, Params g) {
    BumpSpec s;
    s.m = m;
    s.delta = std::exp(-b * std::pow(static_cast<double>(m), beta));
    s.Delta = std::sqrt(s.delta);
    s.tau = tau;
    s.g = g;
    if (tau < 3.0 / 8.0 || tau > 5.0 / 8.0) throw Error("tau must lie in [3/8, 5/8]");
    return s;
}

BumpSpec BumpSpec::toy(double Delta, double tau, Params g) {
    BumpSpec s;
    s.m = 0;
    s.Delta = Delta;
    s.delta = Delta * Delta;
    s.tau = tau;
    s.g = g;
    if (tau < 3.0 / 8.0 || tau > 5.0 / 8.0) throw Error("tau must lie in [3/8, 5/8]");
    return s;
}

nlohmann::ordered_json BumpSpec::to_json() const {
    return {{"m", m},   {"delta", delta},     {"Delta", Delta},
            {"tau", tau}, {"alpha", g.alpha}, {"L", g.L},
            {"lambda", g.lambda}};
}

namespace {
double reduce01(double x) { return x - std::floor(x); }
}  // namespace

double bump_v(double x, const BumpSpec& spec) {
    double t = reduce01(x);
    double a = spec.Delta / 8.0 - 0.5 + t;
    double b = spec.Delta / 8.0 + 0.5 - t;
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return spec.Delta * spec.Delta * flat_exp(a, spec.g) * flat_exp(b, spec.g);
}

double bump_xi(double x, const BumpSpec& spec) { return bump_v(x - (spec.tau - 0.5), spec); }

double bump_xi_d1(double x, const BumpSpec& spec) {
    double t = reduce01(x - (spec.tau - 0.5));
    double a = spec.Delta / 8.0 - 0.5 + t;
    double b = spec.Delta / 8.0 + 0.5 - t;
    if (a <= 0.0 || b <= 0.0) return 0.0;
    double d2 = spec.Delta * spec.Delta;
    return d2 * (flat_exp_d1(a, spec.g) * flat_exp(b, spec.g) -
                 flat_exp(a, spec.g) * flat_exp_d1(b, spec.g));
}

double bump_xi_d2(double x, const BumpSpec& spec) {
    double t = reduce01(x - (spec.tau - 0.5));
    double a = spec.Delta / 8.0 - 0.5 + t;
    double b = spec.Delta / 8.0 + 0.5 - t;
    if (a <= 0.0 || b <= 0.0) return 0.0;
    double d2 = spec.Delta * spec.Delta;
    return d2 * (flat_exp_d2(a, spec.g) * flat_exp(b, spec.g) -
                 2.0 * flat_exp_d1(a, spec.g) * flat_exp_d1(b, spec.g) +
                 flat_exp(a, spec.g) * flat_exp_d2(b, spec.g));
}

double bump_max_value(const BumpSpec& spec) {
    double p = spec.g.p();
    double expo = -spec.g.lambda * std::pow(2.0, 3.0 * p + 1.5) * std::pow(spec.Delta, -p);
    return spec.Delta * spec.Delta * std::exp(expo);
}

double bump_xi_log(double x, const BumpSpec& spec) {
    double t = reduce01(x - (spec.tau - 0.5));
    double a = spec.Delta / 8.0 - 0.5 + t;
    double b = spec.Delta / 8.0 + 0.5 - t;
    if (a <= 0.0 || b <= 0.0) return -std::numeric_limits<double>::infinity();
    return 2.0 * std::log(spec.Delta) + flat_exp_log(a, spec.g) + flat_exp_log(b, spec.g);
}

double bump_max_log(const BumpSpec& spec) {
    double p = spec.g.p();
    return 2.0 * std::log(spec.Delta) -
           spec.g.lambda * std::pow(2.0, 3.0 * p + 1.5) * std::pow(spec.Delta, -p);
}

double norm_truncated(std::span<const double> bounds, double alpha, double L, int K,
                      bool* converging) {
    if (K < 0) throw Error("truncation order must be >= 0");
    if (static_cast<size_t>(K + 1) > bounds.size()) throw Error("not enough derivative bounds");
    double total = 0.0;
    std::vector<double> terms;
    for (int k = 0; k <= K; ++k) {
        double lt = k * alpha * std::log(L) - alpha * std::lgamma(k + 1.0);
        double term = bounds[k] * std::exp(lt);
        total += term;
        terms.push_back(term);
    }
    if (converging) {
        *converging = false;
        if (terms.size() >= 4) {
            bool ok = true;
            for (size_t i = terms.size() - 3; i < terms.size(); ++i) {
                double prev = terms[i - 1];
                if (prev <= 0.0 || terms[i] / prev >= 0.5) ok = false;
            }
            *converging = ok;
        }
    }
    return total;
}

std::vector<double> bump_derivative_bounds(const BumpSpec& spec, int K) {
    // |d^k (f(a(x)) f(b(x)))| <= sum_j C(k,j) B_j B_{k-j} with |a'| = |b'| = 1.
    std::vector<double> B(K + 1);
    for (int k = 0; k <= K; ++k) B[k] = cauchy_bound(k, spec.g);
    std::vector<double> out(K + 1);
    for (int k = 0; k <= K; ++k) {
        double s = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
            s += binom * B[j] * B[k - j];
            binom = binom * (k - j) / (j + 1.0);
        }
        out[k] = spec.Delta * spec.Delta * s;
    }
    return out;
}

}  // namespace kamlab::gevrey
