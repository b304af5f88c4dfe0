#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kamlab/twist.hpp"

namespace kamlab::aubry {

struct SolveOpts {
    double tol_descent = 1e-6;
    double tol_newton = 1e-13;
    int max_descent = 5000;
    int max_newton = 80;
};

/// Finite orbit segment on the cover. Periodic configurations store one
/// period x_0..x_{q-1} with x_{i+q} = x_i + p implied; heteroclinic ones store
/// the interior points with virtual tails clamped to 0 on the left and 1 on
/// the right.
struct Configuration {
    enum class Boundary { periodic, heteroclinic };
    Boundary boundary = Boundary::heteroclinic;
    long p = 0, q = 1;
    std::vector<double> x;
    twist::Family family;
    std::optional<std::pair<int, double>> pin;

    int iterations = 0;
    int projections = 0;
    double residual = 0;
    bool newton_fallback = false;
};

/// Action of the segment. Heteroclinic actions are renormalized against the
/// fixed points (h(0,0) = h(1,1) = 0 for these families) and include the
/// junction terms h(0, x_0) and h(x_{N-1}, 1).
double action(const Configuration& c);

/// max_i |d1 h(x_i, x_{i+1}) + d2 h(x_{i-1}, x_i)| over interior indices.
double stationarity_residual(const Configuration& c);

Configuration minimize_periodic(const twist::Family& f, long p, long q,
                                const std::vector<double>& init, SolveOpts opts = {});

/// Monotone minimizer connecting the fixed points 0 and 1 (rotation symbol
/// 0+). Optionally pins one interior point. Throws Error("insufficient span")
/// when N is too short for the family's bump/hyperbolic width.
Configuration minimize_heteroclinic(const twist::Family& f, int N, SolveOpts opts = {},
                                    std::optional<std::pair<int, double>> pin = {});

struct RotationSymbol {
    bool zero_plus = true;
    long p = 0, q = 1;
    static RotationSymbol plus_zero() { return RotationSymbol{}; }
    static RotationSymbol rational(long p, long q) { return RotationSymbol{false, p, q}; }
    std::string str() const {
        return zero_plus ? "0+" : (std::to_string(p) + "/" + std::to_string(q));
    }
};

struct BarrierResult {
    std::string symbol;
    double xi = 0;
    double value = 0;
    double constrained_action = 0;
    double free_action = 0;
    int iterations = 0;
    double residual = 0;
    int span = 0;  // N used
};

/// Excess minimal action of configurations pinned at xi. N = 0 picks the
/// default span for the family.
BarrierResult peierls_barrier(const twist::Family& f, const RotationSymbol& symbol, double xi,
                              int N = 0, SolveOpts opts = {});

/// ceil(40/Delta) for bump/hyperbolic families, 4096 for the integrable one.
int default_span(const twist::Family& f);

/// Number of sign alternations of a-b (piecewise-linear crossing count).
int crossings(const std::vector<double>& a, const std::vector<double>& b);

struct GapCheck {
    bool exchange_ok = true;  // x_{i+1} - x_{i-1} >= 2 sqrt(u(x_i)) on [1/4, 3/4]
    bool step_ok = true;      // x_{i+1} - x_i >= Delta/2 on [1/4, 3/4]
    double exchange_margin = 0;
    double step_margin = 0;
};

/// Step-gap bounds on a heteroclinic minimizer of the hyperbolic family.
GapCheck gap_checks(const Configuration& c, double slack = 1e-10);

}  // namespace kamlab::aubry
