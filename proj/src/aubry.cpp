#include "kamlab/aubry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kamlab/errors.hpp"

namespace kamlab::aubry {

namespace {

// neighbours of variable i, with virtual tails for heteroclinic segments
struct Chain {
    const Configuration& c;
    double left(int i) const {
        if (i > 0) return c.x[i - 1];
        return c.boundary == Configuration::Boundary::periodic
                   ? c.x[c.x.size() - 1] - static_cast<double>(c.p)
                   : 0.0;
    }
    double right(int i) const {
        if (i + 1 < static_cast<int>(c.x.size())) return c.x[i + 1];
        return c.boundary == Configuration::Boundary::periodic
                   ? c.x[0] + static_cast<double>(c.p)
                   : 1.0;
    }
};

double grad_i(const Configuration& c, int i) {
    Chain ch{c};
    const auto& f = c.family;
    double xi = c.x[i];
    // d1 h(x_i, x_{i+1}) + d2 h(x_{i-1}, x_i)
    return (xi - ch.right(i)) + (xi - ch.left(i) + f.dV(xi));
}

// Solves the symmetric tridiagonal system (diag, sub) d = rhs in place.
// sub[i] couples rows i-1 and i. Returns false on a non-positive pivot.
bool solve_tridiag(std::vector<double> diag, std::vector<double> sub, std::vector<double>& rhs) {
    size_t n = diag.size();
    for (size_t i = 1; i < n; ++i) {
        if (diag[i - 1] <= 1e-14) return false;
        double w = sub[i] / diag[i - 1];
        diag[i] -= w * sub[i];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[n - 1] <= 1e-14) return false;
    rhs[n - 1] /= diag[n - 1];
    for (size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sub[i + 1] * rhs[i + 1]) / diag[i];
    return true;
}

// Monotone (isotonic) projection by pool-adjacent-violators, then clamp to
// [0,1]. Returns true if anything moved.
bool project_monotone(std::vector<double>& x) {
    size_t n = x.size();
    std::vector<double> val(x), w(n, 1.0);
    std::vector<size_t> len(n, 1);
    size_t m = 0;
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        val[m] = x[i];
        w[m] = 1.0;
        len[m] = 1;
        while (m > 0 && val[m - 1] > val[m]) {
            double tw = w[m - 1] + w[m];
            val[m - 1] = (val[m - 1] * w[m - 1] + val[m] * w[m]) / tw;
            w[m - 1] = tw;
            len[m - 1] += len[m];
            --m;
        }
        ++m;
    }
    size_t k = 0;
    for (size_t b = 0; b < m; ++b)
        for (size_t j = 0; j < len[b]; ++j) out[k++] = val[b];
    bool moved = false;
    for (size_t i = 0; i < n; ++i) {
        double v = std::clamp(out[i], 0.0, 1.0);
        if (v != x[i]) moved = true;
        x[i] = v;
    }
    return moved;
}

double config_residual(const Configuration& c) {
    double r = 0;
    for (size_t i = 0; i < c.x.size(); ++i) {
        if (c.pin && c.pin->first == static_cast<int>(i)) continue;
        r = std::max(r, std::fabs(grad_i(c, static_cast<int>(i))));
    }
    return r;
}

// Preconditioned descent sweep: solves (2 + c0) I - Laplacian against the
// gradient. With c0 >= sup V'' the preconditioner majorizes the Hessian, so
// the unit step never increases the action.
void preconditioned_step(Configuration& c, double c0) {
    size_t n = c.x.size();
    std::vector<double> diag(n, 2.0 + c0), sub(n, -1.0), rhs(n);
    sub[0] = 0.0;
    for (size_t i = 0; i < n; ++i) rhs[i] = -grad_i(c, static_cast<int>(i));
    if (c.pin) {
        int i0 = c.pin->first;
        diag[i0] = 1.0;
        rhs[i0] = 0.0;
        sub[i0] = 0.0;
        if (static_cast<size_t>(i0 + 1) < n) sub[i0 + 1] = 0.0;
    }
    solve_tridiag(diag, sub, rhs);  // always SPD
    for (size_t i = 0; i < n; ++i) c.x[i] += rhs[i];
    if (c.pin) c.x[c.pin->first] = c.pin->second;
}

// Full Newton sweep; returns false on a non-positive pivot (indefinite
// Hessian), in which case callers fall back to descent.
bool newton_step(Configuration& c, double step_cap) {
    size_t n = c.x.size();
    std::vector<double> diag(n), sub(n, -1.0), rhs(n);
    sub[0] = 0.0;
    for (size_t i = 0; i < n; ++i) {
        diag[i] = 2.0 + c.family.d2V(c.x[i]);
        rhs[i] = -grad_i(c, static_cast<int>(i));
    }
    if (c.pin) {
        int i0 = c.pin->first;
        diag[i0] = 1.0;
        rhs[i0] = 0.0;
        sub[i0] = 0.0;
        if (static_cast<size_t>(i0 + 1) < n) sub[i0 + 1] = 0.0;
    }
    if (!solve_tridiag(diag, sub, rhs)) return false;
    double mx = 0;
    for (double d : rhs) mx = std::max(mx, std::fabs(d));
    double scale = (step_cap > 0 && mx > step_cap) ? step_cap / mx : 1.0;
    for (size_t i = 0; i < n; ++i) c.x[i] += scale * rhs[i];
    if (c.pin) c.x[c.pin->first] = c.pin->second;
    return true;
}

// Dense symmetric solve for the (small) periodic problems.
bool solve_dense(std::vector<std::vector<double>> A, std::vector<double>& b) {
    size_t n = b.size();
    for (size_t k = 0; k < n; ++k) {
        size_t piv = k;
        for (size_t i = k + 1; i < n; ++i)
            if (std::fabs(A[i][k]) > std::fabs(A[piv][k])) piv = i;
        if (std::fabs(A[piv][k]) < 1e-12) return false;
        std::swap(A[piv], A[k]);
        std::swap(b[piv], b[k]);
        for (size_t i = k + 1; i < n; ++i) {
            double w = A[i][k] / A[k][k];
            for (size_t j = k; j < n; ++j) A[i][j] -= w * A[k][j];
            b[i] -= w * b[k];
        }
    }
    for (size_t i = n; i-- > 0;) {
        for (size_t j = i + 1; j < n; ++j) b[i] -= A[i][j] * b[j];
        b[i] /= A[i][i];
    }
    return true;
}

}  // namespace

double action(const Configuration& c) {
    const auto& f = c.family;
    double s = 0;
    if (c.boundary == Configuration::Boundary::periodic) {
        for (size_t i = 0; i < c.x.size(); ++i) {
            double next = (i + 1 < c.x.size()) ? c.x[i + 1] : c.x[0] + static_cast<double>(c.p);
            s += f.h(c.x[i], next);
        }
        return s;
    }
    s += f.h(0.0, c.x.empty() ? 1.0 : c.x[0]);
    for (size_t i = 0; i + 1 < c.x.size(); ++i) s += f.h(c.x[i], c.x[i + 1]);
    if (!c.x.empty()) s += f.h(c.x.back(), 1.0);
    return s;
}

double stationarity_residual(const Configuration& c) { return config_residual(c); }

Configuration minimize_periodic(const twist::Family& f, long p, long q,
                                const std::vector<double>& init, SolveOpts opts) {
    if (q < 1) throw Error("period q must be >= 1");
    if (std::gcd(std::abs(p), q) != 1 && !(p == 0 && q == 1))
        throw Error("p/q must be in lowest terms");
    Configuration c;
    c.boundary = Configuration::Boundary::periodic;
    c.p = p;
    c.q = q;
    c.family = f;
    c.x = init.empty() ? std::vector<double>(q, 0.0) : init;
    if (static_cast<long>(c.x.size()) != q) throw Error("init length must equal q");

    size_t n = c.x.size();
    // damped descent with a preconditioner built from the second-difference
    // stencil, then Newton polish
    for (int it = 0; it < opts.max_descent; ++it) {
        c.iterations++;
        double r = config_residual(c);
        if (r < opts.tol_descent) break;
        for (size_t i = 0; i < n; ++i) {
            double d2 = std::max(2.0 + f.d2V(c.x[i]), 0.5);
            c.x[i] -= grad_i(c, static_cast<int>(i)) / d2 * 0.5;
        }
    }
    for (int it = 0; it < opts.max_newton; ++it) {
        c.iterations++;
        std::vector<double> g(n);
        double r = 0;
        for (size_t i = 0; i < n; ++i) {
            g[i] = -grad_i(c, static_cast<int>(i));
            r = std::max(r, std::fabs(g[i]));
        }
        if (r < opts.tol_newton) break;
        std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
        for (size_t i = 0; i < n; ++i) {
            H[i][i] = 2.0 + f.d2V(c.x[i]);
            if (n >= 2) {
                H[i][(i + 1) % n] += -1.0;
                H[i][(i + n - 1) % n] += -1.0;
            } else {
                H[i][i] = f.d2V(c.x[i]);
            }
        }
        // flat family: pin x_0 to break the translation direction
        bool flat = true;
        for (size_t i = 0; i < n && flat; ++i)
            if (std::fabs(f.d2V(c.x[i])) > 1e-14) flat = false;
        if (flat && n >= 1) {
            for (size_t j = 0; j < n; ++j) {
                H[0][j] = 0.0;
                H[j][0] = 0.0;
            }
            H[0][0] = 1.0;
            g[0] = 0.0;
        }
        if (!solve_dense(H, g)) {
            c.newton_fallback = true;
            break;
        }
        for (size_t i = 0; i < n; ++i) c.x[i] += g[i];
    }
    c.residual = config_residual(c);
    if (c.residual > opts.tol_descent)
        throw SolverFailure("periodic minimization did not converge", c.residual);
    return c;
}

Configuration minimize_heteroclinic(const twist::Family& f, int N, SolveOpts opts,
                                    std::optional<std::pair<int, double>> pin) {
    double width = 1.0;
    if (f.bump) width = f.bump->Delta;
    else if (f.kind == twist::Family::Kind::hyperbolic) width = std::sqrt(f.delta);
    if (f.kind != twist::Family::Kind::integrable && N < 10.0 / width)
        throw Error("insufficient span");
    if (N < 3) throw Error("insufficient span");

    Configuration c;
    c.boundary = Configuration::Boundary::heteroclinic;
    c.family = f;
    c.pin = pin;
    c.x.resize(N);
    // separatrix-like ramp matched to the linearized growth rate at the fixed
    // point
    double vpp = f.d2V(0.0);
    double rate = std::log(1.0 + vpp / 2.0 + std::sqrt(std::max(vpp + vpp * vpp / 4.0, 1e-12)));
    rate = std::clamp(rate, 8.0 / N, 2.0);
    for (int i = 0; i < N; ++i) {
        double t = rate * (i - (N - 1) / 2.0);
        c.x[i] = (2.0 / std::numbers::pi) * std::atan(std::exp(t));
    }
    if (pin) c.x[pin->first] = pin->second;

    // sup V'' sampled; the preconditioner must majorize the Hessian
    double c0 = 0.0;
    for (int i = 0; i < 512; ++i) c0 = std::max(c0, f.d2V(i / 512.0));
    for (int it = 0; it < opts.max_descent; ++it) {
        c.iterations++;
        preconditioned_step(c, c0);
        if (project_monotone(c.x)) c.projections++;
        if (pin) c.x[pin->first] = pin->second;
        if (config_residual(c) < opts.tol_descent) break;
    }
    for (int it = 0; it < opts.max_newton; ++it) {
        c.iterations++;
        if (config_residual(c) < opts.tol_newton) break;
        if (!newton_step(c, 0.1)) {
            c.newton_fallback = true;
            preconditioned_step(c, c0);
        }
    }
    c.residual = config_residual(c);
    if (c.residual > 1e-10)
        throw SolverFailure("heteroclinic minimization did not converge", c.residual);
    bool mono = true;
    for (int i = 0; i + 1 < N; ++i)
        if (c.x[i + 1] < c.x[i] - 1e-12) mono = false;
    if (!mono && !pin) throw SolverFailure("minimizer lost monotonicity", c.residual);
    return c;
}

int default_span(const twist::Family& f) {
    if (f.kind == twist::Family::Kind::integrable) return 4096;
    double width = f.bump ? f.bump->Delta : std::sqrt(std::max(f.delta, 1e-12));
    return static_cast<int>(std::ceil(40.0 / width));
}

BarrierResult peierls_barrier(const twist::Family& f, const RotationSymbol& symbol, double xi,
                              int N, SolveOpts opts) {
    BarrierResult out;
    out.symbol = symbol.str();
    out.xi = xi;
    if (!symbol.zero_plus) {
        // rational symbol: constrained vs free periodic minimization; the free
        // problem is multistarted over phases to avoid parking on a maximum
        long q = symbol.q, p = symbol.p;
        Configuration free_cfg;
        bool have = false;
        for (int j = 0; j < 5; ++j) {
            std::vector<double> init(q);
            for (long i = 0; i < q; ++i)
                init[i] = xi + (j + 0.31) / (5.0 * static_cast<double>(q)) +
                          static_cast<double>(i) * static_cast<double>(p) /
                              static_cast<double>(q);
            Configuration cand = minimize_periodic(f, p, q, init, opts);
            if (!have || action(cand) < action(free_cfg)) {
                free_cfg = cand;
                have = true;
            }
        }
        out.free_action = action(free_cfg);
        // pin x_0 = xi: optimize the remaining q-1 variables by damped descent
        Configuration con = free_cfg;
        con.x[0] = xi;
        for (int it = 0; it < opts.max_descent; ++it) {
            double r = 0;
            for (long i = 1; i < q; ++i) {
                double g = grad_i(con, static_cast<int>(i));
                r = std::max(r, std::fabs(g));
                double d2 = std::max(2.0 + f.d2V(con.x[i]), 0.5);
                con.x[i] -= g / d2 * 0.8;
            }
            out.iterations++;
            if (q == 1 || r < opts.tol_newton) break;
        }
        double rr = 0;
        for (long i = 1; i < q; ++i) rr = std::max(rr, std::fabs(grad_i(con, static_cast<int>(i))));
        out.residual = rr;
        out.constrained_action = action(con);
        out.value = out.constrained_action - out.free_action;
        out.span = static_cast<int>(q);
        return out;
    }

    if (N <= 0) N = default_span(f);
    out.span = N;
    Configuration free_cfg = minimize_heteroclinic(f, N, opts);
    out.free_action = action(free_cfg);
    // pin at the index where the free minimizer crosses xi; try neighbours too
    int i_star = 0;
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < N; ++i) {
        double d = std::fabs(free_cfg.x[i] - xi);
        if (d < best) {
            best = d;
            i_star = i;
        }
    }
    double best_action = std::numeric_limits<double>::max();
    double best_res = 0;
    int its = free_cfg.iterations;
    for (int di = -1; di <= 1; ++di) {
        int i0 = std::clamp(i_star + di, 0, N - 1);
        try {
            Configuration con = minimize_heteroclinic(f, N, opts, std::make_pair(i0, xi));
            its += con.iterations;
            if (action(con) < best_action) {
                best_action = action(con);
                best_res = con.residual;
            }
        } catch (const SolverFailure&) {
            continue;
        }
    }
    if (best_action == std::numeric_limits<double>::max())
        throw SolverFailure("pinned minimization did not converge", 1.0);
    out.constrained_action = best_action;
    out.value = best_action - out.free_action;
    out.iterations = its;
    out.residual = best_res;
    return out;
}

int crossings(const std::vector<double>& a, const std::vector<double>& b) {
    int count = 0;
    int last = 0;
    for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        double d = a[i] - b[i];
        int s = (d > 0) - (d < 0);
        if (s == 0) continue;
        if (last != 0 && s != last) count++;
        last = s;
    }
    return count;
}

GapCheck gap_checks(const Configuration& c, double slack) {
    GapCheck g;
    g.exchange_margin = std::numeric_limits<double>::max();
    g.step_margin = std::numeric_limits<double>::max();
    const auto& f = c.family;
    double Delta = f.bump ? f.bump->Delta : std::sqrt(std::max(f.delta, 0.0));
    Chain ch{c};
    for (size_t i = 0; i < c.x.size(); ++i) {
        double xi = c.x[i];
        if (xi < 0.25 || xi > 0.75) continue;
        double u = f.delta * (1.0 - std::cos(2.0 * std::numbers::pi * xi));
        double m1 = (ch.right(i) - ch.left(i)) - 2.0 * std::sqrt(std::max(u, 0.0));
        double m2 = (ch.right(i) - xi) - 0.5 * Delta;
        g.exchange_margin = std::min(g.exchange_margin, m1);
        g.step_margin = std::min(g.step_margin, m2);
        if (m1 < -slack) g.exchange_ok = false;
        if (m2 < -slack) g.step_ok = false;
    }
    return g;
}

}  // namespace kamlab::aubry
