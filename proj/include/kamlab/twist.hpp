#pragma once

#include <array>
#include <optional>
#include <vector>

#include "kamlab/gevrey.hpp"

namespace kamlab::twist {

/// Generating function h(x, x') = (x-x')^2/2 + V(x') for the family under
/// study. V and its derivatives are stored analytically; the induced cylinder
/// map is (x, y) -> (x+y, y + V'(x+y)).
struct Family {
    enum class Kind { integrable, hyperbolic, hyperbolic_bump, rescaled };
    Kind kind = Kind::integrable;
    double delta = 0.0;
    long qcover = 1;
    std::optional<gevrey::BumpSpec> bump;

    static Family integrable();
    static Family hyperbolic(double delta);
    static Family hyperbolic_bump(double delta, gevrey::BumpSpec spec);
    /// q-fold cover rescaling of the hyperbolic(+bump) family:
    /// V(x) = delta_q (1 - cos(2 pi q x))/q^2 [+ xi(q x)/q^2].
    static Family rescaled(double delta_q, long q, std::optional<gevrey::BumpSpec> spec = {});

    double V(double x) const;
    double dV(double x) const;
    double d2V(double x) const;

    double h(double x, double x1) const;
    /// (d h/dx, d h/dx').
    std::array<double, 2> grad_h(double x, double x1) const;
};

struct Point {
    double x = 0;
    double y = 0;
};

Point map_apply(const Family& f, Point p);
/// Orbit of length n+1 starting at p; x tracked on the universal cover.
std::vector<Point> orbit(const Family& f, Point p, int n);

struct SymplecticReport {
    bool pass = true;
    double max_gen_res1 = 0;  // |y + d1 h(x, x')|
    double max_gen_res2 = 0;  // |y' - d2 h(x, x')|
    double max_det_err = 0;   // |det DG - 1|, Jacobian by central differences
    std::optional<Point> witness;
};

/// Checks exactness (generating-function identities) and area preservation on
/// random samples. dV may be overridden to inject faults in tests.
SymplecticReport check_exact_symplectic(const Family& f, int samples, unsigned long seed,
                                        double tol = 1e-10,
                                        double (*dV_override)(const Family&, double) = nullptr);

}  // namespace kamlab::twist
