#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kamlab/bigfloat.hpp"
#include "kamlab/errors.hpp"

namespace kamlab::cf {

struct Params {
    double a = 2.0;     // twist exponent a > 1
    double b = 4.0;     // growth parameter; b > 4 is what the counting estimate needs
    double beta = 0.5;  // beta = 1/alpha
    double eps = 0.1;
};

/// Convergent schedule of a continued fraction. Levels are exact big integers
/// while they fit the digit budget; beyond that only ln(q_n) is tracked, as a
/// rigorous enclosure (a "log-space shadow").
///
/// Convention: q_{-1} = 0, q_0 = 1, p_{-1} = 1, p_0 = a_0, and
/// q_{n+1} = a_{n+1} q_n + q_{n-1}.
struct Schedule {
    std::vector<mpz_class> a;   // partial quotients a_0..a_E (exact part)
    std::vector<mpz_class> p;   // convergent numerators, same length as a
    std::vector<mpz_class> q;   // convergent denominators, same length as a
    std::vector<Interval> lnq;  // ln q_n for n = 0..levels(), exact levels included
    Params params;
    mpfr_prec_t prec = 256;

    size_t exact_count() const { return q.size(); }
    size_t levels() const { return lnq.empty() ? 0 : lnq.size() - 1; }
    bool exact(size_t n) const { return n < q.size(); }
    const mpz_class& qz(size_t n) const;  // throws Error("exact level required")

    nlohmann::ordered_json to_json() const;
    static Schedule from_json(const nlohmann::ordered_json& j);
};

/// Builds the schedule of an explicitly given partial-quotient sequence
/// (a_0 may be 0; a_n >= 1 for n >= 1). All levels exact.
Schedule convergents(const std::vector<mpz_class>& quotients, Params params = {});

struct BuildOpts {
    size_t digit_budget = 100000;  // exact big integers up to this many decimal digits
    mpfr_prec_t prec = 256;
    bool allow_partial = false;  // return fewer levels instead of throwing
};

/// Builds the rotation-number schedule a_{n+1} = floor(exp(b q_n^beta)).
/// Exact while the digit budget lasts, then continues in log space. Throws
/// ScheduleOverflow when the requested level count is out of reach (even in
/// log space) unless opts.allow_partial is set.
Schedule build_omega_bar(double b, double beta, int levels, BuildOpts opts = {});

/// Interval enclosure of a rotation number at a fixed working precision.
struct RotationValue {
    Interval value;
    mpfr_prec_t prec = 256;

    Interval times(long nu) const { return value.mul_int(nu); }
    /// Enclosure of || nu * omega || (distance to the nearest integer).
    Interval dist(long nu) const { return times(nu).dist_nearest_int(); }
};

/// Enclosure of the schedule's rotation number from its last exact convergent
/// pair, |omega - p_n/q_n| < 1/(q_n q_{n+1}). prec = 0 uses the schedule's
/// working precision.
RotationValue rotation_from_schedule(const Schedule& s, mpfr_prec_t prec = 0);

RotationValue golden_rotation(mpfr_prec_t prec = 256);

/// Rotation number with the given head quotients (a_0, a_1, ...) followed by
/// an all-ones tail, i.e. the value [a_0; a_1, .., a_k, 1, 1, ...].
RotationValue rotation_with_golden_tail(const std::vector<long>& head, mpfr_prec_t prec = 256);

/// Small exact schedule for desk-scale experiments: int64 convergent
/// denominators plus the rotation enclosure they belong to.
struct Desk {
    std::vector<long long> q;
    RotationValue omega;
};

Desk desk_golden(int levels, mpfr_prec_t prec = 256);
/// Level-2 truncation of the toy rotation schedule (b = 1, beta = 1/2)
/// continued with an all-ones tail: quotients [0; 2, 4, 1, 1, ...].
Desk desk_toy(int levels, mpfr_prec_t prec = 256);
/// Arbitrary head quotients continued with an all-ones tail.
Desk desk_custom(const std::vector<long>& head, int levels, mpfr_prec_t prec = 256);

/// Distance of x to the nearest integer, in [0, 1/2].
double nearest_dist(double x);

enum class BrjunoVariant { standard, differenced };

struct BrjunoReport {
    Interval sum;
    double first_term = 0;
    double ratio = 0;               // sum / first term
    std::vector<double> terms;      // midpoints
    std::vector<double> partials;   // running partial sums (midpoints)
    bool used_shadows = false;
};

/// standard:    sum_{n=0}^{N} ln q_{n+m+1} / q_{n+m}^exponent
/// differenced: sum_{n=0}^{N} ln q_{n+m+1} (q_{n+m}^{-e} - q_{n+m+1}^{-e})
BrjunoReport brjuno_sum(const Schedule& s, double exponent, int m, int N,
                        BrjunoVariant variant = BrjunoVariant::standard);

struct SmallnessReport {
    int m = 0;
    double log_lhs = 0;  // natural log of ||q_m omega||, upper endpoint
    double log_rhs = 0;  // natural log of n_{q_m}^{-a/2-eps}, lower endpoint
    bool pass = false;
};

/// Checks 0 < ||q_m omega|| < n_{q_m}^{-a/2-eps} in log space.
/// Throws PrecisionExhausted when the comparison cannot be decided.
SmallnessReport check_rotation_smallness(const Schedule& s, int m);

/// ceil(q_{m+n} / q_m); requires both levels exact.
mpz_class kappa(int n, int m, const Schedule& s);

/// Rescale a 1-periodic function handle: Q(x) = P(q x)/q^2 (period 1/q).
/// The companion action on rotation numbers is omega -> q*omega - p.
struct RescaledFunction {
    std::function<double(double)> f;
    long q;
    double operator()(double x) const { return f(x); }
    double rotation_companion(double omega, long p_int) const {
        return static_cast<double>(q) * omega - static_cast<double>(p_int);
    }
};
RescaledFunction rescale_cover(std::function<double(double)> P, long q);

struct DivisorAlternativeHit {
    long v;
    std::string clause;  // which conclusion failed
};

struct DivisorAlternativeReport {
    std::vector<DivisorAlternativeHit> counterexamples;
    std::vector<long> undecided;           // enclosure straddles the threshold
    std::vector<double> undecided_widths;  // enclosure widths for the flags
    long candidates = 0;                   // v with ||omega v|| <= 1/(4 q_{n+m})
};

/// Brute-force check of the small-divisor alternative over 0 < v <= vmax.
DivisorAlternativeReport divisor_alternative_scan(const RotationValue& omega, const Schedule& s, int n, int m, long vmax);

}  // namespace kamlab::cf
