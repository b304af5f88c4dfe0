#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <string>
#include <utility>

#include "kamlab/errors.hpp"

namespace kamlab {

/// Thin RAII wrapper over an mpfr_t. Value semantics; precision is fixed at
/// construction and preserved by copies.
class Real {
public:
    explicit Real(mpfr_prec_t prec = 256) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    Real(const Real& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept {
        mpfr_init2(v_, 64);
        mpfr_swap(v_, o.v_);
    }
    Real& operator=(Real o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    static Real of(double x, mpfr_prec_t prec = 256) {
        Real r(prec);
        mpfr_set_d(r.v_, x, MPFR_RNDN);
        return r;
    }
    static Real of_z(const mpz_class& z, mpfr_prec_t prec, mpfr_rnd_t rnd) {
        Real r(prec);
        mpfr_set_z(r.v_, z.get_mpz_t(), rnd);
        return r;
    }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

    double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(v_, rnd); }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    int cmp(const Real& o) const { return mpfr_cmp(v_, o.v_); }
    bool operator<(const Real& o) const { return cmp(o) < 0; }
    bool operator<=(const Real& o) const { return cmp(o) <= 0; }

    /// Decimal string with enough digits to identify the value, e.g. "1.234e+5678".
    /// Directed rounding gives true decimal bounds for serialization.
    std::string str(size_t digits = 20, mpfr_rnd_t rnd = MPFR_RNDN) const;

private:
    mpfr_t v_;
};

Real add(const Real& a, const Real& b, mpfr_rnd_t rnd, mpfr_prec_t prec = 0);
Real sub(const Real& a, const Real& b, mpfr_rnd_t rnd, mpfr_prec_t prec = 0);
Real mul(const Real& a, const Real& b, mpfr_rnd_t rnd, mpfr_prec_t prec = 0);
Real div(const Real& a, const Real& b, mpfr_rnd_t rnd, mpfr_prec_t prec = 0);
Real exp(const Real& a, mpfr_rnd_t rnd, mpfr_prec_t prec = 0);
Real log(const Real& a, mpfr_rnd_t rnd, mpfr_prec_t prec = 0);
Real sqrt(const Real& a, mpfr_rnd_t rnd, mpfr_prec_t prec = 0);
Real neg(const Real& a);

/// Closed interval [lo, hi] with outward-rounded arithmetic. All operations
/// guarantee containment of the exact result.
class Interval {
public:
    Interval() = default;
    Interval(Real lo, Real hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (mpfr_cmp(lo_.get(), hi_.get()) > 0) throw Error("interval endpoints out of order");
    }
    static Interval point(const Real& x) { return Interval(x, x); }
    static Interval of(double lo, double hi, mpfr_prec_t prec = 256) {
        return Interval(Real::of(lo, prec), Real::of(hi, prec));
    }
    /// Exact rational p/q with directed rounding at the given precision.
    static Interval ratio(const mpz_class& p, const mpz_class& q, mpfr_prec_t prec);

    const Real& lo() const { return lo_; }
    const Real& hi() const { return hi_; }
    mpfr_prec_t prec() const { return lo_.prec(); }

    double mid() const;
    double width() const;
    Real width_real() const { return sub(hi_, lo_, MPFR_RNDU); }

    Interval operator+(const Interval& o) const;
    Interval operator-(const Interval& o) const;
    Interval operator-() const;
    Interval operator*(const Interval& o) const;
    Interval mul_int(long k) const;
    Interval mul_z(const mpz_class& k) const;

    bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
    bool certainly_less(const Interval& o) const { return hi_.cmp(o.lo()) < 0; }
    bool certainly_greater(const Interval& o) const { return o.hi().cmp(lo_) < 0; }
    bool contains(const Interval& o) const {
        return lo_.cmp(o.lo()) <= 0 && o.hi().cmp(hi_) <= 0;
    }

    /// Enclosure of cos over the interval via the Lipschitz bound |cos'| <= 1,
    /// clipped to [-1, 1]. Tight enough for the narrow enclosures used here.
    Interval cos_enclosure() const;
    /// Enclosure of sin, same approach.
    Interval sin_enclosure() const;
    Interval exp_enclosure() const;
    Interval log_enclosure() const;

    /// Enclosure of the distance to the nearest integer. Requires width < 1/2.
    Interval dist_nearest_int() const;

private:
    Real lo_, hi_;
};

}  // namespace kamlab
