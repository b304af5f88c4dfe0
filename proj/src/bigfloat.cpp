#include "kamlab/bigfloat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace kamlab {

namespace {
mpfr_prec_t pick(mpfr_prec_t requested, const Real& a, const Real& b) {
    if (requested > 0) return requested;
    return std::max(a.prec(), b.prec());
}
mpfr_prec_t pick(mpfr_prec_t requested, const Real& a) { return requested > 0 ? requested : a.prec(); }
}  // namespace

std::string Real::str(size_t digits, mpfr_rnd_t rnd) const {
    if (!is_finite()) return mpfr_nan_p(v_) ? "nan" : (sign() > 0 ? "inf" : "-inf");
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, digits, v_, rnd);
    std::string mant(s);
    mpfr_free_str(s);
    bool negv = !mant.empty() && mant[0] == '-';
    std::string d = negv ? mant.substr(1) : mant;
    if (d.empty() || d.find_first_not_of('0') == std::string::npos) return "0";
    std::string out = (negv ? "-" : "");
    out += d.substr(0, 1) + "." + d.substr(1) + "e" + std::to_string(static_cast<long long>(e) - 1);
    return out;
}

#define KAMLAB_BINOP(name, fn)                                                    \
    Real name(const Real& a, const Real& b, mpfr_rnd_t rnd, mpfr_prec_t prec) {   \
        Real r(pick(prec, a, b));                                                 \
        fn(r.get(), a.get(), b.get(), rnd);                                       \
        return r;                                                                 \
    }

KAMLAB_BINOP(add, mpfr_add)
KAMLAB_BINOP(sub, mpfr_sub)
KAMLAB_BINOP(mul, mpfr_mul)
KAMLAB_BINOP(div, mpfr_div)
#undef KAMLAB_BINOP

#define KAMLAB_UNOP(name, fn)                                      \
    Real name(const Real& a, mpfr_rnd_t rnd, mpfr_prec_t prec) {   \
        Real r(pick(prec, a));                                     \
        fn(r.get(), a.get(), rnd);                                 \
        return r;                                                  \
    }

KAMLAB_UNOP(exp, mpfr_exp)
KAMLAB_UNOP(log, mpfr_log)
KAMLAB_UNOP(sqrt, mpfr_sqrt)
#undef KAMLAB_UNOP

Real neg(const Real& a) {
    Real r(a.prec());
    mpfr_neg(r.get(), a.get(), MPFR_RNDN);
    return r;
}

Interval Interval::ratio(const mpz_class& p, const mpz_class& q, mpfr_prec_t prec) {
    Real lo(prec), hi(prec);
    mpfr_set_z(lo.get(), p.get_mpz_t(), MPFR_RNDD);
    mpfr_div_z(lo.get(), lo.get(), q.get_mpz_t(), MPFR_RNDD);
    mpfr_set_z(hi.get(), p.get_mpz_t(), MPFR_RNDU);
    mpfr_div_z(hi.get(), hi.get(), q.get_mpz_t(), MPFR_RNDU);
    return Interval(std::move(lo), std::move(hi));
}

double Interval::mid() const {
    Real m(lo_.prec());
    mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
    mpfr_div_ui(m.get(), m.get(), 2, MPFR_RNDN);
    return m.to_double();
}

double Interval::width() const { return sub(hi_, lo_, MPFR_RNDU).to_double(MPFR_RNDU); }

Interval Interval::operator+(const Interval& o) const {
    return Interval(add(lo_, o.lo_, MPFR_RNDD), add(hi_, o.hi_, MPFR_RNDU));
}

Interval Interval::operator-(const Interval& o) const {
    return Interval(sub(lo_, o.hi_, MPFR_RNDD), sub(hi_, o.lo_, MPFR_RNDU));
}

Interval Interval::operator-() const { return Interval(neg(hi_), neg(lo_)); }

Interval Interval::operator*(const Interval& o) const {
    const Real* as[2] = {&lo_, &hi_};
    const Real* bs[2] = {&o.lo_, &o.hi_};
    Real best_lo = mul(lo_, o.lo_, MPFR_RNDD);
    Real best_hi = mul(lo_, o.lo_, MPFR_RNDU);
    for (auto a : as)
        for (auto b : bs) {
            Real d = mul(*a, *b, MPFR_RNDD);
            Real u = mul(*a, *b, MPFR_RNDU);
            if (d.cmp(best_lo) < 0) best_lo = d;
            if (best_hi.cmp(u) < 0) best_hi = u;
        }
    return Interval(std::move(best_lo), std::move(best_hi));
}

Interval Interval::mul_int(long k) const {
    Real a(lo_.prec()), b(lo_.prec());
    if (k >= 0) {
        mpfr_mul_si(a.get(), lo_.get(), k, MPFR_RNDD);
        mpfr_mul_si(b.get(), hi_.get(), k, MPFR_RNDU);
    } else {
        mpfr_mul_si(a.get(), hi_.get(), k, MPFR_RNDD);
        mpfr_mul_si(b.get(), lo_.get(), k, MPFR_RNDU);
    }
    return Interval(std::move(a), std::move(b));
}

Interval Interval::mul_z(const mpz_class& k) const {
    Real a(lo_.prec()), b(lo_.prec());
    if (mpz_sgn(k.get_mpz_t()) >= 0) {
        mpfr_mul_z(a.get(), lo_.get(), k.get_mpz_t(), MPFR_RNDD);
        mpfr_mul_z(b.get(), hi_.get(), k.get_mpz_t(), MPFR_RNDU);
    } else {
        mpfr_mul_z(a.get(), hi_.get(), k.get_mpz_t(), MPFR_RNDD);
        mpfr_mul_z(b.get(), lo_.get(), k.get_mpz_t(), MPFR_RNDU);
    }
    return Interval(std::move(a), std::move(b));
}

namespace {
// Enclosure of f over [lo,hi] from the value at the midpoint and a Lipschitz
// constant: [f(m) - L*r, f(m) + L*r] with r = radius rounded up.
Interval lipschitz_enclosure(const Interval& x, int (*f)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t),
                             double lip, bool clip_unit) {
    mpfr_prec_t p = x.prec();
    Real m(p);
    mpfr_add(m.get(), x.lo().get(), x.hi().get(), MPFR_RNDN);
    mpfr_div_ui(m.get(), m.get(), 2, MPFR_RNDN);
    Real r1 = sub(x.hi(), m, MPFR_RNDU);
    Real r2 = sub(m, x.lo(), MPFR_RNDU);
    Real rad = r1.cmp(r2) >= 0 ? r1 : r2;
    Real lipr(p);
    mpfr_mul_d(lipr.get(), rad.get(), lip, MPFR_RNDU);
    Real flo(p), fhi(p);
    f(flo.get(), m.get(), MPFR_RNDD);
    f(fhi.get(), m.get(), MPFR_RNDU);
    Real lo = sub(flo, lipr, MPFR_RNDD);
    Real hi = add(fhi, lipr, MPFR_RNDU);
    if (clip_unit) {
        Real one(p);
        mpfr_set_si(one.get(), 1, MPFR_RNDN);
        Real mone = neg(one);
        if (lo.cmp(mone) < 0) lo = mone;
        if (one.cmp(hi) < 0) hi = one;
        if (lo.cmp(hi) > 0) lo = hi;
    }
    return Interval(std::move(lo), std::move(hi));
}
}  // namespace

Interval Interval::cos_enclosure() const { return lipschitz_enclosure(*this, mpfr_cos, 1.0, true); }
Interval Interval::sin_enclosure() const { return lipschitz_enclosure(*this, mpfr_sin, 1.0, true); }

Interval Interval::exp_enclosure() const {
    return Interval(exp(lo_, MPFR_RNDD), exp(hi_, MPFR_RNDU));
}

Interval Interval::log_enclosure() const {
    if (lo_.sign() <= 0) throw Error("log of non-positive interval");
    return Interval(log(lo_, MPFR_RNDD), log(hi_, MPFR_RNDU));
}

Interval Interval::dist_nearest_int() const {
    mpfr_prec_t p = lo_.prec();
    if (width() >= 0.5) throw PrecisionExhausted("interval too wide for nearest-integer distance");
    Real m(p);
    mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
    mpfr_div_ui(m.get(), m.get(), 2, MPFR_RNDN);
    Real k(p);
    mpfr_rint(k.get(), m.get(), MPFR_RNDN);
    Real dlo = sub(lo_, k, MPFR_RNDD);
    Real dhi = sub(hi_, k, MPFR_RNDU);
    // Fold |t| for |t| <= 1/2, 1-|t| beyond; d stays within (-1, 1).
    auto fold_pt = [&](const Real& t, mpfr_rnd_t rnd) {
        Real a(p);
        mpfr_abs(a.get(), t.get(), rnd);
        Real half = Real::of(0.5, p);
        if (half.cmp(a) < 0) {
            Real one(p);
            mpfr_set_si(one.get(), 1, MPFR_RNDN);
            a = sub(one, a, rnd);
        }
        return a;
    };
    Real f1d = fold_pt(dlo, MPFR_RNDD), f1u = fold_pt(dlo, MPFR_RNDU);
    Real f2d = fold_pt(dhi, MPFR_RNDD), f2u = fold_pt(dhi, MPFR_RNDU);
    Real lo = f1d.cmp(f2d) <= 0 ? f1d : f2d;
    Real hi = f1u.cmp(f2u) >= 0 ? f1u : f2u;
    // Interior extrema: 0 at t = 0, 1/2 at t = +-1/2.
    if (dlo.sign() <= 0 && dhi.sign() >= 0) lo = Real::of(0.0, p);
    Real half = Real::of(0.5, p);
    Real mhalf = Real::of(-0.5, p);
    if ((dlo.cmp(half) <= 0 && half.cmp(dhi) <= 0) || (dlo.cmp(mhalf) <= 0 && mhalf.cmp(dhi) <= 0))
        hi = half;
    if (lo.sign() < 0) lo = Real::of(0.0, p);
    if (half.cmp(hi) < 0) hi = half;
    return Interval(std::move(lo), std::move(hi));
}

}  // namespace kamlab
