#include "kamlab/cf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kamlab::cf {

const mpz_class& Schedule::qz(size_t n) const {
    if (!exact(n)) throw Error("exact level required");
    return q[n];
}

nlohmann::ordered_json Schedule::to_json() const {
    nlohmann::ordered_json j;
    j["a"] = nlohmann::ordered_json::array();
    j["q"] = nlohmann::ordered_json::array();
    j["lnq"] = nlohmann::ordered_json::array();
    for (const auto& z : a) j["a"].push_back(z.get_str());
    for (const auto& z : q) j["q"].push_back(z.get_str());
    for (size_t n = 0; n < lnq.size(); ++n) {
        nlohmann::ordered_json e;
        e["value"] = lnq[n].hi().str(25);
        e["exact"] = exact(n);
        if (!exact(n)) {
            e["lo"] = lnq[n].lo().str(40, MPFR_RNDD);
            e["hi"] = lnq[n].hi().str(40, MPFR_RNDU);
        }
        j["lnq"].push_back(e);
    }
    j["params"] = {{"a", params.a}, {"b", params.b}, {"beta", params.beta}, {"eps", params.eps}};
    return j;
}

Schedule Schedule::from_json(const nlohmann::ordered_json& j) {
    std::vector<mpz_class> quot;
    for (const auto& s : j.at("a")) quot.emplace_back(s.get<std::string>());
    Params pr;
    pr.a = j.at("params").at("a").get<double>();
    pr.b = j.at("params").at("b").get<double>();
    pr.beta = j.at("params").at("beta").get<double>();
    pr.eps = j.at("params").at("eps").get<double>();
    Schedule s = convergents(quot, pr);
    // restore log-space shadows, rounding outward
    for (size_t n = s.lnq.size(); n < j.at("lnq").size(); ++n) {
        const auto& e = j.at("lnq").at(n);
        Real lo(s.prec), hi(s.prec);
        mpfr_set_str(lo.get(), e.at("lo").get<std::string>().c_str(), 10, MPFR_RNDD);
        mpfr_set_str(hi.get(), e.at("hi").get<std::string>().c_str(), 10, MPFR_RNDU);
        s.lnq.emplace_back(std::move(lo), std::move(hi));
    }
    return s;
}

namespace {

Interval ln_of_z(const mpz_class& z, mpfr_prec_t prec) {
    return Interval::ratio(z, 1, prec).log_enclosure();
}

Interval div_pos(const Interval& a, const Interval& b) {
    // requires b > 0
    if (b.lo().sign() <= 0) throw Error("division by interval touching zero");
    return Interval(div(a.lo(), b.hi(), MPFR_RNDD), div(a.hi(), b.lo(), MPFR_RNDU));
}

}  // namespace

Schedule convergents(const std::vector<mpz_class>& quotients, Params params) {
    if (quotients.empty()) throw Error("no quotients");
    for (size_t n = 1; n < quotients.size(); ++n)
        if (quotients[n] <= 0) throw Error("invalid quotient");
    if (quotients[0] < 0) throw Error("invalid quotient");

    Schedule s;
    s.params = params;
    s.a = quotients;
    mpz_class pm1 = 1, qm1 = 0;  // p_{-1}, q_{-1}
    s.p.push_back(quotients[0]);
    s.q.push_back(1);
    for (size_t n = 1; n < quotients.size(); ++n) {
        s.p.push_back(quotients[n] * s.p[n - 1] + pm1);
        s.q.push_back(quotients[n] * s.q[n - 1] + qm1);
        pm1 = s.p[n - 1];
        qm1 = s.q[n - 1];
    }
    for (const auto& z : s.q) s.lnq.push_back(ln_of_z(z, s.prec));
    return s;
}

Schedule build_omega_bar(double b, double beta, int levels, BuildOpts opts) {
    if (levels < 1) throw Error("levels must be >= 1");
    Schedule s;
    s.prec = opts.prec;
    s.params.b = b;
    s.params.beta = beta;
    s.a = {0};
    s.p = {0};
    s.q = {1};
    s.lnq = {Interval::of(0.0, 0.0, opts.prec)};

    mpz_class qm1 = 0, pm1 = 1;  // q_{-1}, p_{-1}
    bool exact_phase = true;
    const Real rb = Real::of(b, opts.prec);
    const Real rbeta = Real::of(beta, opts.prec);

    for (int n = 0; n < levels; ++n) {
        // x = b * q_n^beta as an interval
        Interval lnqn = s.lnq[n];
        Interval qb = Interval(mul(rbeta, lnqn.lo(), MPFR_RNDD), mul(rbeta, lnqn.hi(), MPFR_RNDU))
                          .exp_enclosure();
        Interval x(mul(rb, qb.lo(), MPFR_RNDD), mul(rb, qb.hi(), MPFR_RNDU));
        if (!x.hi().is_finite()) {
            if (opts.allow_partial) return s;
            throw ScheduleOverflow("schedule overflow", n);
        }

        double digits_estimate = x.hi().to_double(MPFR_RNDU) / std::log(10.0);
        if (exact_phase && digits_estimate < static_cast<double>(opts.digit_budget)) {
            // floor(exp(x)) exactly, raising precision until the floor is unambiguous
            mpfr_prec_t need = static_cast<mpfr_prec_t>(digits_estimate * 3.33) + 96;
            mpz_class an;
            for (;; need *= 2) {
                Real xe(need);
                mpfr_set_z(xe.get(), s.q[n].get_mpz_t(), MPFR_RNDN);
                // q_n exact, so x can be recomputed tightly at high precision
                Real lnq_hi = log(xe, MPFR_RNDU, need);
                Real lnq_lo = log(xe, MPFR_RNDD, need);
                Real xlo = mul(Real::of(b, need), exp(mul(Real::of(beta, need), lnq_lo, MPFR_RNDD, need), MPFR_RNDD, need), MPFR_RNDD, need);
                Real xhi = mul(Real::of(b, need), exp(mul(Real::of(beta, need), lnq_hi, MPFR_RNDU, need), MPFR_RNDU, need), MPFR_RNDU, need);
                Real elo = exp(xlo, MPFR_RNDD, need);
                Real ehi = exp(xhi, MPFR_RNDU, need);
                Real flo(need), fhi(need);
                mpfr_floor(flo.get(), elo.get());
                mpfr_floor(fhi.get(), ehi.get());
                if (mpfr_cmp(flo.get(), fhi.get()) == 0) {
                    mpfr_get_z(an.get_mpz_t(), flo.get(), MPFR_RNDN);
                    break;
                }
                if (need > static_cast<mpfr_prec_t>(opts.digit_budget) * 8)
                    throw Error("floor(exp) did not stabilize");
            }
            mpz_class qn1 = an * s.q[n] + qm1;
            mpz_class pn1 = an * s.p[n] + pm1;
            if (mpz_sizeinbase(qn1.get_mpz_t(), 10) <= opts.digit_budget) {
                qm1 = s.q[n];
                pm1 = s.p[n];
                s.a.push_back(an);
                s.q.push_back(qn1);
                s.p.push_back(pn1);
                s.lnq.push_back(ln_of_z(qn1, opts.prec));
                continue;
            }
            exact_phase = false;  // fall through to the log-space step
        } else {
            exact_phase = false;
        }

        // Log-space shadow: q_{n+1} = floor(e^x) q_n + q_{n-1} gives
        //   x + ln q_n + ln(1 - e^{-x}) < ln q_{n+1} <= x + ln q_n + ln(1 + e^{-x}).
        mpfr_prec_t pr = opts.prec;
        Real emx_lo = exp(neg(x.hi()), MPFR_RNDD, pr);
        Real emx_hi = exp(neg(x.lo()), MPFR_RNDU, pr);
        Real corr_lo(pr), corr_hi(pr);
        mpfr_neg(corr_lo.get(), emx_hi.get(), MPFR_RNDD);
        mpfr_log1p(corr_lo.get(), corr_lo.get(), MPFR_RNDD);
        mpfr_log1p(corr_hi.get(), emx_hi.get(), MPFR_RNDU);
        Real lo = add(add(x.lo(), lnqn.lo(), MPFR_RNDD), corr_lo, MPFR_RNDD);
        Real hi = add(add(x.hi(), lnqn.hi(), MPFR_RNDU), corr_hi, MPFR_RNDU);
        if (!hi.is_finite()) {
            if (opts.allow_partial) return s;
            throw ScheduleOverflow("schedule overflow", n);
        }
        s.lnq.push_back(Interval(std::move(lo), std::move(hi)));
    }
    return s;
}

RotationValue rotation_from_schedule(const Schedule& s, mpfr_prec_t prec) {
    if (s.exact_count() < 2) throw Error("need at least two exact levels");
    size_t n = s.exact_count() - 1;
    mpfr_prec_t pr = prec > 0 ? prec : s.prec;
    Interval center = Interval::ratio(s.p[n], s.q[n], pr);
    // |omega - p_n/q_n| < 1/(q_n q_{n+1}); bound q_{n+1} from below via lnq if
    // the next level exists only in log space, else fall back to q_{n+1} > q_n.
    Real qn1_lo(pr);
    if (s.levels() >= n + 1) {
        qn1_lo = exp(s.lnq[n + 1].lo(), MPFR_RNDD, pr);
    } else {
        mpfr_set_z(qn1_lo.get(), s.q[n].get_mpz_t(), MPFR_RNDD);
    }
    Real qn(pr);
    mpfr_set_z(qn.get(), s.q[n].get_mpz_t(), MPFR_RNDD);
    Real denom = mul(qn, qn1_lo, MPFR_RNDD);
    Real err(pr);
    mpfr_ui_div(err.get(), 1, denom.get(), MPFR_RNDU);
    Interval errint(neg(err), err);
    RotationValue rv;
    rv.prec = pr;
    rv.value = center + errint;
    return rv;
}

RotationValue golden_rotation(mpfr_prec_t prec) {
    Real five = Real::of(5.0, prec);
    Real rlo = sqrt(five, MPFR_RNDD);
    Real rhi = sqrt(five, MPFR_RNDU);
    Real one = Real::of(1.0, prec);
    Real lo = sub(rlo, one, MPFR_RNDD);
    Real hi = sub(rhi, one, MPFR_RNDU);
    mpfr_div_ui(lo.get(), lo.get(), 2, MPFR_RNDD);
    mpfr_div_ui(hi.get(), hi.get(), 2, MPFR_RNDU);
    return RotationValue{Interval(std::move(lo), std::move(hi)), prec};
}

RotationValue rotation_with_golden_tail(const std::vector<long>& head, mpfr_prec_t prec) {
    if (head.empty()) throw Error("no quotients");
    std::vector<mpz_class> quot(head.begin(), head.end());
    Schedule s = convergents(quot);
    size_t k = s.exact_count() - 1;
    // tail value t = [1; 1, 1, ...] = (1+sqrt 5)/2; omega = (p_k t + p_{k-1})/(q_k t + q_{k-1}).
    Real five = Real::of(5.0, prec);
    Real tlo = sqrt(five, MPFR_RNDD), thi = sqrt(five, MPFR_RNDU);
    Real one = Real::of(1.0, prec);
    tlo = add(tlo, one, MPFR_RNDD);
    thi = add(thi, one, MPFR_RNDU);
    mpfr_div_ui(tlo.get(), tlo.get(), 2, MPFR_RNDD);
    mpfr_div_ui(thi.get(), thi.get(), 2, MPFR_RNDU);
    Interval t(tlo, thi);
    mpz_class pk = s.p[k], pk1 = (k >= 1) ? s.p[k - 1] : mpz_class(1);
    mpz_class qk = s.q[k], qk1 = (k >= 1) ? s.q[k - 1] : mpz_class(0);
    Interval num = t.mul_z(pk) + Interval::ratio(pk1, 1, prec);
    Interval den = t.mul_z(qk) + Interval::ratio(qk1, 1, prec);
    return RotationValue{div_pos(num, den), prec};
}

namespace {
Desk desk_from(const std::vector<long>& head, int levels, mpfr_prec_t prec) {
    Desk d;
    d.omega = rotation_with_golden_tail(head, prec);
    d.q.push_back(1);  // q_0
    long long qm1 = 0, qn = 1;
    for (int n = 1; n <= levels; ++n) {
        long long an = (static_cast<size_t>(n) < head.size()) ? head[n] : 1;
        long long qn1 = an * qn + qm1;
        if (qn1 < qn) throw Error("desk schedule overflows int64");
        qm1 = qn;
        qn = qn1;
        d.q.push_back(qn);
    }
    return d;
}
}  // namespace

Desk desk_golden(int levels, mpfr_prec_t prec) { return desk_from({0, 1}, levels, prec); }
Desk desk_toy(int levels, mpfr_prec_t prec) { return desk_from({0, 2, 4}, levels, prec); }
Desk desk_custom(const std::vector<long>& head, int levels, mpfr_prec_t prec) {
    return desk_from(head, levels, prec);
}

double nearest_dist(double x) {
    if (!std::isfinite(x)) throw Error("nearest_dist of non-finite value");
    double d = std::fabs(x - std::nearbyint(x));
    return std::min(d, 0.5);
}

BrjunoReport brjuno_sum(const Schedule& s, double exponent, int m, int N, BrjunoVariant variant) {
    if (static_cast<size_t>(m + N + 1) > s.levels())
        throw Error("insufficient levels; max usable N = " +
                    std::to_string(static_cast<long>(s.levels()) - m - 1));
    mpfr_prec_t pr = s.prec;
    const Real re = Real::of(exponent, pr);
    auto qpow_inv = [&](const Interval& lnq) {
        // q^{-exponent} = exp(-e * ln q)
        Real lo = exp(neg(mul(re, lnq.hi(), MPFR_RNDU)), MPFR_RNDD, pr);
        Real hi = exp(neg(mul(re, lnq.lo(), MPFR_RNDD)), MPFR_RNDU, pr);
        return Interval(std::move(lo), std::move(hi));
    };
    BrjunoReport rep;
    Interval total = Interval::of(0.0, 0.0, pr);
    for (int n = 0; n <= N; ++n) {
        Interval term = Interval::of(0.0, 0.0, pr);
        if (variant == BrjunoVariant::standard) {
            term = s.lnq[n + m + 1] * qpow_inv(s.lnq[n + m]);
        } else {
            Interval diff = qpow_inv(s.lnq[n + m]) - qpow_inv(s.lnq[n + m + 1]);
            term = s.lnq[n + m + 1] * diff;
        }
        if (!s.exact(n + m + 1)) rep.used_shadows = true;
        total = total + term;
        rep.terms.push_back(term.mid());
        rep.partials.push_back(total.mid());
        if (n == 0) rep.first_term = term.mid();
    }
    rep.sum = total;
    rep.ratio = rep.first_term != 0 ? total.mid() / rep.first_term : 0.0;
    return rep;
}

namespace {

// floor(exp((b/a) q_m^beta)) computed exactly from an exact level, raising
// precision until the floor is unambiguous.
mpz_class floor_exp_level(const Schedule& s, int m, double coeff) {
    const mpz_class& qm = s.qz(m);
    double xd = coeff * std::pow(mpz_get_d(qm.get_mpz_t()), s.params.beta);
    mpfr_prec_t need = static_cast<mpfr_prec_t>(xd * 1.5) + 128;
    for (;; need *= 2) {
        Real qr(need);
        mpfr_set_z(qr.get(), qm.get_mpz_t(), MPFR_RNDN);
        Real lnq_lo = log(qr, MPFR_RNDD, need), lnq_hi = log(qr, MPFR_RNDU, need);
        Real beta_r = Real::of(s.params.beta, need);
        Real c_r = Real::of(coeff, need);
        Real xlo = mul(c_r, exp(mul(beta_r, lnq_lo, MPFR_RNDD, need), MPFR_RNDD, need), MPFR_RNDD, need);
        Real xhi = mul(c_r, exp(mul(beta_r, lnq_hi, MPFR_RNDU, need), MPFR_RNDU, need), MPFR_RNDU, need);
        Real elo = exp(xlo, MPFR_RNDD, need), ehi = exp(xhi, MPFR_RNDU, need);
        Real flo(need), fhi(need);
        mpfr_floor(flo.get(), elo.get());
        mpfr_floor(fhi.get(), ehi.get());
        if (mpfr_cmp(flo.get(), fhi.get()) == 0) {
            mpz_class n;
            mpfr_get_z(n.get_mpz_t(), flo.get(), MPFR_RNDN);
            return n;
        }
        if (need > 1u << 24) throw PrecisionExhausted("floor(exp) did not stabilize");
    }
}

}  // namespace

SmallnessReport check_rotation_smallness(const Schedule& s, int m) {
    if (static_cast<size_t>(m + 1) > s.levels()) throw Error("level m+1 required");
    mpfr_prec_t pr = s.prec;
    const Params& P = s.params;
    SmallnessReport rep;
    rep.m = m;

    // Sharp path: both levels exact and small enough that ||q_m omega|| and
    // n_{q_m} can be formed directly. Resolving ||q_m omega|| ~ 1/q_{m+1}
    // needs about log2(q_m q_{m+1}) bits.
    double xd = s.exact(m)
                    ? (P.b / P.a) * std::pow(mpz_get_d(s.q[m].get_mpz_t()), P.beta)
                    : std::numeric_limits<double>::infinity();
    double bits_needed =
        (s.lnq[m].hi().to_double(MPFR_RNDU) + s.lnq[m + 1].hi().to_double(MPFR_RNDU)) / 0.6931 +
        192.0;
    if (s.exact(m + 1) && s.q[m].fits_slong_p() && xd < 5e4 && bits_needed < 1e5) {
        RotationValue rot =
            rotation_from_schedule(s, static_cast<mpfr_prec_t>(bits_needed));
        Interval lhs = rot.dist(mpz_get_si(s.q[m].get_mpz_t()));
        if (lhs.lo().sign() <= 0) throw PrecisionExhausted("precision exhausted");
        mpz_class n = floor_exp_level(s, m, P.b / P.a);
        Interval ln_n = ln_of_z(n, pr);
        Real expo = Real::of(-(P.a / 2.0 + P.eps), pr);
        Interval ln_rhs(mul(expo, ln_n.hi(), MPFR_RNDD), mul(expo, ln_n.lo(), MPFR_RNDU));
        Interval ln_lhs = lhs.log_enclosure();
        rep.log_lhs = ln_lhs.hi().to_double(MPFR_RNDU);
        rep.log_rhs = ln_rhs.lo().to_double(MPFR_RNDD);
        if (ln_lhs.certainly_less(ln_rhs))
            rep.pass = true;
        else if (ln_rhs.certainly_less(ln_lhs))
            rep.pass = false;
        else
            throw PrecisionExhausted("precision exhausted");
        return rep;
    }

    // Log-space path: lhs = ||q_m omega|| in (1/(q_{m+1}+q_m), 1/q_{m+1}), so
    //   ln lhs in [-(ln q_{m+1} + ln 2), -ln q_{m+1}].
    Real ln2(pr);
    mpfr_const_log2(ln2.get(), MPFR_RNDU);
    Interval ln_lhs(neg(add(s.lnq[m + 1].hi(), ln2, MPFR_RNDU)), neg(s.lnq[m + 1].lo()));

    // x = (b/a) q_m^beta;  n_{q_m} = floor(e^x) >= 1
    Real rba = Real::of(P.b / P.a, pr);
    Real rbeta = Real::of(P.beta, pr);
    Interval qb = Interval(mul(rbeta, s.lnq[m].lo(), MPFR_RNDD), mul(rbeta, s.lnq[m].hi(), MPFR_RNDU))
                      .exp_enclosure();
    Interval x(mul(rba, qb.lo(), MPFR_RNDD), mul(rba, qb.hi(), MPFR_RNDU));
    if (!x.hi().is_finite()) throw PrecisionExhausted("precision exhausted");

    // ln n in [x.lo + log1p(-e^{-x.lo}), x.hi] for n >= 2; if possibly n == 1,
    // widen the lower end to 0.
    Real ln_n_lo(pr), ln_n_hi = x.hi();
    Real ln2lo(pr);
    mpfr_const_log2(ln2lo.get(), MPFR_RNDD);
    if (x.lo().cmp(ln2lo) >= 0) {
        Real emx(pr);
        mpfr_neg(emx.get(), x.lo().get(), MPFR_RNDN);
        emx = exp(emx, MPFR_RNDU, pr);
        mpfr_neg(emx.get(), emx.get(), MPFR_RNDD);
        mpfr_log1p(ln_n_lo.get(), emx.get(), MPFR_RNDD);
        ln_n_lo = add(x.lo(), ln_n_lo, MPFR_RNDD);
        if (ln_n_lo.sign() < 0) ln_n_lo = Real::of(0.0, pr);
    } else {
        ln_n_lo = Real::of(0.0, pr);
    }
    Real expo = Real::of(-(P.a / 2.0 + P.eps), pr);
    Interval ln_rhs(mul(expo, ln_n_hi, MPFR_RNDD), mul(expo, ln_n_lo, MPFR_RNDU));

    rep.log_lhs = ln_lhs.hi().to_double(MPFR_RNDU);
    rep.log_rhs = ln_rhs.lo().to_double(MPFR_RNDD);
    if (ln_lhs.certainly_less(ln_rhs)) {
        rep.pass = true;
    } else if (ln_rhs.certainly_less(ln_lhs)) {
        rep.pass = false;
    } else {
        throw PrecisionExhausted("precision exhausted");
    }
    return rep;
}

mpz_class kappa(int n, int m, const Schedule& s) {
    const mpz_class& qm = s.qz(m);
    const mpz_class& qnm = s.qz(m + n);
    mpz_class k;
    mpz_cdiv_q(k.get_mpz_t(), qnm.get_mpz_t(), qm.get_mpz_t());
    if (k < 1) k = 1;
    return k;
}

RescaledFunction rescale_cover(std::function<double(double)> P, long q) {
    if (q == 0) throw Error("rescale_cover: q must be nonzero");
    double qc = static_cast<double>(q);
    return RescaledFunction{[P = std::move(P), qc](double x) { return P(qc * x) / (qc * qc); }, q};
}

DivisorAlternativeReport divisor_alternative_scan(const RotationValue& omega, const Schedule& s, int n, int m, long vmax) {
    DivisorAlternativeReport rep;
    const mpz_class& qnm = s.qz(n + m);
    const mpz_class& qnm1 = s.qz(n + m + 1);
    Interval thr = Interval::ratio(1, 4 * qnm, omega.prec);
    for (long v = 1; v <= vmax; ++v) {
        Interval d = omega.dist(v);
        if (d.certainly_greater(thr)) continue;
        if (!d.certainly_less(thr)) {
            rep.undecided.push_back(v);
            rep.undecided_widths.push_back(d.width());
            continue;
        }
        rep.candidates++;
        mpz_class vz(v);
        if (vz < qnm) rep.counterexamples.push_back({v, "(i) |v| >= q_{n+m}"});
        bool big = 4 * vz >= qnm1;
        bool multiple = mpz_divisible_p(vz.get_mpz_t(), qnm.get_mpz_t()) != 0;
        if (!big && !multiple)
            rep.counterexamples.push_back({v, "(ii) |v| >= q_{n+m+1}/4 or v = s q_{n+m}"});
    }
    return rep;
}

}  // namespace kamlab::cf
