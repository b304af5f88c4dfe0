#include "kamlab/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "kamlab/errors.hpp"

namespace kamlab::renorm {

namespace {

bool subset(const std::vector<int>& a, const std::vector<int>& b) {
    // a, b sorted; a strictly inside b
    return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool contains_node(const std::vector<int>& v, int u) {
    return std::binary_search(v.begin(), v.end(), u);
}

long long binom_ll(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

long double rep_centered(long double x) {
    long double r = x - std::nearbyint(static_cast<double>(x));
    if (r > 0.5L) r -= 1.0L;
    if (r <= -0.5L) r += 1.0L;
    return r;
}

constexpr long double TWO_PI_L = 6.283185307179586476925286766559L;

}  // namespace

std::vector<std::vector<Resonance>> generations(const trees::LabeledTree& t,
                                                const std::vector<int>& scales,
                                                const trees::Cutoff& cut, long qm) {
    trees::ClusterReport rep = trees::find_clusters(t, scales);
    trees::detect_resonances(rep, t, scales, cut, qm);
    std::vector<Resonance> all;
    for (const auto& cl : rep.clusters) {
        if (!cl.resonance) continue;
        Resonance r;
        r.nodes = cl.covered;
        std::sort(r.nodes.begin(), r.nodes.end());
        r.entering = cl.entering;
        r.exit_node = cl.exiting;
        r.scale = cl.scale;
        r.n_i = cl.n_i;
        r.n_o = cl.n_o;
        r.nR = cl.nR;
        r.kV = cl.kT;
        all.push_back(std::move(r));
    }
    std::vector<std::vector<Resonance>> gens;
    if (all.empty()) return gens;
    // generation 1: not contained in any other; generation j+1: maximal within
    // a generation-j member
    std::vector<int> parent_gen(all.size(), 0);
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = 0; j < all.size(); ++j)
            if (i != j && subset(all[i].nodes, all[j].nodes)) parent_gen[i]++;
    // depth of nesting = number of strict supersets
    int maxd = 0;
    for (size_t i = 0; i < all.size(); ++i) maxd = std::max(maxd, parent_gen[i]);
    gens.resize(maxd + 1);
    for (size_t i = 0; i < all.size(); ++i) gens[parent_gen[i]].push_back(all[i]);
    return gens;
}

namespace {

// V_0 of a resonance: nodes not inside any strict sub-resonance
std::vector<int> v0_nodes(const Resonance& V, const std::vector<Resonance>& all) {
    std::vector<int> out;
    for (int u : V.nodes) {
        bool inside = false;
        for (const auto& S : all) {
            if (S.nodes == V.nodes) continue;
            if (subset(S.nodes, V.nodes) && contains_node(S.nodes, u)) inside = true;
        }
        if (!inside) out.push_back(u);
    }
    return out;
}

// reattachment targets for an entering line that currently enters node w
std::vector<int> targets_for(const Resonance& V, const std::vector<Resonance>& all, int w) {
    // minimal sub-resonance containing w, if any
    const Resonance* minimal = nullptr;
    for (const auto& S : all) {
        if (S.nodes == V.nodes || !subset(S.nodes, V.nodes)) continue;
        if (!contains_node(S.nodes, w)) continue;
        if (!minimal || subset(S.nodes, minimal->nodes)) minimal = &S;
    }
    if (!minimal) return v0_nodes(V, all);
    return v0_nodes(*minimal, all);
}

trees::LabeledTree remake(const trees::LabeledTree& base, const Resonance& V,
                          const std::vector<int>& entering, const std::vector<int>& attach,
                          bool invert) {
    trees::LabeledTree t = base;
    for (size_t l = 0; l < entering.size(); ++l) {
        int c = entering[l];
        int old_parent = t.nodes[c].parent;
        auto& kids = t.nodes[old_parent].kids;
        kids.erase(std::find(kids.begin(), kids.end(), c));
        t.nodes[c].parent = attach[l];
        t.nodes[attach[l]].kids.push_back(c);
    }
    if (invert)
        for (int u : V.nodes) t.nodes[u].sign = -t.nodes[u].sign;
    // refresh momenta and key
    t.line_mom.assign(t.order(), 0);
    std::function<int(int)> fill = [&](int u) {
        int s = t.nodes[u].sign;
        for (int c : t.nodes[u].kids) s += fill(c);
        t.line_mom[u] = s;
        return s;
    };
    fill(0);
    std::function<std::string(int)> key = [&](int u) {
        std::vector<std::string> ks;
        for (int c : t.nodes[u].kids) ks.push_back(key(c));
        std::sort(ks.begin(), ks.end());
        std::string out = t.nodes[u].sign > 0 ? "(+" : "(-";
        for (auto& s : ks) out += s;
        out += ")";
        return out;
    };
    t.key = key(0);
    return t;
}

long long member_weight(const trees::LabeledTree& t, const Resonance& V) {
    long long w = 1;
    for (int u : V.nodes) {
        int m = static_cast<int>(t.nodes[u].kids.size());
        int s = 0;
        for (int c : t.nodes[u].kids)
            if (contains_node(V.nodes, c)) ++s;
        w *= binom_ll(m, s);
    }
    return w;
}

}  // namespace

Family build_family(const trees::LabeledTree& t, const Resonance& V,
                    const std::vector<Resonance>& all) {
    if (V.kV > 4 || V.entering.size() > 2) throw Error("resonance family budget exceeded");
    Family fam;
    std::vector<std::vector<int>> tg;
    for (int c : V.entering) tg.push_back(targets_for(V, all, t.nodes[c].parent));
    fam.reattach_choices = 1;
    for (auto& v : tg) fam.reattach_choices *= static_cast<long long>(v.size());

    std::vector<size_t> idx(tg.size(), 0);
    for (;;) {
        std::vector<int> attach;
        for (size_t l = 0; l < tg.size(); ++l) attach.push_back(tg[l][idx[l]]);
        for (bool inv : {false, true}) {
            FamilyMember m;
            m.tree = remake(t, V, V.entering, attach, inv);
            m.attach = attach;
            m.inverted = inv;
            m.weight = member_weight(m.tree, V);
            fam.total_weight += m.weight;
            fam.members.push_back(std::move(m));
        }
        // odometer over attachment choices
        size_t l = 0;
        for (; l < idx.size(); ++l) {
            if (++idx[l] < tg[l].size()) break;
            idx[l] = 0;
        }
        if (l == idx.size()) break;
        if (idx.empty()) break;
    }
    return fam;
}

namespace {

struct FactorView {
    std::vector<int> internal_nodes;       // u in V, u != exit; line e_u internal
    std::vector<long double> x0;           // centered omega * nu0 per internal line
    std::vector<int> line_scale;           // assigned scale per internal line
    std::vector<std::vector<char>> feeds;  // [entering][internal]
    std::vector<long double> mu;           // centered omega * nu per entering line
    long double node_factor = 1;           // sign-carrying product over V's nodes
};

FactorView make_view(const trees::LabeledTree& t, const std::vector<int>& scales,
                     const Resonance& V, const lindstedt::DivisorOracle& oracle, long qm) {
    FactorView fv;
    long double om = oracle.omega_mid();
    for (int u : V.nodes) {
        if (u == V.exit_node) continue;
        fv.internal_nodes.push_back(u);
        // nu0: mode sum over V-nodes in the subtree of u
        std::function<int(int)> sum_v = [&](int w) {
            int s = contains_node(V.nodes, w) ? t.nodes[w].sign : 0;
            if (!contains_node(V.nodes, w)) return 0;  // external subtrees carry entering momenta
            for (int c : t.nodes[w].kids) s += sum_v(c);
            return s;
        };
        long nu0 = static_cast<long>(sum_v(u)) * qm;
        fv.x0.push_back(rep_centered(om * static_cast<long double>(nu0)));
        fv.line_scale.push_back(scales[u]);
    }
    for (int c : V.entering) {
        long nu = static_cast<long>(t.line_mom[c]) * qm;
        fv.mu.push_back(rep_centered(om * static_cast<long double>(nu)));
    }
    fv.feeds.assign(V.entering.size(), std::vector<char>(fv.internal_nodes.size(), 0));
    for (size_t l = 0; l < V.entering.size(); ++l) {
        int w = t.nodes[V.entering[l]].parent;  // node the line enters
        while (w >= 0 && contains_node(V.nodes, w) && w != V.exit_node) {
            for (size_t i = 0; i < fv.internal_nodes.size(); ++i)
                if (fv.internal_nodes[i] == w) fv.feeds[l][i] = 1;
            w = t.nodes[w].parent;
        }
    }
    for (int u : V.nodes) {
        int m = static_cast<int>(t.nodes[u].kids.size());
        long long fact = 1;
        for (int i = 2; i <= m; ++i) fact *= i;
        long double nf = powl(TWO_PI_L * static_cast<long double>(qm), m) /
                         static_cast<long double>(fact);
        int sgn = (m + 1) % 2 == 0 ? 1 : t.nodes[u].sign;
        fv.node_factor *= nf * static_cast<long double>(sgn);
    }
    return fv;
}

long double cutoff_propagator(const trees::Cutoff& cut, int n, long double x) {
    double chi = cut.chi_n(n, std::fabs(static_cast<double>(x)));
    if (chi == 0.0) return 0.0L;
    long double g = -4.0L * sinl(3.14159265358979323846264338327950288L * x) *
                    sinl(3.14159265358979323846264338327950288L * x);
    if (fabsl(g) < 1e-300L)
        throw Error("resonance factor singular at localization point");
    return static_cast<long double>(chi) / g;
}

long double factor_at(const FactorView& fv, const trees::Cutoff& cut,
                      const std::vector<long double>& mu, const Propagator& prop) {
    long double out = fv.node_factor;
    for (size_t i = 0; i < fv.internal_nodes.size(); ++i) {
        long double x = fv.x0[i];
        for (size_t l = 0; l < mu.size(); ++l)
            if (fv.feeds[l][i]) x += mu[l];
        out *= prop ? prop(fv.line_scale[i], x) : cutoff_propagator(cut, fv.line_scale[i], x);
    }
    return out;
}

}  // namespace

std::complex<long double> localized_factor(const trees::LabeledTree& t,
                                           const std::vector<int>& scales, const Resonance& V,
                                           const trees::Cutoff& cut,
                                           const lindstedt::DivisorOracle& oracle, long qm, int z,
                                           double fd_step, const Propagator& prop) {
    if (z == 0) return {0, 0};
    FactorView fv = make_view(t, scales, V, oracle, qm);
    std::vector<long double> zero(fv.mu.size(), 0.0L);
    long double v0 = factor_at(fv, cut, zero, prop);
    if (z == 1) return {v0, 0};
    // z == 2: first-order Taylor terms mu_l d/dmu_l at 0 by central differences
    long double total = v0;
    for (size_t l = 0; l < fv.mu.size(); ++l) {
        long double h = static_cast<long double>(fd_step) *
                        std::max(fabsl(fv.mu[l]), 1e-3L);
        std::vector<long double> up(zero), dn(zero);
        up[l] = h;
        dn[l] = -h;
        long double d =
            (factor_at(fv, cut, up, prop) - factor_at(fv, cut, dn, prop)) / (2.0L * h);
        total += fv.mu[l] * d;
    }
    return {total, 0};
}

CancellationReport cancellation_check(const trees::LabeledTree& t, const std::vector<int>& scales,
                                      const Resonance& V, const std::vector<Resonance>& all,
                                      const trees::Cutoff& cut,
                                      const lindstedt::DivisorOracle& oracle, long qm, int z,
                                      const Propagator& prop) {
    Family fam = build_family(t, V, all);
    CancellationReport rep;
    std::complex<long double> sum(0, 0);
    long double abssum = 0;
    for (auto& m : fam.members) {
        std::complex<long double> lv =
            localized_factor(m.tree, scales, V, cut, oracle, qm, z, 1e-6, prop);
        m.localized = lv;
        sum += static_cast<long double>(m.weight) * lv;
        abssum += static_cast<long double>(m.weight) * std::abs(lv);
    }
    rep.sum = sum;
    rep.abs_sum = abssum;
    rep.members = fam.members.size();
    rep.relative = abssum > 0 ? static_cast<double>(std::abs(sum) / abssum) : 0.0;
    rep.pass = abssum == 0 || rep.relative < 1e-9;
    return rep;
}

bool fd_consistent(const trees::LabeledTree& t, const std::vector<int>& scales, const Resonance& V,
                   const trees::Cutoff& cut, const lindstedt::DivisorOracle& oracle, long qm,
                   double tol) {
    auto a = localized_factor(t, scales, V, cut, oracle, qm, 2, 1e-6);
    auto b = localized_factor(t, scales, V, cut, oracle, qm, 2, 5e-7);
    long double scale = std::max({std::abs(a), std::abs(b), 1e-30L});
    return static_cast<double>(std::abs(a - b) / scale) < tol;
}

std::vector<Fixture> standard_fixtures() {
    std::vector<Fixture> out;
    // two-node zero-sum block, one entering line; order-0 localization
    {
        Fixture f;
        f.name = "pair-z1";
        f.tree = trees::build_tree({{+1, -1}, {-1, 0}, {+1, 1}, {+1, 2}});
        f.scales = {0, 2, 0, 2};
        f.z = 1;
        out.push_back(f);
        f.name = "pair-z0";
        f.z = 0;
        out.push_back(f);
    }
    // four-node zero-sum chain, one entering line; order-1 localization
    {
        Fixture f;
        f.name = "quad-z2";
        f.tree = trees::build_tree(
            {{+1, -1}, {-1, 0}, {-1, 1}, {+1, 2}, {+1, 3}, {+1, 4}});
        f.scales = {0, 2, 0, 0, 0, 2};
        f.z = 2;
        out.push_back(f);
    }
    // nested pair: inner two-node resonance inside a four-node one
    {
        Fixture f;
        f.name = "nested-z2";
        f.tree = trees::build_tree(
            {{+1, -1}, {-1, 0}, {-1, 1}, {+1, 2}, {+1, 3}, {+1, 4}});
        f.scales = {0, 3, 1, 0, 1, 3};
        f.z = 2;
        f.generic_prop = true;
        out.push_back(f);
    }
    // two entering lines (needs the fast level-3 jump of the full toy head);
    // with two entering lines the group cancels the order-0 localized part
    {
        Fixture f;
        f.name = "pair-l2-z1";
        f.head = {0, 2, 4, 20};
        f.tree = trees::build_tree({{+1, -1}, {+1, 0}, {-1, 1}, {-1, 2}, {-1, 1}});
        f.scales = {0, 1, 0, 1, 1};
        f.z = 1;
        out.push_back(f);
    }
    return out;
}

Propagator generic_even_propagator() {
    return [](int n, long double x) {
        return 1.0L / (0.7L + static_cast<long double>(n) + x * x) +
               0.3L * cosl(3.0L * x) / (1.0L + static_cast<long double>(n));
    };
}

nlohmann::ordered_json family_to_json(const Family& fam) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& m : fam.members) {
        nlohmann::ordered_json j = trees::tree_to_json(m.tree);
        j["attach"] = m.attach;
        j["inverted"] = m.inverted;
        j["weight"] = m.weight;
        j["localized"] = {static_cast<double>(m.localized.real()),
                          static_cast<double>(m.localized.imag())};
        arr.push_back(std::move(j));
    }
    return {{"members", arr}};
}

}  // namespace kamlab::renorm
