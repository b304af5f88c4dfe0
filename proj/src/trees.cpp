#include "kamlab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "kamlab/errors.hpp"

namespace kamlab::trees {

namespace {
constexpr long double TWO_PI_L = 6.283185307179586476925286766559L;

void fill_line_momenta(LabeledTree& t) {
    int k = t.order();
    t.line_mom.assign(k, 0);
    for (int i = k - 1; i >= 0; --i) {
        int s = t.nodes[i].sign;
        for (int c : t.nodes[i].kids) s += t.line_mom[c];
        t.line_mom[i] = s;
    }
}

std::string make_key(const LabeledTree& t, int u) {
    std::vector<std::string> ks;
    for (int c : t.nodes[u].kids) ks.push_back(make_key(t, c));
    std::sort(ks.begin(), ks.end());
    std::string out = t.nodes[u].sign > 0 ? "(+" : "(-";
    for (auto& s : ks) out += s;
    out += ")";
    return out;
}

// root sign + a multiset of catalog subtrees -> one canonical tree
LabeledTree compose(int root_sign, const std::vector<const LabeledTree*>& children,
                    long long mult) {
    LabeledTree t;
    t.multiplicity = mult;
    t.nodes.push_back(Node{root_sign, -1, {}});
    for (auto* ch : children) {
        int base = t.order();
        for (int i = 0; i < ch->order(); ++i) {
            Node n = ch->nodes[i];
            n.parent = n.parent < 0 ? 0 : n.parent + base;
            for (int& c : n.kids) c += base;
            t.nodes.push_back(n);
        }
        t.nodes[0].kids.push_back(base);
    }
    fill_line_momenta(t);
    t.key = make_key(t, 0);
    return t;
}

long long factorial_ll(int n) {
    long long r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}
}  // namespace

int LabeledTree::subtree_order(int u) const {
    int n = 1;
    for (int c : nodes[u].kids) n += subtree_order(c);
    return n;
}

Catalog enumerate_catalog(int kmax) {
    if (kmax > 9) throw Error("tree order budget exceeded (k <= 9)");
    if (kmax < 1) throw Error("tree order must be >= 1");
    Catalog cat;
    cat.by_size.resize(kmax);
    for (int sgn : {+1, -1}) {
        LabeledTree t;
        t.nodes.push_back(Node{sgn, -1, {}});
        t.multiplicity = 1;
        fill_line_momenta(t);
        t.key = make_key(t, 0);
        cat.by_size[0].push_back(std::move(t));
    }
    for (int s = 2; s <= kmax; ++s) {
        // flat view of all smaller catalog entries
        std::vector<const LabeledTree*> pool;
        for (int sz = 1; sz < s; ++sz)
            for (const auto& t : cat.by_size[sz - 1]) pool.push_back(&t);
        // multisets over the pool with total size s-1 (indices non-decreasing)
        std::vector<int> chosen;
        std::function<void(size_t, int)> rec = [&](size_t start, int remaining) {
            if (remaining == 0) {
                for (int sgn : {+1, -1}) {
                    std::vector<const LabeledTree*> children;
                    long long mult = 1;
                    int m_running = 0;
                    // grouped multiplicities: multinomial(m; c_1..c_g) * prod mult_i^{c_i},
                    // kept integral via incremental binomials
                    for (size_t i = 0; i < chosen.size();) {
                        size_t jx = i;
                        while (jx < chosen.size() && chosen[jx] == chosen[i]) ++jx;
                        int c = static_cast<int>(jx - i);
                        for (int r = 0; r < c; ++r) {
                            children.push_back(pool[chosen[i]]);
                            mult *= pool[chosen[i]]->multiplicity;
                        }
                        m_running += c;
                        long long binom = 1;
                        for (int t = 1; t <= c; ++t) binom = binom * (m_running - c + t) / t;
                        mult *= binom;
                        i = jx;
                    }
                    int total = sgn;
                    for (auto* ch : children) total += ch->line_mom[0];
                    if (total == 0) continue;  // pruned: zero-momentum root line
                    cat.by_size[s - 1].push_back(compose(sgn, children, mult));
                }
                return;
            }
            for (size_t i = start; i < pool.size(); ++i) {
                int sz = pool[i]->order();
                if (sz > remaining) continue;
                chosen.push_back(static_cast<int>(i));
                rec(i, remaining - sz);
                chosen.pop_back();
            }
        };
        rec(0, s - 1);
    }
    return cat;
}

std::vector<const LabeledTree*> select_trees(const Catalog& cat, int k, long j) {
    std::vector<const LabeledTree*> out;
    for (const auto& t : cat.of(k))
        if (t.line_mom[0] == j) out.push_back(&t);
    return out;
}

LabeledTree build_tree(const std::vector<std::pair<int, int>>& sign_parent) {
    LabeledTree t;
    for (const auto& [sgn, par] : sign_parent) t.nodes.push_back(Node{sgn, par, {}});
    if (t.nodes.empty() || t.nodes[0].parent != -1) throw Error("entry 0 must be the root");
    for (int i = 1; i < t.order(); ++i) {
        if (t.nodes[i].parent < 0 || t.nodes[i].parent >= t.order())
            throw Error("bad parent index");
        t.nodes[t.nodes[i].parent].kids.push_back(i);
    }
    fill_line_momenta(t);
    t.key = make_key(t, 0);
    for (int i = 0; i < t.order(); ++i)
        if (t.line_mom[i] == 0) throw Error("fixture contains a zero-momentum line");
    return t;
}

double Cutoff::chi(double x) const {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    auto f = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
    double a = f(2.0 - x), b = f(x - 1.0);
    return a / (a + b);
}

long long Cutoff::qq(int idx) const {
    if (idx < 0 || static_cast<size_t>(idx) >= q.size()) throw Error("missing exact q level");
    return q[idx];
}

double Cutoff::chi_n(int n, double x) const {
    if (n == 0) return 1.0 - chi(96.0 * static_cast<double>(qq(m + 1)) * x);
    return chi(96.0 * static_cast<double>(qq(n + m)) * x) -
           chi(96.0 * static_cast<double>(qq(n + m + 1)) * x);
}

std::vector<int> Cutoff::admissible(double dist) const {
    std::vector<int> out;
    for (int n = 0; n <= max_scale(); ++n)
        if (chi_n(n, dist) > 0.0) out.push_back(n);
    return out;
}

std::vector<std::vector<int>> admissible_assignments(const LabeledTree& t, const Cutoff& cut,
                                                     const lindstedt::DivisorOracle& oracle,
                                                     long qm) {
    int k = t.order();
    std::vector<std::vector<int>> per_line(k);
    for (int i = 0; i < k; ++i) {
        double d = static_cast<double>(oracle.dist(t.line_mom[i] * qm));
        per_line[i] = cut.admissible(d);
        if (per_line[i].empty()) return {};  // no admissible scale: value vanishes
    }
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k, 0);
    std::function<void(int)> rec = [&](int i) {
        if (i == k) {
            std::vector<int> a(k);
            for (int l = 0; l < k; ++l) a[l] = per_line[l][cur[l]];
            out.push_back(std::move(a));
            return;
        }
        for (cur[i] = 0; cur[i] < static_cast<int>(per_line[i].size()); ++cur[i]) rec(i + 1);
    };
    rec(0);
    return out;
}

std::complex<long double> tree_value(const LabeledTree& t, const std::vector<int>& scales,
                                     const Cutoff& cut, const lindstedt::DivisorOracle& oracle,
                                     long qm) {
    int k = t.order();
    std::complex<long double> val(0, -1);  // the overall -i
    for (int u = 0; u < k; ++u) {
        int mu = static_cast<int>(t.nodes[u].kids.size());
        long double node = powl(TWO_PI_L * static_cast<long double>(qm), mu) /
                           static_cast<long double>(factorial_ll(mu));
        int sgn_pow = (mu + 1) % 2 == 0 ? 1 : t.nodes[u].sign;
        val *= node * static_cast<long double>(sgn_pow);
    }
    for (int l = 0; l < k; ++l) {
        long nu = t.line_mom[l] * qm;
        long double g = oracle.gamma(nu);
        double x = static_cast<double>(oracle.dist(nu));
        long double chi = cut.chi_n(scales[l], x);
        if (chi == 0.0L) return {0, 0};
        val *= chi / g;
    }
    return val;
}

SumCheck sum_check(int k, long j, const Catalog& cat, const Cutoff& cut,
                   const lindstedt::DivisorOracle& oracle, const lindstedt::Table& table) {
    SumCheck sc;
    long qm = table.qm;
    std::complex<long double> total(0, 0);
    for (const auto* t : select_trees(cat, k, j)) {
        sc.trees++;
        // scale sums factorize per line; verify the partition is complete
        std::complex<long double> val(0, -1);
        for (int u = 0; u < k; ++u) {
            int mu = static_cast<int>(t->nodes[u].kids.size());
            long double node = powl(TWO_PI_L * static_cast<long double>(qm), mu) /
                               static_cast<long double>(factorial_ll(mu));
            int sgn_pow = (mu + 1) % 2 == 0 ? 1 : t->nodes[u].sign;
            val *= node * static_cast<long double>(sgn_pow);
        }
        for (int l = 0; l < k; ++l) {
            long nu = t->line_mom[l] * qm;
            double x = static_cast<double>(oracle.dist(nu));
            double chi_total = 0;
            for (int n : cut.admissible(x)) chi_total += cut.chi_n(n, x);
            if (std::fabs(chi_total - 1.0) > 1e-12)
                throw Error("cutoff partition incomplete at nu = " + std::to_string(nu));
            val *= static_cast<long double>(chi_total) / oracle.gamma(nu);
        }
        total += static_cast<long double>(t->multiplicity) * val;
    }
    total /= powl(2.0L, k);
    sc.lhs = total;
    sc.rhs = table.coeff(k, j);
    long double den = std::max(std::abs(sc.rhs), std::abs(sc.lhs));
    sc.relerr = den > 0 ? static_cast<double>(std::abs(sc.lhs - sc.rhs) / den) : 0.0;
    return sc;
}

ClusterReport find_clusters(const LabeledTree& t, const std::vector<int>& scales) {
    int k = t.order();
    ClusterReport rep;
    for (int l = 0; l < k; ++l) rep.N_n[scales[l]]++;

    std::vector<int> present(scales);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());

    for (int n : present) {
        // connected components of lines with scale <= n (adjacency: shared node)
        std::vector<int> comp(k, -1);
        int nc = 0;
        for (int seed = 0; seed < k; ++seed) {
            if (scales[seed] > n || comp[seed] >= 0) continue;
            std::vector<int> stack{seed};
            comp[seed] = nc;
            while (!stack.empty()) {
                int l = stack.back();
                stack.pop_back();
                for (int l2 = 0; l2 < k; ++l2) {
                    if (scales[l2] > n || comp[l2] >= 0) continue;
                    bool adj = t.nodes[l].parent == l2 || t.nodes[l2].parent == l ||
                               (t.nodes[l].parent >= 0 && t.nodes[l].parent == t.nodes[l2].parent);
                    if (adj) {
                        comp[l2] = nc;
                        stack.push_back(l2);
                    }
                }
            }
            ++nc;
        }
        for (int c = 0; c < nc; ++c) {
            Cluster cl;
            int maxsc = -1;
            for (int l = 0; l < k; ++l)
                if (comp[l] == c) {
                    cl.lines.push_back(l);
                    maxsc = std::max(maxsc, scales[l]);
                }
            if (maxsc != n) continue;  // counted at its own scale
            cl.scale = n;
            std::vector<char> cov(k, 0);
            for (int l : cl.lines) {
                cov[l] = 1;  // lower endpoint (the node the line exits)
                if (t.nodes[l].parent >= 0) cov[t.nodes[l].parent] = 1;
            }
            for (int u = 0; u < k; ++u)
                if (cov[u]) {
                    cl.covered.push_back(u);
                    cl.nuV += t.nodes[u].sign;
                }
            cl.kT = static_cast<int>(cl.covered.size());
            std::vector<char> inT(k, 0);
            for (int l : cl.lines) inT[l] = 1;
            for (int u : cl.covered) {
                if (!inT[u]) {
                    // u's exit line leaves the cluster (or is the root line)
                    cl.exiting = (cl.exiting == -1 || t.nodes[u].parent < 0) ? u : cl.exiting;
                }
                for (int c2 : t.nodes[u].kids)
                    if (!inT[c2] && !cov[c2]) cl.entering.push_back(c2);
            }
            // exit goes to a node outside the cluster; the root line counts as
            // exiting only when its node is covered and the line not internal
            if (cl.exiting >= 0) cl.n_o = scales[cl.exiting];
            if (!cl.entering.empty()) {
                cl.n_i = scales[cl.entering.front()];
                for (int e : cl.entering) cl.n_i = std::min(cl.n_i, scales[e]);
            }
            rep.clusters.push_back(std::move(cl));
        }
    }
    return rep;
}

void detect_resonances(ClusterReport& rep, const LabeledTree& t, const std::vector<int>& scales,
                       const Cutoff& cut, long qm) {
    if (qm != cut.qq(cut.m)) throw Error("mode unit must match the schedule level q_m");
    for (auto& cl : rep.clusters) {
        cl.resonance = false;
        if (cl.exiting < 0 || cl.entering.empty()) continue;
        if (cl.nuV != 0) continue;  // (i)
        int lV = static_cast<int>(cl.entering.size());
        int nR = std::min(cl.n_i, cl.n_o);
        // (ii): all entering on the minimal scale except at most one higher
        int higher = 0;
        for (int e : cl.entering)
            if (scales[e] != cl.n_i) ++higher;
        if (higher > 1) continue;
        // (iii)
        if (lV >= 2 && !(cl.n_i <= cl.n_o)) continue;
        if (lV == 1 && std::abs(cl.n_i - cl.n_o) > 1) continue;
        // (iv): k_V < kappa(nR) = ceil(q_{m+nR}/q_m)
        long long qmn = cut.qq(cut.m + nR);
        long long kap = (qmn + qm - 1) / qm;
        if (kap < 1) kap = 1;
        if (!(cl.kT < kap)) continue;
        // (v)/(vi)
        long long qn1 = cut.qq(cut.m + nR + 1);
        long long qn = cut.qq(cut.m + nR);
        if (qn1 <= 4 * qn * qm) {
            if (lV != 1) continue;
        } else if (lV >= 2) {
            // entering subtree orders against q_{n+m+1}/(4 qm), /(8 qm)
            long long k0 = 0, big = 0;
            for (int e : cl.entering) {
                long long ord = t.subtree_order(e);
                if (4 * qm * ord >= qn1)
                    ++big;
                else
                    k0 += ord;
            }
            bool cond;
            if (big == 1) {
                cond = 8 * qm * k0 < qn1;
            } else if (big == 0) {
                cond = 4 * qm * (k0 + cl.kT) < qn1;
            } else {
                cond = false;
            }
            if (!cond) continue;
        }
        cl.resonance = true;
        cl.nR = nR;
        rep.P_n[cl.scale]++;
        rep.NR_n[nR]++;
    }
}

CountingCheck counting_check(const LabeledTree& t, const std::vector<int>& scales,
                             const Cutoff& cut, long qm) {
    ClusterReport rep = find_clusters(t, scales);
    detect_resonances(rep, t, scales, cut, qm);
    CountingCheck out;
    int k = t.order();
    int maxn = *std::max_element(scales.begin(), scales.end());
    for (int n = 0; n <= maxn; ++n) {
        int M = (rep.N_n.count(n) ? rep.N_n[n] : 0) + (rep.P_n.count(n) ? rep.P_n[n] : 0);
        int NR = rep.NR_n.count(n) ? rep.NR_n[n] : 0;
        if (M == 0 && NR == 0) continue;
        long long qnm = cut.qq(cut.m + n);
        bool ok = static_cast<long long>(M - NR) * qnm <= 2 * qm * static_cast<long long>(k);
        out.rows.push_back({n, M, NR, qnm, ok});
        if (!ok) out.pass = false;
    }
    return out;
}

ScaleWindowReport scale_window_scan(const Cutoff& cut, const cf::RotationValue& omega, int nmax, long vmax) {
    ScaleWindowReport rep;
    for (long v = 1; v <= vmax; ++v) {
        Interval d = omega.dist(v);
        if (d.width() > 1e-30 * std::max(1e-300, d.mid())) {
            rep.undecided.push_back(v);
            continue;
        }
        double x = d.mid();
        for (int n = 0; n <= nmax && n + cut.m + 1 < static_cast<int>(cut.q.size()); ++n) {
            double lo = 1.0 / (768.0 * static_cast<double>(cut.qq(n + cut.m + 1)));
            double hi = 1.0 / (8.0 * static_cast<double>(cut.qq(n + cut.m)));
            if (x < lo || x > hi) continue;
            rep.checked++;
            for (int np : cut.admissible(x))
                if (np < n - 8 || np > n + 8) rep.violations.push_back({v, np});
        }
    }
    return rep;
}

ValueBound value_bound_check(const LabeledTree& t, const std::vector<int>& scales,
                             const Cutoff& cut, const lindstedt::DivisorOracle& oracle, long qm) {
    ValueBound vb;
    int k = t.order();
    std::complex<long double> val = tree_value(t, scales, cut, oracle, qm);
    vb.value_abs = static_cast<double>(std::abs(val));
    double logbase = k * std::log(2.0 * static_cast<double>(qm));
    std::map<int, int> N_n;
    for (int l = 0; l < k; ++l) N_n[scales[l]]++;
    for (auto& [n, cnt] : N_n)
        logbase += 2.0 * cnt * std::log(768.0 * static_cast<double>(cut.qq(n + cut.m + 1)));
    vb.base = std::exp(logbase);
    vb.ratio_root = vb.value_abs > 0 ? std::exp((std::log(vb.value_abs) - logbase) / k) : 0.0;
    return vb;
}

nlohmann::ordered_json tree_to_json(const LabeledTree& t, const std::vector<int>* scales) {
    std::function<nlohmann::ordered_json(int)> rec = [&](int u) {
        nlohmann::ordered_json j;
        j["sign"] = t.nodes[u].sign;
        j["children"] = nlohmann::ordered_json::array();
        for (int c : t.nodes[u].kids) j["children"].push_back(rec(c));
        return j;
    };
    nlohmann::ordered_json out;
    out["tree"] = rec(0);
    out["multiplicity"] = t.multiplicity;
    out["momenta"] = t.line_mom;
    if (scales) out["scales"] = *scales;
    return out;
}

}  // namespace kamlab::trees
