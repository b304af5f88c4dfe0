#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "kamlab/cf.hpp"
#include "kamlab/lindstedt.hpp"

namespace kamlab::trees {

struct Node {
    int sign = 1;  // mode label nu_u = sign * qm
    int parent = -1;
    std::vector<int> kids;
};

/// Rooted tree with +-1 mode labels, one canonical representative per
/// sibling-permutation class. multiplicity counts the ordered realizations,
/// so weighted sums over the catalog reproduce sums over plain ordered trees.
struct LabeledTree {
    std::vector<Node> nodes;  // index 0 is the last node (root line exits it)
    long long multiplicity = 1;
    std::vector<int> line_mom;  // per node: momentum of its exit line, in qm units
    std::string key;

    int order() const { return static_cast<int>(nodes.size()); }
    int subtree_order(int u) const;
};

/// All canonical signed trees of sizes 1..kmax with every line momentum
/// nonzero. Hard budget kmax <= 9.
struct Catalog {
    std::vector<std::vector<LabeledTree>> by_size;  // by_size[s-1]
    const std::vector<LabeledTree>& of(int k) const { return by_size.at(k - 1); }
};
Catalog enumerate_catalog(int kmax);

/// Trees of order k with root momentum j (in qm units).
std::vector<const LabeledTree*> select_trees(const Catalog& cat, int k, long j);

/// Hand-built tree from (sign, parent) pairs; entry 0 must be the root
/// (parent -1). Used for fixtures.
LabeledTree build_tree(const std::vector<std::pair<int, int>>& sign_parent);

/// Multiscale cutoff partition built on a desk schedule. chi is the standard
/// C^inf smoothstep, exactly 1 below 1 and exactly 0 above 2.
struct Cutoff {
    std::vector<long long> q;
    int m = 0;

    double chi(double x) const;
    double chi_n(int n, double x) const;
    int max_scale() const { return static_cast<int>(q.size()) - m - 2; }
    long long qq(int idx) const;  // q[idx] with "missing exact q level" guard
    std::vector<int> admissible(double dist) const;
};

/// Per-line scale assignments with nonvanishing cutoff factors.
std::vector<std::vector<int>> admissible_assignments(const LabeledTree& t, const Cutoff& cut,
                                                     const lindstedt::DivisorOracle& oracle,
                                                     long qm);

/// Value of a tree under a fixed scale assignment. The normalization matches
/// the coefficient recurrence: summing (multiplicity * value / 2^k) over the
/// catalog and over scale assignments reproduces u^{(k)}_nu.
std::complex<long double> tree_value(const LabeledTree& t, const std::vector<int>& scales,
                                     const Cutoff& cut, const lindstedt::DivisorOracle& oracle,
                                     long qm);

struct SumCheck {
    std::complex<long double> lhs{0, 0}, rhs{0, 0};
    double relerr = 0;
    size_t trees = 0;
};
SumCheck sum_check(int k, long j, const Catalog& cat, const Cutoff& cut,
                   const lindstedt::DivisorOracle& oracle, const lindstedt::Table& table);

struct Cluster {
    std::vector<int> lines;
    std::vector<int> covered;  // nodes internal to the cluster
    int scale = 0;             // max internal line scale
    int kT = 0;
    long nuV = 0;  // total mode sum, qm units
    std::vector<int> entering;  // node indices whose exit line enters the cluster
    int exiting = -1;           // node whose exit line leaves the cluster, -1 if none
    int n_i = -1, n_o = -1;
    bool resonance = false;
    int nR = -1;
};

struct ClusterReport {
    std::vector<Cluster> clusters;
    std::map<int, int> N_n;   // lines per scale
    std::map<int, int> P_n;   // resonances per cluster scale
    std::map<int, int> NR_n;  // resonances per resonance scale
};

ClusterReport find_clusters(const LabeledTree& t, const std::vector<int>& scales);

/// Flags the clusters satisfying all resonance conditions. qm must equal
/// q[m] of the cutoff's schedule.
void detect_resonances(ClusterReport& rep, const LabeledTree& t, const std::vector<int>& scales,
                       const Cutoff& cut, long qm);

struct CountingRow {
    int n;
    int M_n;
    int NR_n;
    long long q_nm;
    bool ok;
};
struct CountingCheck {
    bool pass = true;
    std::vector<CountingRow> rows;
};
/// Siegel-Brjuno count: M_n <= 2 qm k / q_{n+m} + N^R_n per scale.
CountingCheck counting_check(const LabeledTree& t, const std::vector<int>& scales,
                             const Cutoff& cut, long qm);

struct ScaleWindowReport {
    std::vector<std::pair<long, int>> violations;  // (nu, offending scale)
    std::vector<long> undecided;
    long checked = 0;
};
ScaleWindowReport scale_window_scan(const Cutoff& cut, const cf::RotationValue& omega, int nmax, long vmax);

struct ValueBound {
    double value_abs = 0;
    double base = 0;     // (2 qm)^k prod_n (768 q_{n+m+1})^{2 N_n}
    double ratio_root = 0;  // (value/base)^{1/k}
};
ValueBound value_bound_check(const LabeledTree& t, const std::vector<int>& scales,
                             const Cutoff& cut, const lindstedt::DivisorOracle& oracle, long qm);

nlohmann::ordered_json tree_to_json(const LabeledTree& t, const std::vector<int>* scales = nullptr);

}  // namespace kamlab::trees
