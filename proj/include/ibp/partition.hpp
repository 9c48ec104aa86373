#pragma once

// Deterministic-encoding information bottleneck over set partitions of the
// source space: strict similarity, partition information loss via the KL
// mixture formula, the L1 bounds it implies, exhaustive and agglomerative
// solvers, and the induced paraphrase distributions.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ibp/prob.hpp"

namespace ibp {

/// A set partition of the source items in canonical restricted-growth form:
/// the first occurrence of each cluster id appears in increasing order
/// 0, 1, 2, ...
struct Partition {
    std::vector<std::size_t> assignment;

    std::size_t size() const { return assignment.size(); }

    std::size_t cluster_count() const {
        std::size_t c = 0;
        for (std::size_t a : assignment) c = std::max(c, a + 1);
        return c;
    }

    std::vector<std::vector<std::size_t>> clusters() const {
        std::vector<std::vector<std::size_t>> out(cluster_count());
        for (std::size_t i = 0; i < assignment.size(); ++i)
            out[assignment[i]].push_back(i);
        return out;
    }

    bool canonical() const {
        std::size_t next = 0;
        for (std::size_t a : assignment) {
            if (a > next) return false;
            if (a == next) ++next;
        }
        return !assignment.empty();
    }

    /// Relabel an arbitrary assignment into restricted-growth form.
    static Partition canonicalize(const std::vector<std::size_t>& raw) {
        std::vector<std::size_t> remap(raw.size(), std::numeric_limits<std::size_t>::max());
        Partition p;
        p.assignment.reserve(raw.size());
        std::size_t next = 0;
        for (std::size_t a : raw) {
            if (a >= remap.size()) throw std::invalid_argument("Partition: cluster id out of range");
            if (remap[a] == std::numeric_limits<std::size_t>::max()) remap[a] = next++;
            p.assignment.push_back(remap[a]);
        }
        return p;
    }

    static Partition identity(std::size_t n) {
        Partition p;
        p.assignment.resize(n);
        for (std::size_t i = 0; i < n; ++i) p.assignment[i] = i;
        return p;
    }

    static Partition single_cluster(std::size_t n) {
        Partition p;
        p.assignment.assign(n, 0);
        return p;
    }

    bool operator==(const Partition& o) const = default;
};

inline constexpr std::size_t kEnumerationCeiling = 12; // Bell(12) = 4,213,597

/// Yields every set partition of n items exactly once, in canonical
/// restricted-growth lexicographic order.
class PartitionEnumerator {
public:
    explicit PartitionEnumerator(std::size_t n) : n_(n) {
        if (n < 1 || n > kEnumerationCeiling)
            throw std::length_error("PartitionEnumerator: n must be in [1, 12]");
        a_.assign(n, 0);
        b_.assign(n, 0); // b[i] = 1 + max(a[0..i-1])
        for (std::size_t i = 1; i < n; ++i) b_[i] = 1;
        fresh_ = true;
    }

    std::optional<Partition> next() {
        if (fresh_) {
            fresh_ = false;
            return Partition{a_};
        }
        // Increment the restricted-growth string.
        for (std::size_t i = n_; i-- > 1;) {
            if (a_[i] < b_[i]) {
                ++a_[i];
                std::size_t m = std::max(b_[i], a_[i] + 1);
                for (std::size_t j = i + 1; j < n_; ++j) {
                    a_[j] = 0;
                    b_[j] = m;
                }
                return Partition{a_};
            }
        }
        return std::nullopt;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> a_, b_;
    bool fresh_;
};

/// 1 iff the two sources induce the same translation distribution within
/// L1 tolerance tol.
inline int strict_similarity(const World& world, const std::string& x1, const std::string& x2,
                             double tol = 1e-9) {
    if (tol < 0.0) throw std::invalid_argument("strict_similarity: tol must be >= 0");
    const JointTable& j = world.joint;
    ProbVector r1 = row_conditional(j, j.x_index(x1));
    ProbVector r2 = row_conditional(j, j.x_index(x2));
    return l1_distance(r1, r2) <= tol ? 1 : 0;
}

struct ClusterReport {
    std::size_t cluster = 0;
    std::vector<std::string> members;
    ProbVector mixture;                       // P(y | x in S)
    std::vector<double> weights;              // alpha_i
    std::vector<ProbVector> partial_mixtures; // member i skipped, renormalized
    std::vector<double> partial_weights;      // beta_i = 1 - alpha_i
};

/// Mixture P(y|x in S) = sum_i alpha_i P(y|x_i) with alpha_i proportional to
/// P(x_i), plus the leave-one-out partial mixtures.
inline ClusterReport cluster_mixture(const World& world, const std::vector<std::string>& members) {
    if (members.empty())
        throw std::invalid_argument("cluster_mixture: empty member list");
    const JointTable& j = world.joint;
    ProbVector px = x_marginal(j);

    std::vector<std::size_t> idx;
    idx.reserve(members.size());
    for (const auto& m : members) idx.push_back(j.x_index(m));

    double total = 0.0;
    for (std::size_t i : idx) total += px.weights[i];

    ClusterReport rep;
    rep.members = members;
    std::vector<ProbVector> rows;
    rows.reserve(idx.size());
    for (std::size_t i : idx) rows.push_back(row_conditional(j, i));

    std::vector<double> mix(j.ny(), 0.0);
    for (std::size_t m = 0; m < idx.size(); ++m) {
        double alpha = px.weights[idx[m]] / total;
        rep.weights.push_back(alpha);
        rep.partial_weights.push_back(1.0 - alpha);
        for (std::size_t y = 0; y < j.ny(); ++y) mix[y] += alpha * rows[m].weights[y];
    }
    rep.mixture = ProbVector{j.y_labels, std::move(mix)};
    rep.mixture.validate();

    if (idx.size() > 1) {
        for (std::size_t skip = 0; skip < idx.size(); ++skip) {
            double rest = total - px.weights[idx[skip]];
            std::vector<double> pm(j.ny(), 0.0);
            for (std::size_t m = 0; m < idx.size(); ++m) {
                if (m == skip) continue;
                double w = px.weights[idx[m]] / rest;
                for (std::size_t y = 0; y < j.ny(); ++y) pm[y] += w * rows[m].weights[y];
            }
            rep.partial_mixtures.push_back(ProbVector{j.y_labels, std::move(pm)});
        }
    }
    return rep;
}

/// Information loss I(X,Y) - I(T,Y) of a partition, computed as
/// sum_S sum_i P(x_i) KL(P(y|x_i) || P(y|S)).
inline double info_loss(const World& world, const Partition& part) {
    const JointTable& j = world.joint;
    if (part.size() != j.nx())
        throw std::invalid_argument("info_loss: partition size mismatch");
    ProbVector px = x_marginal(j);
    double loss = 0.0;
    for (const auto& cluster : part.clusters()) {
        if (cluster.size() < 2) continue; // singleton clusters lose nothing
        std::vector<std::string> members;
        for (std::size_t i : cluster) members.push_back(j.x_labels[i]);
        ClusterReport rep = cluster_mixture(world, members);
        for (std::size_t m = 0; m < cluster.size(); ++m) {
            ProbVector row = row_conditional(j, cluster[m]);
            loss += px.weights[cluster[m]] * kl_divergence(row, rep.mixture);
        }
    }
    return std::max(loss, 0.0);
}

/// The coarsened joint over (T, Y) induced by a partition.
inline JointTable coarsen_joint(const World& world, const Partition& part) {
    const JointTable& j = world.joint;
    if (part.size() != j.nx())
        throw std::invalid_argument("coarsen_joint: partition size mismatch");
    JointTable out;
    std::size_t nt = part.cluster_count();
    out.y_labels = j.y_labels;
    for (std::size_t t = 0; t < nt; ++t) out.x_labels.push_back("t" + std::to_string(t));
    out.mass.assign(nt * j.ny(), 0.0);
    for (std::size_t i = 0; i < j.nx(); ++i)
        for (std::size_t y = 0; y < j.ny(); ++y)
            out.at(part.assignment[i], y) += j.at(i, y);
    return out;
}

/// Second route to the information loss: I(X,Y) minus the MI of the
/// coarsened joint. Kept independent of info_loss for cross-checking.
inline double info_loss_coarse(const World& world, const Partition& part) {
    return mutual_information(world.joint) - mutual_information(coarsen_joint(world, part));
}

/// I(X,T) of a deterministic partition equals H(T) under the P(x) coarsening.
inline double partition_mi_xt(const World& world, const Partition& part) {
    ProbVector px = x_marginal(world.joint);
    std::vector<double> pt(part.cluster_count(), 0.0);
    for (std::size_t i = 0; i < part.size(); ++i) pt[part.assignment[i]] += px.weights[i];
    return entropy(ProbVector{std::vector<std::string>(pt.size(), ""), pt});
}

struct BoundCheck {
    double lhs;
    double loss;
};

/// Leave-one-out L1 lower bound on the information loss:
/// sum_S sum_i P(x_i) beta_i^2 / 2 * D1(P(y|x_i), partial mixture)^2 <= loss.
inline BoundCheck bound_thm4(const World& world, const Partition& part) {
    const JointTable& j = world.joint;
    ProbVector px = x_marginal(j);
    double lhs = 0.0;
    for (const auto& cluster : part.clusters()) {
        if (cluster.size() < 2) continue;
        std::vector<std::string> members;
        for (std::size_t i : cluster) members.push_back(j.x_labels[i]);
        ClusterReport rep = cluster_mixture(world, members);
        for (std::size_t m = 0; m < cluster.size(); ++m) {
            ProbVector row = row_conditional(j, cluster[m]);
            double beta = rep.partial_weights[m];
            double d = l1_distance(row, rep.partial_mixtures[m]);
            lhs += px.weights[cluster[m]] * beta * beta * 0.5 * d * d;
        }
    }
    return BoundCheck{lhs, info_loss(world, part)};
}

/// Closed form of the two-member inner sum:
/// P(x1) P(x2) / (2 (P(x1) + P(x2))) * D1(P(y|x1), P(y|x2))^2.
inline double pair_term(const World& world, std::size_t x1, std::size_t x2) {
    const JointTable& j = world.joint;
    ProbVector px = x_marginal(j);
    double p1 = px.weights[x1], p2 = px.weights[x2];
    double d = l1_distance(row_conditional(j, x1), row_conditional(j, x2));
    return p1 * p2 / (2.0 * (p1 + p2)) * d * d;
}

/// Worst-pair L1 lower bound: sum over clusters of the max pair term.
inline BoundCheck bound_thm7(const World& world, const Partition& part) {
    double lhs = 0.0;
    for (const auto& cluster : part.clusters()) {
        if (cluster.size() < 2) continue;
        double worst = 0.0;
        for (std::size_t a = 0; a < cluster.size(); ++a)
            for (std::size_t b = a + 1; b < cluster.size(); ++b)
                worst = std::max(worst, pair_term(world, cluster[a], cluster[b]));
        lhs += worst;
    }
    return BoundCheck{lhs, info_loss(world, part)};
}

/// Among all partitions with info_loss <= epsilon, the one minimizing I(X,T);
/// ties broken by fewer clusters, then canonical enumeration order.
inline Partition solve_ib_exhaustive(const World& world, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("solve_ib_exhaustive: epsilon must be >= 0");
    std::size_t n = world.joint.nx();
    if (n > kEnumerationCeiling)
        throw std::length_error("solve_ib_exhaustive: |X| exceeds enumeration ceiling of 12");
    const double slack = 1e-12; // absorbs rounding in the loss of exact-duplicate merges

    PartitionEnumerator en(n);
    std::optional<Partition> best;
    double best_mi = 0.0;
    std::size_t best_clusters = 0;
    while (auto p = en.next()) {
        if (info_loss(world, *p) > epsilon + slack) continue;
        double mi = partition_mi_xt(world, *p);
        std::size_t nc = p->cluster_count();
        if (!best || mi < best_mi - kEqTol ||
            (mi < best_mi + kEqTol && nc < best_clusters)) {
            best = *p;
            best_mi = mi;
            best_clusters = nc;
        }
    }
    return *best; // identity partition is always feasible
}

/// Greedy bottom-up clustering: repeatedly merge the cluster pair with the
/// smallest info_loss increase until target_clusters remain. Ties go to the
/// smallest cluster-id pair.
inline Partition agglomerative_ib(const World& world, std::size_t target_clusters) {
    std::size_t n = world.joint.nx();
    if (target_clusters < 1 || target_clusters > n)
        throw std::invalid_argument("agglomerative_ib: target_clusters out of range");
    Partition part = Partition::identity(n);
    double current = 0.0;
    while (part.cluster_count() > target_clusters) {
        std::size_t nc = part.cluster_count();
        double best_delta = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_pair{0, 0};
        for (std::size_t a = 0; a < nc; ++a) {
            for (std::size_t b = a + 1; b < nc; ++b) {
                std::vector<std::size_t> merged = part.assignment;
                for (std::size_t& c : merged)
                    if (c == b) c = a;
                double delta = info_loss(world, Partition::canonicalize(merged)) - current;
                if (delta < best_delta - kEqTol) {
                    best_delta = delta;
                    best_pair = {a, b};
                }
            }
        }
        std::vector<std::size_t> merged = part.assignment;
        for (std::size_t& c : merged)
            if (c == best_pair.second) c = best_pair.first;
        part = Partition::canonicalize(merged);
        current += best_delta;
    }
    return part;
}

/// Paraphrase distribution induced by a partition: mass only on x_s's
/// cluster, proportional to P(x_p) within it.
inline ProbVector paraphrase_dist_partition(const World& world, const Partition& part,
                                            const std::string& x_s) {
    const JointTable& j = world.joint;
    if (part.size() != j.nx())
        throw std::invalid_argument("paraphrase_dist_partition: partition size mismatch");
    std::size_t xs = j.x_index(x_s);
    std::size_t cluster = part.assignment[xs];
    ProbVector px = x_marginal(j);
    double total = 0.0;
    for (std::size_t i = 0; i < j.nx(); ++i)
        if (part.assignment[i] == cluster) total += px.weights[i];
    std::vector<double> w(j.nx(), 0.0);
    for (std::size_t i = 0; i < j.nx(); ++i)
        if (part.assignment[i] == cluster) w[i] = px.weights[i] / total;
    ProbVector out{j.x_labels, std::move(w)};
    out.validate();
    return out;
}

} // namespace ibp
