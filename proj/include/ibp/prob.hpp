#pragma once

// Exact probability and information-theory primitives over finite
// distributions. All information quantities are in nats.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ibp {

inline constexpr double kNormTol = 1e-9;   // normalization tolerance
inline constexpr double kEqTol = 1e-12;    // equality tolerance
inline constexpr double kZeroFloor = 1e-15; // below this a probability is an exact zero

/// A labeled finite distribution. Weights sum to one within kNormTol.
struct ProbVector {
    std::vector<std::string> labels;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }

    void validate() const {
        if (labels.size() != weights.size() || weights.empty())
            throw std::invalid_argument("ProbVector: labels/weights size mismatch or empty");
        double sum = 0.0;
        for (double w : weights) {
            if (!std::isfinite(w))
                throw std::invalid_argument("ProbVector: non-finite weight");
            if (w < 0.0)
                throw std::invalid_argument("ProbVector: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kNormTol)
            throw std::invalid_argument("ProbVector: weights sum to " + std::to_string(sum));
    }

    static ProbVector make(std::vector<std::string> labels, std::vector<double> weights) {
        ProbVector p{std::move(labels), std::move(weights)};
        p.validate();
        return p;
    }

    std::size_t index_of(const std::string& label) const {
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end())
            throw std::invalid_argument("ProbVector: unknown label '" + label + "'");
        return static_cast<std::size_t>(it - labels.begin());
    }
};

/// Full joint distribution over a finite source space X and pivot space Y.
/// Row marginals P(x) must be strictly positive.
struct JointTable {
    std::vector<std::string> x_labels;
    std::vector<std::string> y_labels;
    std::vector<double> mass; // row-major |X| x |Y|

    std::size_t nx() const { return x_labels.size(); }
    std::size_t ny() const { return y_labels.size(); }

    double at(std::size_t i, std::size_t j) const { return mass[i * ny() + j]; }
    double& at(std::size_t i, std::size_t j) { return mass[i * ny() + j]; }

    std::size_t x_index(const std::string& label) const {
        auto it = std::find(x_labels.begin(), x_labels.end(), label);
        if (it == x_labels.end())
            throw std::invalid_argument("JointTable: unknown source '" + label + "'");
        return static_cast<std::size_t>(it - x_labels.begin());
    }
    std::size_t y_index(const std::string& label) const {
        auto it = std::find(y_labels.begin(), y_labels.end(), label);
        if (it == y_labels.end())
            throw std::invalid_argument("JointTable: unknown pivot '" + label + "'");
        return static_cast<std::size_t>(it - y_labels.begin());
    }

    void validate() const {
        if (x_labels.empty() || y_labels.empty())
            throw std::invalid_argument("JointTable: empty label set");
        if (mass.size() != nx() * ny())
            throw std::invalid_argument("JointTable: mass size mismatch");
        double total = 0.0;
        for (double m : mass) {
            if (!std::isfinite(m) || m < 0.0)
                throw std::invalid_argument("JointTable: invalid mass entry");
            total += m;
        }
        if (std::abs(total - 1.0) > kNormTol)
            throw std::invalid_argument("JointTable: total mass is " + std::to_string(total));
        for (std::size_t i = 0; i < nx(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < ny(); ++j) row += at(i, j);
            if (row <= kZeroFloor)
                throw std::invalid_argument("JointTable: zero-probability source '" + x_labels[i] + "'");
        }
    }
};

/// A named joint distribution plus free-form provenance metadata.
struct World {
    JointTable joint;
    std::string name;
    std::map<std::string, std::string> metadata;

    void validate() const { joint.validate(); }
};

/// Conditional rows P(.|given) indexed by the conditioning label.
struct ConditionalTable {
    std::vector<std::string> given_labels;
    std::vector<ProbVector> rows;

    const ProbVector& row(const std::string& given) const {
        auto it = std::find(given_labels.begin(), given_labels.end(), given);
        if (it == given_labels.end())
            throw std::invalid_argument("ConditionalTable: unknown label '" + given + "'");
        return rows[static_cast<std::size_t>(it - given_labels.begin())];
    }
};

inline ProbVector x_marginal(const JointTable& j) {
    std::vector<double> w(j.nx(), 0.0);
    for (std::size_t i = 0; i < j.nx(); ++i)
        for (std::size_t k = 0; k < j.ny(); ++k) w[i] += j.at(i, k);
    return ProbVector{j.x_labels, std::move(w)};
}

inline ProbVector y_marginal(const JointTable& j) {
    std::vector<double> w(j.ny(), 0.0);
    for (std::size_t i = 0; i < j.nx(); ++i)
        for (std::size_t k = 0; k < j.ny(); ++k) w[k] += j.at(i, k);
    return ProbVector{j.y_labels, std::move(w)};
}

/// P(y|x) for source index i.
inline ProbVector row_conditional(const JointTable& j, std::size_t i) {
    double px = 0.0;
    for (std::size_t k = 0; k < j.ny(); ++k) px += j.at(i, k);
    if (px <= kZeroFloor)
        throw std::domain_error("row_conditional: P(x)=0 for '" + j.x_labels[i] + "'");
    std::vector<double> w(j.ny());
    for (std::size_t k = 0; k < j.ny(); ++k) w[k] = j.at(i, k) / px;
    return ProbVector{j.y_labels, std::move(w)};
}

/// Shannon entropy in nats, with the convention 0 ln 0 = 0.
inline double entropy(const ProbVector& p) {
    p.validate();
    double h = 0.0;
    for (double w : p.weights)
        if (w > kZeroFloor) h -= w * std::log(w);
    return std::max(h, 0.0);
}

inline void require_same_labels(const ProbVector& p, const ProbVector& q, const char* op) {
    if (p.labels != q.labels)
        throw std::invalid_argument(std::string(op) + ": label orderings differ");
}

/// KL(p||q) in nats. Requires absolute continuity: q_i = 0 => p_i = 0.
inline double kl_divergence(const ProbVector& p, const ProbVector& q) {
    p.validate();
    q.validate();
    require_same_labels(p, q, "kl_divergence");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double pi = p.weights[i], qi = q.weights[i];
        if (pi <= kZeroFloor) continue;
        if (qi <= kZeroFloor)
            throw std::domain_error("kl_divergence: support violation at label '" + p.labels[i] + "'");
        kl += pi * std::log(pi / qi);
    }
    return std::max(kl, 0.0);
}

/// L1 distance, in [0, 2].
inline double l1_distance(const ProbVector& p, const ProbVector& q) {
    p.validate();
    q.validate();
    require_same_labels(p, q, "l1_distance");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p.weights[i] - q.weights[i]);
    return d;
}

/// I(X;Y) in nats from the full joint.
inline double mutual_information(const JointTable& j) {
    j.validate();
    ProbVector px = x_marginal(j);
    ProbVector py = y_marginal(j);
    double mi = 0.0;
    for (std::size_t i = 0; i < j.nx(); ++i)
        for (std::size_t k = 0; k < j.ny(); ++k) {
            double m = j.at(i, k);
            if (m > kZeroFloor)
                mi += m * std::log(m / (px.weights[i] * py.weights[k]));
        }
    return std::max(mi, 0.0);
}

struct PinskerGap {
    double kl;
    double half_l1_sq;
};

/// Both sides of Pinsker's inequality: KL(p||q) >= D1(p,q)^2 / 2.
inline PinskerGap pinsker_gap(const ProbVector& p, const ProbVector& q) {
    double d = l1_distance(p, q);
    return PinskerGap{kl_divergence(p, q), d * d / 2.0};
}

/// P(x|y) rows for every pivot. Fails if any pivot has zero marginal mass.
inline ConditionalTable bayes_invert(const World& world) {
    const JointTable& j = world.joint;
    j.validate();
    ProbVector py = y_marginal(j);
    ConditionalTable out;
    out.given_labels = j.y_labels;
    out.rows.reserve(j.ny());
    for (std::size_t k = 0; k < j.ny(); ++k) {
        if (py.weights[k] <= kZeroFloor)
            throw std::domain_error("bayes_invert: P(y)=0 for pivot '" + j.y_labels[k] + "'");
        std::vector<double> w(j.nx());
        for (std::size_t i = 0; i < j.nx(); ++i) w[i] = j.at(i, k) / py.weights[k];
        out.rows.push_back(ProbVector{j.x_labels, std::move(w)});
    }
    return out;
}

} // namespace ibp
