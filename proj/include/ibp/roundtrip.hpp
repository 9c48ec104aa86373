#pragma once

// Round-trip MT paraphrase analysis: the marginalized paraphrase
// distribution, its decomposition into P(x_p) times the implicit
// similarity S_MT, and restricted pivot selection.

#include <numeric>
#include <string>
#include <vector>

#include "ibp/prob.hpp"

namespace ibp {

struct PivotSelection {
    enum class Mode { All, TopK, ExplicitSet };
    Mode mode = Mode::All;
    std::size_t k = 1;
    std::vector<std::string> pivots;

    static PivotSelection all() { return {}; }
    static PivotSelection topk(std::size_t k) {
        if (k < 1) throw std::invalid_argument("PivotSelection: k must be >= 1");
        return {Mode::TopK, k, {}};
    }
    static PivotSelection explicit_set(std::vector<std::string> pivots) {
        if (pivots.empty())
            throw std::invalid_argument("PivotSelection: explicit set must be non-empty");
        return {Mode::ExplicitSet, 1, std::move(pivots)};
    }
};

/// The k pivots with largest P(y|x_s); ties broken by ascending pivot index.
inline std::vector<std::size_t> pivot_topk(const World& world, const std::string& x_s,
                                           std::size_t k) {
    const JointTable& j = world.joint;
    if (k < 1 || k > j.ny())
        throw std::invalid_argument("pivot_topk: k out of range");
    ProbVector row = row_conditional(j, j.x_index(x_s));
    std::vector<std::size_t> order(j.ny());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return row.weights[a] > row.weights[b];
    });
    order.resize(k);
    return order;
}

namespace detail {

inline std::vector<std::size_t> selected_pivots(const World& world, const std::string& x_s,
                                                const PivotSelection& sel) {
    const JointTable& j = world.joint;
    switch (sel.mode) {
        case PivotSelection::Mode::All: {
            std::vector<std::size_t> out(j.ny());
            std::iota(out.begin(), out.end(), std::size_t{0});
            return out;
        }
        case PivotSelection::Mode::TopK:
            return pivot_topk(world, x_s, sel.k);
        case PivotSelection::Mode::ExplicitSet: {
            std::vector<std::size_t> out;
            out.reserve(sel.pivots.size());
            for (const auto& y : sel.pivots) out.push_back(j.y_index(y));
            return out;
        }
    }
    throw std::logic_error("selected_pivots: unreachable");
}

} // namespace detail

/// P(x_p|x_s) by marginalizing over the selected pivots, normalized by
/// Z(x_s) = sum of P(y|x_s) over the selection (Z = 1 in All mode).
inline ProbVector roundtrip_dist(const World& world, const std::string& x_s,
                                 const PivotSelection& sel = PivotSelection::all()) {
    const JointTable& j = world.joint;
    std::size_t xs = j.x_index(x_s);
    ProbVector row = row_conditional(j, xs);
    ConditionalTable x_given_y = bayes_invert(world);
    std::vector<std::size_t> pivots = detail::selected_pivots(world, x_s, sel);

    double z = 0.0;
    for (std::size_t y : pivots) z += row.weights[y];
    if (z <= kZeroFloor)
        throw std::domain_error("roundtrip_dist: empty effective pivot support");

    std::vector<double> out(j.nx(), 0.0);
    for (std::size_t y : pivots)
        for (std::size_t xp = 0; xp < j.nx(); ++xp)
            out[xp] += row.weights[y] * x_given_y.rows[y].weights[xp] / z;
    ProbVector dist{j.x_labels, std::move(out)};
    dist.validate();
    return dist;
}

/// Implicit round-trip similarity S_MT(x1, x2) = sum_y P(y|x1)P(y|x2)/P(y)
/// over the selected pivots. Unnormalized; symmetric for All/ExplicitSet.
inline double s_mt(const World& world, const std::string& x1, const std::string& x2,
                   const PivotSelection& sel = PivotSelection::all()) {
    const JointTable& j = world.joint;
    ProbVector r1 = row_conditional(j, j.x_index(x1));
    ProbVector r2 = row_conditional(j, j.x_index(x2));
    ProbVector py = y_marginal(j);
    std::vector<std::size_t> pivots = detail::selected_pivots(world, x1, sel);

    double s = 0.0;
    for (std::size_t y : pivots) {
        double num = r1.weights[y] * r2.weights[y];
        if (num <= kZeroFloor) continue;
        if (py.weights[y] <= kZeroFloor)
            throw std::domain_error("s_mt: P(y)=0 for pivot '" + j.y_labels[y] + "'");
        s += num / py.weights[y];
    }
    return s;
}

/// Max residual of P(x_p|x_s) - P(x_p) * S_MT(x_s, x_p) over all x_p.
/// Both sides are computed through independent paths; the identity holds
/// within 1e-10 for any valid world.
inline double decomposition_check(const World& world, const std::string& x_s) {
    const JointTable& j = world.joint;
    ProbVector px = x_marginal(j);
    ProbVector rt = roundtrip_dist(world, x_s);
    double max_resid = 0.0;
    for (std::size_t xp = 0; xp < j.nx(); ++xp) {
        double prod = px.weights[xp] * s_mt(world, x_s, j.x_labels[xp]);
        max_resid = std::max(max_resid, std::abs(rt.weights[xp] - prod));
    }
    return max_resid;
}

} // namespace ibp
