#pragma once

// Toy bilingual world construction and corpus sampling. Worlds are fully
// specified joints over small source/pivot spaces; the canonical world
// reproduces the confounding-translation scenario where two gendered
// sources share a genderless pivot.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ibp/prob.hpp"

namespace ibp {

struct AmbiguityPair {
    std::size_t source_a;
    std::size_t source_b;
    std::size_t shared_pivot;
};

struct WorldSpec {
    std::size_t n_source = 4;
    std::size_t n_pivot = 6;
    std::vector<AmbiguityPair> ambiguity_pairs;
    double concentration = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_source < 2 || n_pivot < 2)
            throw std::invalid_argument("WorldSpec: need n_source >= 2 and n_pivot >= 2");
        if (concentration <= 0.0)
            throw std::invalid_argument("WorldSpec: concentration must be positive");
        if (ambiguity_pairs.size() > n_pivot)
            throw std::invalid_argument("WorldSpec: ambiguity pairs exceed pivot capacity");
        for (const auto& p : ambiguity_pairs) {
            if (p.source_a >= n_source || p.source_b >= n_source || p.shared_pivot >= n_pivot)
                throw std::invalid_argument("WorldSpec: ambiguity pair index out of range");
            if (p.source_a == p.source_b)
                throw std::invalid_argument("WorldSpec: ambiguity pair must name two distinct sources");
        }
    }
};

struct ParallelCorpus {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (source index, pivot index)
    std::string world_name;
    std::uint64_t seed = 0;
};

/// The canonical confounding-translation world. Each gendered source puts
/// mass 0.5 on the genderless pivot of its topic and 0.5 on its
/// gender-marked pivot; P(x) is uniform. Deterministic.
inline World build_confounder_world() {
    World w;
    w.name = "confounder";
    w.joint.x_labels = {"he_school", "she_school", "he_market", "she_market"};
    // Genderless pivots first within each topic so the top-1 tie-break
    // (ascending pivot index) selects them.
    w.joint.y_labels = {"ira_escuela", "el_escuela", "ella_escuela",
                        "ira_mercado", "el_mercado", "ella_mercado"};
    w.joint.mass.assign(4 * 6, 0.0);
    const double m = 0.25 * 0.5; // uniform P(x) times row mass rho = 0.5
    w.joint.at(0, 0) = m; w.joint.at(0, 1) = m; // he_school: ira, el
    w.joint.at(1, 0) = m; w.joint.at(1, 2) = m; // she_school: ira, ella
    w.joint.at(2, 3) = m; w.joint.at(2, 4) = m; // he_market: ira, el
    w.joint.at(3, 3) = m; w.joint.at(3, 5) = m; // she_market: ira, ella
    w.metadata["generator"] = "confounder-preset";
    w.validate();
    return w;
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Symmetric Dirichlet(alpha) draw via normalized gamma variates.
inline std::vector<double> dirichlet_row(std::mt19937_64& rng, std::size_t n, double alpha) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> w(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::max(gamma(rng), 1e-12);
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

inline void enforce_shared_mass(std::vector<double>& row, std::size_t pivot, double target) {
    if (row[pivot] >= target) return;
    double rest = 1.0 - row[pivot];
    double scale = (1.0 - target) / rest;
    for (double& v : row) v *= scale;
    row[pivot] = target;
}

} // namespace detail

/// Deterministic function of the spec: same seed, same world. Each requested
/// ambiguity pair ends with mass >= 0.3 on the shared pivot in both rows.
inline World build_random_world(const WorldSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const double shared_target = 0.35;

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<double> px = detail::dirichlet_row(rng, spec.n_source, spec.concentration);
        std::vector<std::vector<double>> rows(spec.n_source);
        for (auto& r : rows) r = detail::dirichlet_row(rng, spec.n_pivot, spec.concentration);

        for (const auto& p : spec.ambiguity_pairs) {
            detail::enforce_shared_mass(rows[p.source_a], p.shared_pivot, shared_target);
            detail::enforce_shared_mass(rows[p.source_b], p.shared_pivot, shared_target);
        }

        bool ok = true;
        // Paired rows must not be identical.
        for (const auto& p : spec.ambiguity_pairs) {
            double d = 0.0;
            for (std::size_t j = 0; j < spec.n_pivot; ++j)
                d += std::abs(rows[p.source_a][j] - rows[p.source_b][j]);
            if (d <= kEqTol) ok = false;
        }
        // Without requested pairs, reject worlds where two rows share >= 0.3
        // mass on a common pivot by chance.
        if (spec.ambiguity_pairs.empty()) {
            for (std::size_t a = 0; a < spec.n_source && ok; ++a)
                for (std::size_t b = a + 1; b < spec.n_source && ok; ++b)
                    for (std::size_t j = 0; j < spec.n_pivot; ++j)
                        if (rows[a][j] >= 0.3 && rows[b][j] >= 0.3) { ok = false; break; }
        }
        if (!ok) continue;

        World w;
        w.name = "random-" + std::to_string(spec.seed);
        w.joint.x_labels.reserve(spec.n_source);
        for (std::size_t i = 0; i < spec.n_source; ++i)
            w.joint.x_labels.push_back("x" + std::to_string(i));
        for (std::size_t j = 0; j < spec.n_pivot; ++j)
            w.joint.y_labels.push_back("y" + std::to_string(j));
        w.joint.mass.resize(spec.n_source * spec.n_pivot);
        for (std::size_t i = 0; i < spec.n_source; ++i)
            for (std::size_t j = 0; j < spec.n_pivot; ++j)
                w.joint.at(i, j) = px[i] * rows[i][j];
        w.metadata["generator"] = "dirichlet";
        w.metadata["seed"] = std::to_string(spec.seed);
        w.metadata["concentration"] = std::to_string(spec.concentration);
        w.validate();
        return w;
    }
    throw std::runtime_error("build_random_world: no valid world after 100 attempts");
}

/// n i.i.d. draws from the joint, deterministic given the seed.
inline ParallelCorpus sample_corpus(const World& world, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_corpus: n must be >= 1");
    world.validate();
    const JointTable& j = world.joint;
    std::vector<double> cdf(j.mass.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < j.mass.size(); ++i) {
        acc += j.mass[i];
        cdf[i] = acc;
    }
    std::mt19937_64 rng(seed);
    ParallelCorpus c;
    c.world_name = world.name;
    c.seed = seed;
    c.pairs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double u = detail::uniform01(rng) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t idx = std::min<std::size_t>(
            static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        c.pairs.emplace_back(idx / j.ny(), idx % j.ny());
    }
    return c;
}

} // namespace ibp
