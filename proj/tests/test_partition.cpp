#include <catch2/catch_amalgamated.hpp>

#include "ibp/partition.hpp"
#include "ibp/world_gen.hpp"

using namespace ibp;

namespace {

std::size_t bell_by_enumeration(std::size_t n) {
    PartitionEnumerator en(n);
    std::size_t count = 0;
    while (en.next()) ++count;
    return count;
}

// Bell numbers by the recurrence B(n+1) = sum_k C(n,k) B(k); independent of
// the enumerator.
std::vector<unsigned long long> bell_recurrence(std::size_t up_to) {
    std::vector<unsigned long long> bell{1};
    for (std::size_t n = 0; n < up_to; ++n) {
        unsigned long long next = 0, c = 1;
        for (std::size_t k = 0; k <= n; ++k) {
            next += c * bell[k];
            c = c * (n - k) / (k + 1);
        }
        bell.push_back(next);
    }
    return bell;
}

World duplicate_row_world() {
    // x0 and x1 share a row; x2 differs
    JointTable j{{"x0", "x1", "x2"},
                 {"y0", "y1"},
                 {0.2, 0.2, 0.1, 0.1, 0.05, 0.35}};
    return World{j, "dup", {}};
}

} // namespace

TEST_CASE("partition enumeration counts match Bell numbers") {
    auto bell = bell_recurrence(8);
    CHECK(bell_by_enumeration(1) == 1);
    CHECK(bell_by_enumeration(3) == 5);
    CHECK(bell_by_enumeration(6) == 203);
    for (std::size_t n = 1; n <= 8; ++n)
        REQUIRE(bell_by_enumeration(n) == bell[n]);
    CHECK_THROWS_AS(PartitionEnumerator(13), std::length_error);
}

TEST_CASE("enumeration yields canonical unique partitions in order") {
    PartitionEnumerator en(5);
    std::vector<std::vector<std::size_t>> seen;
    while (auto p = en.next()) {
        REQUIRE(p->canonical());
        if (!seen.empty()) REQUIRE(seen.back() < p->assignment); // strict lex order
        seen.push_back(p->assignment);
    }
}

TEST_CASE("canonicalize relabels to restricted growth form") {
    Partition p = Partition::canonicalize({2, 0, 2, 1});
    CHECK(p.assignment == std::vector<std::size_t>{0, 1, 0, 2});
    CHECK(p.canonical());
}

TEST_CASE("strict similarity") {
    World dup = duplicate_row_world();
    CHECK(strict_similarity(dup, "x0", "x0") == 1);
    CHECK(strict_similarity(dup, "x0", "x1") == 1);
    CHECK(strict_similarity(dup, "x0", "x2") == 0);
    CHECK(strict_similarity(dup, "x1", "x0") == strict_similarity(dup, "x0", "x1"));

    World conf = build_confounder_world();
    CHECK(strict_similarity(conf, "he_school", "she_school") == 0);
}

TEST_CASE("cluster mixture") {
    World conf = build_confounder_world();

    auto singleton = cluster_mixture(conf, {"he_school"});
    ProbVector row = row_conditional(conf.joint, 0);
    CHECK(singleton.mixture.weights == row.weights);
    CHECK(singleton.partial_mixtures.empty());

    auto pair = cluster_mixture(conf, {"he_school", "she_school"});
    CHECK(pair.weights[0] == Catch::Approx(0.5));
    CHECK(pair.mixture.weights[conf.joint.y_index("ira_escuela")] == Catch::Approx(0.5));
    CHECK(pair.mixture.weights[conf.joint.y_index("el_escuela")] == Catch::Approx(0.25));
    CHECK(pair.mixture.weights[conf.joint.y_index("ella_escuela")] == Catch::Approx(0.25));
    CHECK(pair.partial_weights[0] == Catch::Approx(0.5));
    // two-member partial mixtures are each other's rows
    CHECK(pair.partial_mixtures[0].weights == row_conditional(conf.joint, 1).weights);

    CHECK_THROWS_AS(cluster_mixture(conf, {}), std::invalid_argument);
}

TEST_CASE("info loss endpoints") {
    World conf = build_confounder_world();
    std::size_t n = conf.joint.nx();
    CHECK(info_loss(conf, Partition::identity(n)) == Catch::Approx(0.0).margin(1e-15));
    CHECK(info_loss(conf, Partition::single_cluster(n)) ==
          Catch::Approx(mutual_information(conf.joint)).margin(1e-10));
}

TEST_CASE("info loss dual-path identity over all partitions") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        WorldSpec spec;
        spec.n_source = 5;
        spec.n_pivot = 6;
        spec.ambiguity_pairs = {{0, 1, 2}};
        spec.seed = seed;
        World w = build_random_world(spec);
        PartitionEnumerator en(spec.n_source);
        while (auto p = en.next()) {
            double kl_path = info_loss(w, *p);
            double mi_path = info_loss_coarse(w, *p);
            REQUIRE(kl_path == Catch::Approx(mi_path).margin(1e-10));
            REQUIRE(kl_path >= -1e-15);
        }
    }
}

TEST_CASE("theorem bounds hold over exhaustive sweep") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        WorldSpec spec;
        spec.n_source = 6;
        spec.n_pivot = 5;
        spec.ambiguity_pairs = {{2, 4, 0}};
        spec.seed = seed;
        World w = build_random_world(spec);
        PartitionEnumerator en(spec.n_source);
        while (auto p = en.next()) {
            auto b4 = bound_thm4(w, *p);
            auto b7 = bound_thm7(w, *p);
            REQUIRE(b4.lhs <= b4.loss + 1e-10);
            REQUIRE(b7.lhs <= b7.loss + 1e-10);
        }
    }
}

TEST_CASE("two-member closed form matches both bound routes") {
    World w = build_confounder_world();
    Partition pair = Partition::canonicalize({0, 0, 1, 2}); // {he_school, she_school}
    auto b4 = bound_thm4(w, pair);
    auto b7 = bound_thm7(w, pair);
    double closed = pair_term(w, 0, 1);
    CHECK(b4.lhs == Catch::Approx(closed).margin(1e-12));
    CHECK(b7.lhs == Catch::Approx(closed).margin(1e-12));

    // and on random worlds for every 2-member cluster of every partition
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        WorldSpec spec;
        spec.n_source = 4;
        spec.n_pivot = 5;
        spec.ambiguity_pairs = {{0, 3, 1}};
        spec.seed = seed;
        World r = build_random_world(spec);
        PartitionEnumerator en(4);
        while (auto p = en.next()) {
            for (const auto& cluster : p->clusters()) {
                if (cluster.size() != 2) continue;
                std::vector<std::string> members{r.joint.x_labels[cluster[0]],
                                                 r.joint.x_labels[cluster[1]]};
                ClusterReport rep = cluster_mixture(r, members);
                ProbVector px = x_marginal(r.joint);
                double inner = 0.0;
                for (std::size_t m = 0; m < 2; ++m) {
                    double beta = rep.partial_weights[m];
                    double d = l1_distance(row_conditional(r.joint, cluster[m]),
                                           rep.partial_mixtures[m]);
                    inner += px.weights[cluster[m]] * beta * beta * 0.5 * d * d;
                }
                REQUIRE(inner ==
                        Catch::Approx(pair_term(r, cluster[0], cluster[1])).margin(1e-12));
            }
        }
    }
}

TEST_CASE("identity partition has zero bounds") {
    World w = build_confounder_world();
    auto b4 = bound_thm4(w, Partition::identity(4));
    auto b7 = bound_thm7(w, Partition::identity(4));
    CHECK(b4.lhs == 0.0);
    CHECK(b4.loss == Catch::Approx(0.0).margin(1e-15));
    CHECK(b7.lhs == 0.0);
}

TEST_CASE("loss is monotone under merging") {
    WorldSpec spec;
    spec.n_source = 5;
    spec.n_pivot = 5;
    spec.ambiguity_pairs = {{0, 1, 0}};
    spec.seed = 13;
    World w = build_random_world(spec);
    PartitionEnumerator en(5);
    while (auto p = en.next()) {
        double base = info_loss(w, *p);
        std::size_t nc = p->cluster_count();
        for (std::size_t a = 0; a < nc; ++a)
            for (std::size_t b = a + 1; b < nc; ++b) {
                std::vector<std::size_t> merged = p->assignment;
                for (std::size_t& c : merged)
                    if (c == b) c = a;
                REQUIRE(info_loss(w, Partition::canonicalize(merged)) >= base - 1e-12);
            }
    }
}

TEST_CASE("exhaustive solver recovers minimal sufficient statistic") {
    World dup = duplicate_row_world();
    Partition p = solve_ib_exhaustive(dup, 0.0);
    CHECK(p.assignment == std::vector<std::size_t>{0, 0, 1});

    World conf = build_confounder_world();
    Partition q = solve_ib_exhaustive(conf, 0.0);
    CHECK(q == Partition::identity(4)); // no duplicate rows
}

TEST_CASE("exhaustive solver with a one-pair budget") {
    World conf = build_confounder_world();
    Partition pair = Partition::canonicalize({0, 0, 1, 2});
    double pair_loss = info_loss(conf, pair);
    double eps = pair_loss * 1.5; // allows one gendered merge, not two

    Partition chosen = solve_ib_exhaustive(conf, eps);
    CHECK(info_loss(conf, chosen) <= eps + 1e-12);

    // optimality: no feasible partition has lower I(X,T)
    double chosen_mi = partition_mi_xt(conf, chosen);
    PartitionEnumerator en(4);
    while (auto p = en.next()) {
        if (info_loss(conf, *p) > eps + 1e-12) continue;
        REQUIRE(chosen_mi <= partition_mi_xt(conf, *p) + 1e-12);
    }
    // exactly one gendered pair merged
    CHECK(chosen.cluster_count() == 3);
}

TEST_CASE("exhaustive solver capacity error") {
    WorldSpec spec;
    spec.n_source = 13;
    spec.n_pivot = 4;
    spec.seed = 3;
    spec.ambiguity_pairs = {{0, 1, 2}};
    World w = build_random_world(spec);
    CHECK_THROWS_AS(solve_ib_exhaustive(w, 0.1), std::length_error);
}

TEST_CASE("agglomerative endpoints and greedy optimality") {
    World conf = build_confounder_world();
    CHECK(agglomerative_ib(conf, 4) == Partition::identity(4));
    CHECK(agglomerative_ib(conf, 1) == Partition::single_cluster(4));

    // target 2 merges the two gendered pairs
    Partition two = agglomerative_ib(conf, 2);
    CHECK(two.assignment == std::vector<std::size_t>{0, 0, 1, 1});

    // each greedy step picks a minimal-increment merge; compare its final
    // loss against the exhaustive minimum over partitions of equal size
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        WorldSpec spec;
        spec.n_source = 6;
        spec.n_pivot = 5;
        spec.ambiguity_pairs = {{1, 2, 3}};
        spec.seed = seed;
        World w = build_random_world(spec);
        for (std::size_t target = 1; target <= 6; ++target) {
            double greedy = info_loss(w, agglomerative_ib(w, target));
            double best = std::numeric_limits<double>::infinity();
            PartitionEnumerator en(6);
            while (auto p = en.next())
                if (p->cluster_count() == target) best = std::min(best, info_loss(w, *p));
            REQUIRE(greedy >= best - 1e-12);
        }
    }
}

TEST_CASE("partition paraphrase distribution") {
    World conf = build_confounder_world();
    ProbVector self = paraphrase_dist_partition(conf, Partition::identity(4), "he_school");
    CHECK(self.weights[0] == Catch::Approx(1.0));

    ProbVector marg = paraphrase_dist_partition(conf, Partition::single_cluster(4), "he_school");
    ProbVector px = x_marginal(conf.joint);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(marg.weights[i] == Catch::Approx(px.weights[i]).margin(1e-12));

    Partition gendered = Partition::canonicalize({0, 0, 1, 1});
    ProbVector d = paraphrase_dist_partition(conf, gendered, "he_school");
    CHECK(d.weights[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(d.weights[1] == Catch::Approx(0.5).margin(1e-12));
    CHECK(d.weights[2] == 0.0);
}

TEST_CASE("theorem-1 recovery ties epsilon=0 clustering to strict similarity") {
    World dup = duplicate_row_world();
    Partition p = solve_ib_exhaustive(dup, 0.0);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            bool same = p.assignment[a] == p.assignment[b];
            bool strict = strict_similarity(dup, dup.joint.x_labels[a],
                                            dup.joint.x_labels[b]) == 1;
            REQUIRE(same == strict);
        }
    // within-cluster mass proportional to P(x)
    ProbVector px = x_marginal(dup.joint);
    ProbVector d = paraphrase_dist_partition(dup, p, "x0");
    double total = px.weights[0] + px.weights[1];
    CHECK(d.weights[0] == Catch::Approx(px.weights[0] / total).margin(1e-12));
    CHECK(d.weights[1] == Catch::Approx(px.weights[1] / total).margin(1e-12));
}
