#include <catch2/catch_amalgamated.hpp>

#include "ibp/partition.hpp"
#include "ibp/roundtrip.hpp"
#include "ibp/serialize.hpp"
#include "ibp/world_gen.hpp"

using namespace ibp;

TEST_CASE("confounder world layout") {
    World w = build_confounder_world();
    w.validate();

    ProbVector px = x_marginal(w.joint);
    for (double p : px.weights) CHECK(p == Catch::Approx(0.25));

    ProbVector he = row_conditional(w.joint, w.joint.x_index("he_school"));
    CHECK(he.weights[w.joint.y_index("ira_escuela")] == Catch::Approx(0.5));
    CHECK(he.weights[w.joint.y_index("el_escuela")] == Catch::Approx(0.5));
    CHECK(he.weights[w.joint.y_index("ella_escuela")] == 0.0);

    CHECK(strict_similarity(w, "he_school", "she_school") == 0);

    // deterministic: two builds are bit-identical
    World w2 = build_confounder_world();
    CHECK(w.joint.mass == w2.joint.mass);
    CHECK(world_to_json(w).dump() == world_to_json(w2).dump());
}

TEST_CASE("confounder ambiguous pivot splits mass by P(x)") {
    World w = build_confounder_world();
    ConditionalTable inv = bayes_invert(w);
    const ProbVector& amb = inv.row("ira_escuela");
    CHECK(amb.weights[w.joint.x_index("he_school")] == Catch::Approx(0.5));
    CHECK(amb.weights[w.joint.x_index("she_school")] == Catch::Approx(0.5));
    CHECK(amb.weights[w.joint.x_index("he_market")] == 0.0);
}

TEST_CASE("random world determinism") {
    WorldSpec spec;
    spec.n_source = 4;
    spec.n_pivot = 6;
    spec.ambiguity_pairs = {{0, 1, 3}};
    spec.seed = 7;
    World a = build_random_world(spec);
    World b = build_random_world(spec);
    CHECK(world_to_json(a).dump() == world_to_json(b).dump());
}

TEST_CASE("random world honors ambiguity pairs") {
    WorldSpec spec;
    spec.n_source = 4;
    spec.n_pivot = 6;
    spec.ambiguity_pairs = {{0, 1, 2}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        spec.seed = seed;
        World w = build_random_world(spec);
        w.validate();
        ProbVector r0 = row_conditional(w.joint, 0);
        ProbVector r1 = row_conditional(w.joint, 1);
        REQUIRE(r0.weights[2] >= 0.3);
        REQUIRE(r1.weights[2] >= 0.3);
        REQUIRE(l1_distance(r0, r1) > 0.0);
    }
}

TEST_CASE("random world without pairs avoids chance confounders") {
    WorldSpec spec;
    spec.n_source = 4;
    spec.n_pivot = 8;
    spec.seed = 11;
    World w = build_random_world(spec);
    for (std::size_t a = 0; a < w.joint.nx(); ++a) {
        ProbVector ra = row_conditional(w.joint, a);
        for (std::size_t b = a + 1; b < w.joint.nx(); ++b) {
            ProbVector rb = row_conditional(w.joint, b);
            for (std::size_t y = 0; y < w.joint.ny(); ++y)
                REQUIRE_FALSE((ra.weights[y] >= 0.3 && rb.weights[y] >= 0.3));
        }
    }
}

TEST_CASE("spec validation") {
    WorldSpec spec;
    spec.n_source = 1;
    CHECK_THROWS_AS(build_random_world(spec), std::invalid_argument);

    WorldSpec bad;
    bad.ambiguity_pairs = {{0, 9, 0}};
    CHECK_THROWS_AS(build_random_world(bad), std::invalid_argument);

    WorldSpec conc;
    conc.concentration = 0.0;
    CHECK_THROWS_AS(build_random_world(conc), std::invalid_argument);
}

TEST_CASE("corpus sampling determinism and validity") {
    World w = build_confounder_world();
    ParallelCorpus one = sample_corpus(w, 1, 42);
    REQUIRE(one.pairs.size() == 1);
    CHECK(one.pairs[0].first < w.joint.nx());
    CHECK(one.pairs[0].second < w.joint.ny());

    ParallelCorpus a = sample_corpus(w, 500, 3);
    ParallelCorpus b = sample_corpus(w, 500, 3);
    CHECK(a.pairs == b.pairs);
    CHECK_THROWS_AS(sample_corpus(w, 0, 1), std::invalid_argument);
}

TEST_CASE("corpus empirical distribution converges") {
    World w = build_confounder_world();
    const std::size_t n = 100000;
    ParallelCorpus c = sample_corpus(w, n, 1);

    // total variation between empirical and true joint
    std::vector<double> emp(w.joint.mass.size(), 0.0);
    for (auto [x, y] : c.pairs) emp[x * w.joint.ny() + y] += 1.0 / n;
    double tv = 0.0;
    for (std::size_t i = 0; i < emp.size(); ++i) tv += std::abs(emp[i] - w.joint.mass[i]);
    tv /= 2.0;
    CHECK(tv <= 0.02);

    // empirical P(ira_escuela | he_school) close to 0.5
    std::size_t he = w.joint.x_index("he_school");
    std::size_t ira = w.joint.y_index("ira_escuela");
    double he_count = 0, ira_count = 0;
    for (auto [x, y] : c.pairs)
        if (x == he) {
            ++he_count;
            if (y == ira) ++ira_count;
        }
    CHECK(std::abs(ira_count / he_count - 0.5) <= 0.01);
}

TEST_CASE("world json round trip") {
    WorldSpec spec;
    spec.seed = 5;
    spec.ambiguity_pairs = {{0, 1, 0}};
    World w = build_random_world(spec);
    json j = world_to_json(w);
    World back = world_from_json(j);
    CHECK(world_to_json(back).dump() == j.dump());

    ParallelCorpus c = sample_corpus(w, 50, 9);
    ParallelCorpus cback = corpus_from_json(corpus_to_json(c));
    CHECK(cback.pairs == c.pairs);
    CHECK(cback.world_name == c.world_name);
    CHECK(cback.seed == c.seed);
}
