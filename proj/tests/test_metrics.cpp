#include <catch2/catch_amalgamated.hpp>

#include "ibp/metrics.hpp"

using namespace ibp;

namespace {

std::vector<TokenSeq> corpus(std::initializer_list<const char*> lines) {
    std::vector<TokenSeq> out;
    for (const char* l : lines) out.push_back(tokenize_line(l));
    return out;
}

} // namespace

TEST_CASE("perfect match scores 100") {
    auto c = corpus({"the cat sat on the mat", "a quick brown fox"});
    CHECK(bleu(c, c) == Catch::Approx(100.0).margin(1e-9));
}

TEST_CASE("brevity penalty hand example") {
    auto cand = corpus({"a b c d"});
    auto ref = corpus({"a b c d e"});
    // all precisions 1, BP = exp(1 - 5/4)
    CHECK(bleu(cand, ref) == Catch::Approx(77.8800783071405).margin(1e-9));
}

TEST_CASE("disjoint vocabularies floor near zero") {
    auto cand = corpus({"a b c d", "e f g h"});
    auto ref = corpus({"w x y z", "s t u v"});
    double score = bleu(cand, ref);
    CHECK(score < 5.0);
    CHECK(score >= 0.0);
}

TEST_CASE("self-bleu of a copy system is exactly 100") {
    auto src = corpus({"he will go to school", "she went to the market"});
    CHECK(self_bleu(src, src) == 100.0);
}

TEST_CASE("ibleu arithmetic") {
    // Copy-row identity: alpha=0.7, BLEU 23.0, self-BLEU 100.0
    CHECK(ibleu_combine(23.0, 100.0, 0.7) == Catch::Approx(-13.9).margin(1e-9));
    CHECK(ibleu_combine(0.0, 0.0, 0.7) == 0.0);
    CHECK(ibleu_combine(50.0, 20.0, 0.7) == Catch::Approx(29.0).margin(1e-12));

    auto src = corpus({"a b c d e", "f g h i j"});
    MetricReport r = ibleu(src, src, src, 0.7);
    CHECK(r.bleu == 100.0);
    CHECK(r.self_bleu == 100.0);
    CHECK(r.ibleu == Catch::Approx(0.7 * 100.0 - 0.3 * 100.0).margin(1e-9));
    CHECK(r.ibleu == Catch::Approx(r.alpha * r.bleu - (1 - r.alpha) * r.self_bleu).margin(1e-9));

    CHECK_THROWS_AS(ibleu(src, src, src, 1.5), std::invalid_argument);
}

TEST_CASE("bleu is invariant under corpus reordering") {
    auto cand = corpus({"a b c", "d e f g", "h i"});
    auto ref = corpus({"a b x", "d e f y", "h z"});
    auto cand_r = corpus({"h i", "a b c", "d e f g"});
    auto ref_r = corpus({"h z", "a b x", "d e f y"});
    CHECK(bleu(cand, ref) == Catch::Approx(bleu(cand_r, ref_r)).margin(1e-12));
}

TEST_CASE("replacing a matching token never raises bleu") {
    auto ref = corpus({"the cat sat on the mat"});
    auto good = corpus({"the cat sat on a mat"});
    auto worse = corpus({"the cat OOV on a mat"});
    CHECK(bleu(worse, ref) <= bleu(good, ref) + 1e-12);
}

TEST_CASE("bleu stays in range on pinned corpora") {
    auto cand = corpus({"x", "the cat", "a b c d e f g"});
    auto ref = corpus({"x", "the dog", "a b q d e p g"});
    double s = bleu(cand, ref);
    CHECK(s >= 0.0);
    CHECK(s <= 100.0);
}

TEST_CASE("validation errors") {
    std::vector<TokenSeq> empty;
    auto c = corpus({"a b"});
    CHECK_THROWS_AS(bleu(empty, empty), std::invalid_argument);
    auto two = corpus({"a b", "c d"});
    CHECK_THROWS_AS(bleu(c, two), std::invalid_argument);
    std::vector<TokenSeq> has_blank{{}};
    CHECK_THROWS_AS(bleu(has_blank, c), std::invalid_argument);
}

TEST_CASE("label tokenization") {
    CHECK(label_tokens("he_school") == TokenSeq{"he", "school"});
    CHECK(label_tokens("plain") == TokenSeq{"plain"});
    CHECK(label_tokens("ira_a_la_escuela") == TokenSeq{"ira", "a", "la", "escuela"});
}
