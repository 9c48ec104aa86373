#pragma once

// Corpus-level BLEU, self-BLEU and iBLEU over pre-tokenized sequences.
// Smoothing: add-one to numerator and denominator for n >= 2 whenever the
// matched n-gram count is zero.

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibp {

using TokenSeq = std::vector<std::string>;

inline TokenSeq tokenize_line(const std::string& line) {
    TokenSeq out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

/// Toy-world rendering: a label like "he_school" becomes tokens {he, school}.
inline TokenSeq label_tokens(const std::string& label) {
    TokenSeq out;
    std::string cur;
    for (char ch : label) {
        if (ch == '_') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

namespace detail {

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const TokenSeq& seq,
                                                                    std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (seq.size() < n) return counts;
    for (std::size_t i = 0; i + n <= seq.size(); ++i)
        ++counts[std::vector<std::string>(seq.begin() + i, seq.begin() + i + n)];
    return counts;
}

} // namespace detail

/// Corpus-level BLEU scaled to [0, 100]: geometric mean of modified n-gram
/// precisions times the brevity penalty exp(min(0, 1 - ref_len/cand_len)).
inline double bleu(const std::vector<TokenSeq>& candidates,
                   const std::vector<TokenSeq>& references, std::size_t max_n = 4) {
    if (candidates.empty() || candidates.size() != references.size())
        throw std::invalid_argument("bleu: corpora must be non-empty and aligned");
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (candidates[i].empty() || references[i].empty())
            throw std::invalid_argument("bleu: empty sequence at line " + std::to_string(i));

    double cand_len = 0.0, ref_len = 0.0;
    for (const auto& c : candidates) cand_len += static_cast<double>(c.size());
    for (const auto& r : references) ref_len += static_cast<double>(r.size());

    double log_prec = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        double matched = 0.0, total = 0.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            auto cand = detail::ngram_counts(candidates[i], n);
            auto ref = detail::ngram_counts(references[i], n);
            for (const auto& [gram, count] : cand) {
                total += static_cast<double>(count);
                auto it = ref.find(gram);
                if (it != ref.end())
                    matched += static_cast<double>(std::min(count, it->second));
            }
        }
        double p;
        if (n >= 2 && matched == 0.0)
            p = 1.0 / (total + 1.0); // add-one smoothing on zero counts
        else if (total == 0.0 || matched == 0.0)
            return 0.0; // unsmoothed unigram miss floors the score
        else
            p = matched / total;
        log_prec += std::log(p);
    }
    double bp = std::exp(std::min(0.0, 1.0 - ref_len / cand_len));
    double score = 100.0 * bp * std::exp(log_prec / static_cast<double>(max_n));
    return std::min(std::max(score, 0.0), 100.0);
}

inline double self_bleu(const std::vector<TokenSeq>& candidates,
                        const std::vector<TokenSeq>& sources) {
    return bleu(candidates, sources);
}

struct MetricReport {
    double bleu = 0.0;
    double self_bleu = 0.0;
    double ibleu = 0.0;
    double alpha = 0.7;
};

/// iBLEU = alpha * BLEU(c, r) - (1 - alpha) * BLEU(c, s).
inline MetricReport ibleu(const std::vector<TokenSeq>& candidates,
                          const std::vector<TokenSeq>& references,
                          const std::vector<TokenSeq>& sources, double alpha = 0.7) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("ibleu: alpha must be in [0, 1]");
    MetricReport r;
    r.alpha = alpha;
    r.bleu = bleu(candidates, references);
    r.self_bleu = self_bleu(candidates, sources);
    r.ibleu = alpha * r.bleu - (1.0 - alpha) * r.self_bleu;
    return r;
}

/// Arithmetic-only variant for pre-computed BLEU / self-BLEU scores.
inline double ibleu_combine(double bleu_score, double self_bleu_score, double alpha = 0.7) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("ibleu_combine: alpha must be in [0, 1]");
    return alpha * bleu_score - (1.0 - alpha) * self_bleu_score;
}

} // namespace ibp
