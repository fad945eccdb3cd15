#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace misq::text {

// Edit-distance granularity for sentence similarity. Character level is the
// default; word level operates on whitespace tokens.
enum class Granularity { character, word };

struct SimilarityScore {
    double value = 1.0;
    std::size_t distance = 0;
    std::size_t max_len = 0;
};

std::size_t edit_distance(const std::string &a, const std::string &b,
                          Granularity g = Granularity::character);

// 1 - EditDistance(a, b) / max(len(a), len(b)); both-empty -> 1 by convention.
SimilarityScore sentence_similarity(const std::string &q_ori, const std::string &q_mis,
                                    Granularity g = Granularity::character);

// Lower-case, strip punctuation, drop articles (a/an/the), collapse whitespace.
// Idempotent.
std::string normalize_answer(const std::string &s);

std::vector<std::string> tokenize(const std::string &s);

// True iff normalize_answer(gold) occurs as a contiguous token run inside
// normalize_answer(response).
bool answer_matches(const std::string &response, const std::string &gold);

// Sentence BLEU, n-grams up to 4, brevity penalty, add-one smoothing on
// orders with zero matches. Empty candidate scores 0.
double bleu(const std::string &candidate, const std::string &reference);

// ROUGE-L F1 (beta = 1) over token LCS. Either side empty scores 0.
double rouge_l(const std::string &candidate, const std::string &reference);

} // namespace misq::text
