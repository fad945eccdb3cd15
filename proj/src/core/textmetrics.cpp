#include "textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace misq::text {

namespace {

template <typename Seq>
std::size_t levenshtein(const Seq &a, const Seq &b) {
    const std::size_t m = a.size(), n = b.size();
    if (m == 0) return n;
    if (n == 0) return m;
    std::vector<std::size_t> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= m; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

bool is_article(const std::string &tok) {
    return tok == "a" || tok == "an" || tok == "the";
}

// Lower-case and strip punctuation, keep articles. Shared by BLEU/ROUGE.
std::string fold_text(const std::string &s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) continue;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

} // namespace

std::vector<std::string> tokenize(const std::string &s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::size_t edit_distance(const std::string &a, const std::string &b, Granularity g) {
    if (g == Granularity::character) return levenshtein(a, b);
    return levenshtein(tokenize(a), tokenize(b));
}

SimilarityScore sentence_similarity(const std::string &q_ori, const std::string &q_mis,
                                    Granularity g) {
    SimilarityScore s;
    if (g == Granularity::character) {
        s.max_len = std::max(q_ori.size(), q_mis.size());
    } else {
        s.max_len = std::max(tokenize(q_ori).size(), tokenize(q_mis).size());
    }
    s.distance = edit_distance(q_ori, q_mis, g);
    s.value = s.max_len == 0 ? 1.0 : 1.0 - static_cast<double>(s.distance) / s.max_len;
    return s;
}

std::string normalize_answer(const std::string &s) {
    const std::string stripped = fold_text(s);
    std::string out;
    for (const auto &tok : tokenize(stripped)) {
        if (is_article(tok)) continue;
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

bool answer_matches(const std::string &response, const std::string &gold) {
    const auto resp = tokenize(normalize_answer(response));
    const auto need = tokenize(normalize_answer(gold));
    if (need.empty() || resp.size() < need.size()) return false;
    for (std::size_t i = 0; i + need.size() <= resp.size(); ++i) {
        if (std::equal(need.begin(), need.end(), resp.begin() + i)) return true;
    }
    return false;
}

double bleu(const std::string &candidate, const std::string &reference) {
    const auto cand = tokenize(fold_text(candidate));
    const auto ref = tokenize(fold_text(reference));
    if (cand.empty() || ref.empty()) return 0.0;

    constexpr int kMaxOrder = 4;
    double log_prec_sum = 0.0;
    for (int n = 1; n <= kMaxOrder; ++n) {
        std::map<std::vector<std::string>, std::size_t> ref_counts;
        for (std::size_t i = 0; i + n <= ref.size(); ++i)
            ref_counts[{ref.begin() + i, ref.begin() + i + n}]++;
        std::size_t total = cand.size() >= static_cast<std::size_t>(n)
                                ? cand.size() - n + 1
                                : 0;
        std::size_t matched = 0;
        std::map<std::vector<std::string>, std::size_t> used;
        for (std::size_t i = 0; i + n <= cand.size(); ++i) {
            std::vector<std::string> gram(cand.begin() + i, cand.begin() + i + n);
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end() && used[gram] < it->second) {
                ++used[gram];
                ++matched;
            }
        }
        double p;
        if (matched == 0) {
            p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
        } else {
            p = static_cast<double>(matched) / static_cast<double>(total);
        }
        log_prec_sum += std::log(p);
    }
    const double geo_mean = std::exp(log_prec_sum / kMaxOrder);
    const double bp = cand.size() >= ref.size()
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(ref.size()) / cand.size());
    return bp * geo_mean;
}

double rouge_l(const std::string &candidate, const std::string &reference) {
    const auto cand = tokenize(fold_text(candidate));
    const auto ref = tokenize(fold_text(reference));
    if (cand.empty() || ref.empty()) return 0.0;
    std::vector<std::vector<std::size_t>> dp(cand.size() + 1,
                                             std::vector<std::size_t>(ref.size() + 1, 0));
    for (std::size_t i = 1; i <= cand.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            dp[i][j] = cand[i - 1] == ref[j - 1] ? dp[i - 1][j - 1] + 1
                                                 : std::max(dp[i - 1][j], dp[i][j - 1]);
        }
    }
    const double lcs = static_cast<double>(dp[cand.size()][ref.size()]);
    if (lcs == 0.0) return 0.0;
    const double prec = lcs / cand.size();
    const double rec = lcs / ref.size();
    return 2.0 * prec * rec / (prec + rec);
}

} // namespace misq::text
