#pragma once

// Ranking metrics for link prediction: ROC-AUC (Mann-Whitney form),
// average precision with pessimistic tie handling, and mean reciprocal
// rank over per-positive candidate sets with half-credit ties.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "unidyg/complex.hpp"

namespace unidyg {

// P(score_pos > score_neg) + 0.5 * P(score_pos == score_neg).
inline double auc(const Vec& pos_scores, const Vec& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty())
        throw std::invalid_argument("auc: both classes must be non-empty");
    Vec neg = neg_scores;
    std::sort(neg.begin(), neg.end());
    double num = 0.0;
    for (double p : pos_scores) {
        auto lo = std::lower_bound(neg.begin(), neg.end(), p);
        auto hi = std::upper_bound(neg.begin(), neg.end(), p);
        num += double(lo - neg.begin()) + 0.5 * double(hi - lo);
    }
    return num / (double(pos_scores.size()) * double(neg_scores.size()));
}

// Area under the precision-recall curve via the rank-sum formulation.
// Ties are resolved pessimistically: at equal scores every negative is
// ranked ahead of every positive.
inline double ap(const Vec& pos_scores, const Vec& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty())
        throw std::invalid_argument("ap: both classes must be non-empty");
    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> all;
    all.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) all.push_back({s, true});
    for (double s : neg_scores) all.push_back({s, false});
    std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return !a.positive && b.positive;  // negatives first at equal score
    });
    double hits = 0.0, sum = 0.0;
    for (std::size_t r = 0; r < all.size(); ++r) {
        if (!all[r].positive) continue;
        hits += 1.0;
        sum += hits / double(r + 1);
    }
    return sum / double(pos_scores.size());
}

// Reciprocal rank of one positive against its negative candidates;
// equal scores contribute half a rank position each.
inline double reciprocal_rank(double pos_score, const Vec& neg_scores) {
    double rank = 1.0;
    for (double n : neg_scores) {
        if (n > pos_score) rank += 1.0;
        else if (n == pos_score) rank += 0.5;
    }
    return 1.0 / rank;
}

// Mean reciprocal rank over per-positive candidate sets.
inline double mrr(const Vec& pos_scores, const std::vector<Vec>& neg_sets) {
    if (pos_scores.empty()) throw std::invalid_argument("mrr: no positives");
    if (pos_scores.size() != neg_sets.size())
        throw std::invalid_argument("mrr: one negative set per positive required");
    double sum = 0.0;
    for (std::size_t i = 0; i < pos_scores.size(); ++i)
        sum += reciprocal_rank(pos_scores[i], neg_sets[i]);
    return sum / double(pos_scores.size());
}

}  // namespace unidyg
