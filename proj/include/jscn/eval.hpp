#pragma once

#include <map>
#include <string>
#include <vector>

#include "jscn/data.hpp"
#include "jscn/model.hpp"

namespace jscn {

struct EvalReport {
    std::vector<int> ks;
    std::map<int, double> recall_at;
    std::map<int, double> map_at;
    int n_users_evaluated = 0;

    struct PerUser {
        int user = 0;
        std::map<int, double> recall_at;
        std::map<int, double> map_at;
    };
    std::vector<PerUser> per_user;  // filled when requested
};

inline const std::vector<int> kDefaultKs{20, 40, 60, 80, 100};

/// Items the user has not trained on, sorted by descending dot-product
/// score; ties break toward the lower item index.
std::vector<int> rank_items_for_user(const EmbeddingSet& emb, int user_row,
                                     const std::vector<int>& train_items_sorted);

/// |top-K of ranked intersected with relevant| / |relevant|.
double recall_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant_sorted,
                   int k);

/// Average precision truncated at K, normalized by min(K, |relevant|).
double map_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant_sorted, int k);

/// Macro-averaged Recall@K and MAP@K over target users holding at least
/// one held-out edge.
EvalReport evaluate(const EmbeddingSet& target_emb, const BipartiteDomain& target,
                    const std::vector<Edge>& test_edges, const std::vector<int>& ks,
                    bool keep_per_user = false);

std::string report_to_table(const EvalReport& report);

}  // namespace jscn
