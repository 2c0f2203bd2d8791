#include "jscn/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "jscn/errors.hpp"

namespace jscn {

std::vector<int> rank_items_for_user(const EmbeddingSet& emb, int user_row,
                                     const std::vector<int>& train_items_sorted) {
    if (user_row < 0 || user_row >= emb.v_user.rows())
        throw InputError("user row " + std::to_string(user_row) + " out of range");
    const Eigen::VectorXd scores =
        predict_scores(emb.v_user.row(user_row).transpose(), emb.v_item);

    std::vector<int> candidates;
    candidates.reserve(emb.v_item.rows());
    for (int i = 0; i < emb.v_item.rows(); ++i)
        if (!std::binary_search(train_items_sorted.begin(), train_items_sorted.end(), i))
            candidates.push_back(i);

    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;
    });
    return candidates;
}

double recall_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant_sorted,
                   int k) {
    if (relevant_sorted.empty()) throw InputError("recall_at_k: empty relevant set");
    const int top = std::min<int>(k, static_cast<int>(ranked.size()));
    int hits = 0;
    for (int pos = 0; pos < top; ++pos)
        if (std::binary_search(relevant_sorted.begin(), relevant_sorted.end(), ranked[pos]))
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(relevant_sorted.size());
}

double map_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant_sorted, int k) {
    if (relevant_sorted.empty()) throw InputError("map_at_k: empty relevant set");
    const int top = std::min<int>(k, static_cast<int>(ranked.size()));
    int hits = 0;
    double ap = 0.0;
    for (int pos = 0; pos < top; ++pos) {
        if (std::binary_search(relevant_sorted.begin(), relevant_sorted.end(), ranked[pos])) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(pos + 1);
        }
    }
    const int denom = std::min<int>(k, static_cast<int>(relevant_sorted.size()));
    return ap / static_cast<double>(denom);
}

EvalReport evaluate(const EmbeddingSet& target_emb, const BipartiteDomain& target,
                    const std::vector<Edge>& test_edges, const std::vector<int>& ks,
                    bool keep_per_user) {
    if (ks.empty()) throw InputError("evaluate: no K values given");
    if (target_emb.v_user.rows() != target.n_users() ||
        target_emb.v_item.rows() != target.n_items())
        throw InputError("embedding/domain size mismatch");

    std::vector<std::vector<int>> relevant(target.n_users());
    for (const auto& [u, i] : test_edges) {
        if (u < 0 || u >= target.n_users() || i < 0 || i >= target.n_items())
            throw InputError("test edge out of range");
        relevant[u].push_back(i);
    }
    for (auto& r : relevant) std::sort(r.begin(), r.end());

    const auto train_adj = target.user_adjacency();

    EvalReport report;
    report.ks = ks;
    for (int k : ks) {
        report.recall_at[k] = 0.0;
        report.map_at[k] = 0.0;
    }
    for (int u = 0; u < target.n_users(); ++u) {
        if (relevant[u].empty()) continue;
        const std::vector<int> ranked = rank_items_for_user(target_emb, u, train_adj[u]);
        EvalReport::PerUser pu;
        pu.user = u;
        for (int k : ks) {
            const double r = recall_at_k(ranked, relevant[u], k);
            const double m = map_at_k(ranked, relevant[u], k);
            report.recall_at[k] += r;
            report.map_at[k] += m;
            if (keep_per_user) {
                pu.recall_at[k] = r;
                pu.map_at[k] = m;
            }
        }
        if (keep_per_user) report.per_user.push_back(std::move(pu));
        ++report.n_users_evaluated;
    }
    if (report.n_users_evaluated == 0) throw InputError("no users with held-out edges");
    for (int k : ks) {
        report.recall_at[k] /= report.n_users_evaluated;
        report.map_at[k] /= report.n_users_evaluated;
    }
    return report;
}

std::string report_to_table(const EvalReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(8) << "K" << std::setw(14) << "Recall@K" << std::setw(14)
        << "MAP@K" << "\n";
    out << std::string(34, '-') << "\n";
    out << std::fixed << std::setprecision(6);
    for (int k : report.ks)
        out << std::left << std::setw(8) << k << std::setw(14) << report.recall_at.at(k)
            << std::setw(14) << report.map_at.at(k) << "\n";
    out << "users evaluated: " << report.n_users_evaluated << "\n";
    return out.str();
}

}  // namespace jscn
