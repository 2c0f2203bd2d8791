#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "jscn/data.hpp"
#include "jscn/errors.hpp"
#include "jscn/eval.hpp"
#include "oracle_metrics.hpp"
#include "test_util.hpp"

using namespace jscn;
using test::oracle_user_metrics;
using test::OracleMetrics;

namespace {

EmbeddingSet embedding_from(const Eigen::MatrixXd& v_user, const Eigen::MatrixXd& v_item) {
    EmbeddingSet e;
    e.v_user = v_user;
    e.v_item = v_item;
    e.u_invariant = v_user;
    return e;
}

}  // namespace

TEST_CASE("rank_items_for_user") {
    EmbeddingSet emb = embedding_from(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd(3, 1));
    emb.v_item << 0.1, 0.9, 0.5;

    SUBCASE("hand-sorted order") {
        const auto ranked = rank_items_for_user(emb, 0, {});
        CHECK(ranked == std::vector<int>{1, 2, 0});
    }

    SUBCASE("training items are excluded") {
        const auto ranked = rank_items_for_user(emb, 0, {0, 1});
        CHECK(ranked == std::vector<int>{2});
    }

    SUBCASE("ties break toward the lower index") {
        emb.v_item << 0.5, 0.5, 0.5;
        const auto ranked = rank_items_for_user(emb, 0, {});
        CHECK(ranked == std::vector<int>{0, 1, 2});
    }
}

TEST_CASE("recall_at_k closed forms") {
    const std::vector<int> ranked{5, 3, 8, 1, 0};
    CHECK(recall_at_k(ranked, {3, 5}, 2) == 1.0);
    CHECK(recall_at_k(ranked, {0, 3}, 2) == 0.5);
    CHECK(recall_at_k(ranked, {0, 1}, 2) == 0.0);
    CHECK_THROWS_AS(recall_at_k(ranked, {}, 2), InputError);
}

TEST_CASE("map_at_k closed forms") {
    CHECK(map_at_k({7, 1, 2}, {7}, 3) == 1.0);          // single relevant at rank 1
    CHECK(map_at_k({1, 2, 7}, {7}, 3) == doctest::Approx(1.0 / 3.0));  // at rank 3
    CHECK(map_at_k({4, 9, 0}, {4, 9}, 3) == 1.0);       // both at ranks 1 and 2
    CHECK(map_at_k({9, 0, 4}, {4, 9}, 2) == doctest::Approx(0.5));
}

TEST_CASE("evaluate with oracle scores retrieves everything") {
    std::mt19937_64 rng(4);
    const auto fm = test::random_feedback(6, 7, rng);
    const auto full = test::domain_from_feedback(fm);
    const EdgeSplit split = split_train_test(full, 0.3, 2);
    const auto target = BipartiteDomain::make(full.users, full.items, split.train, "t");

    // score = held-out adjacency: rows are one-hot over the user's test items
    Eigen::MatrixXd vu = Eigen::MatrixXd::Zero(6, 7);
    for (const auto& [u, i] : split.test) vu(u, i) = 1.0;
    const EmbeddingSet emb = embedding_from(vu, Eigen::MatrixXd::Identity(7, 7));

    const EvalReport rep = evaluate(emb, target, split.test, {7});
    CHECK(rep.recall_at.at(7) == 1.0);
    CHECK(rep.map_at.at(7) == 1.0);
    CHECK(rep.n_users_evaluated == 6);
}

TEST_CASE("evaluate matches the brute-force oracle bit for bit") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        const int nu = 4 + static_cast<int>(rng() % 10);
        const int ni = 6 + static_cast<int>(rng() % 10);
        const auto full = test::domain_from_feedback(test::random_feedback(nu, ni, rng, 0.5));
        const EdgeSplit split = split_train_test(full, 0.3, rng());
        const auto target = BipartiteDomain::make(full.users, full.items, split.train, "t");

        std::normal_distribution<double> gauss;
        Eigen::MatrixXd vu(nu, 5), vi(ni, 5);
        for (int r = 0; r < nu; ++r)
            for (int c = 0; c < 5; ++c) vu(r, c) = gauss(rng);
        for (int r = 0; r < ni; ++r)
            for (int c = 0; c < 5; ++c) vi(r, c) = gauss(rng);
        const EmbeddingSet emb = embedding_from(vu, vi);

        const std::vector<int> ks{1, 3, 5};
        const EvalReport rep = evaluate(emb, target, split.test, ks);

        const auto adj = target.user_adjacency();
        std::vector<std::vector<int>> relevant(nu);
        for (const auto& [u, i] : split.test) relevant[u].push_back(i);
        for (int k : ks) {
            double recall_sum = 0.0, ap_sum = 0.0;
            int count = 0;
            for (int u = 0; u < nu; ++u) {
                if (relevant[u].empty()) continue;
                const OracleMetrics m = oracle_user_metrics(emb, u, adj[u], relevant[u], k);
                recall_sum += m.recall;
                ap_sum += m.ap;
                ++count;
            }
            CHECK(rep.recall_at.at(k) == recall_sum / count);
            CHECK(rep.map_at.at(k) == ap_sum / count);
        }
    }
}

TEST_CASE("recall is nondecreasing in K and rankings exclude training items") {
    std::mt19937_64 rng(8);
    const auto full = test::domain_from_feedback(test::random_feedback(8, 12, rng, 0.5));
    const EdgeSplit split = split_train_test(full, 0.25, 3);
    const auto target = BipartiteDomain::make(full.users, full.items, split.train, "t");
    Eigen::MatrixXd vu = Eigen::MatrixXd::Random(8, 4), vi = Eigen::MatrixXd::Random(12, 4);
    const EmbeddingSet emb = embedding_from(vu, vi);

    const std::vector<int> ks{1, 2, 4, 8, 12};
    const EvalReport rep = evaluate(emb, target, split.test, ks);
    for (std::size_t k = 1; k < ks.size(); ++k)
        CHECK(rep.recall_at.at(ks[k]) >= rep.recall_at.at(ks[k - 1]));

    const auto adj = target.user_adjacency();
    for (int u = 0; u < 8; ++u) {
        const auto ranked = rank_items_for_user(emb, u, adj[u]);
        for (int i : adj[u])
            CHECK(std::find(ranked.begin(), ranked.end(), i) == ranked.end());
    }
}

TEST_CASE("metrics are invariant to order-preserving score transforms") {
    std::mt19937_64 rng(17);
    const auto full = test::domain_from_feedback(test::random_feedback(6, 9, rng, 0.5));
    const EdgeSplit split = split_train_test(full, 0.3, 4);
    const auto target = BipartiteDomain::make(full.users, full.items, split.train, "t");
    const Eigen::MatrixXd vu = Eigen::MatrixXd::Random(6, 3);
    const Eigen::MatrixXd vi = Eigen::MatrixXd::Random(9, 3);

    const EvalReport a = evaluate(embedding_from(vu, vi), target, split.test, {2, 5});
    const EvalReport b = evaluate(embedding_from(7.5 * vu, vi), target, split.test, {2, 5});
    for (int k : {2, 5}) {
        CHECK(a.recall_at.at(k) == b.recall_at.at(k));
        CHECK(a.map_at.at(k) == b.map_at.at(k));
    }
}

TEST_CASE("random embeddings hit the analytic recall expectation") {
    // E[Recall@K] for a uniformly random ranking is K / n_eligible.
    std::mt19937_64 rng(23);
    const auto full = test::domain_from_feedback(test::random_feedback(10, 30, rng, 0.25));
    const EdgeSplit split = split_train_test(full, 0.3, 5);
    const auto target = BipartiteDomain::make(full.users, full.items, split.train, "t");
    const int k = 10;

    const auto adj = target.user_adjacency();
    std::vector<std::vector<int>> relevant(10);
    for (const auto& [u, i] : split.test) relevant[u].push_back(i);
    double expected = 0.0;
    int evaluable = 0;
    for (int u = 0; u < 10; ++u) {
        if (relevant[u].empty()) continue;
        expected += static_cast<double>(k) / (30.0 - static_cast<double>(adj[u].size()));
        ++evaluable;
    }
    expected /= evaluable;

    std::vector<double> recalls;
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd vu(10, 6), vi(30, 6);
        for (int r = 0; r < 10; ++r)
            for (int c = 0; c < 6; ++c) vu(r, c) = gauss(rng);
        for (int r = 0; r < 30; ++r)
            for (int c = 0; c < 6; ++c) vi(r, c) = gauss(rng);
        recalls.push_back(
            evaluate(embedding_from(vu, vi), target, split.test, {k}).recall_at.at(k));
    }
    double mean = 0.0;
    for (double r : recalls) mean += r;
    mean /= recalls.size();
    double var = 0.0;
    for (double r : recalls) var += (r - mean) * (r - mean);
    var /= (recalls.size() - 1);
    const double sem = std::sqrt(var / recalls.size());
    CHECK(std::abs(mean - expected) < 3.0 * std::max(sem, 1e-6));
}

TEST_CASE("evaluate rejects degenerate input") {
    const auto d = BipartiteDomain::make({"a", "b"}, {"x", "y"}, {{0, 0}, {1, 1}}, "t");
    EmbeddingSet emb = embedding_from(Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2));
    CHECK_THROWS_AS(evaluate(emb, d, {}, {5}), InputError);       // no test edges
    CHECK_THROWS_AS(evaluate(emb, d, {{0, 1}}, {}), InputError);  // no ks
}
