#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "jscn/data.hpp"
#include "jscn/errors.hpp"

using namespace jscn;
namespace fs = std::filesystem;

namespace {

std::string write_tmp(const std::string& name, const std::string& content) {
    const std::string path = (fs::temp_directory_path() / name).string();
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_ratings parses the 4-column convention") {
    const auto path = write_tmp("jscn_ok.csv", "A1,B0001,5.0,1372636800\nA2,B0002,1.0,0\n");
    const RawRatings raw = load_ratings(path);
    REQUIRE(raw.records.size() == 2);
    CHECK(raw.records[0].user_id == "A1");
    CHECK(raw.records[0].item_id == "B0001");
    CHECK(raw.records[0].rating == 5.0);
    CHECK(raw.records[0].timestamp == 1372636800);
}

TEST_CASE("load_ratings edge cases") {
    CHECK(load_ratings(write_tmp("jscn_empty.csv", "")).records.empty());
    CHECK_THROWS_WITH_AS(load_ratings(write_tmp("jscn_bad.csv", "a,b,1.0,0\nx,y,2.0\n")),
                         doctest::Contains(":2"), InputError);
    CHECK_THROWS_WITH_AS(load_ratings(write_tmp("jscn_range.csv", "a,b,7.5,0\n")),
                         doctest::Contains("outside"), InputError);
    CHECK_THROWS_AS(load_ratings("/nonexistent/path.csv"), InputError);
}

TEST_CASE("to_implicit deduplicates regardless of rating value") {
    RawRatings raw;
    raw.records = {{"u", "i", 1.0, 0}, {"u", "i", 5.0, 9}, {"v", "i", 5.0, 1}};
    const auto edges = to_implicit(raw);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == StringEdge{"u", "i"});
    CHECK(edges[1] == StringEdge{"v", "i"});
    CHECK(to_implicit(RawRatings{}).empty());
}

TEST_CASE("filter_min_interactions removes light users") {
    std::vector<StringEdge> edges;
    for (int k = 0; k < 4; ++k) edges.push_back({"light", "i" + std::to_string(k)});
    for (int k = 0; k < 5; ++k) edges.push_back({"heavy", "j" + std::to_string(k)});
    const auto kept = filter_min_interactions(edges, 5);
    CHECK(kept.size() == 5);
    for (const auto& [u, i] : kept) CHECK(u == "heavy");

    // fixed point: already-filtered input is unchanged
    CHECK(filter_min_interactions(kept, 5) == kept);

    CHECK_THROWS_WITH_AS(filter_min_interactions({{"a", "x"}}, 5),
                         doctest::Contains("eliminated"), InputError);
}

TEST_CASE("stats sparsity identity") {
    const auto d = BipartiteDomain::make({"a", "b"}, {"x", "y", "z"},
                                         {{0, 0}, {0, 1}, {1, 1}, {1, 2}}, "t");
    const DomainStats s = compute_stats(d);
    CHECK(s.n_users == 2);
    CHECK(s.n_items == 3);
    CHECK(s.n_edges == 4);
    CHECK(s.sparsity == 1.0 - 4.0 / 6.0);
}

TEST_CASE("split keeps per-user and per-item coverage") {
    std::vector<Edge> edges;
    std::vector<std::string> users, items;
    for (int u = 0; u < 6; ++u) users.push_back("u" + std::to_string(u));
    for (int i = 0; i < 8; ++i) items.push_back("i" + std::to_string(i));
    for (int u = 0; u < 6; ++u)
        for (int i = 0; i < 8; ++i)
            if ((u + i) % 2 == 0 || i == u) edges.push_back({u, i});
    const auto full = BipartiteDomain::make(users, items, edges, "t");

    const EdgeSplit split = split_train_test(full, 0.2, 99);

    std::set<Edge> train(split.train.begin(), split.train.end());
    std::set<Edge> test(split.test.begin(), split.test.end());
    CHECK(train.size() + test.size() == full.edges.size());
    for (const Edge& e : test) CHECK(train.count(e) == 0);

    std::vector<int> u_train(6, 0), u_test(6, 0), i_train(8, 0);
    for (const auto& [u, i] : split.train) {
        ++u_train[u];
        ++i_train[i];
    }
    for (const auto& [u, i] : split.test) ++u_test[u];
    for (int u = 0; u < 6; ++u) {
        CHECK(u_train[u] >= 1);
        CHECK(u_test[u] >= 1);
    }
    for (int i = 0; i < 8; ++i) CHECK(i_train[i] >= 1);
}

TEST_CASE("split arithmetic and errors") {
    std::vector<std::string> items{"a", "b", "c", "d", "e"};
    std::vector<Edge> edges;
    for (int i = 0; i < 5; ++i) edges.push_back({0, i});
    edges.push_back({1, 0});
    edges.push_back({1, 1});
    const auto full = BipartiteDomain::make({"u", "v"}, items, edges, "t");

    const EdgeSplit split = split_train_test(full, 0.2, 7);
    int test_u0 = 0;
    for (const auto& [u, i] : split.test)
        if (u == 0) ++test_u0;
    CHECK(test_u0 == 1);  // round(5 * 0.2) = 1

    CHECK_THROWS_WITH_AS(split_train_test(full, 0.0, 7), doctest::Contains("test set would be"),
                         InputError);
    CHECK_THROWS_AS(split_train_test(full, 1.0, 7), InputError);

    const auto single = BipartiteDomain::make({"u", "v"}, {"a", "b"},
                                              {{0, 0}, {0, 1}, {1, 0}}, "t");
    CHECK_THROWS_WITH_AS(split_train_test(single, 0.2, 7), doctest::Contains("fewer than 2"),
                         InputError);

    const EdgeSplit again = split_train_test(full, 0.2, 7);
    CHECK(again.train == split.train);
    CHECK(again.test == split.test);
}

TEST_CASE("align_shared_users") {
    auto make_domain = [](std::vector<std::string> users, const std::string& cat) {
        std::vector<Edge> edges;
        for (int u = 0; u < static_cast<int>(users.size()); ++u) edges.push_back({u, 0});
        return BipartiteDomain::make(std::move(users), {"i"}, edges, cat);
    };
    const auto a = make_domain({"a", "b", "c"}, "m");
    const auto b = make_domain({"b", "c", "d"}, "n");
    const auto c = make_domain({"x", "y"}, "o");

    const SharedUserIndex idx = align_shared_users({a, b, c});
    REQUIRE(idx.get(0, 1).size() == 2);
    CHECK(idx.get(0, 1)[0] == std::pair<int, int>{1, 0});  // "b"
    CHECK(idx.get(0, 1)[1] == std::pair<int, int>{2, 1});  // "c"
    CHECK(idx.get(0, 2).empty());
    CHECK(idx.get(1, 2).empty());

    // transpose symmetry
    const auto& fwd = idx.get(0, 1);
    const auto& bwd = idx.get(1, 0);
    REQUIRE(fwd.size() == bwd.size());
    for (std::size_t k = 0; k < fwd.size(); ++k) {
        CHECK(fwd[k].first == bwd[k].second);
        CHECK(fwd[k].second == bwd[k].first);
    }

    const SharedUserIndex same = align_shared_users({a, a});
    CHECK(same.get(0, 1).size() == 3);
}

TEST_CASE("synthetic generator shared fraction extremes") {
    SyntheticSpec spec;
    spec.users_per_domain = 40;
    spec.items_per_domain = 30;
    spec.latent_rank = 4;
    spec.target_density_offset = 0.0;  // dense so filtering keeps everyone
    spec.source_density_offset = 0.0;

    spec.shared_fraction = 0.0;
    CHECK(generate_synthetic(spec, 1).shared.empty());

    spec.shared_fraction = 1.0;
    const DatasetBundle bundle = generate_synthetic(spec, 1);
    REQUIRE(bundle.sources.size() == 1);
    CHECK(bundle.shared.get(0, 1).size() == 40);  // every user paired across both
}

TEST_CASE("synthetic generator advises when filtering eliminates a domain") {
    SyntheticSpec spec;
    spec.users_per_domain = 20;
    spec.items_per_domain = 20;
    spec.target_density_offset = -40.0;  // essentially no edges survive
    spec.source_density_offset = -40.0;
    CHECK_THROWS_WITH_AS(generate_synthetic(spec, 1),
                         doctest::Contains("edge_probability_scale"), InputError);
}

TEST_CASE("default synthetic bundle satisfies its invariants") {
    const DatasetBundle bundle = generate_synthetic(SyntheticSpec{}, 12);

    // disjoint train/test with full per-user coverage
    std::set<Edge> train(bundle.target.edges.begin(), bundle.target.edges.end());
    for (const Edge& e : bundle.target_test) CHECK(train.count(e) == 0);
    std::vector<int> u_train(bundle.target.n_users(), 0), u_test(bundle.target.n_users(), 0);
    std::vector<int> i_train(bundle.target.n_items(), 0);
    for (const auto& [u, i] : bundle.target.edges) {
        ++u_train[u];
        ++i_train[i];
    }
    for (const auto& [u, i] : bundle.target_test) ++u_test[u];
    double mean_deg = 0.0;
    for (int u = 0; u < bundle.target.n_users(); ++u) {
        CHECK(u_train[u] >= 1);
        CHECK(u_test[u] >= 1);
        mean_deg += u_train[u] + u_test[u];
    }
    mean_deg /= bundle.target.n_users();
    CHECK(mean_deg >= 5.0);
    for (int i = 0; i < bundle.target.n_items(); ++i) CHECK(i_train[i] >= 1);

    // post-filter minimum degree on every full domain (train+test for target)
    for (const auto& src : bundle.sources) {
        std::vector<int> deg(src.n_users(), 0);
        for (const auto& [u, i] : src.edges) ++deg[u];
        for (int u = 0; u < src.n_users(); ++u) CHECK(deg[u] >= 5);
    }
    for (int u = 0; u < bundle.target.n_users(); ++u) CHECK(u_train[u] + u_test[u] >= 5);

    // shared rows really refer to identical user ids
    const auto domains = bundle.training_domains();
    for (const auto& [mn, rows] : bundle.shared.pairs)
        for (const auto& [rm, rn] : rows)
            CHECK(domains[mn.first].users[rm] == domains[mn.second].users[rn]);

    CHECK(generate_synthetic(SyntheticSpec{}, 12).provenance == bundle.provenance);
}

TEST_CASE("bundle save/load round trip") {
    SyntheticSpec spec;
    spec.users_per_domain = 50;
    spec.items_per_domain = 40;
    spec.n_domains = 3;
    spec.target_density_offset = -1.0;
    const DatasetBundle bundle = generate_synthetic(spec, 5);

    const std::string dir = (fs::temp_directory_path() / "jscn_bundle_rt").string();
    fs::remove_all(dir);
    save_bundle(bundle, dir);
    const DatasetBundle loaded = load_bundle(dir);

    CHECK(loaded.target.users == bundle.target.users);
    CHECK(loaded.target.items == bundle.target.items);
    CHECK(loaded.target.edges == bundle.target.edges);
    CHECK(loaded.target_test == bundle.target_test);
    REQUIRE(loaded.sources.size() == bundle.sources.size());
    for (std::size_t k = 0; k < bundle.sources.size(); ++k)
        CHECK(loaded.sources[k].edges == bundle.sources[k].edges);
    CHECK(loaded.shared.pairs == bundle.shared.pairs);
    CHECK(loaded.provenance == bundle.provenance);
}
