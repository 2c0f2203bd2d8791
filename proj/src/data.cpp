#include "jscn/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jscn/errors.hpp"
#include "jscn/logging.hpp"

namespace fs = std::filesystem;

namespace jscn {

RawRatings load_ratings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open ratings file '" + path + "'");

    RawRatings raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));

        RatingRecord rec;
        rec.user_id = fields[0];
        rec.item_id = fields[1];
        try {
            std::size_t pos = 0;
            rec.rating = std::stod(fields[2], &pos);
            if (pos != fields[2].size()) throw std::invalid_argument("rating");
            rec.timestamp = std::stoll(fields[3], &pos);
            if (pos != fields[3].size()) throw std::invalid_argument("timestamp");
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": malformed numeric field");
        }
        if (rec.rating < 1.0 || rec.rating > 5.0)
            throw InputError(path + ":" + std::to_string(lineno) + ": rating " + fields[2] +
                             " outside [1,5]");
        raw.records.push_back(std::move(rec));
    }
    return raw;
}

std::vector<StringEdge> to_implicit(const RawRatings& raw) {
    std::vector<StringEdge> edges;
    std::set<StringEdge> seen;
    for (const RatingRecord& r : raw.records) {
        StringEdge e{r.user_id, r.item_id};
        if (seen.insert(e).second) edges.push_back(std::move(e));
    }
    return edges;
}

std::vector<StringEdge> filter_min_interactions(std::vector<StringEdge> edges, int min_degree) {
    if (min_degree < 1) throw InputError("min_degree must be >= 1");
    bool changed = true;
    while (changed) {
        changed = false;
        std::map<std::string, int> user_deg;
        for (const auto& [u, i] : edges) ++user_deg[u];
        std::vector<StringEdge> kept;
        kept.reserve(edges.size());
        for (auto& e : edges) {
            if (user_deg[e.first] >= min_degree)
                kept.push_back(std::move(e));
            else
                changed = true;
        }
        edges = std::move(kept);
    }
    if (edges.empty()) throw InputError("dataset eliminated by filtering");
    return edges;
}

DomainStats compute_stats(const BipartiteDomain& domain) {
    DomainStats s;
    s.n_users = domain.n_users();
    s.n_items = domain.n_items();
    s.n_edges = static_cast<std::int64_t>(domain.edges.size());
    s.sparsity = 1.0 - static_cast<double>(s.n_edges) /
                           (static_cast<double>(s.n_users) * static_cast<double>(s.n_items));
    return s;
}

EdgeSplit split_train_test(const BipartiteDomain& full, double test_fraction,
                           std::uint64_t seed) {
    if (test_fraction <= 0.0)
        throw InputError("test set would be empty for user: test_fraction must be positive");
    if (test_fraction >= 1.0)
        throw InputError("train set would be empty for user: test_fraction must be below 1");

    const auto adj = full.user_adjacency();
    for (int u = 0; u < full.n_users(); ++u)
        if (adj[u].size() < 2)
            throw InputError("user '" + full.users[u] + "' has fewer than 2 edges; cannot split");

    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> train_items(full.n_users()), test_items(full.n_users());
    for (int u = 0; u < full.n_users(); ++u) {
        std::vector<int> items = adj[u];
        const int deg = static_cast<int>(items.size());
        int n_test = static_cast<int>(std::llround(deg * test_fraction));
        n_test = std::clamp(n_test, 1, deg - 1);
        std::shuffle(items.begin(), items.end(), rng);
        test_items[u].assign(items.begin(), items.begin() + n_test);
        train_items[u].assign(items.begin() + n_test, items.end());
    }

    // Every item needs at least one train edge; swap test edges back where
    // an item ended up test-only.
    std::vector<int> item_train_deg(full.n_items(), 0);
    for (const auto& ti : train_items)
        for (int i : ti) ++item_train_deg[i];

    auto move_edge = [](std::vector<int>& from, std::vector<int>& to, int item) {
        from.erase(std::find(from.begin(), from.end(), item));
        to.push_back(item);
    };

    for (int i = 0; i < full.n_items(); ++i) {
        if (item_train_deg[i] > 0) continue;
        // Prefer a holder with a spare test edge.
        int best_u = -1;
        for (int u = 0; u < full.n_users(); ++u) {
            if (std::find(test_items[u].begin(), test_items[u].end(), i) == test_items[u].end())
                continue;
            if (test_items[u].size() >= 2 &&
                (best_u == -1 || test_items[u].size() > test_items[best_u].size()))
                best_u = u;
        }
        if (best_u >= 0) {
            move_edge(test_items[best_u], train_items[best_u], i);
            ++item_train_deg[i];
            continue;
        }
        // Every holder has exactly one test edge: take the first holder,
        // then hand it a replacement test edge backed by a sturdy item.
        for (int u = 0; u < full.n_users(); ++u) {
            if (std::find(test_items[u].begin(), test_items[u].end(), i) == test_items[u].end())
                continue;
            move_edge(test_items[u], train_items[u], i);
            ++item_train_deg[i];
            int swap_item = -1;
            for (int j : train_items[u])
                if (j != i && item_train_deg[j] >= 2 &&
                    (swap_item == -1 || item_train_deg[j] > item_train_deg[swap_item]))
                    swap_item = j;
            if (swap_item == -1)
                throw InputError("cannot keep every item in the train split; graph too sparse");
            move_edge(train_items[u], test_items[u], swap_item);
            --item_train_deg[swap_item];
            break;
        }
    }

    EdgeSplit split;
    for (int u = 0; u < full.n_users(); ++u) {
        for (int i : train_items[u]) split.train.push_back({u, i});
        for (int i : test_items[u]) split.test.push_back({u, i});
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

SharedUserIndex align_shared_users(const std::vector<BipartiteDomain>& domains) {
    SharedUserIndex idx;
    const int nd = static_cast<int>(domains.size());
    for (int m = 0; m < nd; ++m) {
        std::map<std::string, int> rows_m;
        for (int r = 0; r < domains[m].n_users(); ++r) rows_m[domains[m].users[r]] = r;
        for (int n = m + 1; n < nd; ++n) {
            std::vector<std::pair<int, int>> fwd, bwd;
            for (int r = 0; r < domains[n].n_users(); ++r) {
                auto it = rows_m.find(domains[n].users[r]);
                if (it != rows_m.end()) fwd.emplace_back(it->second, r);
            }
            std::sort(fwd.begin(), fwd.end());
            for (const auto& [a, b] : fwd) bwd.emplace_back(b, a);
            if (!fwd.empty()) {
                idx.pairs[{m, n}] = std::move(fwd);
                idx.pairs[{n, m}] = std::move(bwd);
            }
        }
    }
    return idx;
}

std::vector<BipartiteDomain> DatasetBundle::training_domains() const {
    std::vector<BipartiteDomain> out = sources;
    out.push_back(target);
    return out;
}

static std::string padded(const std::string& prefix, int k) {
    std::ostringstream ss;
    ss << prefix << std::setw(5) << std::setfill('0') << k;
    return ss.str();
}

DatasetBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.n_domains < 1 || spec.users_per_domain < 2 || spec.items_per_domain < 2 ||
        spec.latent_rank < 1)
        throw InputError("synthetic spec dimensions too small");
    if (spec.shared_fraction < 0.0 || spec.shared_fraction > 1.0)
        throw InputError("shared_fraction must be in [0,1]");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int rank = spec.latent_rank;
    auto draw_latent = [&] {
        std::vector<double> v(rank);
        for (double& x : v) x = gauss(rng);
        return v;
    };
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (int k = 0; k < rank; ++k) s += a[k] * b[k];
        return s;
    };

    const int n_shared =
        static_cast<int>(std::llround(spec.shared_fraction * spec.users_per_domain));
    std::vector<std::string> shared_ids;
    std::vector<std::vector<double>> shared_latents;
    for (int k = 0; k < n_shared; ++k) {
        shared_ids.push_back(padded("su", k));
        shared_latents.push_back(draw_latent());
    }

    std::vector<BipartiteDomain> full_domains;  // index 0 = target
    for (int d = 0; d < spec.n_domains; ++d) {
        const std::string tag = d == 0 ? "t" : "s" + std::to_string(d);
        std::vector<std::string> user_ids = shared_ids;
        std::vector<std::vector<double>> user_latents = shared_latents;
        for (int k = n_shared; k < spec.users_per_domain; ++k) {
            user_ids.push_back(padded(tag + "u", k));
            user_latents.push_back(draw_latent());
        }
        std::vector<std::string> item_ids;
        std::vector<std::vector<double>> item_latents;
        for (int k = 0; k < spec.items_per_domain; ++k) {
            item_ids.push_back(padded(tag + "i", k));
            item_latents.push_back(draw_latent());
        }

        const double offset =
            d == 0 ? spec.target_density_offset : spec.source_density_offset;
        std::vector<StringEdge> edges;
        for (int u = 0; u < spec.users_per_domain; ++u) {
            for (int i = 0; i < spec.items_per_domain; ++i) {
                const double p = sigmoid(
                    spec.edge_probability_scale * dot(user_latents[u], item_latents[i]) + offset);
                if (unif(rng) < p) edges.push_back({user_ids[u], item_ids[i]});
            }
        }

        std::vector<StringEdge> filtered;
        try {
            filtered = filter_min_interactions(std::move(edges), spec.min_degree);
        } catch (const InputError&) {
            throw InputError("synthetic domain " + std::to_string(d) +
                             " eliminated by filtering; increase edge_probability_scale");
        }
        const std::string category =
            d == 0 ? "synthetic-target" : "synthetic-source-" + std::to_string(d);
        full_domains.push_back(BipartiteDomain::from_string_edges(filtered, category));
    }

    DatasetBundle bundle;
    const EdgeSplit split = split_train_test(full_domains[0], spec.test_fraction, rng());
    bundle.target = BipartiteDomain::make(full_domains[0].users, full_domains[0].items,
                                          split.train, full_domains[0].category);
    bundle.target_test = split.test;
    for (int d = 1; d < spec.n_domains; ++d) bundle.sources.push_back(full_domains[d]);
    bundle.shared = align_shared_users(bundle.training_domains());

    std::ostringstream prov;
    prov << "synthetic(n_domains=" << spec.n_domains << ", users=" << spec.users_per_domain
         << ", items=" << spec.items_per_domain << ", shared=" << spec.shared_fraction
         << ", rank=" << spec.latent_rank << ", scale=" << spec.edge_probability_scale
         << ", offsets=[" << spec.target_density_offset << "," << spec.source_density_offset
         << "], min_degree=" << spec.min_degree << ", test_fraction=" << spec.test_fraction
         << ", seed=" << seed << ")";
    bundle.provenance = prov.str();
    return bundle;
}

static void write_edge_csv(const std::string& path, const BipartiteDomain& domain,
                           const std::vector<Edge>& edges) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    for (const auto& [u, i] : edges) out << domain.users[u] << "," << domain.items[i] << ",1.0,0\n";
}

void save_bundle(const DatasetBundle& bundle, const std::string& dir) {
    fs::create_directories(dir);
    write_edge_csv(dir + "/target_train.csv", bundle.target, bundle.target.edges);
    write_edge_csv(dir + "/target_test.csv", bundle.target, bundle.target_test);
    for (std::size_t k = 0; k < bundle.sources.size(); ++k)
        write_edge_csv(dir + "/source_" + std::to_string(k + 1) + ".csv", bundle.sources[k],
                       bundle.sources[k].edges);

    const auto domains = bundle.training_domains();
    auto domain_name = [&](int d) {
        return d + 1 == static_cast<int>(domains.size()) ? std::string("target")
                                                         : "source_" + std::to_string(d + 1);
    };
    nlohmann::json shared_json;
    shared_json["pairs"] = nlohmann::json::array();
    for (int m = 0; m < static_cast<int>(domains.size()); ++m) {
        for (int n = m + 1; n < static_cast<int>(domains.size()); ++n) {
            const auto& rows = bundle.shared.get(m, n);
            if (rows.empty()) continue;
            nlohmann::json entry;
            entry["domain_m"] = domain_name(m);
            entry["domain_n"] = domain_name(n);
            entry["count"] = rows.size();
            nlohmann::json users = nlohmann::json::array();
            for (const auto& [rm, rn] : rows) users.push_back(domains[m].users[rm]);
            entry["users"] = users;
            shared_json["pairs"].push_back(entry);
        }
    }
    std::ofstream shared_out(dir + "/shared.json", std::ios::trunc);
    shared_out << shared_json.dump(2) << "\n";

    nlohmann::json prov;
    prov["provenance"] = bundle.provenance;
    prov["n_sources"] = bundle.sources.size();
    prov["target_category"] = bundle.target.category;
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& s : bundle.sources) cats.push_back(s.category);
    prov["source_categories"] = cats;
    std::ofstream prov_out(dir + "/provenance.json", std::ios::trunc);
    prov_out << prov.dump(2) << "\n";
}

static BipartiteDomain load_domain_csv(const std::string& path, const std::string& category) {
    return BipartiteDomain::from_string_edges(to_implicit(load_ratings(path)), category);
}

DatasetBundle load_bundle(const std::string& dir) {
    std::ifstream prov_in(dir + "/provenance.json");
    if (!prov_in) throw InputError("bundle '" + dir + "' has no provenance.json");
    nlohmann::json prov;
    try {
        prov_in >> prov;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("bad provenance.json in '" + dir + "': " + e.what());
    }

    DatasetBundle bundle;
    bundle.provenance = prov.value("provenance", "");
    const int n_sources = prov.value("n_sources", 0);
    const auto cats = prov.value("source_categories", std::vector<std::string>{});

    bundle.target = load_domain_csv(dir + "/target_train.csv",
                                    prov.value("target_category", std::string("target")));

    // Map held-out edges into the train graph's index space.
    std::map<std::string, int> urow, irow;
    for (int r = 0; r < bundle.target.n_users(); ++r) urow[bundle.target.users[r]] = r;
    for (int r = 0; r < bundle.target.n_items(); ++r) irow[bundle.target.items[r]] = r;
    for (const auto& [u, i] : to_implicit(load_ratings(dir + "/target_test.csv"))) {
        auto uit = urow.find(u);
        auto iit = irow.find(i);
        if (uit == urow.end())
            throw InputError("test user '" + u + "' not present in target_train.csv");
        if (iit == irow.end())
            throw InputError("test item '" + i + "' not present in target_train.csv");
        bundle.target_test.push_back({uit->second, iit->second});
    }
    std::sort(bundle.target_test.begin(), bundle.target_test.end());

    for (int k = 1; k <= n_sources; ++k) {
        const std::string cat =
            k - 1 < static_cast<int>(cats.size()) ? cats[k - 1] : "source_" + std::to_string(k);
        bundle.sources.push_back(load_domain_csv(dir + "/source_" + std::to_string(k) + ".csv", cat));
    }
    bundle.shared = align_shared_users(bundle.training_domains());
    return bundle;
}

}  // namespace jscn
