#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jscn/graph.hpp"
#include "jscn/training.hpp"

namespace jscn {

struct RatingRecord {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;       // in [1, 5]
    std::int64_t timestamp = 0;  // parsed but unused (no temporal split)
};

struct RawRatings {
    std::vector<RatingRecord> records;
};

using StringEdge = std::pair<std::string, std::string>;

/// Parses a headerless 4-column CSV: user,item,rating,timestamp.
RawRatings load_ratings(const std::string& path);

/// Any rated (user, item) pair becomes one implicit edge; duplicates
/// collapse. First-occurrence order is preserved.
std::vector<StringEdge> to_implicit(const RawRatings& raw);

/// Iteratively removes users with degree < min_degree, then items left
/// without edges, until stable.
std::vector<StringEdge> filter_min_interactions(std::vector<StringEdge> edges,
                                                int min_degree = 5);

struct DomainStats {
    std::int64_t n_users = 0;
    std::int64_t n_items = 0;
    std::int64_t n_edges = 0;
    double sparsity = 0.0;  // 1 - E/(U*I)
};

DomainStats compute_stats(const BipartiteDomain& domain);

struct EdgeSplit {
    std::vector<Edge> train;
    std::vector<Edge> test;
};

/// Per-user uniform random split of a domain's edges. Every user keeps at
/// least one train and one test edge, and every item keeps at least one
/// train edge (test edges are swapped back where needed).
EdgeSplit split_train_test(const BipartiteDomain& full, double test_fraction,
                           std::uint64_t seed);

/// Row correspondences of identical user ids for each ordered domain pair.
SharedUserIndex align_shared_users(const std::vector<BipartiteDomain>& domains);

struct DatasetBundle {
    BipartiteDomain target;          // training graph
    std::vector<Edge> target_test;   // held-out edges, same index space
    std::vector<BipartiteDomain> sources;
    SharedUserIndex shared;          // over training order: sources..., target
    std::string provenance;

    /// Domains in training order: sources first, target last.
    std::vector<BipartiteDomain> training_domains() const;
};

struct SyntheticSpec {
    int n_domains = 2;  // one target plus n_domains-1 sources
    int users_per_domain = 300;
    int items_per_domain = 200;
    double shared_fraction = 0.3;
    int latent_rank = 8;
    double edge_probability_scale = 1.5;
    // Density offsets added inside the sigmoid; the target is kept sparser
    // than the sources so held-out target edges are the scarce signal.
    double target_density_offset = -7.0;
    double source_density_offset = -1.0;
    int min_degree = 5;
    double test_fraction = 0.2;
};

/// Plants cross-domain structure by sharing user latent vectors across
/// domains, samples edges, filters, and splits the target.
DatasetBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Bundle directory layout: target_train.csv, target_test.csv,
/// source_<k>.csv, shared.json, provenance.json.
void save_bundle(const DatasetBundle& bundle, const std::string& dir);
DatasetBundle load_bundle(const std::string& dir);

}  // namespace jscn
