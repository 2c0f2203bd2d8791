#include "jscn/gradcheck.hpp"

#include <cmath>
#include <random>
#include <set>

#include "jscn/errors.hpp"

namespace jscn {

static double loss_at(const std::vector<DomainParameters>& params,
                      const std::vector<DomainSpectrum>& spectra,
                      const std::vector<TripleBatch>& batches, const SharedUserIndex& shared,
                      const ModelHyperparams& hp, const TrainConfig& cfg) {
    std::vector<EmbeddingSet> embs;
    embs.reserve(params.size());
    for (std::size_t d = 0; d < params.size(); ++d)
        embs.push_back(forward(params[d], spectra[d], hp));
    return total_loss(embs, batches, shared, cfg);
}

GradCheckReport finite_difference_check(std::vector<DomainParameters> params,
                                        const std::vector<DomainSpectrum>& spectra,
                                        const std::vector<TripleBatch>& batches,
                                        const SharedUserIndex& shared,
                                        const ModelHyperparams& hp, const TrainConfig& cfg,
                                        double h, double rel_tol, double abs_floor,
                                        double fault_injection) {
    GradientResult analytic = compute_gradients(params, spectra, batches, shared, hp, cfg);
    if (fault_injection != 0.0 && !analytic.grads.empty())
        analytic.grads[0].x0(0, 0) += fault_injection;

    GradCheckReport rep;
    rep.rel_tol = rel_tol;
    rep.abs_floor = abs_floor;
    double worst_metric = -1.0;

    for (std::size_t d = 0; d < params.size(); ++d) {
        auto p_refs = tensor_refs(params[d], hp);
        auto g_refs = tensor_refs(analytic.grads[d], hp);
        for (std::size_t t = 0; t < p_refs.size(); ++t) {
            Eigen::MatrixXd& w = *p_refs[t].second;
            const Eigen::MatrixXd& g = *g_refs[t].second;
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                for (Eigen::Index c = 0; c < w.cols(); ++c) {
                    const double orig = w(r, c);
                    w(r, c) = orig + h;
                    const double lp = loss_at(params, spectra, batches, shared, hp, cfg);
                    w(r, c) = orig - h;
                    const double lm = loss_at(params, spectra, batches, shared, hp, cfg);
                    w(r, c) = orig;

                    const double fd = (lp - lm) / (2.0 * h);
                    const double err = std::abs(g(r, c) - fd);
                    ++rep.n_coords;

                    double metric;
                    if (std::abs(fd) > abs_floor) {
                        metric = err / std::abs(fd);
                        rep.max_rel_err = std::max(rep.max_rel_err, metric);
                    } else {
                        metric = err > abs_floor ? 1.0 + err : 0.0;
                        rep.max_abs_err = std::max(rep.max_abs_err, err);
                    }
                    if (metric > worst_metric) {
                        worst_metric = metric;
                        rep.worst_tensor =
                            "domain" + std::to_string(d) + "/" + p_refs[t].first;
                        rep.worst_row = static_cast<int>(r);
                        rep.worst_col = static_cast<int>(c);
                        rep.worst_analytic = g(r, c);
                        rep.worst_fd = fd;
                    }
                }
            }
        }
    }
    rep.pass = rep.max_rel_err < rel_tol && rep.max_abs_err <= abs_floor;
    return rep;
}

// Small random bipartite domain where every user and item keeps at least
// one edge.
static BipartiteDomain random_small_domain(int n_users, int n_items, const std::string& tag,
                                           int n_shared, std::mt19937_64& rng) {
    std::vector<std::string> users, items;
    for (int u = 0; u < n_users; ++u)
        users.push_back(u < n_shared ? "su" + std::to_string(u)
                                     : tag + "_u" + std::to_string(u));
    for (int i = 0; i < n_items; ++i) items.push_back(tag + "_i" + std::to_string(i));

    std::set<Edge> edges;
    for (int u = 0; u < n_users; ++u) edges.insert({u, u % n_items});
    for (int i = 0; i < n_items; ++i) edges.insert({i % n_users, i});
    std::uniform_int_distribution<int> udist(0, n_users - 1), idist(0, n_items - 1);
    const int extra = n_users * 2;
    for (int k = 0; k < extra; ++k) {
        const int u = udist(rng);
        const int i = idist(rng);
        if (static_cast<int>(edges.size()) >= n_users * n_items - n_users) break;
        edges.insert({u, i});
    }
    // Keep one unobserved item per user so negative sampling stays possible;
    // only drop edges whose item has another edge left.
    for (int u = 0; u < n_users; ++u) {
        int have = 0;
        for (const auto& e : edges)
            if (e.first == u) ++have;
        while (have >= n_items) {
            bool removed = false;
            for (auto it = edges.begin(); it != edges.end(); ++it) {
                if (it->first != u) continue;
                int item_deg = 0;
                for (const auto& e : edges)
                    if (e.second == it->second) ++item_deg;
                if (item_deg >= 2) {
                    edges.erase(it);
                    --have;
                    removed = true;
                    break;
                }
            }
            if (!removed) break;
        }
    }
    return BipartiteDomain::make(users, items, {edges.begin(), edges.end()}, tag);
}

GradCheckReport run_gradcheck(std::uint64_t seed, MappingKind kind, double fault_injection) {
    std::mt19937_64 rng(seed);
    const int n_shared = 2;  // 30% of 6 users, rounded

    std::vector<BipartiteDomain> domains;
    domains.push_back(random_small_domain(6, 5, "src", n_shared, rng));
    domains.push_back(random_small_domain(6, 5, "tgt", n_shared, rng));

    SharedUserIndex shared;
    std::vector<std::pair<int, int>> fwd, bwd;
    for (int u = 0; u < n_shared; ++u) {
        fwd.emplace_back(u, u);
        bwd.emplace_back(u, u);
    }
    shared.pairs[{0, 1}] = fwd;
    shared.pairs[{1, 0}] = bwd;

    ModelHyperparams hp;
    hp.input_dim = 4;
    hp.filter_dim = 4;
    hp.num_layers = 2;
    hp.mapping_kind = kind;
    hp.mlp_hidden = 8;

    TrainConfig cfg;
    cfg.seed = seed;
    cfg.batch_size = 8;

    std::vector<DomainSpectrum> spectra;
    std::vector<DomainParameters> params;
    std::vector<TripleBatch> batches;
    for (std::size_t d = 0; d < domains.size(); ++d) {
        spectra.push_back(eigendecompose(build_laplacian(build_feedback_matrix(domains[d]))));
        params.push_back(init_parameters(hp, domains[d].n_users(), domains[d].n_items(),
                                         domain_init_seed(seed, static_cast<int>(d))));
        std::mt19937_64 srng(domain_sampler_seed(seed, static_cast<int>(d)));
        batches.push_back(sample_triples(domains[d], cfg.batch_size, srng));
        batches.back().domain_id = static_cast<int>(d);
    }

    return finite_difference_check(std::move(params), spectra, batches, shared, hp, cfg, 1e-5,
                                   1e-4, 1e-8, fault_injection);
}

}  // namespace jscn
