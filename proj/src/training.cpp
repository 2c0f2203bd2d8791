#include "jscn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "jscn/errors.hpp"

namespace jscn {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw InputError("learning_rate must be positive");
    if (rmsprop_decay < 0.0 || rmsprop_decay >= 1.0)
        throw InputError("rmsprop_decay must be in [0, 1)");
    if (cross_weight < 0.0) throw InputError("cross_weight mu must be nonnegative");
    if (epochs < 0) throw InputError("epochs must be nonnegative");
    if (batch_size <= 0) throw InputError("batch_size must be positive");
    if (reg_epsilon < 0.0) throw InputError("reg_epsilon must be nonnegative");
}

const std::vector<std::pair<int, int>>& SharedUserIndex::get(int m, int n) const {
    static const std::vector<std::pair<int, int>> kEmpty;
    auto it = pairs.find({m, n});
    return it == pairs.end() ? kEmpty : it->second;
}

static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t domain_init_seed(std::uint64_t base_seed, int domain_index) {
    return splitmix64(base_seed + static_cast<std::uint64_t>(domain_index));
}

std::uint64_t domain_sampler_seed(std::uint64_t base_seed, int domain_index) {
    return splitmix64((base_seed + static_cast<std::uint64_t>(domain_index)) ^
                      0x5DEECE66D1CE4E5Bull);
}

TripleBatch sample_triples(const BipartiteDomain& domain, int batch_size, std::mt19937_64& rng) {
    if (batch_size <= 0) throw InputError("batch_size must be positive");
    const auto adj = domain.user_adjacency();
    const int n_items = domain.n_items();
    for (int u = 0; u < domain.n_users(); ++u)
        if (static_cast<int>(adj[u].size()) >= n_items)
            throw InputError("no negative items for user '" + domain.users[u] + "'");

    std::uniform_int_distribution<std::size_t> edge_dist(0, domain.edges.size() - 1);
    std::uniform_int_distribution<int> item_dist(0, n_items - 1);

    TripleBatch batch;
    batch.triples.reserve(batch_size);
    for (int t = 0; t < batch_size; ++t) {
        const auto& [u, pos] = domain.edges[edge_dist(rng)];
        int neg = item_dist(rng);
        while (std::binary_search(adj[u].begin(), adj[u].end(), neg)) neg = item_dist(rng);
        batch.triples.push_back({u, pos, neg});
    }
    return batch;
}

// -ln sigmoid(x) = softplus(-x), evaluated without overflow.
static double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

static void check_triple(const Triple& t, const EmbeddingSet& emb) {
    if (t.user < 0 || t.user >= emb.v_user.rows() || t.pos < 0 || t.pos >= emb.v_item.rows() ||
        t.neg < 0 || t.neg >= emb.v_item.rows())
        throw InputError("triple (" + std::to_string(t.user) + "," + std::to_string(t.pos) + "," +
                         std::to_string(t.neg) + ") out of range");
}

double in_domain_loss(const EmbeddingSet& emb, const TripleBatch& batch) {
    double loss = 0.0;
    for (const Triple& t : batch.triples) {
        check_triple(t, emb);
        const double gap =
            emb.v_user.row(t.user).dot(emb.v_item.row(t.pos) - emb.v_item.row(t.neg));
        loss += softplus(-gap);
    }
    return loss;
}

double cross_domain_loss(const std::vector<EmbeddingSet>& embs, const SharedUserIndex& shared,
                         bool squared) {
    double loss = 0.0;
    const int n_domains = static_cast<int>(embs.size());
    for (int m = 0; m < n_domains; ++m) {
        for (int n = m + 1; n < n_domains; ++n) {
            for (const auto& [row_m, row_n] : shared.get(m, n)) {
                const double sq =
                    (embs[m].u_invariant.row(row_m) - embs[n].u_invariant.row(row_n))
                        .squaredNorm();
                loss += squared ? sq : std::sqrt(sq);
            }
        }
    }
    return loss;
}

double regularization(const std::vector<EmbeddingSet>& embs, double epsilon,
                      bool include_items) {
    double sum = 0.0;
    for (const EmbeddingSet& e : embs) {
        sum += e.v_user.squaredNorm();
        if (include_items) sum += e.v_item.squaredNorm();
    }
    return epsilon * sum;
}

double combine_losses(double in_domain_sum, double cross, double reg, double mu) {
    return in_domain_sum + mu * cross + reg;
}

double total_loss(const std::vector<EmbeddingSet>& embs, const std::vector<TripleBatch>& batches,
                  const SharedUserIndex& shared, const TrainConfig& cfg) {
    if (embs.size() != batches.size())
        throw InputError("need one triple batch per domain");
    double in_sum = 0.0;
    for (std::size_t d = 0; d < embs.size(); ++d) in_sum += in_domain_loss(embs[d], batches[d]);
    return combine_losses(in_sum, cross_domain_loss(embs, shared, cfg.squared_cross),
                          regularization(embs, cfg.reg_epsilon, cfg.reg_include_items),
                          cfg.cross_weight);
}

GradientResult compute_gradients(const std::vector<DomainParameters>& params,
                                 const std::vector<DomainSpectrum>& spectra,
                                 const std::vector<TripleBatch>& batches,
                                 const SharedUserIndex& shared, const ModelHyperparams& hp,
                                 const TrainConfig& cfg) {
    const int n_domains = static_cast<int>(params.size());
    if (static_cast<int>(spectra.size()) != n_domains ||
        static_cast<int>(batches.size()) != n_domains)
        throw InputError("params, spectra and batches must have one entry per domain");

    std::vector<ForwardTrace> traces(n_domains);
    std::vector<EmbeddingSet> embs(n_domains);
    for (int d = 0; d < n_domains; ++d)
        embs[d] = forward_traced(params[d], spectra[d], hp, traces[d]);

    GradientResult res;
    res.loss.in_domain.resize(n_domains);
    for (int d = 0; d < n_domains; ++d)
        res.loss.in_domain[d] = in_domain_loss(embs[d], batches[d]);
    res.loss.cross = cross_domain_loss(embs, shared, cfg.squared_cross);
    res.loss.reg = regularization(embs, cfg.reg_epsilon, cfg.reg_include_items);
    res.loss.total =
        combine_losses(std::accumulate(res.loss.in_domain.begin(), res.loss.in_domain.end(), 0.0),
                       res.loss.cross, res.loss.reg, cfg.cross_weight);

    // d(total)/dU per domain, from the cross-domain term.
    const double mu = cfg.cross_weight;
    std::vector<Eigen::MatrixXd> du(n_domains);
    for (int d = 0; d < n_domains; ++d)
        du[d] = Eigen::MatrixXd::Zero(params[d].n_users, hp.invariant_dim());
    if (mu != 0.0) {
        for (int m = 0; m < n_domains; ++m) {
            for (int n = m + 1; n < n_domains; ++n) {
                for (const auto& [row_m, row_n] : shared.get(m, n)) {
                    const Eigen::RowVectorXd diff =
                        embs[m].u_invariant.row(row_m) - embs[n].u_invariant.row(row_n);
                    Eigen::RowVectorXd g;
                    if (cfg.squared_cross) {
                        g = 2.0 * mu * diff;
                    } else {
                        const double norm = diff.norm();
                        g = norm > 0.0 ? Eigen::RowVectorXd(mu * diff / norm)
                                       : Eigen::RowVectorXd::Zero(diff.size()).eval();
                    }
                    du[m].row(row_m) += g;
                    du[n].row(row_n) -= g;
                }
            }
        }
    }

    res.grads.reserve(n_domains);
    for (int d = 0; d < n_domains; ++d) {
        const DomainParameters& p = params[d];
        const ForwardTrace& tr = traces[d];
        const EmbeddingSet& emb = embs[d];
        const int nu = p.n_users;
        const int n = p.n_nodes();
        const int width = static_cast<int>(tr.v.cols());

        DomainParameters grad = zeros_like(p, hp);

        // d(total)/dV, accumulated over the three loss terms.
        Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(n, width);

        for (const Triple& t : batches[d].triples) {
            check_triple(t, emb);
            const double gap =
                emb.v_user.row(t.user).dot(emb.v_item.row(t.pos) - emb.v_item.row(t.neg));
            const double c = sigmoid(gap) - 1.0;  // d(-ln sigmoid(gap))/d gap
            dv.row(t.user) += c * (emb.v_item.row(t.pos) - emb.v_item.row(t.neg));
            dv.row(nu + t.pos) += c * emb.v_user.row(t.user);
            dv.row(nu + t.neg) -= c * emb.v_user.row(t.user);
        }

        dv.topRows(nu) += 2.0 * cfg.reg_epsilon * emb.v_user;
        if (cfg.reg_include_items) dv.bottomRows(p.n_items) += 2.0 * cfg.reg_epsilon * emb.v_item;

        if (hp.mapping_kind == MappingKind::linear) {
            grad.w_b = emb.v_user.transpose() * du[d];
            dv.topRows(nu) += du[d] * p.w_b.transpose();
        } else {
            const Eigen::MatrixXd& h = tr.mlp_hidden;
            grad.w2 = h.transpose() * du[d];
            grad.b2 = du[d].colwise().sum();
            const Eigen::MatrixXd da =
                ((du[d] * p.w2.transpose()).array() * (1.0 - h.array().square())).matrix();
            grad.w1 = emb.v_user.transpose() * da;
            grad.b1 = da.colwise().sum();
            dv.topRows(nu) += da * p.w1.transpose();
        }

        // Back through the K stacked layers. With concatenation, X_k also
        // receives a direct slice of dV.
        const int k_layers = hp.num_layers;
        const int c_in = hp.input_dim;
        const Eigen::MatrixXd& filt = spectra[d].filter;
        Eigen::MatrixXd dx = hp.concat_mode == ConcatMode::all
                                 ? dv.middleCols(static_cast<Eigen::Index>(k_layers) * c_in, c_in)
                                       .eval()
                                 : dv;
        for (int k = k_layers; k >= 1; --k) {
            const Eigen::MatrixXd& xk = tr.layers[k];
            const Eigen::MatrixXd dz =
                (dx.array() * xk.array() * (1.0 - xk.array())).matrix();
            grad.theta[k - 1] = tr.gx[k - 1].transpose() * dz;
            dx = filt.transpose() * (dz * p.theta[k - 1].transpose());
            if (hp.concat_mode == ConcatMode::all)
                dx += dv.middleCols(static_cast<Eigen::Index>(k - 1) * c_in, c_in);
        }
        grad.x0 = dx;

        for (const auto& [name, tensor] : tensor_refs(grad, hp)) {
            if (!tensor->allFinite())
                throw NumericalError("non-finite gradient in tensor domain" + std::to_string(d) +
                                     "/" + name);
        }
        res.grads.push_back(std::move(grad));
    }
    return res;
}

void rmsprop_update(double& w, double g, double& s, double lr, double rho, double eps) {
    s = rho * s + (1.0 - rho) * g * g;
    w -= lr * g / (std::sqrt(s) + eps);
}

static bool tensor_frozen(const std::string& name, const TrainConfig& cfg) {
    if (cfg.freeze_x0 && name == "x0") return true;
    if (cfg.identity_frozen_mapping &&
        (name == "w_b" || name == "w1" || name == "b1" || name == "w2" || name == "b2"))
        return true;
    return false;
}

void rmsprop_step(std::vector<DomainParameters>& params,
                  const std::vector<DomainParameters>& grads, RmspropState& state,
                  const ModelHyperparams& hp, const TrainConfig& cfg) {
    if (params.size() != grads.size()) throw InputError("params/grads size mismatch");
    if (state.sq_avg.empty())
        for (const DomainParameters& p : params) state.sq_avg.push_back(zeros_like(p, hp));

    for (std::size_t d = 0; d < params.size(); ++d) {
        auto p_refs = tensor_refs(params[d], hp);
        const auto g_refs = tensor_refs(std::as_const(grads[d]), hp);
        auto s_refs = tensor_refs(state.sq_avg[d], hp);
        for (std::size_t t = 0; t < p_refs.size(); ++t) {
            if (tensor_frozen(p_refs[t].first, cfg)) continue;
            Eigen::MatrixXd& w = *p_refs[t].second;
            const Eigen::MatrixXd& g = *g_refs[t].second;
            Eigen::MatrixXd& s = *s_refs[t].second;
            s = cfg.rmsprop_decay * s.array() + (1.0 - cfg.rmsprop_decay) * g.array().square();
            w.array() -= cfg.learning_rate * g.array() / (s.array().sqrt() + cfg.rmsprop_eps);
        }
    }
}

TrainResult train(const std::vector<BipartiteDomain>& domains,
                  const std::vector<DomainSpectrum>& spectra, const SharedUserIndex& shared,
                  const ModelHyperparams& hp, const TrainConfig& cfg) {
    hp.validate();
    cfg.validate();
    if (domains.empty()) throw InputError("need at least a target domain");
    if (domains.size() != spectra.size()) throw InputError("one spectrum per domain required");
    if (cfg.identity_frozen_mapping && hp.mapping_kind != MappingKind::linear)
        throw InputError("identity-frozen mapping requires the linear mapping");
    const int n_domains = static_cast<int>(domains.size());
    for (int d = 0; d < n_domains; ++d)
        if (spectra[d].filter.rows() != domains[d].n_nodes())
            throw InputError("spectrum/domain size mismatch for domain " + std::to_string(d));

    TrainResult res;
    std::vector<std::mt19937_64> samplers;
    for (int d = 0; d < n_domains; ++d) {
        res.params.push_back(init_parameters(hp, domains[d].n_users(), domains[d].n_items(),
                                             domain_init_seed(cfg.seed, d)));
        if (cfg.identity_frozen_mapping)
            res.params[d].w_b =
                Eigen::MatrixXd::Identity(hp.latent_dim(), hp.invariant_dim());
        samplers.emplace_back(domain_sampler_seed(cfg.seed, d));
    }

    RmspropState state;
    res.history.reserve(cfg.epochs);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<TripleBatch> batches;
        batches.reserve(n_domains);
        for (int d = 0; d < n_domains; ++d) {
            batches.push_back(sample_triples(domains[d], cfg.batch_size, samplers[d]));
            batches.back().domain_id = d;
        }

        GradientResult gr;
        try {
            gr = compute_gradients(res.params, spectra, batches, shared, hp, cfg);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                                 ")");
        }
        if (!std::isfinite(gr.loss.total)) {
            std::string parts;
            for (double v : gr.loss.in_domain) parts += " in=" + std::to_string(v);
            throw NumericalError("loss is non-finite at epoch " + std::to_string(epoch) + ":" +
                                 parts + " cross=" + std::to_string(gr.loss.cross) +
                                 " reg=" + std::to_string(gr.loss.reg));
        }

        rmsprop_step(res.params, gr.grads, state, hp, cfg);
        for (int d = 0; d < n_domains; ++d) {
            for (const auto& [name, tensor] : tensor_refs(res.params[d], hp))
                if (!tensor->allFinite())
                    throw NumericalError("non-finite parameter domain" + std::to_string(d) + "/" +
                                         name + " after epoch " + std::to_string(epoch));
        }
        res.history.push_back(std::move(gr.loss));
    }
    return res;
}

}  // namespace jscn
