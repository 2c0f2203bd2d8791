#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "jscn/graph.hpp"
#include "jscn/model.hpp"

namespace jscn {

struct Triple {
    int user;
    int pos;
    int neg;
};

struct TripleBatch {
    std::vector<Triple> triples;
    int domain_id = 0;
};

/// Row correspondences of shared users for each ordered domain pair.
/// Lists for (m,n) and (n,m) are transposes of each other.
struct SharedUserIndex {
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> pairs;

    const std::vector<std::pair<int, int>>& get(int m, int n) const;
    bool empty() const { return pairs.empty(); }
};

struct TrainConfig {
    double learning_rate = 0.001;
    double reg_epsilon = 0.001;
    double cross_weight = 1.0;  // mu
    int epochs = 200;
    int batch_size = 1024;  // triples per domain per epoch
    double rmsprop_decay = 0.9;
    double rmsprop_eps = 1e-8;
    std::uint64_t seed = 0;

    bool squared_cross = true;        // squared l2 cross-domain distance
    bool reg_include_items = false;   // regularize user latents only
    bool identity_frozen_mapping = false;  // pin w_b = I and never update it
    bool freeze_x0 = false;

    void validate() const;
};

/// Draws batch_size (user, positive, negative) triples: uniform over
/// observed edges, negatives rejection-sampled among the user's
/// non-interactions.
TripleBatch sample_triples(const BipartiteDomain& domain, int batch_size, std::mt19937_64& rng);

/// BPR loss: sum over triples of -ln sigmoid(score_pos - score_neg).
double in_domain_loss(const EmbeddingSet& emb, const TripleBatch& batch);

/// Squared (default) l2 distance between shared users' invariant
/// representations, summed over unordered domain pairs.
double cross_domain_loss(const std::vector<EmbeddingSet>& embs, const SharedUserIndex& shared,
                         bool squared = true);

/// epsilon * sum of squared Frobenius norms of the user latent matrices
/// (plus item matrices when include_items).
double regularization(const std::vector<EmbeddingSet>& embs, double epsilon,
                      bool include_items = false);

double combine_losses(double in_domain_sum, double cross, double reg, double mu);

double total_loss(const std::vector<EmbeddingSet>& embs, const std::vector<TripleBatch>& batches,
                  const SharedUserIndex& shared, const TrainConfig& cfg);

struct LossBreakdown {
    double total = 0.0;
    std::vector<double> in_domain;  // one per domain
    double cross = 0.0;
    double reg = 0.0;
};

struct GradientResult {
    std::vector<DomainParameters> grads;  // same shapes as the parameters
    LossBreakdown loss;
};

/// Exact reverse-mode gradients of the total loss with respect to every
/// trainable tensor of every domain.
GradientResult compute_gradients(const std::vector<DomainParameters>& params,
                                 const std::vector<DomainSpectrum>& spectra,
                                 const std::vector<TripleBatch>& batches,
                                 const SharedUserIndex& shared, const ModelHyperparams& hp,
                                 const TrainConfig& cfg);

/// Scalar RMSprop update: s <- rho*s + (1-rho)*g^2, w <- w - lr*g/(sqrt(s)+eps).
void rmsprop_update(double& w, double g, double& s, double lr, double rho, double eps);

struct RmspropState {
    std::vector<DomainParameters> sq_avg;  // running g^2 averages, zero-initialized
};

void rmsprop_step(std::vector<DomainParameters>& params,
                  const std::vector<DomainParameters>& grads, RmspropState& state,
                  const ModelHyperparams& hp, const TrainConfig& cfg);

struct TrainResult {
    std::vector<DomainParameters> params;  // sources..., target
    std::vector<LossBreakdown> history;    // one entry per epoch
};

/// Joint training over domains ordered sources first, target last.
/// Per-domain RNG streams are derived from cfg.seed + domain index, so a
/// mu=0 joint run reproduces independent single-domain runs.
TrainResult train(const std::vector<BipartiteDomain>& domains,
                  const std::vector<DomainSpectrum>& spectra, const SharedUserIndex& shared,
                  const ModelHyperparams& hp, const TrainConfig& cfg);

/// Domain-stream seeds used by train(); exposed so callers can reproduce
/// the exact sampling/init sequences.
std::uint64_t domain_init_seed(std::uint64_t base_seed, int domain_index);
std::uint64_t domain_sampler_seed(std::uint64_t base_seed, int domain_index);

}  // namespace jscn
