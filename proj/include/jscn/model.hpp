#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jscn/graph.hpp"

namespace jscn {

enum class MappingKind { linear, mlp };
enum class ConcatMode { all, last };

std::string to_string(MappingKind k);
std::string to_string(ConcatMode m);
MappingKind mapping_kind_from_string(const std::string& s);
ConcatMode concat_mode_from_string(const std::string& s);

struct ModelHyperparams {
    int input_dim = 32;   // C
    int filter_dim = 32;  // F, constrained F == C
    int num_layers = 5;   // K
    MappingKind mapping_kind = MappingKind::linear;
    int mlp_hidden = 64;
    ConcatMode concat_mode = ConcatMode::all;

    /// d: concatenated width (K+1)*C, or F when only the last layer is kept.
    int latent_dim() const {
        return concat_mode == ConcatMode::all ? (num_layers + 1) * input_dim : filter_dim;
    }
    /// d': kept equal to d.
    int invariant_dim() const { return latent_dim(); }

    void validate() const;
};

/// Per-domain trainables. Biases are stored as 1 x n matrices so every
/// tensor is uniformly an Eigen::MatrixXd.
struct DomainParameters {
    int n_users = 0;
    int n_items = 0;
    Eigen::MatrixXd x0;                  // N x C
    std::vector<Eigen::MatrixXd> theta;  // theta[0]: C x F, theta[k>=1]: F x F
    Eigen::MatrixXd w_b;                 // d x d' (linear mapping)
    Eigen::MatrixXd w1, b1, w2, b2;      // MLP mapping

    int n_nodes() const { return n_users + n_items; }
};

/// Named references to the tensors that exist under the given
/// hyperparameters, in canonical order (x0, theta_k..., mapping weights).
std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensor_refs(DomainParameters& p,
                                                                  const ModelHyperparams& hp);
std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensor_refs(
    const DomainParameters& p, const ModelHyperparams& hp);

/// Same shapes as `like`, all entries zero.
DomainParameters zeros_like(const DomainParameters& like, const ModelHyperparams& hp);

/// Glorot-uniform initialization, deterministic per seed: every weight
/// matrix is filled i.i.d. uniform on [-b, b] with b = sqrt(6/(fan_in +
/// fan_out)); MLP biases start at zero.
DomainParameters init_parameters(const ModelHyperparams& hp, int n_users, int n_items,
                                 std::uint64_t seed);

struct EmbeddingSet {
    Eigen::MatrixXd v_user;       // |U| x d
    Eigen::MatrixXd v_item;       // |I| x d
    Eigen::MatrixXd u_invariant;  // |U| x d'
};

/// Numerically stable logistic sigmoid; inputs clamped to [-500, 500].
double sigmoid(double z);

/// One spectral convolution: sigmoid(filter * x * theta), entrywise.
Eigen::MatrixXd spectral_conv_layer(const Eigen::MatrixXd& x, const Eigen::MatrixXd& filter,
                                    const Eigen::MatrixXd& theta);

/// Layer activations kept for reverse-mode gradient accumulation.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> layers;  // X_0 .. X_K
    std::vector<Eigen::MatrixXd> gx;      // filter * X_{k-1}, k = 1..K
    Eigen::MatrixXd v;                    // N x d
    Eigen::MatrixXd mlp_hidden;           // tanh(v_user*w1 + b1), mlp only
};

EmbeddingSet forward_traced(const DomainParameters& params, const DomainSpectrum& spectrum,
                            const ModelHyperparams& hp, ForwardTrace& trace);
EmbeddingSet forward(const DomainParameters& params, const DomainSpectrum& spectrum,
                     const ModelHyperparams& hp);

Eigen::MatrixXd map_to_invariant(const Eigen::MatrixXd& v_user, const DomainParameters& params,
                                 const ModelHyperparams& hp);

/// Dot-product preference scores of one user against every item row.
Eigen::VectorXd predict_scores(const Eigen::VectorXd& v_user_row, const Eigen::MatrixXd& v_item);

}  // namespace jscn
