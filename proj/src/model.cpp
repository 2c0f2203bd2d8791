#include "jscn/model.hpp"

#include <cmath>
#include <random>

#include "jscn/errors.hpp"

namespace jscn {

std::string to_string(MappingKind k) { return k == MappingKind::linear ? "linear" : "mlp"; }
std::string to_string(ConcatMode m) { return m == ConcatMode::all ? "all" : "last"; }

MappingKind mapping_kind_from_string(const std::string& s) {
    if (s == "linear") return MappingKind::linear;
    if (s == "mlp") return MappingKind::mlp;
    throw InputError("unknown mapping_kind '" + s + "' (expected linear|mlp)");
}

ConcatMode concat_mode_from_string(const std::string& s) {
    if (s == "all") return ConcatMode::all;
    if (s == "last") return ConcatMode::last;
    throw InputError("unknown concat_mode '" + s + "' (expected all|last)");
}

void ModelHyperparams::validate() const {
    if (input_dim <= 0 || filter_dim <= 0 || num_layers <= 0 || mlp_hidden <= 0)
        throw InputError("hyperparameter dimensions must be positive");
    if (filter_dim != input_dim)
        throw InputError("filter_dim F=" + std::to_string(filter_dim) +
                         " must equal input_dim C=" + std::to_string(input_dim));
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensor_refs(DomainParameters& p,
                                                                  const ModelHyperparams& hp) {
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> refs;
    refs.emplace_back("x0", &p.x0);
    for (std::size_t k = 0; k < p.theta.size(); ++k)
        refs.emplace_back("theta_" + std::to_string(k), &p.theta[k]);
    if (hp.mapping_kind == MappingKind::linear) {
        refs.emplace_back("w_b", &p.w_b);
    } else {
        refs.emplace_back("w1", &p.w1);
        refs.emplace_back("b1", &p.b1);
        refs.emplace_back("w2", &p.w2);
        refs.emplace_back("b2", &p.b2);
    }
    return refs;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensor_refs(
    const DomainParameters& p, const ModelHyperparams& hp) {
    auto mut = tensor_refs(const_cast<DomainParameters&>(p), hp);
    std::vector<std::pair<std::string, const Eigen::MatrixXd*>> refs;
    refs.reserve(mut.size());
    for (auto& [n, m] : mut) refs.emplace_back(n, m);
    return refs;
}

DomainParameters zeros_like(const DomainParameters& like, const ModelHyperparams& hp) {
    DomainParameters z;
    z.n_users = like.n_users;
    z.n_items = like.n_items;
    z.x0 = Eigen::MatrixXd::Zero(like.x0.rows(), like.x0.cols());
    for (const auto& t : like.theta) z.theta.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
    auto zero = [](const Eigen::MatrixXd& m) {
        return Eigen::MatrixXd::Zero(m.rows(), m.cols()).eval();
    };
    if (hp.mapping_kind == MappingKind::linear) {
        z.w_b = zero(like.w_b);
    } else {
        z.w1 = zero(like.w1);
        z.b1 = zero(like.b1);
        z.w2 = zero(like.w2);
        z.b2 = zero(like.b2);
    }
    return z;
}

static Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols,
                                      std::mt19937_64& rng) {
    const double b = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-b, b);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
    return m;
}

DomainParameters init_parameters(const ModelHyperparams& hp, int n_users, int n_items,
                                 std::uint64_t seed) {
    hp.validate();
    if (n_users <= 0 || n_items <= 0) throw InputError("domain dimensions must be positive");

    std::mt19937_64 rng(seed);
    DomainParameters p;
    p.n_users = n_users;
    p.n_items = n_items;
    const int n = n_users + n_items;
    const int c = hp.input_dim;
    const int f = hp.filter_dim;
    const int d = hp.latent_dim();
    const int dp = hp.invariant_dim();

    p.x0 = glorot_uniform(n, c, rng);
    p.theta.push_back(glorot_uniform(c, f, rng));
    for (int k = 1; k < hp.num_layers; ++k) p.theta.push_back(glorot_uniform(f, f, rng));

    if (hp.mapping_kind == MappingKind::linear) {
        p.w_b = glorot_uniform(d, dp, rng);
    } else {
        p.w1 = glorot_uniform(d, hp.mlp_hidden, rng);
        p.b1 = Eigen::MatrixXd::Zero(1, hp.mlp_hidden);
        p.w2 = glorot_uniform(hp.mlp_hidden, dp, rng);
        p.b2 = Eigen::MatrixXd::Zero(1, dp);
    }
    return p;
}

double sigmoid(double z) {
    z = std::clamp(z, -500.0, 500.0);
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

static Eigen::MatrixXd sigmoid_mat(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::MatrixXd spectral_conv_layer(const Eigen::MatrixXd& x, const Eigen::MatrixXd& filter,
                                    const Eigen::MatrixXd& theta) {
    if (filter.rows() != filter.cols())
        throw InputError("filter must be square, got " + std::to_string(filter.rows()) + "x" +
                         std::to_string(filter.cols()));
    if (filter.cols() != x.rows())
        throw InputError("filter cols " + std::to_string(filter.cols()) + " != x rows " +
                         std::to_string(x.rows()));
    if (x.cols() != theta.rows())
        throw InputError("x cols " + std::to_string(x.cols()) + " != theta rows " +
                         std::to_string(theta.rows()));
    return sigmoid_mat(filter * x * theta);
}

EmbeddingSet forward_traced(const DomainParameters& params, const DomainSpectrum& spectrum,
                            const ModelHyperparams& hp, ForwardTrace& trace) {
    hp.validate();
    const int n = params.n_nodes();
    if (spectrum.filter.rows() != n)
        throw InputError("spectrum N " + std::to_string(spectrum.filter.rows()) +
                         " != parameter N " + std::to_string(n));
    if (static_cast<int>(params.theta.size()) != hp.num_layers)
        throw InputError("expected " + std::to_string(hp.num_layers) + " theta tensors, got " +
                         std::to_string(params.theta.size()));

    trace.layers.clear();
    trace.gx.clear();
    trace.layers.push_back(params.x0);
    for (int k = 0; k < hp.num_layers; ++k) {
        trace.gx.push_back(spectrum.filter * trace.layers.back());
        trace.layers.push_back(sigmoid_mat(trace.gx.back() * params.theta[k]));
    }

    const int d = hp.latent_dim();
    if (hp.concat_mode == ConcatMode::all) {
        trace.v.resize(n, d);
        for (int k = 0; k <= hp.num_layers; ++k)
            trace.v.middleCols(static_cast<Eigen::Index>(k) * hp.input_dim, hp.input_dim) =
                trace.layers[k];
    } else {
        trace.v = trace.layers.back();
    }

    EmbeddingSet emb;
    emb.v_user = trace.v.topRows(params.n_users);
    emb.v_item = trace.v.bottomRows(params.n_items);
    if (hp.mapping_kind == MappingKind::mlp) {
        trace.mlp_hidden =
            ((emb.v_user * params.w1).rowwise() + params.b1.row(0)).array().tanh().matrix();
        emb.u_invariant = (trace.mlp_hidden * params.w2).rowwise() + params.b2.row(0);
    } else {
        emb.u_invariant = emb.v_user * params.w_b;
    }
    return emb;
}

EmbeddingSet forward(const DomainParameters& params, const DomainSpectrum& spectrum,
                     const ModelHyperparams& hp) {
    ForwardTrace trace;
    return forward_traced(params, spectrum, hp, trace);
}

Eigen::MatrixXd map_to_invariant(const Eigen::MatrixXd& v_user, const DomainParameters& params,
                                 const ModelHyperparams& hp) {
    if (hp.mapping_kind == MappingKind::mlp) {
        if (v_user.cols() != params.w1.rows())
            throw InputError("v_user cols " + std::to_string(v_user.cols()) + " != w1 rows " +
                             std::to_string(params.w1.rows()));
        const Eigen::MatrixXd h =
            ((v_user * params.w1).rowwise() + params.b1.row(0)).array().tanh().matrix();
        return (h * params.w2).rowwise() + params.b2.row(0);
    }
    if (v_user.cols() != params.w_b.rows())
        throw InputError("v_user cols " + std::to_string(v_user.cols()) + " != w_b rows " +
                         std::to_string(params.w_b.rows()));
    return v_user * params.w_b;
}

Eigen::VectorXd predict_scores(const Eigen::VectorXd& v_user_row,
                               const Eigen::MatrixXd& v_item) {
    if (v_item.cols() != v_user_row.size())
        throw InputError("item width " + std::to_string(v_item.cols()) + " != user width " +
                         std::to_string(v_user_row.size()));
    return v_item * v_user_row;
}

}  // namespace jscn
