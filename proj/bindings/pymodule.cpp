#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "jscn/data.hpp"
#include "jscn/errors.hpp"
#include "jscn/eval.hpp"
#include "jscn/gradcheck.hpp"
#include "jscn/graph.hpp"
#include "jscn/model.hpp"
#include "jscn/training.hpp"

namespace py = pybind11;
using namespace jscn;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Joint spectral convolutional network for cross-domain recommendation";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    // graph
    py::class_<BipartiteDomain>(m, "BipartiteDomain")
        .def(py::init(&BipartiteDomain::make), py::arg("users"), py::arg("items"),
             py::arg("edges"), py::arg("category") = "")
        .def_static("from_string_edges", &BipartiteDomain::from_string_edges, py::arg("edges"),
                    py::arg("category") = "")
        .def_readonly("users", &BipartiteDomain::users)
        .def_readonly("items", &BipartiteDomain::items)
        .def_readonly("edges", &BipartiteDomain::edges)
        .def_readonly("category", &BipartiteDomain::category)
        .def_property_readonly("n_users", &BipartiteDomain::n_users)
        .def_property_readonly("n_items", &BipartiteDomain::n_items)
        .def("user_adjacency", &BipartiteDomain::user_adjacency)
        .def("__repr__", [](const BipartiteDomain& d) {
            return "BipartiteDomain(" + std::to_string(d.n_users()) + " users, " +
                   std::to_string(d.n_items()) + " items, " + std::to_string(d.edges.size()) +
                   " edges, '" + d.category + "')";
        });

    py::class_<Laplacian>(m, "Laplacian")
        .def_readonly("adjacency", &Laplacian::adjacency)
        .def_readonly("degree", &Laplacian::degree)
        .def_readonly("l_sym", &Laplacian::l_sym);

    py::class_<DomainSpectrum>(m, "DomainSpectrum")
        .def_readonly("eigenvectors", &DomainSpectrum::eigenvectors)
        .def_readonly("eigenvalues", &DomainSpectrum::eigenvalues)
        .def_readonly("filter", &DomainSpectrum::filter);

    m.def("build_feedback_matrix", &build_feedback_matrix, py::arg("domain"));
    m.def("build_laplacian", &build_laplacian, py::arg("feedback"));
    m.def("eigendecompose", &eigendecompose, py::arg("laplacian"),
          py::arg("max_nodes") = 20000);

    // model
    py::class_<ModelHyperparams>(m, "ModelHyperparams")
        .def(py::init<>())
        .def_readwrite("input_dim", &ModelHyperparams::input_dim)
        .def_readwrite("filter_dim", &ModelHyperparams::filter_dim)
        .def_readwrite("num_layers", &ModelHyperparams::num_layers)
        .def_readwrite("mlp_hidden", &ModelHyperparams::mlp_hidden)
        .def_property(
            "mapping_kind",
            [](const ModelHyperparams& hp) { return to_string(hp.mapping_kind); },
            [](ModelHyperparams& hp, const std::string& s) {
                hp.mapping_kind = mapping_kind_from_string(s);
            })
        .def_property(
            "concat_mode",
            [](const ModelHyperparams& hp) { return to_string(hp.concat_mode); },
            [](ModelHyperparams& hp, const std::string& s) {
                hp.concat_mode = concat_mode_from_string(s);
            })
        .def_property_readonly("latent_dim", &ModelHyperparams::latent_dim)
        .def_property_readonly("invariant_dim", &ModelHyperparams::invariant_dim);

    py::class_<DomainParameters>(m, "DomainParameters")
        .def_readonly("n_users", &DomainParameters::n_users)
        .def_readonly("n_items", &DomainParameters::n_items)
        .def_readonly("x0", &DomainParameters::x0)
        .def_readonly("theta", &DomainParameters::theta)
        .def_readonly("w_b", &DomainParameters::w_b)
        .def_readonly("w1", &DomainParameters::w1)
        .def_readonly("b1", &DomainParameters::b1)
        .def_readonly("w2", &DomainParameters::w2)
        .def_readonly("b2", &DomainParameters::b2);

    py::class_<EmbeddingSet>(m, "EmbeddingSet")
        .def_readonly("v_user", &EmbeddingSet::v_user)
        .def_readonly("v_item", &EmbeddingSet::v_item)
        .def_readonly("u_invariant", &EmbeddingSet::u_invariant);

    m.def("init_parameters", &init_parameters, py::arg("hp"), py::arg("n_users"),
          py::arg("n_items"), py::arg("seed"));
    m.def("spectral_conv_layer", &spectral_conv_layer, py::arg("x"), py::arg("filter"),
          py::arg("theta"));
    m.def("forward", &forward, py::arg("params"), py::arg("spectrum"), py::arg("hp"));
    m.def("map_to_invariant", &map_to_invariant, py::arg("v_user"), py::arg("params"),
          py::arg("hp"));
    m.def("predict_scores", &predict_scores, py::arg("v_user_row"), py::arg("v_item"));

    // training
    py::class_<Triple>(m, "Triple")
        .def_readonly("user", &Triple::user)
        .def_readonly("pos", &Triple::pos)
        .def_readonly("neg", &Triple::neg);

    py::class_<TripleBatch>(m, "TripleBatch")
        .def(py::init<>())
        .def_readwrite("triples", &TripleBatch::triples)
        .def_readwrite("domain_id", &TripleBatch::domain_id);

    py::class_<SharedUserIndex>(m, "SharedUserIndex")
        .def(py::init<>())
        .def_readwrite("pairs", &SharedUserIndex::pairs)
        .def("get", &SharedUserIndex::get, py::arg("m"), py::arg("n"),
             py::return_value_policy::copy)
        .def("empty", &SharedUserIndex::empty);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("reg_epsilon", &TrainConfig::reg_epsilon)
        .def_readwrite("cross_weight", &TrainConfig::cross_weight)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("rmsprop_decay", &TrainConfig::rmsprop_decay)
        .def_readwrite("rmsprop_eps", &TrainConfig::rmsprop_eps)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("squared_cross", &TrainConfig::squared_cross)
        .def_readwrite("reg_include_items", &TrainConfig::reg_include_items)
        .def_readwrite("identity_frozen_mapping", &TrainConfig::identity_frozen_mapping)
        .def_readwrite("freeze_x0", &TrainConfig::freeze_x0);

    py::class_<LossBreakdown>(m, "LossBreakdown")
        .def_readonly("total", &LossBreakdown::total)
        .def_readonly("in_domain", &LossBreakdown::in_domain)
        .def_readonly("cross", &LossBreakdown::cross)
        .def_readonly("reg", &LossBreakdown::reg);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("params", &TrainResult::params)
        .def_readonly("history", &TrainResult::history);

    m.def(
        "sample_triples",
        [](const BipartiteDomain& domain, int batch_size, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return sample_triples(domain, batch_size, rng);
        },
        py::arg("domain"), py::arg("batch_size"), py::arg("seed"));
    m.def("in_domain_loss", &in_domain_loss, py::arg("emb"), py::arg("batch"));
    m.def("cross_domain_loss", &cross_domain_loss, py::arg("embs"), py::arg("shared"),
          py::arg("squared") = true);
    m.def("regularization", &regularization, py::arg("embs"), py::arg("epsilon"),
          py::arg("include_items") = false);
    m.def("total_loss", &total_loss, py::arg("embs"), py::arg("batches"), py::arg("shared"),
          py::arg("cfg"));
    m.def("train", &train, py::arg("domains"), py::arg("spectra"), py::arg("shared"),
          py::arg("hp"), py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<GradCheckReport>(m, "GradCheckReport")
        .def_readonly("pass_", &GradCheckReport::pass)
        .def_readonly("max_rel_err", &GradCheckReport::max_rel_err)
        .def_readonly("max_abs_err", &GradCheckReport::max_abs_err)
        .def_readonly("n_coords", &GradCheckReport::n_coords)
        .def_readonly("worst_tensor", &GradCheckReport::worst_tensor);

    m.def(
        "run_gradcheck",
        [](std::uint64_t seed, const std::string& kind) {
            return run_gradcheck(seed, mapping_kind_from_string(kind));
        },
        py::arg("seed"), py::arg("mapping_kind") = "linear");

    // data + eval
    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("n_domains", &SyntheticSpec::n_domains)
        .def_readwrite("users_per_domain", &SyntheticSpec::users_per_domain)
        .def_readwrite("items_per_domain", &SyntheticSpec::items_per_domain)
        .def_readwrite("shared_fraction", &SyntheticSpec::shared_fraction)
        .def_readwrite("latent_rank", &SyntheticSpec::latent_rank)
        .def_readwrite("edge_probability_scale", &SyntheticSpec::edge_probability_scale)
        .def_readwrite("target_density_offset", &SyntheticSpec::target_density_offset)
        .def_readwrite("source_density_offset", &SyntheticSpec::source_density_offset)
        .def_readwrite("min_degree", &SyntheticSpec::min_degree)
        .def_readwrite("test_fraction", &SyntheticSpec::test_fraction);

    py::class_<DatasetBundle>(m, "DatasetBundle")
        .def_readonly("target", &DatasetBundle::target)
        .def_readonly("target_test", &DatasetBundle::target_test)
        .def_readonly("sources", &DatasetBundle::sources)
        .def_readonly("shared", &DatasetBundle::shared)
        .def_readonly("provenance", &DatasetBundle::provenance)
        .def("training_domains", &DatasetBundle::training_domains);

    m.def("generate_synthetic", &generate_synthetic, py::arg("spec"), py::arg("seed"));
    m.def("save_bundle", &save_bundle, py::arg("bundle"), py::arg("dir"));
    m.def("load_bundle", &load_bundle, py::arg("dir"));
    m.def("align_shared_users", &align_shared_users, py::arg("domains"));
    m.def("load_ratings_edges",
          [](const std::string& path) { return to_implicit(load_ratings(path)); },
          py::arg("path"));
    m.def("filter_min_interactions", &filter_min_interactions, py::arg("edges"),
          py::arg("min_degree") = 5);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("ks", &EvalReport::ks)
        .def_readonly("recall_at", &EvalReport::recall_at)
        .def_readonly("map_at", &EvalReport::map_at)
        .def_readonly("n_users_evaluated", &EvalReport::n_users_evaluated);

    m.def("rank_items_for_user", &rank_items_for_user, py::arg("emb"), py::arg("user_row"),
          py::arg("train_items_sorted"));
    m.def("recall_at_k", &recall_at_k, py::arg("ranked"), py::arg("relevant_sorted"),
          py::arg("k"));
    m.def("map_at_k", &map_at_k, py::arg("ranked"), py::arg("relevant_sorted"), py::arg("k"));
    m.def(
        "evaluate",
        [](const EmbeddingSet& emb, const BipartiteDomain& target,
           const std::vector<Edge>& test_edges, const std::vector<int>& ks) {
            return evaluate(emb, target, test_edges, ks);
        },
        py::arg("emb"), py::arg("target"), py::arg("test_edges"),
        py::arg("ks") = kDefaultKs);
}
