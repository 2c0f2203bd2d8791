// jscn: spectral cross-domain recommender pipeline.
// Subcommands: stats | synth | spectrum | train | eval | gradcheck.
// Exit codes: 0 success, 2 input error, 3 numerical abort.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "jscn/data.hpp"
#include "jscn/errors.hpp"
#include "jscn/eval.hpp"
#include "jscn/gradcheck.hpp"
#include "jscn/logging.hpp"
#include "jscn/serialize.hpp"
#include "jscn/tensor_io.hpp"
#include "jscn/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw jscn::InputError("cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw jscn::InputError("bad JSON in '" + path + "': " + e.what());
    }
}

jscn::BipartiteDomain load_domain(const std::string& path, const std::string& category) {
    return jscn::BipartiteDomain::from_string_edges(
        jscn::to_implicit(jscn::load_ratings(path)), category);
}

jscn::SyntheticSpec synth_spec_from_json(const json& j) {
    jscn::SyntheticSpec s;
    s.n_domains = j.value("n_domains", s.n_domains);
    s.users_per_domain = j.value("users_per_domain", s.users_per_domain);
    s.items_per_domain = j.value("items_per_domain", s.items_per_domain);
    s.shared_fraction = j.value("shared_fraction", s.shared_fraction);
    s.latent_rank = j.value("latent_rank", s.latent_rank);
    s.edge_probability_scale = j.value("edge_probability_scale", s.edge_probability_scale);
    s.target_density_offset = j.value("target_density_offset", s.target_density_offset);
    s.source_density_offset = j.value("source_density_offset", s.source_density_offset);
    s.min_degree = j.value("min_degree", s.min_degree);
    s.test_fraction = j.value("test_fraction", s.test_fraction);
    return s;
}

json stats_to_json(const jscn::DomainStats& s) {
    return {{"n_users", s.n_users},
            {"n_items", s.n_items},
            {"n_edges", s.n_edges},
            {"sparsity", s.sparsity}};
}

struct TrainCli {
    std::string target_path;
    std::vector<std::string> source_paths;
    std::string config_path;
    std::string out_path;
    std::string log_path;
    std::string variant = "";
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs, batch_size, num_layers, input_dim, mlp_hidden;
    std::optional<double> lr, mu, reg_epsilon;
    std::optional<std::string> mapping, concat;
};

int cmd_train(const TrainCli& cli) {
    json cfg_json = json::object();
    if (!cli.config_path.empty()) cfg_json = read_json_file(cli.config_path);

    // CLI flags override config-file fields.
    if (cli.seed) cfg_json["seed"] = *cli.seed;
    if (cli.epochs) cfg_json["epochs"] = *cli.epochs;
    if (cli.batch_size) cfg_json["batch_size"] = *cli.batch_size;
    if (cli.lr) cfg_json["learning_rate"] = *cli.lr;
    if (cli.mu) cfg_json["mu"] = *cli.mu;
    if (cli.reg_epsilon) cfg_json["reg_epsilon"] = *cli.reg_epsilon;
    if (cli.num_layers) cfg_json["num_layers"] = *cli.num_layers;
    if (cli.input_dim) {
        cfg_json["input_dim"] = *cli.input_dim;
        cfg_json["filter_dim"] = *cli.input_dim;
    }
    if (cli.mlp_hidden) cfg_json["mlp_hidden"] = *cli.mlp_hidden;
    if (cli.mapping) cfg_json["mapping_kind"] = *cli.mapping;
    if (cli.concat) cfg_json["concat_mode"] = *cli.concat;
    if (!cli.variant.empty()) cfg_json["jscn_variant"] = cli.variant;

    if (!cfg_json.contains("seed"))
        throw jscn::InputError("a seed is required (config \"seed\" or --seed)");

    const std::string variant = cfg_json.value("jscn_variant", std::string("beta"));
    if (variant == "alpha") {
        cfg_json["mapping_kind"] = "linear";
        cfg_json["identity_frozen_mapping"] = true;
    } else if (variant == "beta") {
        if (!cfg_json.contains("mapping_kind")) cfg_json["mapping_kind"] = "linear";
    } else if (variant == "beta_mlp") {
        cfg_json["mapping_kind"] = "mlp";
    } else if (variant == "single_domain") {
        cfg_json["mu"] = 0.0;
    } else {
        throw jscn::InputError("unknown jscn_variant '" + variant + "'");
    }

    jscn::ModelHyperparams hp = jscn::hyperparams_from_json(cfg_json);
    jscn::TrainConfig cfg = jscn::train_config_from_json(cfg_json);

    std::vector<std::string> source_paths = cli.source_paths;
    if (variant == "single_domain" && !source_paths.empty()) {
        jscn::log::info("single_domain variant: ignoring " +
                        std::to_string(source_paths.size()) + " source domain(s)");
        source_paths.clear();
    }

    std::vector<jscn::BipartiteDomain> domains;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < source_paths.size(); ++k) {
        names.push_back("source_" + std::to_string(k + 1));
        domains.push_back(load_domain(source_paths[k], names.back()));
    }
    names.push_back("target");
    domains.push_back(load_domain(cli.target_path, "target"));

    const jscn::SharedUserIndex shared = jscn::align_shared_users(domains);

    std::vector<jscn::DomainSpectrum> spectra;
    for (const auto& d : domains) {
        jscn::log::info("domain " + d.category + ": " + std::to_string(d.n_users()) + " users, " +
                        std::to_string(d.n_items()) + " items, " +
                        std::to_string(d.edges.size()) + " edges");
        spectra.push_back(jscn::eigendecompose(jscn::build_laplacian(jscn::build_feedback_matrix(d))));
    }

    const jscn::TrainResult result = jscn::train(domains, spectra, shared, hp, cfg);

    if (!cli.log_path.empty()) {
        std::ofstream log_out(cli.log_path, std::ios::trunc);
        if (!log_out) throw jscn::InputError("cannot write log '" + cli.log_path + "'");
        for (std::size_t e = 0; e < result.history.size(); ++e) {
            const jscn::LossBreakdown& lb = result.history[e];
            json in_domain;
            for (std::size_t d = 0; d < names.size(); ++d) in_domain[names[d]] = lb.in_domain[d];
            const json line = {{"epoch", e},
                               {"loss_total", lb.total},
                               {"loss_in_domain", in_domain},
                               {"loss_cross", lb.cross},
                               {"reg", lb.reg}};
            log_out << line.dump() << "\n";
        }
    }

    jscn::Checkpoint ckpt;
    ckpt.hp = hp;
    ckpt.cfg = cfg;
    ckpt.domain_names = names;
    ckpt.params = result.params;
    ckpt.extra = {{"jscn_variant", variant},
                  {"target_file", fs::path(cli.target_path).filename().string()}};
    jscn::save_checkpoint(cli.out_path, ckpt);

    if (!result.history.empty())
        jscn::log::info("final total loss " + std::to_string(result.history.back().total));
    std::cout << json{{"checkpoint", cli.out_path},
                      {"epochs", result.history.size()},
                      {"final_loss", result.history.empty() ? 0.0 : result.history.back().total}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& bundle_dir, std::vector<int> ks,
             const std::string& per_user_path, const std::string& json_path) {
    if (ks.empty()) ks = jscn::kDefaultKs;
    const jscn::Checkpoint ckpt = jscn::load_checkpoint(model_path);
    const jscn::DatasetBundle bundle = jscn::load_bundle(bundle_dir);

    std::size_t target_idx = ckpt.params.size() - 1;
    for (std::size_t d = 0; d < ckpt.domain_names.size(); ++d)
        if (ckpt.domain_names[d] == "target") target_idx = d;
    const jscn::DomainParameters& params = ckpt.params[target_idx];
    if (params.n_users != bundle.target.n_users() || params.n_items != bundle.target.n_items())
        throw jscn::InputError("checkpoint target size does not match the bundle");

    const jscn::DomainSpectrum spectrum =
        jscn::eigendecompose(jscn::build_laplacian(jscn::build_feedback_matrix(bundle.target)));
    const jscn::EmbeddingSet emb = jscn::forward(params, spectrum, ckpt.hp);

    const bool keep_per_user = !per_user_path.empty();
    const jscn::EvalReport report =
        jscn::evaluate(emb, bundle.target, bundle.target_test, ks, keep_per_user);

    const json report_json = jscn::report_to_json(report);
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::trunc);
        if (!out) throw jscn::InputError("cannot write '" + json_path + "'");
        out << report_json.dump(2) << "\n";
    }
    if (keep_per_user) {
        std::ofstream out(per_user_path, std::ios::trunc);
        if (!out) throw jscn::InputError("cannot write '" + per_user_path + "'");
        out << "user";
        for (int k : ks) out << ",recall@" << k;
        for (int k : ks) out << ",map@" << k;
        out << "\n";
        for (const auto& pu : report.per_user) {
            out << bundle.target.users[pu.user];
            for (int k : ks) out << "," << pu.recall_at.at(k);
            for (int k : ks) out << "," << pu.map_at.at(k);
            out << "\n";
        }
    }

    std::cout << report_json.dump(2) << "\n\n" << jscn::report_to_table(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint spectral convolutional network for cross-domain recommendation"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker thread cap (default 1 for reproducibility)");

    // stats
    auto* stats = app.add_subcommand("stats", "dataset statistics after implicit conversion and filtering");
    std::vector<std::string> stats_inputs;
    int stats_min_degree = 5;
    stats->add_option("--input", stats_inputs, "ratings CSV (repeatable)")->required();
    stats->add_option("--min-degree", stats_min_degree, "minimum user interactions (default 5)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic multi-domain bundle");
    std::string synth_spec_path, synth_out;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--spec", synth_spec_path, "generator spec JSON");
    synth->add_option("--seed", synth_seed, "generator seed")->required();
    synth->add_option("--out", synth_out, "output bundle directory")->required();

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "compute and cache a domain's laplacian spectrum");
    std::string spc_input, spc_out;
    std::size_t spc_max_nodes = 20000;
    spectrum->add_option("--input", spc_input, "edges CSV")->required();
    spectrum->add_option("--out", spc_out, "spectrum cache file")->required();
    spectrum->add_option("--max-nodes", spc_max_nodes, "dense eigensolver node cap");

    // train
    auto* train = app.add_subcommand("train", "train a model");
    TrainCli tc;
    train->add_option("--target", tc.target_path, "target domain CSV")->required();
    train->add_option("--source", tc.source_paths, "source domain CSV (repeatable)");
    train->add_option("--config", tc.config_path, "run config JSON");
    train->add_option("--out", tc.out_path, "checkpoint output path")->required();
    train->add_option("--log", tc.log_path, "per-epoch JSON-lines log path");
    train->add_option("--seed", tc.seed, "training seed");
    train->add_option("--epochs", tc.epochs, "training epochs");
    train->add_option("--batch-size", tc.batch_size, "triples per domain per epoch");
    train->add_option("--lr", tc.lr, "learning rate");
    train->add_option("--mu", tc.mu, "cross-domain loss weight");
    train->add_option("--epsilon", tc.reg_epsilon, "regularization weight");
    train->add_option("--layers", tc.num_layers, "number of spectral layers K");
    train->add_option("--dim", tc.input_dim, "feature dimension C (=F)");
    train->add_option("--mlp-hidden", tc.mlp_hidden, "MLP mapping hidden width");
    train->add_option("--mapping", tc.mapping, "mapping kind: linear|mlp");
    train->add_option("--concat", tc.concat, "layer aggregation: all|last");
    train->add_option("--variant", tc.variant, "jscn variant: alpha|beta|beta_mlp|single_domain");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a bundle");
    std::string eval_model, eval_bundle, eval_per_user, eval_json;
    std::vector<int> eval_ks;
    eval->add_option("--model", eval_model, "checkpoint path")->required();
    eval->add_option("--bundle", eval_bundle, "bundle directory")->required();
    eval->add_option("--k", eval_ks, "cutoffs (default 20,40,60,80,100)")->delimiter(',');
    eval->add_option("--per-user", eval_per_user, "write per-user metrics CSV");
    eval->add_option("--json", eval_json, "write the JSON report to a file");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::uint64_t gc_seed = 1;
    double gc_fault = 0.0;
    gradcheck->add_option("--seed", gc_seed, "instance seed");
    gradcheck->add_option("--inject-fault", gc_fault, "perturb one gradient entry (test hook)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Eigen::setNbThreads(threads);

    try {
        if (*stats) {
            std::vector<jscn::BipartiteDomain> domains;
            for (std::size_t k = 0; k < stats_inputs.size(); ++k) {
                const auto edges = jscn::filter_min_interactions(
                    jscn::to_implicit(jscn::load_ratings(stats_inputs[k])), stats_min_degree);
                domains.push_back(jscn::BipartiteDomain::from_string_edges(
                    edges, fs::path(stats_inputs[k]).stem().string()));
            }
            json out;
            json shared_counts = json::object();
            if (domains.size() > 1) {
                const jscn::SharedUserIndex shared = jscn::align_shared_users(domains);
                for (const auto& [mn, rows] : shared.pairs)
                    if (mn.first < mn.second)
                        shared_counts[std::to_string(mn.first) + "-" +
                                      std::to_string(mn.second)] = rows.size();
                out["domains"] = json::array();
                for (const auto& d : domains)
                    out["domains"].push_back(stats_to_json(jscn::compute_stats(d)));
            } else {
                out = stats_to_json(jscn::compute_stats(domains[0]));
            }
            out["shared_counts"] = shared_counts;
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (*synth) {
            jscn::SyntheticSpec spec;
            if (!synth_spec_path.empty()) spec = synth_spec_from_json(read_json_file(synth_spec_path));
            const jscn::DatasetBundle bundle = jscn::generate_synthetic(spec, *synth_seed);
            jscn::save_bundle(bundle, synth_out);
            json out = {{"out", synth_out},
                        {"provenance", bundle.provenance},
                        {"target", stats_to_json(jscn::compute_stats(bundle.target))}};
            out["sources"] = json::array();
            for (const auto& s : bundle.sources)
                out["sources"].push_back(stats_to_json(jscn::compute_stats(s)));
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (*spectrum) {
            const jscn::BipartiteDomain domain =
                load_domain(spc_input, fs::path(spc_input).stem().string());
            const jscn::Laplacian lap = jscn::build_laplacian(jscn::build_feedback_matrix(domain));
            const jscn::DomainSpectrum spc = jscn::eigendecompose(lap, spc_max_nodes);
            const json manifest = {{"kind", "jscn-spectrum"},
                                   {"source", fs::path(spc_input).filename().string()},
                                   {"n_users", domain.n_users()},
                                   {"n_items", domain.n_items()}};
            jscn::write_container(spc_out, jscn::kSpectrumMagic, manifest,
                                  {{"eigenvalues", spc.eigenvalues},
                                   {"eigenvectors", spc.eigenvectors},
                                   {"filter", spc.filter}});
            std::cout << json{{"out", spc_out},
                              {"n", domain.n_nodes()},
                              {"lambda_min", spc.eigenvalues.minCoeff()},
                              {"lambda_max", spc.eigenvalues.maxCoeff()}}
                             .dump()
                      << "\n";
            return 0;
        }

        if (*train) return cmd_train(tc);

        if (*eval) return cmd_eval(eval_model, eval_bundle, eval_ks, eval_per_user, eval_json);

        if (*gradcheck) {
            bool all_pass = true;
            for (const auto kind : {jscn::MappingKind::linear, jscn::MappingKind::mlp}) {
                const jscn::GradCheckReport rep = jscn::run_gradcheck(gc_seed, kind, gc_fault);
                all_pass = all_pass && rep.pass;
                std::cout << json{{"mapping", jscn::to_string(kind)},
                                  {"pass", rep.pass},
                                  {"max_rel_err", rep.max_rel_err},
                                  {"max_abs_err_small", rep.max_abs_err},
                                  {"n_coords", rep.n_coords},
                                  {"worst",
                                   {{"tensor", rep.worst_tensor},
                                    {"row", rep.worst_row},
                                    {"col", rep.worst_col},
                                    {"analytic", rep.worst_analytic},
                                    {"finite_difference", rep.worst_fd}}}}
                                 .dump(2)
                          << "\n";
            }
            return all_pass ? 0 : 1;
        }
    } catch (const jscn::NumericalError& e) {
        jscn::log::error(e.what());
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const jscn::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
