// End-to-end checks of the jscn binary. The executable path comes from the
// JSCN_CLI environment variable (set by ctest).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jscn/graph.hpp"
#include "jscn/serialize.hpp"
#include "jscn/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() {
    const char* p = std::getenv("JSCN_CLI");
    REQUIRE_MESSAGE(p != nullptr, "JSCN_CLI must point at the jscn binary");
    return p;
}

int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
    const std::string cmd = cli() + " " + args + " > " + stdout_file + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "jscn_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string small_spec_path() {
    const fs::path p = work_dir() / "small_spec.json";
    std::ofstream out(p);
    out << R"({"users_per_domain": 60, "items_per_domain": 50, "target_density_offset": -2.0})";
    return p.string();
}

}  // namespace

TEST_CASE("stats reports exact sparsity and exit codes") {
    const fs::path dir = work_dir();
    const fs::path csv = dir / "stats_in.csv";
    {
        std::ofstream out(csv);
        // two heavy users over six items
        for (int i = 0; i < 6; ++i) out << "u1,i" << i << ",5.0,0\n";
        for (int i = 0; i < 5; ++i) out << "u2,i" << i << ",1.0,0\n";
        out << "light,i0,3.0,0\n";  // filtered out at min degree 5
    }
    const std::string out_file = (dir / "stats_out.json").string();
    CHECK(run("stats --input " + csv.string(), out_file) == 0);
    const json j = slurp_json(out_file);
    CHECK(j["n_users"] == 2);
    CHECK(j["n_items"] == 6);
    CHECK(j["n_edges"] == 11);
    CHECK(j["sparsity"] == doctest::Approx(1.0 - 11.0 / 12.0).epsilon(1e-15));
    CHECK(j["shared_counts"].empty());

    CHECK(run("stats --input /nonexistent.csv") == 2);
}

TEST_CASE("synth is deterministic per seed") {
    const fs::path dir = work_dir();
    const std::string spec = small_spec_path();
    CHECK(run("synth --seed 11 --spec " + spec + " --out " + (dir / "b1").string()) == 0);
    CHECK(run("synth --seed 11 --spec " + spec + " --out " + (dir / "b2").string()) == 0);
    CHECK(run("synth --seed 12 --spec " + spec + " --out " + (dir / "b3").string()) == 0);

    for (const char* f :
         {"target_train.csv", "target_test.csv", "source_1.csv", "shared.json"}) {
        CHECK(slurp((dir / "b1" / f).string()) == slurp((dir / "b2" / f).string()));
    }
    CHECK(slurp((dir / "b1" / "target_train.csv").string()) !=
          slurp((dir / "b3" / "target_train.csv").string()));
}

TEST_CASE("spectrum cache file holds the I + l_sym filter") {
    const fs::path dir = work_dir();
    const std::string spec = small_spec_path();
    REQUIRE(run("synth --seed 13 --spec " + spec + " --out " + (dir / "bs").string()) == 0);
    const std::string input = (dir / "bs" / "target_train.csv").string();
    const std::string out = (dir / "target.spc").string();
    CHECK(run("spectrum --input " + input + " --out " + out) == 0);

    const jscn::TensorContainer c = jscn::read_container(out, jscn::kSpectrumMagic);
    const Eigen::MatrixXd filter = c.tensor("filter");
    const auto domain = jscn::BipartiteDomain::from_string_edges(
        jscn::to_implicit(jscn::load_ratings(input)), "t");
    const jscn::Laplacian lap = jscn::build_laplacian(jscn::build_feedback_matrix(domain));
    const Eigen::MatrixXd expect =
        Eigen::MatrixXd::Identity(lap.l_sym.rows(), lap.l_sym.cols()) + lap.l_sym;
    CHECK((filter - expect).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(c.manifest["n_users"] == domain.n_users());
}

TEST_CASE("train/eval round trip with byte-identical reruns") {
    const fs::path dir = work_dir();
    const std::string spec = small_spec_path();
    REQUIRE(run("synth --seed 21 --spec " + spec + " --out " + (dir / "bt").string()) == 0);
    const std::string bundle = (dir / "bt").string();
    const std::string train_args = "train --target " + bundle + "/target_train.csv --source " +
                                   bundle + "/source_1.csv --seed 21 --epochs 40 --dim 8";

    CHECK(run(train_args + " --out " + (dir / "m1.ckpt").string() + " --log " +
              (dir / "m1.log").string()) == 0);
    CHECK(run(train_args + " --out " + (dir / "m2.ckpt").string() + " --log " +
              (dir / "m2.log").string()) == 0);
    CHECK(slurp((dir / "m1.ckpt").string()) == slurp((dir / "m2.ckpt").string()));
    CHECK(slurp((dir / "m1.log").string()) == slurp((dir / "m2.log").string()));

    // log lines carry the loss components
    std::istringstream log(slurp((dir / "m1.log").string()));
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) {
        const json e = json::parse(line);
        CHECK(e.contains("loss_total"));
        CHECK(e.contains("loss_cross"));
        CHECK(e.contains("reg"));
        CHECK(e["loss_in_domain"].contains("target"));
        CHECK(e["loss_in_domain"].contains("source_1"));
        ++lines;
    }
    CHECK(lines == 40);

    const std::string rep1 = (dir / "r1.json").string();
    const std::string rep2 = (dir / "r2.json").string();
    const std::string per_user = (dir / "per_user.csv").string();
    CHECK(run("eval --model " + (dir / "m1.ckpt").string() + " --bundle " + bundle +
              " --k 5,10 --json " + rep1 + " --per-user " + per_user) == 0);
    CHECK(run("eval --model " + (dir / "m1.ckpt").string() + " --bundle " + bundle +
              " --k 5,10 --json " + rep2) == 0);
    CHECK(slurp(rep1) == slurp(rep2));
    const json rep = slurp_json(rep1);
    CHECK(rep["recall_at"].contains("5"));
    CHECK(rep["recall_at"]["10"].get<double>() >= rep["recall_at"]["5"].get<double>());

    // per-user CSV: header plus one row per evaluated user
    std::istringstream pu(slurp(per_user));
    std::string pu_line;
    int pu_rows = -1;
    while (std::getline(pu, pu_line)) ++pu_rows;
    CHECK(pu_rows == rep["n_users_evaluated"].get<int>());

    CHECK(run("eval --model /missing.ckpt --bundle " + bundle) == 2);
}

TEST_CASE("alpha variant keeps w_b bit-exactly at identity") {
    const fs::path dir = work_dir();
    const std::string spec = small_spec_path();
    REQUIRE(run("synth --seed 31 --spec " + spec + " --out " + (dir / "ba").string()) == 0);
    const std::string bundle = (dir / "ba").string();
    const std::string ckpt = (dir / "alpha.ckpt").string();
    CHECK(run("train --target " + bundle + "/target_train.csv --source " + bundle +
              "/source_1.csv --seed 31 --epochs 25 --dim 8 --variant alpha --out " + ckpt) == 0);

    const jscn::Checkpoint loaded = jscn::load_checkpoint(ckpt);
    CHECK(loaded.extra["jscn_variant"] == "alpha");
    const int d = loaded.hp.latent_dim();
    for (const auto& p : loaded.params)
        CHECK(p.w_b == Eigen::MatrixXd::Identity(d, d));
}

TEST_CASE("single_domain variant trains the target alone") {
    const fs::path dir = work_dir();
    const std::string spec = small_spec_path();
    REQUIRE(run("synth --seed 41 --spec " + spec + " --out " + (dir / "bsd").string()) == 0);
    const std::string bundle = (dir / "bsd").string();
    const std::string ckpt = (dir / "sd.ckpt").string();
    CHECK(run("train --target " + bundle + "/target_train.csv --source " + bundle +
              "/source_1.csv --seed 41 --epochs 10 --dim 8 --variant single_domain --out " +
              ckpt) == 0);
    const jscn::Checkpoint loaded = jscn::load_checkpoint(ckpt);
    CHECK(loaded.domain_names == std::vector<std::string>{"target"});
    CHECK(loaded.cfg.cross_weight == 0.0);
}

TEST_CASE("train requires a seed") {
    const fs::path dir = work_dir();
    const std::string spec = small_spec_path();
    REQUIRE(run("synth --seed 51 --spec " + spec + " --out " + (dir / "bseed").string()) == 0);
    CHECK(run("train --target " + (dir / "bseed").string() + "/target_train.csv --out " +
              (dir / "x.ckpt").string() + " --epochs 5") == 2);
}

TEST_CASE("numerical blowup aborts with exit code 3") {
    const fs::path dir = work_dir();
    const std::string spec = small_spec_path();
    REQUIRE(run("synth --seed 61 --spec " + spec + " --out " + (dir / "bnan").string()) == 0);
    CHECK(run("train --target " + (dir / "bnan").string() +
              "/target_train.csv --seed 61 --epochs 10 --dim 8 --lr 1e290 --out " +
              (dir / "nan.ckpt").string()) == 3);
}

TEST_CASE("gradcheck passes clean and fails under fault injection") {
    CHECK(run("gradcheck --seed 5") == 0);
    CHECK(run("gradcheck --seed 5 --inject-fault 0.01") == 1);
}
