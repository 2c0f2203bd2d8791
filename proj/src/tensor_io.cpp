#include "jscn/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "jscn/errors.hpp"

namespace jscn {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

const Eigen::MatrixXd& TensorContainer::tensor(const std::string& name) const {
    for (const auto& [n, m] : tensors)
        if (n == name) return m;
    throw InputError("container has no tensor named '" + name + "'");
}

bool TensorContainer::has_tensor(const std::string& name) const {
    for (const auto& [n, m] : tensors)
        if (n == name) return true;
    return false;
}

void write_container(const std::string& path, const std::string& magic,
                     const nlohmann::json& extra_manifest,
                     const std::vector<std::pair<std::string, Eigen::MatrixXd>>& tensors) {
    if (magic.size() != 8) throw InputError("container magic must be 8 bytes");

    nlohmann::json manifest = extra_manifest;
    manifest["tensors"] = nlohmann::json::array();
    for (const auto& [name, m] : tensors) {
        manifest["tensors"].push_back({{"name", name},
                                       {"shape", {m.rows(), m.cols()}},
                                       {"dtype", "float64"}});
    }
    const std::string manifest_str = manifest.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out.write(magic.data(), 8);
    const std::uint64_t len = manifest_str.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(manifest_str.data(), static_cast<std::streamsize>(len));

    for (const auto& [name, m] : tensors) {
        // Eigen stores column-major; blobs are row-major.
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
        out.write(reinterpret_cast<const char*>(rm.data()),
                  static_cast<std::streamsize>(sizeof(double) * rm.size()));
    }
    if (!out) throw InputError("write failed for '" + path + "'");
}

TensorContainer read_container(const std::string& path, const std::string& expected_magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, expected_magic.data(), 8) != 0)
        throw InputError("'" + path + "' is not a " + expected_magic + " container");

    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in) throw InputError("truncated manifest length in '" + path + "'");
    std::string manifest_str(len, '\0');
    in.read(manifest_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw InputError("truncated manifest in '" + path + "'");

    TensorContainer c;
    try {
        c.manifest = nlohmann::json::parse(manifest_str);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("bad manifest in '" + path + "': " + e.what());
    }
    if (!c.manifest.contains("tensors") || !c.manifest["tensors"].is_array())
        throw InputError("manifest in '" + path + "' lacks a tensors array");

    for (const auto& t : c.manifest["tensors"]) {
        const std::string name = t.at("name").get<std::string>();
        const auto shape = t.at("shape").get<std::vector<std::int64_t>>();
        if (shape.size() != 2) throw InputError("tensor '" + name + "' is not 2-D");
        if (t.at("dtype").get<std::string>() != "float64")
            throw InputError("tensor '" + name + "' has unsupported dtype");
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(shape[0],
                                                                                  shape[1]);
        in.read(reinterpret_cast<char*>(rm.data()),
                static_cast<std::streamsize>(sizeof(double) * rm.size()));
        if (!in) throw InputError("truncated blob for tensor '" + name + "' in '" + path + "'");
        c.tensors.emplace_back(name, Eigen::MatrixXd(rm));
    }
    return c;
}

}  // namespace jscn
