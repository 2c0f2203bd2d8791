#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace jscn {

/// Self-describing tensor container: an 8-byte magic, a u64-LE
/// length-prefixed JSON manifest, then one little-endian float64
/// row-major blob per manifest tensor, in manifest order.
///
/// The manifest always carries a "tensors" array of {name, shape, dtype};
/// callers may attach any extra metadata fields.
struct TensorContainer {
    nlohmann::json manifest;
    std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

    const Eigen::MatrixXd& tensor(const std::string& name) const;
    bool has_tensor(const std::string& name) const;
};

void write_container(const std::string& path, const std::string& magic,
                     const nlohmann::json& extra_manifest,
                     const std::vector<std::pair<std::string, Eigen::MatrixXd>>& tensors);

TensorContainer read_container(const std::string& path, const std::string& expected_magic);

inline constexpr const char* kSpectrumMagic = "JSCNSPC1";
inline constexpr const char* kCheckpointMagic = "JSCNCKP1";

}  // namespace jscn
