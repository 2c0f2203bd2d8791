#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace jscn {

using Edge = std::pair<int, int>;  // (user_index, item_index)

/// One domain's user–item interaction graph. Construction enforces:
/// nonempty vertex sets, in-range indices, no duplicate edges, and no
/// isolated vertices.
struct BipartiteDomain {
    std::vector<std::string> users;
    std::vector<std::string> items;
    std::vector<Edge> edges;  // sorted (user, item), unique
    std::string category;

    int n_users() const { return static_cast<int>(users.size()); }
    int n_items() const { return static_cast<int>(items.size()); }
    int n_nodes() const { return n_users() + n_items(); }

    static BipartiteDomain make(std::vector<std::string> users, std::vector<std::string> items,
                                std::vector<Edge> edges, std::string category);

    /// Builds a domain from (user_id, item_id) string pairs. Vertex rows
    /// are assigned in lexicographic id order so the layout is independent
    /// of edge order.
    static BipartiteDomain from_string_edges(
        const std::vector<std::pair<std::string, std::string>>& edges, std::string category);

    /// Per-user item lists, sorted ascending.
    std::vector<std::vector<int>> user_adjacency() const;
};

/// Implicit feedback matrix: |U| x |I| with a 1 at each observed edge.
Eigen::MatrixXd build_feedback_matrix(const BipartiteDomain& domain);

struct Laplacian {
    Eigen::MatrixXd adjacency;  // N x N, [[0, R], [R^T, 0]]
    Eigen::VectorXd degree;     // row sums of adjacency
    Eigen::MatrixXd l_sym;      // I - D^{-1/2} A D^{-1/2}
};

/// Assembles the bipartite adjacency and its symmetric normalized
/// laplacian. Rejects feedback matrices with an empty row or column.
Laplacian build_laplacian(const Eigen::MatrixXd& feedback);

struct DomainSpectrum {
    Eigen::MatrixXd eigenvectors;  // orthonormal columns, ascending eigenvalue order
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd filter;  // UU^T + U diag(lambda) U^T
};

/// Dense symmetric eigendecomposition of l_sym plus the precomputed
/// spectral filter. Eigenvector column signs are canonicalized: the
/// largest-magnitude entry of each column is positive.
DomainSpectrum eigendecompose(const Laplacian& lap, std::size_t max_nodes = 20000);

}  // namespace jscn
