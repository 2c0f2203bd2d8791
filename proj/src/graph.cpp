#include "jscn/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <map>
#include <set>

#include "jscn/errors.hpp"

namespace jscn {

BipartiteDomain BipartiteDomain::make(std::vector<std::string> users,
                                      std::vector<std::string> items, std::vector<Edge> edges,
                                      std::string category) {
    if (users.empty()) throw InputError("domain '" + category + "' has no users");
    if (items.empty()) throw InputError("domain '" + category + "' has no items");

    const int nu = static_cast<int>(users.size());
    const int ni = static_cast<int>(items.size());
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& [u, i] = edges[k];
        if (u < 0 || u >= nu)
            throw InputError("edge user index " + std::to_string(u) + " out of range");
        if (i < 0 || i >= ni)
            throw InputError("edge item index " + std::to_string(i) + " out of range");
        if (k > 0 && edges[k] == edges[k - 1])
            throw InputError("duplicate edge (" + std::to_string(u) + "," + std::to_string(i) +
                             ")");
    }

    std::vector<int> udeg(nu, 0), ideg(ni, 0);
    for (const auto& [u, i] : edges) {
        ++udeg[u];
        ++ideg[i];
    }
    for (int u = 0; u < nu; ++u)
        if (udeg[u] == 0) throw InputError("isolated vertex: user '" + users[u] + "'");
    for (int i = 0; i < ni; ++i)
        if (ideg[i] == 0) throw InputError("isolated vertex: item '" + items[i] + "'");

    BipartiteDomain d;
    d.users = std::move(users);
    d.items = std::move(items);
    d.edges = std::move(edges);
    d.category = std::move(category);
    return d;
}

BipartiteDomain BipartiteDomain::from_string_edges(
    const std::vector<std::pair<std::string, std::string>>& edges, std::string category) {
    std::set<std::string> uset, iset;
    for (const auto& [u, i] : edges) {
        uset.insert(u);
        iset.insert(i);
    }
    std::vector<std::string> users(uset.begin(), uset.end());
    std::vector<std::string> items(iset.begin(), iset.end());
    std::map<std::string, int> urow, irow;
    for (int r = 0; r < static_cast<int>(users.size()); ++r) urow[users[r]] = r;
    for (int r = 0; r < static_cast<int>(items.size()); ++r) irow[items[r]] = r;

    std::set<Edge> eset;
    for (const auto& [u, i] : edges) eset.insert({urow[u], irow[i]});
    return make(std::move(users), std::move(items), std::vector<Edge>(eset.begin(), eset.end()),
                std::move(category));
}

std::vector<std::vector<int>> BipartiteDomain::user_adjacency() const {
    std::vector<std::vector<int>> adj(users.size());
    for (const auto& [u, i] : edges) adj[u].push_back(i);
    return adj;  // edges are sorted, so each list is ascending
}

Eigen::MatrixXd build_feedback_matrix(const BipartiteDomain& domain) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(domain.n_users(), domain.n_items());
    for (const auto& [u, i] : domain.edges) r(u, i) = 1.0;
    return r;
}

Laplacian build_laplacian(const Eigen::MatrixXd& feedback) {
    const Eigen::Index nu = feedback.rows();
    const Eigen::Index ni = feedback.cols();
    for (Eigen::Index u = 0; u < nu; ++u)
        if (feedback.row(u).sum() == 0.0)
            throw InputError("isolated vertex: user row " + std::to_string(u));
    for (Eigen::Index i = 0; i < ni; ++i)
        if (feedback.col(i).sum() == 0.0)
            throw InputError("isolated vertex: item column " + std::to_string(i));

    const Eigen::Index n = nu + ni;
    Laplacian lap;
    lap.adjacency = Eigen::MatrixXd::Zero(n, n);
    lap.adjacency.topRightCorner(nu, ni) = feedback;
    lap.adjacency.bottomLeftCorner(ni, nu) = feedback.transpose();

    lap.degree = lap.adjacency.rowwise().sum();
    const Eigen::VectorXd dinv_sqrt = lap.degree.array().rsqrt();
    lap.l_sym = Eigen::MatrixXd::Identity(n, n) -
                dinv_sqrt.asDiagonal() * lap.adjacency * dinv_sqrt.asDiagonal();
    return lap;
}

DomainSpectrum eigendecompose(const Laplacian& lap, std::size_t max_nodes) {
    const Eigen::Index n = lap.l_sym.rows();
    if (static_cast<std::size_t>(n) > max_nodes)
        throw InputError("graph too large for dense spectrum: N=" + std::to_string(n) +
                         " exceeds cap " + std::to_string(max_nodes));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap.l_sym);
    if (solver.info() != Eigen::Success) {
        const double residual =
            (lap.l_sym * solver.eigenvectors() -
             solver.eigenvectors() * solver.eigenvalues().asDiagonal())
                .norm();
        throw NumericalError("eigensolver did not converge, residual norm " +
                             std::to_string(residual));
    }

    DomainSpectrum s;
    s.eigenvalues = solver.eigenvalues();  // ascending
    s.eigenvectors = solver.eigenvectors();

    // Canonical column signs: largest-magnitude entry positive.
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index imax = 0;
        s.eigenvectors.col(c).cwiseAbs().maxCoeff(&imax);
        if (s.eigenvectors(imax, c) < 0.0) s.eigenvectors.col(c) = -s.eigenvectors.col(c);
    }

    s.filter = s.eigenvectors * s.eigenvectors.transpose() +
               s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    return s;
}

}  // namespace jscn
