#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jscn/training.hpp"

namespace jscn {

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;  // over coordinates with |fd| above the floor
    double max_abs_err = 0.0;  // over coordinates with |fd| at or below the floor
    std::int64_t n_coords = 0;
    std::string worst_tensor;
    int worst_row = 0;
    int worst_col = 0;
    double worst_analytic = 0.0;
    double worst_fd = 0.0;
    double rel_tol = 1e-4;
    double abs_floor = 1e-8;
};

/// Compares compute_gradients against central finite differences of the
/// total loss, coordinate by coordinate. `fault_injection` perturbs one
/// analytic gradient entry; nonzero values must make the check fail.
GradCheckReport finite_difference_check(std::vector<DomainParameters> params,
                                        const std::vector<DomainSpectrum>& spectra,
                                        const std::vector<TripleBatch>& batches,
                                        const SharedUserIndex& shared,
                                        const ModelHyperparams& hp, const TrainConfig& cfg,
                                        double h = 1e-5, double rel_tol = 1e-4,
                                        double abs_floor = 1e-8, double fault_injection = 0.0);

/// Gradient check on a small two-domain instance (6 users, 5 items each,
/// 2 shared users, C=F=4, K=2) with the given mapping.
GradCheckReport run_gradcheck(std::uint64_t seed, MappingKind kind,
                              double fault_injection = 0.0);

}  // namespace jscn
