#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "rstab/system.hpp"

namespace rstab {

enum class ProblemKind { random_stable, convection_diffusion_1d, convection_diffusion_2d };

ProblemKind parse_problem_kind(std::string_view name);
std::string_view to_string(ProblemKind kind);

struct ProblemParams {
    /// State dimension for random_stable; grid points per direction for the
    /// convection-diffusion kinds (n = size or size^2).
    int size = 10;
    int m = 1;
    int p = 1;
    std::uint64_t seed = 0;
    double margin = 1.0;
    /// Weight in [0, 1] removing the symmetric part of the random R in
    /// random_stable: R = G - skew * (G + G^T) / 2. Values near 1 give
    /// lightly damped oscillatory modes and resonant frequency responses.
    double skew = 0.0;
    /// Convection speed for the convection-diffusion kinds.
    double convection = 10.0;
    /// Use unit columns/rows (evenly spread over the state) instead of
    /// Gaussian B and C.
    bool unit_io = false;
};

/// A = R - (alpha(R) + margin) I, so the spectral abscissa of A is -margin.
DenseMatrix shift_to_stable(const DenseMatrix& R, double margin);

StateSpaceSystem generate_problem(ProblemKind kind, const ProblemParams& params);

} // namespace rstab
