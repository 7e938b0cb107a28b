#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rstab/system.hpp"

namespace rstab::detail {

// Standard normal draws from a fixed engine. std::normal_distribution is not
// specified bit-for-bit across standard libraries, so Box-Muller is spelled
// out to keep generated problems identical everywhere.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : eng_(seed) {}

    double operator()()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        constexpr double two_pi = 6.283185307179586476925286766559;
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

    DenseMatrix matrix(Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
    {
        DenseMatrix M(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) {
                M(i, j) = scale * (*this)();
            }
        }
        return M;
    }

private:
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace rstab::detail
