#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rstab/generators.hpp"
#include "rstab/oracle.hpp"
#include "rstab/solver.hpp"

namespace rstab {

/// Where the system came from: three Matrix Market paths or a generator spec.
struct InputDescriptor {
    bool generated = false;
    std::string path_A;
    std::string path_B;
    std::string path_C;
    ProblemKind kind = ProblemKind::random_stable;
    ProblemParams params;
};

struct RunReport {
    /// "compute" or "oracle".
    std::string command = "compute";
    InputDescriptor input;
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Eigen::Index p = 0;
    SolverConfig solver;
    OracleConfig oracle;
    RadiusResult result;
    /// Radius used for the error columns; the final iterate when unset.
    std::optional<double> reference_radius;
    std::optional<ProbeReport> probe;
    double total_seconds = 0.0;
};

struct ErrorRow {
    int k = 0;
    double omega_next = 0.0;
    double mu_error = 0.0;
    double r_error = 0.0;
};

/// |mu_k - mu_*| and |r_k - r_*| per iteration. r_* is the reference radius
/// when present, otherwise the last iterate.
std::vector<ErrorRow> error_table(const RunReport& report);

std::string to_json(const RunReport& report);
/// Throws ParseError on malformed input.
RunReport report_from_json(std::string_view text);

/// Reference radius from a report written by to_json (typically an oracle run).
double reference_radius_from_json(std::string_view text);

/// Fixed columns: k, omega_next, gamma, mu, radius, basis_dim, wall_time_s.
/// Numbers at 17 significant digits; with timings = false the wall time
/// column is written as 0 so that repeated runs compare byte for byte.
void write_csv(std::ostream& out, const RunReport& report, bool timings = true);

/// Human-readable summary and convergence table.
void write_text(std::ostream& out, const RunReport& report);

} // namespace rstab
