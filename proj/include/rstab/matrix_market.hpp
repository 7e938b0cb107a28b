#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "rstab/system.hpp"

namespace rstab {

/// Contents of one Matrix Market file. Coordinate files come back sparse,
/// array files dense. Symmetric files are expanded on read.
using MarketMatrix = std::variant<DenseMatrix, SparseMatrix>;

MarketMatrix read_matrix_market(std::istream& in, const std::string& name = "<stream>");
MarketMatrix read_matrix_market(const std::filesystem::path& path);

DenseMatrix to_dense(const MarketMatrix& m);

void write_matrix_market(std::ostream& out, const DenseMatrix& M);
void write_matrix_market(std::ostream& out, const SparseMatrix& M);
void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& M);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& M);

/// Read A, B, C. A keeps the storage format of its file; B and C are dense.
StateSpaceSystem load_system(const std::filesystem::path& path_A,
                             const std::filesystem::path& path_B,
                             const std::filesystem::path& path_C);

} // namespace rstab
