#include "rstab/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "rstab/errors.hpp"

namespace rstab {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct LineReader {
    std::istream& in;
    const std::string& name;
    long line_no = 0;

    bool next(std::string& line)
    {
        while (std::getline(in, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '%') {
                continue;
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError(name + ":" + std::to_string(line_no) + ": " + what);
    }
};

} // namespace

MarketMatrix read_matrix_market(std::istream& in, const std::string& name)
{
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError(name + ":1: empty file");
    }
    LineReader rd{in, name, 1};

    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") {
        rd.fail("missing %%MatrixMarket banner");
    }
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") {
        rd.fail("unsupported object '" + object + "'");
    }
    if (format != "coordinate" && format != "array") {
        rd.fail("unsupported format '" + format + "'");
    }
    if (field == "complex" || field == "hermitian") {
        throw UnsupportedFieldError(name + ":1: complex-valued matrices are not supported");
    }
    if (field != "real" && field != "integer" && field != "double") {
        throw UnsupportedFieldError(name + ":1: unsupported field '" + field + "'");
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        rd.fail("unsupported symmetry '" + symmetry + "'");
    }
    const bool symmetric = symmetry == "symmetric";

    std::string line;
    if (!rd.next(line)) {
        rd.fail("missing size line");
    }
    std::istringstream ss(line);
    long rows = 0, cols = 0, nnz = 0;
    ss >> rows >> cols;
    if (format == "coordinate") {
        ss >> nnz;
    }
    if (!ss || rows <= 0 || cols <= 0 || nnz < 0) {
        rd.fail("malformed size line");
    }
    if (symmetric && rows != cols) {
        rd.fail("symmetric matrix must be square");
    }

    auto read_value = [&](std::istringstream& is) {
        double v = 0.0;
        if (!(is >> v)) {
            rd.fail("malformed numeric entry");
        }
        std::string extra;
        if (is >> extra) {
            rd.fail("unexpected trailing data '" + extra + "'");
        }
        return v;
    };

    if (format == "array") {
        DenseMatrix M = DenseMatrix::Zero(rows, cols);
        // column-major; symmetric arrays store the lower triangle only
        for (long j = 0; j < cols; ++j) {
            for (long i = symmetric ? j : 0; i < rows; ++i) {
                if (!rd.next(line)) {
                    rd.fail("unexpected end of file");
                }
                std::istringstream es(line);
                M(i, j) = read_value(es);
                if (symmetric) {
                    M(j, i) = M(i, j);
                }
            }
        }
        if (rd.next(line)) {
            rd.fail("more entries than declared");
        }
        return M;
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long k = 0; k < nnz; ++k) {
        if (!rd.next(line)) {
            rd.fail("unexpected end of file after " + std::to_string(k) + " of "
                    + std::to_string(nnz) + " entries");
        }
        std::istringstream es(line);
        long i = 0, j = 0;
        if (!(es >> i >> j)) {
            rd.fail("malformed coordinate entry");
        }
        if (i < 1 || i > rows || j < 1 || j > cols) {
            rd.fail("index out of range");
        }
        const double v = read_value(es);
        trip.emplace_back(i - 1, j - 1, v);
        if (symmetric && i != j) {
            trip.emplace_back(j - 1, i - 1, v);
        }
    }
    if (rd.next(line)) {
        rd.fail("more entries than declared");
    }
    SparseMatrix M(rows, cols);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    return M;
}

MarketMatrix read_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string() + ":0: cannot open file");
    }
    return read_matrix_market(in, path.string());
}

DenseMatrix to_dense(const MarketMatrix& m)
{
    if (const auto* d = std::get_if<DenseMatrix>(&m)) {
        return *d;
    }
    return DenseMatrix(std::get<SparseMatrix>(m));
}

void write_matrix_market(std::ostream& out, const DenseMatrix& M)
{
    out << "%%MatrixMarket matrix array real general\n";
    out << M.rows() << ' ' << M.cols() << '\n';
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            out << M(i, j) << '\n';
        }
    }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& M)
{
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < M.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(M, j); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& M)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_matrix_market(out, M);
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& M)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_matrix_market(out, M);
}

StateSpaceSystem load_system(const std::filesystem::path& path_A,
                             const std::filesystem::path& path_B,
                             const std::filesystem::path& path_C)
{
    MarketMatrix A = read_matrix_market(path_A);
    DenseMatrix B = to_dense(read_matrix_market(path_B));
    DenseMatrix C = to_dense(read_matrix_market(path_C));
    if (auto* s = std::get_if<SparseMatrix>(&A)) {
        return StateSpaceSystem(std::move(*s), std::move(B), std::move(C));
    }
    return StateSpaceSystem(std::move(std::get<DenseMatrix>(A)), std::move(B), std::move(C));
}

} // namespace rstab
