#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rstab/errors.hpp"
#include "rstab/matrix_market.hpp"

using namespace rstab;
namespace fs = std::filesystem;

namespace {

MarketMatrix parse(const std::string& text)
{
    std::istringstream in(text);
    return read_matrix_market(in, "t.mtx");
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("rstab_mm_" + std::to_string(::getpid())))
    {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

std::string array_text(int rows, int cols)
{
    std::ostringstream s;
    s << "%%MatrixMarket matrix array real general\n" << rows << ' ' << cols << '\n';
    for (int k = 0; k < rows * cols; ++k) {
        s << (k == 0 ? -1 : 0) << '\n';
    }
    return s.str();
}

} // namespace

TEST_CASE("coordinate files come back sparse")
{
    const auto m = parse("%%MatrixMarket matrix coordinate real general\n"
                         "% comment\n"
                         "3 3 2\n"
                         "1 1 -2.5\n"
                         "3 2 4\n");
    REQUIRE(std::holds_alternative<SparseMatrix>(m));
    const DenseMatrix d = to_dense(m);
    CHECK(d(0, 0) == -2.5);
    CHECK(d(2, 1) == 4.0);
    CHECK(d.sum() == 1.5);
}

TEST_CASE("array files are column-major and dense")
{
    const auto m = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
    REQUIRE(std::holds_alternative<DenseMatrix>(m));
    const auto& d = std::get<DenseMatrix>(m);
    CHECK(d(1, 0) == 2.0);
    CHECK(d(0, 1) == 3.0);
}

TEST_CASE("symmetric files are expanded")
{
    const DenseMatrix c = to_dense(parse("%%MatrixMarket matrix coordinate real symmetric\n"
                                         "2 2 2\n1 1 1\n2 1 5\n"));
    CHECK(c(0, 1) == 5.0);
    CHECK(c(1, 0) == 5.0);
    const DenseMatrix a = to_dense(parse("%%MatrixMarket matrix array real symmetric\n"
                                         "2 2\n1\n7\n3\n"));
    CHECK(a(0, 1) == 7.0);
    CHECK(a(1, 1) == 3.0);
}

TEST_CASE("errors name the file and line")
{
    try {
        parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).rfind("t.mtx:3:", 0) == 0);
    }
    CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
                    ParseError);
    CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
                    ParseError);
    CHECK_THROWS_AS(parse("not a header\n"), ParseError);
    CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"),
                    UnsupportedFieldError);
    CHECK_THROWS_AS(read_matrix_market(fs::path("/nonexistent/a.mtx")), ParseError);
}

TEST_CASE("write then read is exact")
{
    DenseMatrix M(2, 3);
    M << 0.1, -1e-300, 3.0, 1.0 / 3.0, 2e200, -7.25;
    std::stringstream ss;
    write_matrix_market(ss, M);
    CHECK(to_dense(read_matrix_market(ss)) == M);

    SparseMatrix S = M.sparseView();
    std::stringstream ss2;
    write_matrix_market(ss2, S);
    const auto back = read_matrix_market(ss2);
    REQUIRE(std::holds_alternative<SparseMatrix>(back));
    CHECK(to_dense(back) == M);
}

TEST_CASE("load_system from files")
{
    TempDir dir;
    SUBCASE("scalar triple")
    {
        const auto sys = load_system(dir.write("a", array_text(1, 1)),
                                     dir.write("b", "%%MatrixMarket matrix array real general\n1 1\n1\n"),
                                     dir.write("c", "%%MatrixMarket matrix array real general\n1 1\n1\n"));
        CHECK(sys.n() == 1);
        CHECK(sys.m() == 1);
        CHECK(sys.p() == 1);
        CHECK(sys.dense_A()(0, 0) == -1.0);
    }
    SUBCASE("shapes (3, 2, 2) and sparse A stays sparse")
    {
        const auto sys = load_system(
            dir.write("a", "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 -1\n2 2 -1\n3 3 -1\n"),
            dir.write("b", array_text(3, 2)), dir.write("c", array_text(2, 3)));
        CHECK(sys.n() == 3);
        CHECK(sys.m() == 2);
        CHECK(sys.p() == 2);
        CHECK(sys.is_sparse());
    }
    SUBCASE("mismatch lists the shapes")
    {
        try {
            load_system(dir.write("a", array_text(3, 3)), dir.write("b", array_text(4, 1)),
                        dir.write("c", array_text(1, 3)));
            FAIL("expected DimensionError");
        } catch (const DimensionError& e) {
            CHECK(std::string(e.what()).find("A: 3×3, B: 4×1") != std::string::npos);
        }
    }
}

TEST_CASE("bundled scalar data")
{
    const fs::path d = RSTAB_DATA_DIR;
    const auto sys = load_system(d / "scalar/A.mtx", d / "scalar/B.mtx", d / "scalar/C.mtx");
    CHECK(sys.dense_A()(0, 0) == -1.0);
    CHECK(sys.B()(0, 0) == 1.0);
    CHECK(sys.C()(0, 0) == 1.0);
}
