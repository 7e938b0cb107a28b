#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rstab/cli.hpp"
#include "rstab/report.hpp"

using namespace rstab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "rstab");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("rstab_cli_" + std::to_string(::getpid())))
    {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::string data_dir = RSTAB_DATA_DIR;
const std::vector<std::string> scalar_files = {"-A", data_dir + "/scalar/A.mtx",
                                               "-B", data_dir + "/scalar/B.mtx",
                                               "-C", data_dir + "/scalar/C.mtx"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail)
{
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

} // namespace

TEST_CASE("compute on a generated system converges")
{
    const auto r = run({"compute", "--gen", "random_stable", "--n", "30", "--seed", "7"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("converged  yes") != std::string::npos);
}

TEST_CASE("forced iteration cap exits with 2")
{
    const auto r =
        run({"compute", "--gen", "random_stable", "--n", "30", "--seed", "7", "--kmax", "0"});
    CHECK(r.code == exit_cap);
}

TEST_CASE("compute on the bundled scalar files")
{
    const auto r = run(with({"compute"}, scalar_files));
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("radius     1.000000000000") != std::string::npos);
}

TEST_CASE("oracle on the scalar files and with a probe")
{
    TempDir dir;
    const auto r = run(with({"oracle", "--json", dir / "o.json"}, scalar_files));
    CHECK(r.code == exit_ok);
    const auto rep = report_from_json(slurp(dir / "o.json"));
    CHECK(std::abs(rep.result.radius - 1.0) <= 1e-6);

    const auto p =
        run({"oracle", "--gen", "random_stable", "--n", "30", "--seed", "7", "--probe", "200"});
    CHECK(p.code == exit_ok);
    CHECK(p.out.find("probe      0/200") != std::string::npos);
}

TEST_CASE("size guard and input errors exit with 1")
{
    const auto big = run({"oracle", "--gen", "random_stable", "--n", "600"});
    CHECK(big.code == exit_error);
    CHECK(big.err.find("n <= 500") != std::string::npos);

    CHECK(run({"compute"}).code == exit_error);
    CHECK(run({"compute", "-A", "/nonexistent.mtx", "-B", "x", "-C", "y"}).code == exit_error);
    CHECK(run({"compute", "--gen", "nope"}).code == exit_error);
    CHECK(run({"compute", "--bogus-flag"}).code == exit_error);
    CHECK(run({}).code == exit_error);
}

TEST_CASE("interp-check")
{
    const auto s = run(with({"interp-check", "--omega", "0"}, scalar_files));
    CHECK(s.code == exit_ok);

    const std::vector<std::string> gen = {"--gen", "random_stable", "--n", "30", "--seed", "7"};
    const auto ok = run(with({"interp-check", "--omega", "0.5", "--omega", "2.0"}, gen));
    CHECK(ok.code == exit_ok);
    const auto bad = run(
        with({"interp-check", "--omega", "0.5", "--omega", "2.0", "--rank-tol", "1e-1"}, gen));
    CHECK(bad.code == exit_check_failed);
    CHECK(bad.out.find("FAIL") != std::string::npos);
    CHECK(run(with({"interp-check"}, gen)).code == exit_error);
}

TEST_CASE("stability verification failure exits with 3")
{
    TempDir dir;
    std::ofstream(dir / "A.mtx") << "%%MatrixMarket matrix array real general\n1 1\n0.5\n";
    const auto r = run({"compute", "--verify-stability", "-A", dir / "A.mtx", "-B",
                        data_dir + "/scalar/B.mtx", "-C", data_dir + "/scalar/C.mtx"});
    CHECK(r.code == exit_check_failed);
}

TEST_CASE("structured outputs")
{
    TempDir dir;
    const std::vector<std::string> gen = {"--gen", "random_stable", "--n", "20", "--m", "2",
                                          "--p", "2", "--seed", "3"};
    REQUIRE(run(with({"oracle", "--json", dir / "ref.json"}, gen)).code == exit_ok);
    const auto r = run(with({"compute", "--json", dir / "c.json", "--csv", dir / "c.csv",
                             "--reference", dir / "ref.json"},
                            gen));
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("reference") != std::string::npos);
    const auto rep = report_from_json(slurp(dir / "c.json"));
    const auto ref = report_from_json(slurp(dir / "ref.json"));
    REQUIRE(rep.reference_radius);
    CHECK(*rep.reference_radius == ref.result.radius);
    CHECK(rep.input.params.seed == 3);
    const std::string csv = slurp(dir / "c.csv");
    CHECK(csv.rfind("k,omega_next,gamma,mu,radius,basis_dim,wall_time_s\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n')
          == static_cast<long>(rep.result.history.size()) + 1);
}

TEST_CASE("repeated runs give byte-identical CSV without timings")
{
    TempDir dir;
    const std::vector<std::string> gen = {"compute", "--gen", "random_stable", "--n", "30",
                                          "--seed", "11", "--no-timings"};
    REQUIRE(run(with(gen, {"--csv", dir / "a.csv", "--json", dir / "a.json"})).code == exit_ok);
    REQUIRE(run(with(gen, {"--csv", dir / "b.csv", "--json", dir / "b.json"})).code == exit_ok);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
}

TEST_CASE("help exits cleanly")
{
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("compute") != std::string::npos);
}
