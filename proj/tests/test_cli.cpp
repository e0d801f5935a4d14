#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

class Workspace {
 public:
  explicit Workspace(const std::string& name) : root_(fs::temp_directory_path() / ("parityforge_cli_" + name)) {
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~Workspace() { fs::remove_all(root_); }

  const fs::path& root() const { return root_; }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }

  Result cli(const std::string& args, const std::string& env = "") const {
    const fs::path out = root_ / "stdout.txt";
    const fs::path err = root_ / "stderr.txt";
    const std::string cmd =
        env + " \"" PARITYFORGE_CLI "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

 private:
  fs::path root_;
};

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("run writes report, state and log") {
    Workspace ws("run");
    const fs::path cfg = ws.write("c.json", R"({"M": 3, "t_max": 0.8, "n_cut": 201, "outputs": ["report", "state", "log"]})");
    const fs::path out = ws.root() / "out";
    const Result r = ws.cli("run " + quoted(cfg) + " -o " + quoted(out) + " -j 2");
    REQUIRE(r.status == 0);
    const json report = json::parse(Workspace::slurp(out / "report.json"));
    CHECK(report.at("schema_version") == "1");
    CHECK(report.at("config").at("M") == 3);
    CHECK(report.at("result").at("squeezing").at("s_db").get<double>() == doctest::Approx(8.9).epsilon(0.025));
    CHECK(report.at("result").at("log").at("cumulative_probability").get<double>() == doctest::Approx(0.32).epsilon(0.07));
    CHECK(Workspace::slurp(out / "state.csv").rfind("index,re,im\n", 0) == 0);
    CHECK(Workspace::slurp(out / "log.csv").rfind("step,alpha_re,alpha_im,probability,cumulative\n", 0) == 0);
  }

  TEST_CASE("cat config reports analytic fidelity") {
    Workspace ws("cat");
    const fs::path cfg = ws.write("c.json", R"({"protocol": "cat", "M": 2, "n_cut": 201, "output_dir": "unused"})");
    const fs::path out = ws.root() / "out";
    REQUIRE(ws.cli("run " + quoted(cfg) + " --output-dir " + quoted(out)).status == 0);
    const json report = json::parse(Workspace::slurp(out / "report.json"));
    CHECK(report.at("result").at("cat").at("fidelity_vs_analytic").get<double>() > 1.0 - 1e-6);
  }

  TEST_CASE("sweep csv has one row per point") {
    Workspace ws("sweep");
    const fs::path cfg = ws.write(
        "c.json",
        R"({"n_cut": 60, "fit": false, "sweep": [{"parameter": "t_max", "min": 0.0, "max": 1.0, "steps": 5},
            {"parameter": "epsilon", "values": [0.0, 0.1]}]})");
    const fs::path out = ws.root() / "out";
    REQUIRE(ws.cli("run " + quoted(cfg) + " -o " + quoted(out), "PARITYFORGE_JOBS=2").status == 0);
    std::istringstream csv(Workspace::slurp(out / "sweep.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("t_max,epsilon,p_suc,s_db,", 0) == 0);
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 10);
  }

  TEST_CASE("validate reports errors, warnings and notes") {
    Workspace ws("validate");
    const Result bad = ws.cli("validate " + quoted(ws.write("bad.json", R"({"M": 4})")));
    CHECK(bad.status == 2);
    CHECK(bad.out.find("error: M must be odd") != std::string::npos);

    const Result warn = ws.cli("validate " + quoted(ws.write("gkp.json", R"({"protocol": "gkp", "n_cut": 51})")));
    CHECK(warn.status == 0);
    CHECK(warn.out.find("recommend n_cut >= 201") != std::string::npos);

    const Result empty =
        ws.cli("validate --json " + quoted(ws.write("e.json", R"({"sweep": {"parameter": "t_max", "values": []}})")));
    CHECK(empty.status == 0);
    const json doc = json::parse(empty.out);
    CHECK(doc.at("ok") == true);
    CHECK(doc.at("notes").dump().find("no sweep") != std::string::npos);

    const Result unknown = ws.cli("validate " + quoted(ws.write("u.json", R"({"colour": "red"})")));
    CHECK(unknown.status == 2);
    CHECK(unknown.out.find("colour: unknown field") != std::string::npos);
  }

  TEST_CASE("run failures exit nonzero with a machine-readable record") {
    Workspace ws("fail");
    const fs::path out = ws.root() / "out";
    const Result tail =
        ws.cli("run " + quoted(ws.write("t.json", R"({"protocol": "cat", "alphas": [[4, 0]], "n_cut": 20})")) +
               " -o " + quoted(out));
    CHECK(tail.status == 3);
    const json err = json::parse(Workspace::slurp(out / "error.json"));
    CHECK(err.at("kind") == "TailOverflow");
    CHECK(err.at("tail_mass").get<double>() > 1e-6);
    CHECK(json::parse(tail.err).at("kind") == "TailOverflow");

    const Result zero = ws.cli(
        "run " + quoted(ws.write("z.json", R"({"protocol": "cat", "alphas": [0, 20], "n_cut": 2, "tail_tolerance": 0.5})")) +
        " -o " + quoted(out));
    CHECK(zero.status == 3);
    const json zerr = json::parse(Workspace::slurp(out / "error.json"));
    CHECK(zerr.at("kind") == "ZeroProbability");
    CHECK(zerr.at("step") == 2);

    const Result cfg = ws.cli("run " + quoted(ws.write("c.json", R"({"M": 4})")) + " -o " + quoted(out));
    CHECK(cfg.status == 2);
    CHECK(json::parse(cfg.err).at("kind") == "ConfigError");

    const Result bad_env = ws.cli("run " + quoted(ws.write("ok.json", "{}")), "PARITYFORGE_JOBS=none");
    CHECK(bad_env.status == 2);
  }

  TEST_CASE("unwritable output directory") {
    Workspace ws("io");
    ws.write("blocker", "x");
    const Result r = ws.cli("run " + quoted(ws.write("c.json", R"({"n_cut": 40})")) + " -o " +
                            quoted(ws.root() / "blocker" / "out"));
    CHECK(r.status == 4);
    CHECK(json::parse(r.err).contains("kind"));
  }

  TEST_CASE("wigner subcommand reads state files") {
    Workspace ws("wigner");
    const fs::path state = ws.write("state.csv", "index,re,im\n0,1,0\n1,0,0\n2,0,0\n");
    const fs::path out = ws.root() / "w.csv";
    REQUIRE(ws.cli("wigner " + quoted(state) + " --grid -1,1,-1,1,3 --out " + quoted(out) + " -j 1").status == 0);
    std::istringstream csv(Workspace::slurp(out));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,p,W");
    int rows = 0;
    bool saw_origin = false;
    while (std::getline(csv, line)) {
      ++rows;
      if (line.rfind("0,0,", 0) == 0) {
        saw_origin = true;
        CHECK(std::stod(line.substr(4)) == doctest::Approx(2.0 / 3.14159265358979323846));
      }
    }
    CHECK(rows == 9);
    CHECK(saw_origin);

    const fs::path diag = ws.write("diag.csv", "index,rho_nn\n0,0\n1,1\n");
    const fs::path out2 = ws.root() / "w2.csv";
    REQUIRE(ws.cli("wigner " + quoted(diag) + " --grid -1,1,-1,1,3 --out " + quoted(out2)).status == 0);
    CHECK(Workspace::slurp(out2).find("0,0,-0.63661977236758") != std::string::npos);

    CHECK(ws.cli("wigner " + quoted(state) + " --grid 1,2,3").status == 2);
    CHECK(ws.cli("wigner " + quoted(ws.write("junk.csv", "a,b\n"))).status == 2);
  }

  TEST_CASE("usage errors") {
    Workspace ws("usage");
    CHECK(ws.cli("").status != 0);
    CHECK(ws.cli("run /nonexistent/config.json").status != 0);
    CHECK(ws.cli("--help").status == 0);
  }
}
