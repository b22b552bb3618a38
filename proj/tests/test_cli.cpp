#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ncnet");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ncnet::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string &name) {
  return std::filesystem::temp_directory_path() / ("ncnet_cli_test_" + name);
}

} // namespace

TEST_CASE("kappa") {
  auto r = run({"kappa", "--gen", "full:3,3"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["kappa_star"] == 1);
  CHECK(j["chain"].dump() == "[1]");

  j = nlohmann::json::parse(run({"kappa", "--gen", "diagonal:4"}).out);
  CHECK(j["kappa_star"] == 4);
  j = nlohmann::json::parse(run({"kappa", "--gen", "wyner_cyclic:4"}).out);
  CHECK(j["kappa_star"] == 3);
  CHECK(j["witnesses"].dump() == "[1,3,4]");

  // Transmitter 2 is silent; indices come back in the original numbering.
  const auto path = temp_file("topo.json");
  std::ofstream(path) << R"({"n_t":3,"n_r":2,"zeros":[[1,2],[2,2],[1,3]]})";
  r = run({"kappa", "--topo", path.string()});
  REQUIRE(r.code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(j["removed_transmitters"].dump() == "[2]");
  CHECK(j["kappa_star"] == 2);
  CHECK(j["chain"].dump() == "[3,1]");
  std::filesystem::remove(path);
}

TEST_CASE("exit codes") {
  CHECK(run({"kappa"}).code == 2);
  CHECK(run({"kappa", "--gen", "ring:3"}).code == 2);
  CHECK(run({"kappa", "--topo", "/nonexistent.json"}).code == 2);
  CHECK(run({"kappa", "--gen", "diagonal:25"}).code == 3);
  CHECK(run({"kappa", "--gen", "diagonal:4", "--guard", "2"}).code == 3);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"decompose", "--gen", "diagonal:3", "--perm", "1,1,2"}).code == 2);
  CHECK(run({"sweep", "--gen", "diagonal:2", "--no-mc"}).code == 2);
  CHECK(run({"sweep", "--gen", "diagonal:2", "--seed", "1", "--format", "xml", "--no-mc"}).code == 2);
  CHECK(run({"sweep", "--gen", "diagonal:2", "--seed", "1", "--grid", "5,3,2", "--no-mc"}).code == 2);
  CHECK(run({"sweep", "--gen", "diagonal:2", "--seed", "1", "--grid", "4,6,3", "--no-mc"}).code == 4);
  CHECK(run({"bounds", "--gen", "diagonal:2", "--grid", "4,6,3"}).code == 4);

  const auto path = temp_file("bad.json");
  std::ofstream(path) << "{not json";
  CHECK(run({"kappa", "--topo", path.string()}).code == 2);
  std::filesystem::remove(path);
}

TEST_CASE("decompose") {
  auto r = run({"decompose", "--gen", "diagonal:3", "--perm", "2,1,3"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["receiver_blocks"].dump() == "[[2],[1],[3]]");
  r = run({"decompose", "--gen", "wyner_cyclic:4"});
  j = nlohmann::json::parse(r.out);
  CHECK(j["j"].dump() == "[1,2,3]");
  CHECK(j["transmitter_blocks"].dump() == "[[1],[2],[3,4]]");
}

TEST_CASE("sweep output is reproducible") {
  const std::vector<std::string> args{"sweep", "--gen", "diagonal:2", "--grid", "8,10,3",
                                      "--outer", "200", "--inner", "100", "--seed", "42"};
  const auto a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("E,kappa_star,loglog,lower,mc,mc_stderr,upper,feasible\n", 0) == 0);
  CHECK(a.err.find("kappa_star 2 slope") != std::string::npos);

  auto w = args;
  w.insert(w.end(), {"--workers", "3"});
  CHECK(run(w).out == a.out);

  const auto out = temp_file("sweep.csv"), plot = temp_file("sweep.dat");
  auto f = args;
  f.insert(f.end(), {"--out", out.string(), "--plot", plot.string()});
  const auto c = run(f);
  REQUIRE(c.code == 0);
  std::ifstream in(out);
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == a.out);
  CHECK(c.out.find("feasible 3/3") != std::string::npos);
  std::ifstream pl(plot);
  std::string line;
  int rows = 0;
  while (std::getline(pl, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 3);
  std::filesystem::remove(out);
  std::filesystem::remove(plot);

  auto js = args;
  js.insert(js.end(), {"--format", "json"});
  const auto jr = run(js);
  REQUIRE(jr.code == 0);
  CHECK(nlohmann::json::parse(jr.out).size() == 3);
}

TEST_CASE("bounds") {
  const auto r = run({"bounds", "--gen", "full:2,2", "--grid", "8,12,3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 3);
  for (const auto &rep : j) {
    CHECK(rep["kappa_star"] == 1);
    CHECK(rep["lower"].get<double>() <= rep["upper"].get<double>());
  }
  CHECK(run({"bounds", "--gen", "full:2,2", "--grid", "4,8,3"}).code == 0);
}
