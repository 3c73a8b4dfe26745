#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rstar/cli.hpp"
#include "rstar/serialize.hpp"
#include "rstar/twobody.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "rstar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = rstar::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      v.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  v.push_back(cur);
  return v;
}

}

TEST_CASE("cli dimer json") {
  const Result r = run({"dimer", "--inv-a", "1", "--rstar", "1"});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("\"kappa\": 0.6180339887") != std::string::npos);
  const auto d = json::parse(r.out).get<rstar::DimerSolution>();
  CHECK(d == rstar::dimer_observables({1.0, 1.0, 0.0}));
}

TEST_CASE("cli dimer csv") {
  const Result r = run({"dimer", "--inv-a", "1", "--rstar", "1", "--format", "csv"});
  CHECK(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 2);
  CHECK(l[0] == "inv_a,r_star,kappa,energy,n_mol,c4,c6");
  CHECK(fields(l[1])[2] == "0.61803398874989479");
}

TEST_CASE("cli typed failures") {
  const Result r = run({"dimer", "--inv-a", "-1", "--rstar", "1"});
  CHECK(r.code == 3);
  CHECK(r.out.empty());
  CHECK(r.err.rfind("NoBoundState", 0) == 0);
  CHECK(lines(r.err).size() == 1);

  CHECK(run({"amplitude", "--inv-a", "0", "--k-min", "0", "--k-max", "1", "--n", "3"}).code == 3);
  CHECK(run({"trimer", "spectrum", "--rstar", "0"}).err.rfind("RStarRequired", 0) == 0);
}

TEST_CASE("cli usage errors") {
  for (const std::vector<std::string>& args :
       std::vector<std::vector<std::string>>{{},
                                             {"nonsense"},
                                             {"dimer", "--inv-a"},
                                             {"dimer", "--inv-a", "abc"},
                                             {"dimer", "--inv-a", "nan"},
                                             {"dimer", "--inv-a", "inf"},
                                             {"dimer", "--format", "xml"},
                                             {"amplitude", "--k-min", "0"},
                                             {"trimer"},
                                             {"scan", "--inv-a-from", "0", "--inv-a-to", "1",
                                              "--steps", "0"}}) {
    const Result r = run(args);
    CHECK(r.code == 2);
    CHECK(r.err.rfind("UsageError", 0) == 0);
    CHECK(r.out.empty());
  }
  const Result help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("collapse-probe") != std::string::npos);
}

TEST_CASE("cli amplitude") {
  const Result r = run({"amplitude", "--inv-a", "1", "--rstar", "1", "--k-min", "0.5", "--k-max",
                        "1", "--n", "3"});
  CHECK(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "k,re_f0,im_f0");
  CHECK(l[3] == "1,-0.40000000000000002,0.20000000000000001");

  const Result e = run({"amplitude", "--inv-a", "0", "--rstar", "1", "--eps", "0.05", "--k-min",
                        "0.1", "--k-max", "10", "--n", "5", "--spacing", "log"});
  CHECK(e.code == 0);
  const auto le = lines(e.out);
  REQUIRE(le.size() == 6);
  CHECK(le[0] == "k,re_f0,im_f0,re_f_eps,im_f_eps");
  CHECK(fields(le[3])[0] == "1");
}

TEST_CASE("cli trimer spectrum") {
  const Result r = run({"trimer", "spectrum", "--inv-a", "0", "--rstar", "1", "--levels", "3"});
  CHECK(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "index,q,energy");
  double prev = 1e300;
  for (int i = 1; i <= 3; ++i) {
    const auto f = fields(l[i]);
    CHECK(f[0] == std::to_string(i - 1));
    const double q = std::stod(f[1]);
    CHECK(q < prev);
    prev = q;
  }
  // Determinism: identical argv, identical bytes.
  CHECK(run({"trimer", "spectrum", "--inv-a", "0", "--rstar", "1", "--levels", "3"}).out == r.out);
}

TEST_CASE("cli spectrum with too few levels reports after the data") {
  const Result r = run({"trimer", "spectrum", "--inv-a", "20", "--rstar", "1", "--levels", "1"});
  CHECK(r.code == 3);
  CHECK(r.out == "index,q,energy\n");
  CHECK(r.err.rfind("FewerLevelsFound", 0) == 0);
}

TEST_CASE("cli trimer nk") {
  const Result r = run({"trimer", "nk", "--inv-a", "0", "--rstar", "1", "--level", "0"});
  CHECK(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 202);
  CHECK(l[0] == "k,n_k");
  const json footer = json::parse(l.back());
  for (const char* key : {"c4_fit", "c6_fit", "n_mol", "k_mol", "sum_rule_residual",
                          "energy_residual"}) {
    CHECK(footer.contains(key));
  }
  CHECK(footer["index"] == 0);
  CHECK(std::abs(footer["sum_rule_residual"].get<double>()) <= 1e-3);
}

TEST_CASE("cli scan is independent of the thread count") {
  const std::vector<std::string> base{"scan", "--inv-a-from", "-0.1", "--inv-a-to", "0.3",
                                      "--steps", "5", "--rstar", "1", "--levels", "2"};
  const Result one = run(base);
  auto threaded = base;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const Result three = run(threaded);
  CHECK(one.code == 0);
  CHECK(three.code == 0);
  CHECK(one.out == three.out);
  const auto l = lines(one.out);
  REQUIRE(l.size() == 6);
  CHECK(l[0] == "inv_a,q0,q1");
  CHECK(fields(l[3])[0] == "0.10000000000000001");
}

TEST_CASE("cli collapse probe and output file") {
  const std::string path = "cli_collapse_test.csv";
  const Result r = run({"collapse-probe", "--kmax-list", "100,1000", "--n-points", "160", "-o",
                        path});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto l = lines(buf.str());
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "kmax,q0_rstar0,q0_rstar1");
  const double ratio = std::stod(fields(l[2])[1]) / std::stod(fields(l[1])[1]);
  CHECK(ratio == doctest::Approx(10.0).epsilon(1e-2));
  std::remove(path.c_str());
}
