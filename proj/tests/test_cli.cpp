// Integration checks for the crnash CLI: exit codes, report shapes, CSV
// output and run-to-run determinism. Usage: cli_tests <cli_path> <data_dir>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

using json = nlohmann::json;

int g_failures = 0;

#define CHECK_MSG(cond, msg)                                                       \
  do {                                                                             \
    if (!(cond)) {                                                                 \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg << "\n"; \
      ++g_failures;                                                                \
    }                                                                              \
  } while (0)

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run(const std::string& cmd) {
  std::string out_path = "cli_test_stdout.tmp";
  std::string err_path = "cli_test_stderr.tmp";
  std::string full = cmd + " > " + out_path + " 2> " + err_path;
  int rc = std::system(full.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: cli_tests <cli_path> <data_dir>\n";
    return 2;
  }
  std::string cli = argv[1];
  std::string data = argv[2];

  // analyze: one transverse jump for the model graph, deterministic output
  {
    std::string cmd = cli + " --seed 0 analyze " + data + "/graph_zbar2.spec --grid 7";
    RunResult a = run(cmd);
    RunResult b = run(cmd);
    CHECK_MSG(a.exit_code == 0, "analyze exit code " << a.exit_code << " stderr: " << a.err);
    CHECK_MSG(a.out == b.out, "analyze output is not byte-identical across runs");
    json r = json::parse(a.out);
    CHECK_MSG(r["results"]["jump_count"] == 1, "expected one jump");
    CHECK_MSG(r["results"]["jumps"][0]["transverse"] == true, "jump should be transverse");
    CHECK_MSG(r["results"]["jumps"][0]["index"] == 1, "jump index should be +1");
    CHECK_MSG(r["spec"].contains("hash"), "report echoes the spec hash");
  }

  // analyze: the linear graph has no jumps
  {
    RunResult a = run(cli + " analyze " + data + "/graph_zbar_linear.spec --grid 5");
    CHECK_MSG(a.exit_code == 0, "linear analyze exit code " << a.exit_code);
    json r = json::parse(a.out);
    CHECK_MSG(r["results"]["jump_count"] == 0, "linear graph should have no jumps");
  }

  // malformed input file -> exit 2 with diagnostics
  {
    std::ofstream bad("cli_test_bad.spec");
    bad << "n = 0\nvariables = z, w\nrho1 = \"z +\"\nrho2 = \"im(w)\"\n";
    bad.close();
    RunResult a = run(cli + " analyze cli_test_bad.spec");
    CHECK_MSG(a.exit_code == 2, "malformed spec should exit 2, got " << a.exit_code);
    CHECK_MSG(!a.err.empty(), "malformed spec should print diagnostics");
    std::remove("cli_test_bad.spec");
  }

  // validate: non-real rho rejected with exit 2 and failures listed
  {
    std::ofstream bad("cli_test_nonreal.spec");
    bad << "n = 0\nvariables = z, w\nrho1 = \"z\"\nrho2 = \"im(w)\"\n";
    bad.close();
    RunResult a = run(cli + " validate cli_test_nonreal.spec");
    CHECK_MSG(a.exit_code == 2, "invalid spec should exit 2, got " << a.exit_code);
    json r = json::parse(a.out);
    CHECK_MSG(r["results"]["accepted"] == false, "spec should be rejected");
    CHECK_MSG(!r["results"]["failures"].empty(), "failures should be listed");
    std::remove("cli_test_nonreal.spec");
  }

  // levi at the quadric origin: mizner ~ (1, 0, -1), nondegenerate
  {
    RunResult a = run(cli + " levi " + data + "/quadric.spec --point 0,0,0,0");
    CHECK_MSG(a.exit_code == 0, "levi exit code " << a.exit_code << " stderr: " << a.err);
    json r = json::parse(a.out);
    auto mz = r["results"]["mizner"];
    CHECK_MSG(mz.size() == 3, "quadric mizner should have 3 coefficients");
    double c0 = mz[0].get<double>(), c1 = mz[1].get<double>(), c2 = mz[2].get<double>();
    CHECK_MSG(std::abs(c0 - 1) < 1e-8 && std::abs(c1) < 1e-8 && std::abs(c2 + 1) < 1e-8,
              "quadric mizner should be (1, 0, -1), got (" << c0 << "," << c1 << "," << c2 << ")");
    CHECK_MSG(r["results"]["nondegenerate"]["nondegenerate"] == true,
              "quadric should be nondegenerate");
  }

  // levi at a jump without --fiber: guided error pointing at levi_on_blowup
  {
    RunResult a = run(cli + " levi " + data + "/graph_zbar2.spec --point 0,0");
    CHECK_MSG(a.exit_code == 2, "levi at a jump should exit 2, got " << a.exit_code);
    CHECK_MSG(a.err.find("levi_on_blowup") != std::string::npos,
              "error should mention levi_on_blowup: " << a.err);
    RunResult b =
        run(cli + " levi " + data + "/graph_zbar2.spec --jump-index 0 --grid 5");
    CHECK_MSG(b.exit_code == 2, "jump-index without --fiber should exit 2");
    CHECK_MSG(b.err.find("--fiber") != std::string::npos, "error should mention --fiber");
  }

  // levi on the blow-up fiber via --jump-index/--fiber
  {
    RunResult a = run(cli + " levi " + data + "/graph_two_vars.spec --jump-index 0 "
                      "--fiber 1:0 --grid 3");
    CHECK_MSG(a.exit_code == 0, "levi_on_blowup exit code " << a.exit_code
                                << " stderr: " << a.err);
    json r = json::parse(a.out);
    CHECK_MSG(r["results"]["mode"] == "levi_on_blowup", "mode should be levi_on_blowup");
    CHECK_MSG(r["results"]["l1"].size() == 1, "n = 1 gives a 1x1 pair");
  }

  // blowup on the node curve: two fiber points, CSV emitted
  {
    RunResult a = run(cli + " --csv cli_test_node.csv blowup " + data + "/node.curve");
    CHECK_MSG(a.exit_code == 0, "curve blowup exit code " << a.exit_code << " stderr: " << a.err);
    json r = json::parse(a.out);
    CHECK_MSG(r["results"]["kind"] == "curve", "kind should be curve");
    CHECK_MSG(r["results"]["fibers"][0]["points"].size() == 2, "node fiber has two points");
    std::string csv = slurp("cli_test_node.csv");
    CHECK_MSG(csv.rfind("eps,chain,x,y", 0) == 0, "CSV should start with a header row");
    CHECK_MSG(csv.find("\n0,") != std::string::npos, "CSV should include extrapolated rows");
    std::remove("cli_test_node.csv");
  }

  // blowup on the non-transverse cubic graph: smooth:false, no crash
  {
    RunResult a = run(cli + " blowup " + data + "/graph_zbar3.spec --grid 7 --rays 2");
    CHECK_MSG(a.exit_code == 0, "cr blowup exit code " << a.exit_code << " stderr: " << a.err);
    json r = json::parse(a.out);
    CHECK_MSG(r["results"]["kind"] == "cr", "kind should be cr");
    CHECK_MSG(r["results"]["jumps"][0]["model"]["smooth"] == false,
              "cubic graph jump is not smooth");
  }

  // non-convergence (empty zero set) -> exit 3
  {
    std::ofstream empty_set("cli_test_empty.spec");
    empty_set << "n = 0\nvariables = z, w\nrho1 = \"z*conj(z) + 1\"\nrho2 = \"im(w)\"\n";
    empty_set.close();
    RunResult a = run(cli + " levi cli_test_empty.spec --point 0,0");
    CHECK_MSG(a.exit_code == 3, "projection onto an empty zero set should exit 3, got "
                                    << a.exit_code << " stderr: " << a.err);
    std::remove("cli_test_empty.spec");
  }

  // chern command
  {
    RunResult a = run(cli + " chern --n 1");
    json r = json::parse(a.out);
    CHECK_MSG(r["results"]["polynomial"] == "4*h^2 - 2*h*e1 + e2",
              "chern n=1 polynomial mismatch: " << r["results"]["polynomial"]);
    RunResult z = run(cli + " chern --n 0");
    CHECK_MSG(json::parse(z.out)["results"]["polynomial"] == "0", "chern n=0 should be 0");
    RunResult e = run(cli + " chern --n 1 --eval 1,0,0");
    CHECK_MSG(json::parse(e.out)["results"]["eval"]["value"] == "4", "chern eval at (1,0,0)");
    RunResult g = run(cli + " chern --n 42");
    CHECK_MSG(g.exit_code == 2, "chern over the guard should exit 2");
  }

  // --json writes the same bytes as stdout
  {
    RunResult a = run(cli + " --json cli_test_report.json chern --n 2");
    CHECK_MSG(a.exit_code == 0, "chern --json exit code");
    CHECK_MSG(slurp("cli_test_report.json") == a.out, "--json bytes differ from stdout");
    std::remove("cli_test_report.json");
  }

  if (g_failures == 0) {
    std::cout << "cli_tests: all checks passed\n";
    return 0;
  }
  std::cerr << "cli_tests: " << g_failures << " failure(s)\n";
  return 1;
}
