// crnash: analyze real codimension-two submanifolds of C^{n+2} given by two
// real-valued defining functions. Subcommands: validate, analyze, levi,
// blowup, chern. Reports are deterministic JSON (sorted keys, fixed float
// formatting); blowup can additionally emit plot-ready CSV.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "crnash/blowup.hpp"
#include "crnash/chern.hpp"
#include "crnash/report.hpp"
#include "crnash/rng.hpp"
#include "crnash/version.hpp"

namespace {

using json = nlohmann::json;
using namespace crnash;

json jcomplex(cplx z) { return json::array({z.real(), z.imag()}); }

json jcvec(const CVec& v) {
  json a = json::array();
  for (auto z : v) a.push_back(jcomplex(z));
  return a;
}

json jcmat(const CMat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(jcomplex(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json jrvec(const RVec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::string normalize_spec_text(std::string text) {
  std::string out;
  std::string line;
  auto flush = [&]() {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      line.pop_back();
    }
    out += line;
    out += '\n';
    line.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      flush();
    } else {
      line += c;
    }
  }
  if (!line.empty()) flush();
  return out;
}

cplx parse_complex(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) throw SpecError("empty complex number");
  auto to_double = [](const std::string& t, double fallback) {
    if (t.empty() || t == "+") return fallback;
    if (t == "-") return -fallback;
    return parse_double(t, "complex component");
  };
  if (s.back() == 'i') {
    std::string body = s.substr(0, s.size() - 1);
    // split off a real part if a top-level +/- exists past position 0
    for (std::size_t k = body.size(); k-- > 1;) {
      char c = body[k];
      if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
        double re = parse_double(body.substr(0, k), "complex real part");
        double im = to_double(body.substr(k), 1.0);
        return {re, im};
      }
    }
    return {0.0, to_double(body, 1.0)};
  }
  return {parse_double(s, "complex number"), 0.0};
}

CVec parse_complex_list(const std::string& s, char sep) {
  CVec out;
  for (const auto& part : split_list(s, sep)) out.push_back(parse_complex(part));
  return out;
}

Rational parse_rational(const std::string& raw) {
  std::string s = trim(raw);
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      long long num = std::stoll(s.substr(0, slash));
      long long den = std::stoll(s.substr(slash + 1));
      return Rational(num, den);
    }
    return Rational::from_decimal(s);
  } catch (const std::exception&) {
    throw SpecError("invalid rational: '" + raw + "' (use p, p/q or a decimal)");
  }
}

struct GlobalOptions {
  std::uint64_t seed = 0;
  double tol_surface = -1;  // negative: keep spec value
  double tol_rank = -1;
  std::string json_path;
  std::string csv_path;
};

void apply_tolerances(Tolerances& tol, const GlobalOptions& g) {
  if (g.tol_surface > 0) tol.on_surface = g.tol_surface;
  if (g.tol_rank > 0) tol.rank = g.tol_rank;
}

json base_report(const std::string& command, const GlobalOptions& g) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  r["command"] = command;
  r["seed"] = g.seed;
  return r;
}

void attach_spec_echo(json& report, const std::string& text) {
  std::string norm = normalize_spec_text(text);
  report["spec"] = {{"hash", fnv1a_hex(norm)}, {"text", norm}};
}

json jump_to_json(const JumpPoint& j) {
  json out;
  out["point"] = jcvec(j.point.coords);
  out["residual"] = j.point.residual;
  out["wedge_norm"] = j.wedge_norm;
  out["transverse"] = j.transverse;
  out["index"] = j.index;
  out["condition"] = std::isfinite(j.condition) ? json(j.condition) : json("inf");
  out["jacobian_det"] = det(j.jacobian);
  return out;
}

json levi_to_json(const LeviPair& l) {
  json out;
  out["point"] = jcvec(l.base);
  out["l1"] = jcmat(l.l1);
  out["l2"] = jcmat(l.l2);
  json frame = json::array();
  for (const auto& v : l.h_frame) frame.push_back(jcvec(v));
  out["h_frame"] = frame;
  auto mp = mizner_poly(l);
  out["mizner"] = jrvec(mp.coef);
  auto nd = nondegeneracy(l);
  out["nondegenerate"] = {{"independent", nd.independent},
                          {"common_kernel", nd.common_kernel},
                          {"nondegenerate", nd.nondegenerate}};
  return out;
}

void write_outputs(const json& report, const GlobalOptions& g, const std::string& csv) {
  std::string bytes = dump_report(report);
  std::cout << bytes;
  if (!g.json_path.empty()) {
    std::ofstream out(g.json_path, std::ios::binary);
    if (!out) throw SpecError("cannot write JSON to " + g.json_path);
    out << bytes;
  }
  if (!g.csv_path.empty()) {
    std::ofstream out(g.csv_path, std::ios::binary);
    if (!out) throw SpecError("cannot write CSV to " + g.csv_path);
    out << csv;
  }
}

int cmd_validate(const std::string& path, const GlobalOptions& g) {
  std::string text = read_file(path);
  ManifoldSpec spec = parse_manifold_spec(text);
  apply_tolerances(spec.tol, g);
  auto report = validate(spec);
  json r = base_report("validate", g);
  attach_spec_echo(r, text);
  json failures = json::array();
  for (const auto& f : report.failures) failures.push_back(f);
  r["results"] = {{"accepted", report.accepted()}, {"failures", failures}};
  write_outputs(r, g, "");
  return report.accepted() ? 0 : 2;
}

void warn_large_grid(const ManifoldSpec& spec, int grid) {
  if (grid <= 0) return;
  double seeds = std::pow(static_cast<double>(grid), 2.0 * spec.ambient_dim());
  if (seeds > 2e6) {
    std::cerr << "note: grid " << grid << " over " << 2 * spec.ambient_dim()
              << " real dimensions seeds ~" << static_cast<long long>(seeds)
              << " projections; this may take a while\n";
  }
}

int cmd_analyze(const std::string& path, int grid, double tol_jump, const GlobalOptions& g) {
  std::string text = read_file(path);
  ManifoldSpec spec = parse_manifold_spec(text);
  apply_tolerances(spec.tol, g);
  auto report = validate(spec);
  if (!report.accepted()) {
    std::string msg = "spec rejected:";
    for (const auto& f : report.failures) msg += "\n  - " + f;
    throw SpecError(msg);
  }
  warn_large_grid(spec, grid);
  auto jumps = find_jumps(spec, grid, tol_jump);
  json r = base_report("analyze", g);
  attach_spec_echo(r, text);
  json arr = json::array();
  int transverse_count = 0, index_sum = 0;
  for (const auto& j : jumps) {
    arr.push_back(jump_to_json(j));
    if (j.transverse) {
      ++transverse_count;
      index_sum += j.index;
    }
  }
  r["results"] = {{"jumps", arr},
                  {"jump_count", jumps.size()},
                  {"transverse_count", transverse_count},
                  {"index_sum", index_sum}};
  r["diagnostics"] = {{"grid_per_dim", grid > 0 ? grid : default_grid_per_dim(spec.ambient_dim())},
                      {"tol_jump", tol_jump},
                      {"tol_on_surface", spec.tol.on_surface},
                      {"tol_rank", spec.tol.rank}};
  write_outputs(r, g, "");
  return 0;
}

int cmd_levi(const std::string& path, const std::string& point_arg, int jump_index,
             const std::string& fiber_arg, int grid, const GlobalOptions& g) {
  std::string text = read_file(path);
  ManifoldSpec spec = parse_manifold_spec(text);
  apply_tolerances(spec.tol, g);
  json r = base_report("levi", g);
  attach_spec_echo(r, text);
  LeviPair pair;
  if (!point_arg.empty()) {
    CVec q = parse_complex_list(point_arg, ',');
    if (static_cast<int>(q.size()) != spec.ambient_dim()) {
      throw SpecError("--point needs " + std::to_string(spec.ambient_dim()) +
                      " comma-separated complex entries");
    }
    SurfacePoint p = project_to_surface(spec, q);
    pair = levi_form(spec, p);  // at a jump this throws, pointing to levi_on_blowup
    r["results"] = levi_to_json(pair);
    r["results"]["mode"] = "levi_form";
  } else {
    if (jump_index < 0) throw SpecError("levi needs --point or --jump-index");
    auto jumps = find_jumps(spec, grid);
    if (jump_index >= static_cast<int>(jumps.size())) {
      throw SpecError("--jump-index " + std::to_string(jump_index) + " out of range (found " +
                      std::to_string(jumps.size()) + " jumps)");
    }
    if (fiber_arg.empty()) {
      throw SpecError("jump point selected without --fiber: the Levi form at a jump lives on "
                      "the blow-up; pass --fiber a:b:... to evaluate levi_on_blowup");
    }
    CVec fiber = parse_complex_list(fiber_arg, ':');
    pair = levi_on_blowup(spec, jumps[jump_index], fiber);
    r["results"] = levi_to_json(pair);
    r["results"]["mode"] = "levi_on_blowup";
    r["results"]["fiber"] = jcvec(fiber);
  }
  write_outputs(r, g, "");
  return 0;
}

int cmd_blowup(const std::string& path, int rays, const std::string& eps_arg, int grid,
               const GlobalOptions& g) {
  std::string text = read_file(path);
  bool is_curve = false;
  for (const auto& e : read_keyvalue_text(text)) {
    if (e.key == "f") is_curve = true;
  }
  std::vector<double> ladder;
  if (!eps_arg.empty()) {
    for (const auto& part : split_list(eps_arg)) ladder.push_back(parse_double(part, "--eps"));
  }

  json r = base_report("blowup", g);
  attach_spec_echo(r, text);
  std::string csv;

  if (is_curve) {
    CurveSpec spec = parse_curve_spec(text);
    apply_tolerances(spec.tol, g);
    if (ladder.empty()) ladder = default_curve_ladder();
    auto sings = curve_singularities(spec);
    json fibers = json::array();
    csv = "eps,chain,x,y,gauss_0_re,gauss_0_im,gauss_1_re,gauss_1_im\n";
    int chain_id = 0;
    for (const auto& s : sings) {
      auto fiber = curve_fiber(spec, s, ladder);
      json f;
      f["base"] = json::array({s[0], s[1]});
      json pts = json::array();
      for (const auto& fp : fiber.points) pts.push_back(jcvec(fp.h));
      f["points"] = pts;
      json chains = json::array();
      for (const auto& ch : fiber.chains) {
        chains.push_back({{"order", ch.order}, {"residual", ch.residual}});
        for (std::size_t lvl = 0; lvl < ch.eps.size(); ++lvl) {
          csv += format_double(ch.eps[lvl]) + "," + std::to_string(chain_id) + "," +
                 format_double(ch.points[lvl][0]) + "," + format_double(ch.points[lvl][1]) + "," +
                 format_double(ch.reps[lvl][0].real()) + "," +
                 format_double(ch.reps[lvl][0].imag()) + "," +
                 format_double(ch.reps[lvl][1].real()) + "," +
                 format_double(ch.reps[lvl][1].imag()) + "\n";
        }
        csv += "0," + std::to_string(chain_id) + "," + format_double(s[0]) + "," +
               format_double(s[1]) + "," + format_double(ch.limit[0].real()) + "," +
               format_double(ch.limit[0].imag()) + "," + format_double(ch.limit[1].real()) + "," +
               format_double(ch.limit[1].imag()) + "\n";
        ++chain_id;
      }
      f["chains"] = chains;
      json warns = json::array();
      for (const auto& w : fiber.warnings) warns.push_back(w);
      f["warnings"] = warns;
      fibers.push_back(f);
    }
    json sarr = json::array();
    for (const auto& s : sings) sarr.push_back(json::array({s[0], s[1]}));
    r["results"] = {{"kind", "curve"}, {"singularities", sarr}, {"fibers", fibers}};
    r["diagnostics"] = {{"ladder", jrvec(ladder)}};
  } else {
    ManifoldSpec spec = parse_manifold_spec(text);
    apply_tolerances(spec.tol, g);
    if (ladder.empty()) ladder = default_cr_ladder();
    auto jumps = find_jumps(spec, grid);
    json jarr = json::array();
    csv = "t,jump,ray";
    const int pdim = 2 * spec.n + 2;
    for (int k = 0; k < pdim; ++k) csv += ",dir_" + std::to_string(k);
    for (int k = 0; k <= spec.n; ++k) {
      csv += ",u_" + std::to_string(k) + "_re,u_" + std::to_string(k) + "_im";
    }
    csv += "\n";
    int jump_id = 0;
    for (const auto& j : jumps) {
      json jj = jump_to_json(j);
      if (j.transverse) {
        auto model = cr_linear_model(spec, j);
        jj["model"] = {{"matrix", jcmat(model.a_complex)},
                       {"smooth", model.smooth},
                       {"det", model.det_real}};
        Rng rng(g.seed);
        json samples = json::array();
        for (int ray = 0; ray < rays; ++ray) {
          RVec dir = rng.unit_direction(pdim);
          auto fs = cr_fiber_sample(spec, j, dir, ladder);
          double model_dist = projective_distance(model_image(model, dir), fs.limit.h);
          samples.push_back({{"dir", jrvec(dir)},
                             {"limit", jcvec(fs.limit.h)},
                             {"residual", fs.residual},
                             {"order", fs.order},
                             {"model_distance", model_dist}});
          for (std::size_t lvl = 0; lvl < fs.ladder.size(); ++lvl) {
            csv += format_double(fs.ladder[lvl]) + "," + std::to_string(jump_id) + "," +
                   std::to_string(ray);
            for (double d : dir) csv += "," + format_double(d);
            for (auto z : fs.samples[lvl]) {
              csv += "," + format_double(z.real()) + "," + format_double(z.imag());
            }
            csv += "\n";
          }
          csv += "0," + std::to_string(jump_id) + "," + std::to_string(ray);
          for (double d : dir) csv += "," + format_double(d);
          for (auto z : fs.limit.h) {
            csv += "," + format_double(z.real()) + "," + format_double(z.imag());
          }
          csv += "\n";
        }
        jj["samples"] = samples;
      } else {
        jj["model"] = {{"smooth", false}};
      }
      jarr.push_back(jj);
      ++jump_id;
    }
    r["results"] = {{"kind", "cr"}, {"jumps", jarr}};
    r["diagnostics"] = {{"ladder", jrvec(ladder)}, {"rays", rays}};
  }
  write_outputs(r, g, csv);
  return 0;
}

int cmd_chern(int n, const std::string& eval_arg, const GlobalOptions& g) {
  auto poly = obstruction_class(n);
  json r = base_report("chern", g);
  json terms = json::array();
  for (const auto& [k, c] : poly.terms()) {
    terms.push_back({{"c", c.to_string()}, {"h", k[0]}, {"e1", k[1]}, {"e2", k[2]}});
  }
  r["results"] = {{"n", n}, {"polynomial", to_string(poly)}, {"terms", terms}};
  if (!eval_arg.empty()) {
    auto parts = split_list(eval_arg);
    if (parts.size() != 3) throw SpecError("--eval needs h,e1,e2");
    Rational h = parse_rational(parts[0]);
    Rational e1 = parse_rational(parts[1]);
    Rational e2 = parse_rational(parts[2]);
    Rational v = poly.eval_at(h, e1, e2);
    r["results"]["eval"] = {{"h", h.to_string()},
                            {"e1", e1.to_string()},
                            {"e2", e2.to_string()},
                            {"value", v.to_string()}};
  }
  write_outputs(r, g, "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CR manifold analyzer: jump points, CR-Nash blow-up fibers, Levi/Mizner data "
               "and Chern obstructions"};
  app.require_subcommand(1);
  app.fallthrough();  // accept the global flags after the subcommand too

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for all randomized sampling (default 0)");
  app.add_option("--tol-surface", g.tol_surface, "Override on-surface tolerance");
  app.add_option("--tol-rank", g.tol_rank, "Override rank tolerance");
  app.add_option("--json", g.json_path, "Also write the JSON report to this path");
  app.add_option("--csv", g.csv_path, "Write plot-ready CSV to this path (blowup)");

  std::string spec_path, point_arg, fiber_arg, eps_arg, eval_arg;
  int grid = 0, jump_index = -1, rays = 8, chern_n = -1;
  double tol_jump = kJumpIndicatorTol;

  auto* validate_cmd = app.add_subcommand("validate", "Check a manifold spec file");
  validate_cmd->add_option("spec", spec_path, "Manifold spec file")->required();

  auto* analyze_cmd =
      app.add_subcommand("analyze", "Locate complex jump points and certify transversality");
  analyze_cmd->add_option("spec", spec_path, "Manifold spec file")->required();
  analyze_cmd->add_option("--grid", grid, "Grid points per real dimension (0 = auto)");
  analyze_cmd->add_option("--tol-jump", tol_jump, "Relative jump indicator tolerance");

  auto* levi_cmd = app.add_subcommand("levi", "Levi form, Mizner polynomial, nondegeneracy");
  levi_cmd->add_option("spec", spec_path, "Manifold spec file")->required();
  auto* point_opt =
      levi_cmd->add_option("--point", point_arg, "Comma-separated complex coordinates to project");
  auto* jump_opt =
      levi_cmd->add_option("--jump-index", jump_index, "Jump index from a prior analyze (0-based)");
  levi_cmd->add_option("--fiber", fiber_arg, "Blow-up fiber direction a:b:... for a jump")
      ->needs(jump_opt);
  levi_cmd->add_option("--grid", grid, "Grid for the jump search (0 = auto)");
  point_opt->excludes(jump_opt);

  auto* blowup_cmd = app.add_subcommand("blowup", "Nash blow-up fibers (curve or CR)");
  blowup_cmd->add_option("spec", spec_path, "Curve or manifold spec file")->required();
  blowup_cmd->add_option("--rays", rays, "Sampled ray directions per jump (CR case)");
  blowup_cmd->add_option("--eps", eps_arg, "Comma-separated decreasing epsilon ladder");
  blowup_cmd->add_option("--grid", grid, "Grid for the jump search (0 = auto)");

  auto* chern_cmd = app.add_subcommand("chern", "Symbolic Chern obstruction class");
  chern_cmd->add_option("--n", chern_n, "CR dimension n")->required();
  chern_cmd->add_option("--eval", eval_arg, "Evaluate at h,e1,e2 (rationals)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(spec_path, g);
    if (analyze_cmd->parsed()) return cmd_analyze(spec_path, grid, tol_jump, g);
    if (levi_cmd->parsed()) return cmd_levi(spec_path, point_arg, jump_index, fiber_arg, grid, g);
    if (blowup_cmd->parsed()) return cmd_blowup(spec_path, rays, eps_arg, grid, g);
    if (chern_cmd->parsed()) return cmd_chern(chern_n, eval_arg, g);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const InternalError& e) {
    std::cerr << "internal assertion: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
