#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace crnash;
using testutil::make_spec;

namespace {

ManifoldSpec graph_spec() {
  return make_spec(0, {"z1", "w"}, "re(w - conj(z1)^2)", "im(w - conj(z1)^2)");
}

ManifoldSpec two_var_spec() {
  return make_spec(1, {"z1", "z2", "w"}, "re(w - conj(z1)^2 - conj(z2)^2)",
                   "im(w - conj(z1)^2 - conj(z2)^2)");
}

}  // namespace

TEST_CASE("validate accepts the graph pair and rejects bad specs") {
  REQUIRE(validate(graph_spec()).accepted());

  auto bad = make_spec(0, {"z1", "w"}, "z1", "im(w)");
  auto report = validate(bad);
  REQUIRE_FALSE(report.accepted());
  REQUIRE(report.failures.size() == 1);
  REQUIRE(report.failures[0].find("rho1") != std::string::npos);

  auto wrong_n = make_spec(1, {"z1", "w"}, "re(w)", "im(w)");
  REQUIRE_FALSE(validate(wrong_n).accepted());
}

TEST_CASE("spec file parsing round trip and unknown key rejection") {
  std::string text =
      "n = 0\n"
      "variables = z, w\n"
      "rho1 = \"re(w - conj(z)^2)\"\n"
      "rho2 = \"im(w - conj(z)^2)\"\n"
      "box.z = -1,1,-1,1\n"
      "tol.on_surface = 1e-10\n";
  ManifoldSpec spec = parse_manifold_spec(text);
  REQUIRE(spec.n == 0);
  REQUIRE(spec.variables == std::vector<std::string>{"z", "w"});
  REQUIRE(spec.tol.on_surface == 1e-10);
  REQUIRE(spec.box[1].re_min == -1);  // defaulted box for w

  REQUIRE_THROWS_AS(parse_manifold_spec(text + "bogus = 1\n"), SpecError);
  REQUIRE_THROWS_AS(parse_manifold_spec("n = 0\n"), SpecError);
}

TEST_CASE("projection keeps on-surface points and converges nearby") {
  auto spec = graph_spec();
  auto p = project_to_surface(spec, {cplx{0.5, 0}, cplx{0.25, 0}});
  REQUIRE(p.residual < 1e-14);
  REQUIRE(p.regular);
  REQUIRE(std::abs(p.coords[0] - cplx{0.5, 0}) < 1e-12);

  auto q = project_to_surface(spec, {cplx{0.5, 0}, cplx{0.3, 0}});
  REQUIRE(q.residual < 1e-10);
  // the defining relation w = conj(z)^2 holds at the landing point
  REQUIRE(std::abs(q.coords[1] - std::conj(q.coords[0]) * std::conj(q.coords[0])) < 1e-9);
  REQUIRE(std::abs(q.coords[0] - cplx{0.5, 0}) < 0.1);

  REQUIRE_THROWS_AS(project_to_surface(spec, {cplx{50, 3}, cplx{-40, 7}}, 1), ConvergenceError);
}

TEST_CASE("projection is idempotent") {
  auto spec = two_var_spec();
  Rng rng(3);
  for (int t = 0; t < 8; ++t) {
    CVec q = testutil::random_point(rng, 3);
    SurfacePoint p;
    try {
      p = project_to_surface(spec, q);
    } catch (const ConvergenceError&) {
      continue;
    }
    auto p2 = project_to_surface(spec, p.coords);
    double moved = 0;
    for (int k = 0; k < 3; ++k) moved += std::norm(p2.coords[k] - p.coords[k]);
    REQUIRE(std::sqrt(moved) < 1e-10);
  }
}

TEST_CASE("tangent frame spans the z-plane for the graph at the origin") {
  auto spec = graph_spec();
  auto p = project_to_surface(spec, {cplx{0, 0}, cplx{0, 0}});
  auto frame = tangent_frame(spec, p);
  REQUIRE(frame.size() == 2);
  RMat j = real_jacobian(spec, p.coords);
  for (const auto& v : frame) {
    // w-components vanish: slots 1 (Re w) and 3 (Im w)
    REQUIRE(std::abs(v[1]) < 1e-12);
    REQUIRE(std::abs(v[3]) < 1e-12);
    RVec jv = j * v;
    REQUIRE(std::abs(jv[0]) < 1e-9);
    REQUIRE(std::abs(jv[1]) < 1e-9);
  }
  // orthonormality
  REQUIRE(std::abs(rdot(frame[0], frame[0]) - 1) < 1e-10);
  REQUIRE(std::abs(rdot(frame[0], frame[1])) < 1e-10);
}

TEST_CASE("tangent frame of the linear hyperplane pair is the z-plane everywhere") {
  auto spec = make_spec(0, {"z1", "w"}, "re(w)", "im(w)");
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    CVec q = {cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)}, cplx{0, 0}};
    auto p = project_to_surface(spec, q);
    auto frame = tangent_frame(spec, p);
    REQUIRE(frame.size() == 2);
    for (const auto& v : frame) {
      REQUIRE(std::abs(v[1]) < 1e-12);
      REQUIRE(std::abs(v[3]) < 1e-12);
    }
  }
}

TEST_CASE("tangent frame rejects non-regular points") {
  // rho1 = rho2: the real Jacobian has rank 1 everywhere on the zero set
  auto spec = make_spec(0, {"z1", "w"}, "re(w)", "re(w)");
  SurfacePoint p = make_surface_point(spec, {cplx{0.2, 0.1}, cplx{0, 0.4}});
  REQUIRE_FALSE(p.regular);
  REQUIRE_THROWS_AS(tangent_frame(spec, p), SpecError);
}

TEST_CASE("graph chart reproduces the graph and the normal form at the jump") {
  auto spec = graph_spec();
  auto origin = project_to_surface(spec, {cplx{0, 0}, cplx{0, 0}});
  Chart chart = graph_chart(spec, origin);
  REQUIRE(chart.normal_form);
  REQUIRE(chart_normal_form_residual(spec, chart) < 1e-8);

  // chart_eval(0) returns the base exactly
  auto base = chart_eval(spec, chart, {0, 0});
  REQUIRE(std::abs(base.coords[0] - origin.coords[0]) < 1e-15);
  REQUIRE(std::abs(base.coords[1] - origin.coords[1]) < 1e-15);

  // u = (0.5, 0) lands on z = 0.5, w = 0.25
  auto p = chart_eval(spec, chart, {0.5, 0});
  REQUIRE(std::abs(p.coords[0] - cplx{0.5, 0}) < 1e-10);
  REQUIRE(std::abs(p.coords[1] - cplx{0.25, 0}) < 1e-10);
}

TEST_CASE("chart of the two-variable graph solves the fiber closed form") {
  auto spec = two_var_spec();
  auto origin = project_to_surface(spec, CVec(3, cplx{}));
  Chart chart = graph_chart(spec, origin);
  REQUIRE(chart.normal_form);
  REQUIRE(chart_normal_form_residual(spec, chart) < 1e-8);
  double a = 0.3, b = -0.4;
  auto p = chart_eval(spec, chart, {a, b, 0, 0});
  REQUIRE(std::abs(p.coords[0] - cplx{a, 0}) < 1e-10);
  REQUIRE(std::abs(p.coords[1] - cplx{b, 0}) < 1e-10);
  REQUIRE(std::abs(p.coords[2] - cplx{a * a + b * b, 0}) < 1e-9);
}

TEST_CASE("chart evaluations stay on the surface") {
  auto spec = two_var_spec();
  auto origin = project_to_surface(spec, CVec(3, cplx{}));
  Chart chart = graph_chart(spec, origin);
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    RVec u = rng.unit_direction(4);
    for (auto& x : u) x *= 0.3;
    auto p = chart_eval(spec, chart, u);
    REQUIRE(p.residual <= spec.tol.on_surface);
  }
}
