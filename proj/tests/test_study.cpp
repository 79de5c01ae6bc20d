#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "dmq/error.hpp"
#include "dmq/study.hpp"

using namespace dmq;

namespace {

StudyConfig small_study() {
  StudyConfig c;
  c.params.mu = Vector::Constant(2, 3.0);
  c.params.sigma.resize(2, 2);
  c.params.sigma << 1, 0.3, 0.3, 1;
  c.params.nu = 3;
  c.n = 2000;
  c.replicates = 3;
  c.grid_m = 6;
  c.k = 100;
  c.seed = 17;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_SUITE("study") {
  TEST_CASE("percentile interpolates") {
    CHECK(percentile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(percentile({5}, 0.85) == 5.0);
    CHECK(percentile({1, 2, 3, 4, 5}, 0.15) == doctest::Approx(1.6));
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(percentile({1, inf, inf}, 0.85) == inf);
  }

  TEST_CASE("oracle surface") {
    const StudyConfig c = small_study();
    const QuantileSurface o = oracle_surface(c.params, Direction::e(2), 1e-3, theta_grid(2, 4), 1e3);
    CHECK(o.source == "oracle");
    CHECK(o.points.size() == 4);
    const RotationMatrix r = rotation_for(Direction::e(2));
    for (const auto& p : o.points) CHECK((p.x_original - unrotate(r, p.x_rotated)).norm() < 1e-12);
  }

  TEST_CASE("results do not depend on the worker count") {
    StudyConfig a = small_study();
    StudyConfig b = small_study();
    b.workers = 3;
    const StudyFiles fa = render_study(run_study(a));
    const StudyFiles fb = render_study(run_study(b));
    CHECK(fa.replicates_csv == fb.replicates_csv);
    CHECK(fa.bands_csv == fb.bands_csv);
    CHECK(fa.rho_csv == fb.rho_csv);
    CHECK(fa.summary_json == fb.summary_json);
  }

  TEST_CASE("single replicate") {
    StudyConfig c = small_study();
    c.replicates = 1;
    const StudyResult r = run_study(c);
    REQUIRE(r.replicates.size() == 1);
    CHECK(r.replicates[0].ok);
    CHECK(std::isfinite(r.replicates[0].re));
    const auto summary = nlohmann::json::parse(render_study(r).summary_json);
    CHECK(summary["replicates"] == 1);
    CHECK(summary["k"]["median"] == 100);
  }

  TEST_CASE("failing replicates carry their index") {
    StudyConfig c = small_study();
    c.n = 30;
    c.k = 5;
    try {
      (void)run_study(c);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).rfind("replicate 0:", 0) == 0);
    }
    c.keep_going = true;
    CHECK_THROWS_AS(run_study(c), NumericalError);
  }

  TEST_CASE("keep going records failures") {
    StudyConfig c = small_study();
    c.n = 300;
    c.k = 3;
    c.replicates = 8;
    c.keep_going = true;
    StudyResult r;
    try {
      r = run_study(c);
    } catch (const NumericalError&) {
      return;  // every replicate failed; covered above
    }
    const auto summary = nlohmann::json::parse(render_study(r).summary_json);
    std::size_t failed = 0;
    for (const auto& rep : r.replicates) failed += rep.ok ? 0 : 1;
    CHECK(summary["failed_replicates"].size() == failed);
  }

  TEST_CASE("oracle availability") {
    StudyConfig c = small_study();
    c.params.mu = Vector::Constant(4, 3.0);
    c.params.sigma = Matrix::Identity(4, 4);
    c.replicates = 1;
    c.grid_m = 3;
    const StudyResult r = run_study(c);
    CHECK_FALSE(r.has_oracle);
    CHECK(std::isnan(r.replicates[0].re));
  }
}
