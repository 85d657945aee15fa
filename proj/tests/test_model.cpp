#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include <spinbus/model.hpp>

using namespace spinbus;

TEST_CASE("derived couplings") {
  ChainSpec xx;
  xx.model = ModelKind::xy;
  xx.gamma = 0.0;
  Couplings c = derived_couplings(xx);
  CHECK(c.jx == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.jy == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.jz == 0.0);

  ChainSpec ising = xx;
  ising.gamma = 1.0;
  c = derived_couplings(ising);
  CHECK(c.jx == doctest::Approx(1.0));
  CHECK(c.jy == doctest::Approx(0.0));

  ChainSpec heis;
  heis.model = ModelKind::xxz;
  heis.delta = 1.0;
  c = derived_couplings(heis);
  CHECK(c.jx == doctest::Approx(0.5));
  CHECK(c.jy == doctest::Approx(0.5));
  CHECK(c.jz == doctest::Approx(0.5));
}

TEST_CASE("gamma = 0 keeps jx = jy for any j") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    ChainSpec spec;
    spec.model = ModelKind::xy;
    spec.j = u(rng);
    spec.gamma = 0.0;
    Couplings c = derived_couplings(spec);
    CHECK(c.jx == c.jy);
  }
}

TEST_CASE("total sites") {
  ChainSpec spec;
  spec.n = 20;
  CHECK(total_sites(spec, true) == 21);
  CHECK(total_sites(spec, false) == 20);
  spec.n = 2;
  CHECK(total_sites(spec, true) == 3);
}

TEST_CASE("spec validation") {
  ChainSpec spec;
  spec.n = 1;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec.n = 2;
  spec.j = std::nan("");
  CHECK_THROWS_AS(validate(spec), ConfigError);
}

TEST_CASE("bloch vector stays in the ball") {
  BlochVector ok{0.6, 0.0, 0.8};
  validate(ok);
  BlochVector bad{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(validate(bad), EngineError);
}

TEST_CASE("config json round trip is bit exact") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    ModelConfig cfg;
    cfg.spec.model = (i % 2 == 0) ? ModelKind::xy : ModelKind::xxz;
    cfg.spec.n = 2 + static_cast<int>(i % 23);
    cfg.spec.j = u(rng);
    cfg.spec.gamma = u(rng);
    cfg.spec.delta = u(rng);
    cfg.spec.h = u(rng) / 3.0;
    cfg.init = static_cast<InitKind>(i % 4);  // singlets handled below
    if (cfg.init == InitKind::singlet_series && cfg.spec.n % 2 != 0) cfg.spec.n += 1;

    ModelConfig back = parse_model_config(model_config_to_json(cfg));
    CHECK(back.spec.model == cfg.spec.model);
    CHECK(back.spec.n == cfg.spec.n);
    CHECK(back.init == cfg.init);
    CHECK(std::memcmp(&back.spec.j, &cfg.spec.j, sizeof(double)) == 0);
    CHECK(std::memcmp(&back.spec.h, &cfg.spec.h, sizeof(double)) == 0);
    if (cfg.spec.model == ModelKind::xy)
      CHECK(std::memcmp(&back.spec.gamma, &cfg.spec.gamma, sizeof(double)) == 0);
    else
      CHECK(std::memcmp(&back.spec.delta, &cfg.spec.delta, sizeof(double)) == 0);
  }
}

TEST_CASE("config parse errors") {
  CHECK_THROWS_AS(parse_model_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_model_config(R"({"model":"ising","n":4})"), ConfigError);
  CHECK_THROWS_AS(parse_model_config(R"({"model":"xy","n":5,"init":"singlets"})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_model_config(R"({"model":"xy"})"), ConfigError);
  ModelConfig ok = parse_model_config(R"({"model":"xxz","n":8,"delta":0.5,"init":"ground"})");
  CHECK(ok.spec.model == ModelKind::xxz);
  CHECK(ok.init == InitKind::ground_state);
  CHECK(ok.spec.j == 1.0);  // default
}
