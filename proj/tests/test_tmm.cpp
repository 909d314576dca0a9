#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "photonbench/materials.hpp"
#include "photonbench/tmm.hpp"

using namespace photonbench::tmm;

namespace {

LayerStack random_stack(std::mt19937_64& gen, bool lossy) {
  std::uniform_real_distribution<double> thick(0.0, 500.0), idx(1.0, 3.0), ext(0.0, 0.5);
  std::uniform_int_distribution<int> count(0, 10);
  LayerStack s;
  s.superstrate = {idx(gen), 0.0};
  s.substrate = {idx(gen), lossy ? ext(gen) : 0.0};
  const int n = count(gen);
  for (int i = 0; i < n; ++i) s.layers.push_back({thick(gen), {idx(gen), lossy ? ext(gen) : 0.0}});
  return s;
}

std::vector<oracle::Film> films_of(const LayerStack& s) {
  std::vector<oracle::Film> f;
  for (const auto& l : s.layers) f.push_back({l.index.value(), l.thickness_nm});
  return f;
}

}  // namespace

TEST_SUITE("tmm") {
  TEST_CASE("permittivity conversion round-trips") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> n(0.1, 5.0), k(0.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
      const ComplexIndex idx{n(gen), k(gen)};
      const auto back = ComplexIndex::from_permittivity(idx.permittivity());
      CHECK(std::abs(back.value() - idx.value()) <= 1e-12 * std::abs(idx.value()));
    }
    CHECK(ComplexIndex::from_permittivity(1.96).n == doctest::Approx(1.4).epsilon(1e-15));
  }

  TEST_CASE("normal incidence on glass reflects four percent") {
    const auto c = fresnel_interface({1.0, 0.0}, {1.5, 0.0}, {600.0, 0.0, Polarization::s});
    CHECK(std::abs(c.r - complex{-0.2, 0.0}) < 1e-12);
    CHECK(std::abs(std::norm(c.r) - 0.04) < 1e-12);
    const auto p = fresnel_interface({1.0, 0.0}, {1.5, 0.0}, {600.0, 0.0, Polarization::p});
    CHECK(std::abs(p.r - c.r) < 1e-12);
  }

  TEST_CASE("identical media do not reflect") {
    for (double angle : {0.0, 20.0, 60.0, 89.0})
      for (auto pol : {Polarization::s, Polarization::p}) {
        const auto c = fresnel_interface({1.7, 0.2}, {1.7, 0.2}, {500.0, angle, pol});
        CHECK(std::abs(c.r) < 1e-15);
        CHECK(std::abs(c.t - 1.0) < 1e-15);
      }
  }

  TEST_CASE("oblique interface matches the textbook formulas") {
    for (auto pol : {Polarization::s, Polarization::p}) {
      const bool p = pol == Polarization::p;
      const auto c = fresnel_interface({1.0, 0.0}, {1.5, 0.0}, {600.0, 45.0, pol});
      CHECK(std::abs(c.r - oracle::interface_r(1.0, 1.5, 45.0, p)) < 1e-14);
      CHECK(std::abs(c.t - (1.0 + c.r)) < 1e-14);
      const auto g = fresnel_interface({1.0, 0.0}, {0.2, 3.1}, {600.0, 40.0, pol});
      CHECK(std::abs(g.r - oracle::interface_r(1.0, {0.2, 3.1}, 40.0, p)) < 1e-14);
      // Total internal reflection.
      const auto tir = fresnel_interface({1.5, 0.0}, {1.0, 0.0}, {600.0, 60.0, pol});
      CHECK(std::abs(std::abs(tir.r) - 1.0) < 1e-14);
      CHECK(std::abs(tir.r - oracle::interface_r(1.5, 1.0, 60.0, p)) < 1e-14);
    }
  }

  TEST_CASE("p reflection vanishes at the Brewster angle") {
    const double brewster = std::atan(1.5) * 180.0 / std::numbers::pi;
    const auto c = fresnel_interface({1.0, 0.0}, {1.5, 0.0}, {600.0, brewster, Polarization::p});
    CHECK(std::abs(c.r) < 1e-12);
  }

  TEST_CASE("grazing and invalid waves") {
    CHECK_THROWS_AS(fresnel_interface({1.0, 0.0}, {1.5, 0.0}, {600.0, 90.0, Polarization::s}), std::domain_error);
    CHECK_THROWS_AS(fresnel_interface({1.0, 0.0}, {1.5, 0.0}, {600.0, -1.0, Polarization::s}), std::domain_error);
    CHECK_THROWS_AS(stack_response({}, {0.0, 0.0, Polarization::s}), std::invalid_argument);
    LayerStack bad;
    bad.layers.push_back({-1.0, {1.5, 0.0}});
    CHECK_THROWS_AS(stack_response(bad, {600.0, 0.0, Polarization::s}), std::invalid_argument);
    LayerStack lossy;
    lossy.layers.push_back({10.0, {1.5, -0.1}});
    CHECK_THROWS_AS(stack_response(lossy, {600.0, 0.0, Polarization::s}), std::invalid_argument);
  }

  TEST_CASE("free space") {
    const auto r = stack_response({}, {600.0, 0.0, Polarization::s});
    CHECK(r.R == doctest::Approx(0.0));
    CHECK(r.T == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.A == doctest::Approx(0.0));
  }

  TEST_CASE("half-wave layer is absentee") {
    LayerStack s{{1.0, 0.0}, {{600.0 / (2.0 * 2.0), {2.0, 0.0}}}, {1.5, 0.0}};
    const auto r = stack_response(s, {600.0, 0.0, Polarization::s});
    CHECK(std::abs(r.R - 0.04) < 1e-12);
  }

  TEST_CASE("quarter-wave layer matches the analytic reflectance") {
    for (auto [n1, ns] : {std::pair{1.5, 2.25}, std::pair{1.38, 1.52}, std::pair{2.3, 1.52}}) {
      LayerStack s{{1.0, 0.0}, {{550.0 / (4.0 * n1), {n1, 0.0}}}, {ns, 0.0}};
      const auto r = stack_response(s, {550.0, 0.0, Polarization::s});
      CHECK(std::abs(r.R - oracle::quarter_wave_R(1.0, n1, ns)) < 1e-12);
    }
  }

  TEST_CASE("reflection agrees with Rouard's recursion") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> wl(300.0, 1000.0), ang(0.0, 80.0);
    for (int i = 0; i < 300; ++i) {
      const auto s = random_stack(gen, i % 2 == 1);
      const double lambda = wl(gen), angle = ang(gen);
      for (auto pol : {Polarization::s, Polarization::p}) {
        const auto r = stack_response(s, {lambda, angle, pol}).r;
        const auto ref = oracle::rouard_r(s.superstrate.value(), films_of(s), s.substrate.value(), lambda, angle,
                                          pol == Polarization::p);
        CHECK(std::abs(r - ref) < 1e-10);
      }
    }
  }

  TEST_CASE("transmission agrees with the textbook characteristic matrix") {
    std::mt19937_64 gen(8);
    for (int i = 0; i < 200; ++i) {
      auto s = random_stack(gen, true);
      s.superstrate = {1.0, 0.0};
      const auto r = stack_response(s, {550.0, 0.0, Polarization::s});
      const auto ref = oracle::characteristic_rt(1.0, films_of(s), s.substrate.value(), 550.0);
      CHECK(std::abs(r.R - ref.R) < 1e-10);
      CHECK(std::abs(r.T - ref.T) < 1e-10);
      const auto rec = oracle::rouard_rt(1.0, films_of(s), s.substrate.value(), 550.0);
      CHECK(std::abs(rec.R - ref.R) < 1e-10);
      CHECK(std::abs(rec.T - ref.T) < 1e-10);
    }
  }

  TEST_CASE("energy is conserved in lossless stacks") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> wl(300.0, 1000.0), ang(0.0, 85.0);
    for (int i = 0; i < 500; ++i) {
      const auto s = random_stack(gen, false);
      const double lambda = wl(gen), angle = ang(gen);
      for (auto pol : {Polarization::s, Polarization::p}) {
        const auto r = stack_response(s, {lambda, angle, pol});
        CHECK(std::abs(r.R + r.T - 1.0) < 1e-9);
        CHECK(r.A < 1e-9);
        CHECK(std::abs(r.R + r.T + r.A - 1.0) < 1e-9);
      }
    }
  }

  TEST_CASE("absorbing stacks partition power") {
    std::mt19937_64 gen(12);
    for (int i = 0; i < 300; ++i) {
      const auto s = random_stack(gen, true);
      for (auto pol : {Polarization::s, Polarization::p}) {
        const auto r = stack_response(s, {450.0, 30.0, pol});
        CHECK(r.R >= 0.0);
        CHECK(r.R <= 1.0);
        CHECK(r.T >= 0.0);
        CHECK(r.A >= 0.0);
        CHECK(std::abs(r.R + r.T + r.A - 1.0) < 1e-9);
      }
    }
  }

  TEST_CASE("a thick absorbing slab stays finite") {
    LayerStack s{{1.0, 0.0}, {{30000.0, {5.0, 0.4}}}, {1.0, 0.0}};
    const auto r = stack_response(s, {375.0, 0.0, Polarization::s});
    CHECK(std::isfinite(r.R));
    CHECK(r.T < 1e-100);
    CHECK(std::abs(r.R + r.T + r.A - 1.0) < 1e-12);
  }

  TEST_CASE("zero-thickness layers are inert") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> idx(1.0, 3.0);
    for (int i = 0; i < 200; ++i) {
      const auto s = random_stack(gen, i % 2 == 0);
      auto t = s;
      std::uniform_int_distribution<std::size_t> pos(0, s.layers.size());
      t.layers.insert(t.layers.begin() + static_cast<std::ptrdiff_t>(pos(gen)), {0.0, {idx(gen), 0.3}});
      for (auto pol : {Polarization::s, Polarization::p}) {
        const auto a = stack_response(s, {500.0, 35.0, pol});
        const auto b = stack_response(t, {500.0, 35.0, pol});
        CHECK(std::abs(a.r - b.r) <= 1e-12);
        CHECK(std::abs(a.t - b.t) <= 1e-12);
        CHECK(std::abs(a.R - b.R) <= 1e-12);
        CHECK(std::abs(a.T - b.T) <= 1e-12);
        CHECK(std::abs(a.A - b.A) <= 1e-12);
      }
    }
  }

  TEST_CASE("adjacent identical layers merge") {
    std::mt19937_64 gen(14);
    std::uniform_real_distribution<double> thick(0.0, 300.0), idx(1.0, 3.0), ext(0.0, 0.2);
    for (int i = 0; i < 200; ++i) {
      const ComplexIndex n{idx(gen), ext(gen)};
      const double t1 = thick(gen), t2 = thick(gen);
      LayerStack split{{1.0, 0.0}, {{50.0, {1.9, 0.0}}, {t1, n}, {t2, n}}, {1.5, 0.0}};
      LayerStack merged{{1.0, 0.0}, {{50.0, {1.9, 0.0}}, {t1 + t2, n}}, {1.5, 0.0}};
      for (auto pol : {Polarization::s, Polarization::p}) {
        const auto a = stack_response(split, {620.0, 25.0, pol});
        const auto b = stack_response(merged, {620.0, 25.0, pol});
        CHECK(std::abs(a.r - b.r) <= 1e-12);
        CHECK(std::abs(a.R - b.R) <= 1e-12);
        CHECK(std::abs(a.T - b.T) <= 1e-12);
      }
    }
  }

  TEST_CASE("lossless reflectance is reciprocal at normal incidence") {
    std::mt19937_64 gen(15);
    for (int i = 0; i < 300; ++i) {
      const auto s = random_stack(gen, false);
      const auto a = stack_response(s, {700.0, 0.0, Polarization::s});
      const auto b = stack_response(s.reversed(), {700.0, 0.0, Polarization::s});
      CHECK(std::abs(a.R - b.R) < 1e-9);
    }
  }

  TEST_CASE("s and p coincide at normal incidence") {
    std::mt19937_64 gen(16);
    for (int i = 0; i < 300; ++i) {
      const auto s = random_stack(gen, true);
      const auto a = stack_response(s, {480.0, 0.0, Polarization::s});
      const auto b = stack_response(s, {480.0, 0.0, Polarization::p});
      CHECK(std::abs(a.r - b.r) <= 1e-12);
      CHECK(std::abs(a.R - b.R) <= 1e-12);
      CHECK(std::abs(a.T - b.T) <= 1e-12);
    }
  }

  TEST_CASE("ellipsometric angles") {
    SUBCASE("bare substrate at Brewster has psi = 0") {
      LayerStack s{{1.0, 0.0}, {}, {1.5, 0.0}};
      const double brewster = std::atan(1.5) * 180.0 / std::numbers::pi;
      CHECK(std::abs(ellipsometric_angles(s, 600.0, brewster).psi_deg) < 1e-9);
    }
    SUBCASE("bare gold matches the single-interface ratio") {
      const auto au = photonbench::materials::load_dispersion(photonbench::materials::default_data_dir() / "au_nk.csv");
      const auto n = au.index_at(600.0);
      LayerStack s{{1.0, 0.0}, {}, n};
      const auto got = ellipsometric_angles(s, 600.0, 40.0);
      const auto rho = oracle::interface_r(1.0, n.value(), 40.0, true) / oracle::interface_r(1.0, n.value(), 40.0, false);
      CHECK(got.psi_deg == doctest::Approx(std::atan(std::abs(rho)) * 180.0 / std::numbers::pi).epsilon(1e-12));
      CHECK(got.delta_deg == doctest::Approx(std::arg(rho) * 180.0 / std::numbers::pi).epsilon(1e-12));
    }
    SUBCASE("absorbing stacks match the recursion ratio") {
      std::mt19937_64 gen(17);
      for (int i = 0; i < 100; ++i) {
        auto s = random_stack(gen, true);
        s.superstrate = {1.0, 0.0};
        const auto got = ellipsometric_angles(s, 550.0, 55.0);
        const auto films = films_of(s);
        const auto ns = s.substrate.value();
        const auto rho = oracle::rouard_r(1.0, films, ns, 550.0, 55.0, true) / oracle::rouard_r(1.0, films, ns, 550.0, 55.0, false);
        CHECK(got.psi_deg == doctest::Approx(std::atan(std::abs(rho)) * 180.0 / std::numbers::pi).epsilon(1e-9));
        const double want = std::arg(rho) * 180.0 / std::numbers::pi;
        if (std::abs(std::abs(want) - 180.0) > 1e-6) CHECK(got.delta_deg == doctest::Approx(want).epsilon(1e-9));
      }
    }
    SUBCASE("delta stays in (-180, 180]") {
      std::mt19937_64 gen(18);
      for (int i = 0; i < 300; ++i) {
        const auto a = ellipsometric_angles(random_stack(gen, true), 500.0, 65.0);
        CHECK(a.delta_deg > -180.0);
        CHECK(a.delta_deg <= 180.0);
        CHECK(a.psi_deg >= 0.0);
        CHECK(a.psi_deg <= 90.0);
      }
    }
    SUBCASE("degenerate geometry") {
      LayerStack same{{1.3, 0.0}, {}, {1.3, 0.0}};
      CHECK_THROWS_AS(ellipsometric_angles(same, 600.0, 40.0), std::domain_error);
      CHECK_THROWS_AS(ellipsometric_angles({}, 600.0, 0.0), std::domain_error);
    }
  }
}
