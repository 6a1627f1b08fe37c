#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "nanobeam/config.hpp"

using namespace nanobeam;

#ifndef NANOBEAM_DEFAULT_CONFIG
#error "NANOBEAM_DEFAULT_CONFIG must name the shipped configuration file"
#endif

TEST_SUITE("config")
{
  TEST_CASE("shipped file equals the built-in defaults")
  {
    auto const cfg = load_config(NANOBEAM_DEFAULT_CONFIG);
    CHECK(cfg == RunConfig{});
    CHECK(cfg.device.thickness == 150.0);
    CHECK(cfg.device.width == 264.0);
    CHECK(cfg.device.index == 2.4);
    CHECK(cfg.device.mirror_period == 225.0);
    CHECK(cfg.device.taper_end_period == 179.0);
    CHECK(cfg.device.radius_ratio == 0.28);
    CHECK(cfg.device.mirror_pairs == 15);
    CHECK(cfg.device.taper_holes == 5);
    CHECK(cfg.sweep.s_values == std::vector<double>{70, 75, 80, 85, 90, 95});
  }

  TEST_CASE("serialization round trip is idempotent")
  {
    RunConfig cfg;
    cfg.device.cavity_gap = 83.125;
    cfg.grid.padding = {310.5, 290.0, 1.0 / 3.0};
    cfg.grid.symmetry = false;
    cfg.solver.target_reflection = 3.7e-9;
    cfg.sweep.s_values = {71.1, 80.0, 94.9};
    cfg.output = "runs/a b";
    auto const text = serialize_config(cfg);
    auto const back = parse_config_string(text);
    CHECK(back == cfg);
    CHECK(back.grid.padding[2] == 1.0 / 3.0);
    CHECK(serialize_config(back) == text);
  }

  TEST_CASE("partial files keep defaults and accept comments")
  {
    auto const cfg = parse_config_string("# comment\n[device]\ncavity_gap_nm = 90 # trailing\n\n[sweep]\ns_values_nm = 80, 85, 90\n");
    CHECK(cfg.device.cavity_gap == 90.0);
    CHECK(cfg.device.width == 264.0);
    CHECK(cfg.sweep.s_values == std::vector<double>{80, 85, 90});
  }

  TEST_CASE("unknown names are errors with a line number")
  {
    auto throws_with = [](std::string const& text, std::string const& fragment) {
      try {
        parse_config_string(text);
      } catch (std::invalid_argument const& e) {
        return std::string(e.what()).find(fragment) != std::string::npos;
      }
      return false;
    };
    CHECK(throws_with("[device]\nthicknes_nm = 150\n", "line 2"));
    CHECK(throws_with("[device]\nthicknes_nm = 150\n", "unknown key"));
    CHECK(throws_with("[devices]\n", "unknown block"));
    CHECK(throws_with("spacing_nm = 10\n", "outside of a block"));
    CHECK(throws_with("[grid]\nspacing_nm = ten\n", "not a number"));
    CHECK(throws_with("[grid]\npadding_nm = 1 2\n", "three values"));
    CHECK(throws_with("[grid]\nsymmetry = maybe\n", "boolean"));
  }

  TEST_CASE("invalid values are rejected")
  {
    CHECK_THROWS_AS(parse_config_string("[sweep]\ns_values_nm = 80 -5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_string("[solver]\ncourant_factor = 1.0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_string("[device]\nradius_ratio = 0.7\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_string("[analysis]\nband_min_nm = 700\n"), std::invalid_argument);
    CHECK_THROWS_AS(load_config("/nonexistent/nanobeam.conf"), std::invalid_argument);
  }

  TEST_CASE("settings map onto solver options")
  {
    auto cfg = parse_config_string("[grid]\nsymmetry = off\nspacing_nm = 8\n[solver]\nabsorbing_layers = 16\n"
                                   "[analysis]\nband_min_nm = 610\nband_max_nm = 660\n[bands]\nk_points = 6\n");
    auto const c = cfg.cavity_options();
    CHECK_FALSE(c.symmetric);
    CHECK(c.raster.spacing == 8.0);
    CHECK(c.raster.boundary_cells == 16);
    CHECK(c.absorbing.layers == 16);
    CHECK(c.band.min_nm == 610.0);
    CHECK(c.band.max_nm == 660.0);
    CHECK(c.courant_factor == 0.9);
    CHECK(cfg.band_options().k_points == 6);
    CHECK(cfg.raster_options().mirrored == std::array<bool, 3>{false, false, false});
  }
}
