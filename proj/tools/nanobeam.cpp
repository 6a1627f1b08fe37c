#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nanobeam/bands.hpp"
#include "nanobeam/cavity.hpp"
#include "nanobeam/config.hpp"
#include "nanobeam/io.hpp"
#include "nanobeam/validation.hpp"

namespace fs = std::filesystem;
using namespace nanobeam;

namespace {

struct Common
{
  std::string config;
  std::string out;
  int workers = 1;
  double spacing = 0.0;
};

RunConfig load(Common const& c)
{
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (!c.out.empty()) cfg.output = c.out;
  if (c.spacing > 0.0) cfg.grid.spacing = c.spacing;
  cfg.validate();
  fs::create_directories(cfg.output);
  return cfg;
}

std::ofstream open_out(RunConfig const& cfg, std::string const& name)
{
  std::ofstream os(fs::path(cfg.output) / name);
  if (!os) throw std::runtime_error("cannot write " + (fs::path(cfg.output) / name).string());
  return os;
}

std::mutex log_mutex;

void log(std::string const& line)
{
  std::lock_guard lock(log_mutex);
  std::cerr << line << '\n';
}

int cmd_bands(Common const& c)
{
  auto const cfg = load(c);
  log("bands: mirror cell a0 = " + format_double(cfg.device.mirror_period) + " nm, spacing " +
      format_double(cfg.grid.spacing) + " nm");
  auto const bs = bands::mirror_bands(cfg.device, cfg.grid.spacing, cfg.band_options(), cfg.raster_options());
  auto const gap = bands::gap_metrics(bs, cfg.bands.target_wavelength);
  auto csv = open_out(cfg, "bands.csv");
  bands::write_bands_csv(csv, bs);
  auto txt = open_out(cfg, "gap.txt");
  bands::write_gap_report(txt, gap);
  bands::write_gap_report(std::cout, gap);
  if (!gap.has_gap) log("bands: no gap between bands 1 and 2");
  return 0;
}

struct PointResult
{
  double s = 0.0;
  std::optional<cavity::CavityResult> result;
  std::string status = "ok";
  std::vector<spectra::SpectrumPoint> spectrum;
};

PointResult run_point(RunConfig const& cfg, double s)
{
  PointResult p;
  p.s = s;
  DeviceSpec spec = cfg.device;
  spec.cavity_gap = s;
  std::string const tag = "s = " + format_double(s) + " nm";
  try {
    p.result = cavity::resonate(spec, cfg.cavity_options(), [&](int done, int total) {
      if (done % 5000 == 0) log(tag + ": step " + std::to_string(done) + " / " + std::to_string(total));
    });
  } catch (cavity::NoModeError const& e) {
    p.status = "no_mode";
    p.spectrum = e.spectrum;
    log(tag + ": " + e.what());
  } catch (std::exception const& e) {
    p.status = "error";
    log(tag + ": " + e.what());
  }
  return p;
}

void write_result_row(std::ostream& os, PointResult const& p)
{
  os << format_double(p.s) << ',';
  if (p.result) {
    auto const& r = p.result->resonance;
    os << format_double(r.wavelength) << ',' << format_double(r.Q) << ',' << format_double(r.V);
  } else {
    os << "nan,nan,nan";
  }
  os << ',' << p.status << '\n';
}

char const* result_header = "s_nm,lambda_nm,Q,V_norm,status\n";

void write_spectrum(std::ostream& os, std::vector<spectra::SpectrumPoint> const& spectrum)
{
  os << "freq_c_per_nm,lambda_nm,power\n";
  for (auto const& p : spectrum)
    os << format_double(p.frequency) << ',' << format_double(p.wavelength) << ',' << format_double(p.power) << '\n';
}

int cmd_resonate(Common const& c)
{
  auto const cfg = load(c);
  double const s = cfg.device.cavity_gap;
  log("resonate: s = " + format_double(s) + " nm, spacing " + format_double(cfg.grid.spacing) + " nm");
  auto const p = run_point(cfg, s);
  if (!p.result) {
    if (!p.spectrum.empty()) {
      auto os = open_out(cfg, "spectrum.csv");
      write_spectrum(os, p.spectrum);
      log("resonate: probe spectrum written to spectrum.csv");
    }
    return 2;
  }
  auto const& r = *p.result;
  auto csv = open_out(cfg, "resonance.csv");
  csv << result_header;
  write_result_row(csv, p);

  auto modes = open_out(cfg, "modes.csv");
  modes << "lambda_nm,Q,amplitude\n";
  for (auto const& m : r.modes)
    modes << format_double(m.wavelength) << ',' << format_double(m.Q) << ',' << format_double(m.amplitude) << '\n';

  if (cfg.analysis.write_slice && !r.midplane.values.empty()) {
    fdtd::write_raw_block((fs::path(cfg.output) / "ey_midplane").string(), r.midplane.values, r.midplane.dims,
                          r.midplane.spacing, "Ey", r.midplane.step);
  }
  std::cout << "lambda_nm = " << format_double(r.resonance.wavelength) << '\n'
            << "Q = " << format_double(r.resonance.Q) << '\n'
            << "V_norm = " << format_double(r.resonance.V) << '\n';
  return 0;
}

char const* plot_script = R"py(import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "sweep.csv"
dst = sys.argv[2] if len(sys.argv) > 2 else "sweep.png"
rows = [r for r in csv.DictReader(open(src)) if r["status"] == "ok"]
s = [float(r["s_nm"]) for r in rows]
q = [float(r["Q"]) for r in rows]
v = [float(r["V_norm"]) for r in rows]

fig, ax = plt.subplots(figsize=(5, 3.5))
ax.semilogy(s, q, "o-", color="tab:blue")
ax.set_xlabel("s (nm)")
ax.set_ylabel("Q", color="tab:blue")
ax2 = ax.twinx()
ax2.plot(s, v, "s--", color="tab:red")
ax2.set_ylabel("V ((lambda/n)^3)", color="tab:red")
fig.tight_layout()
fig.savefig(dst, dpi=150)
)py";

int cmd_sweep(Common const& c)
{
  auto const cfg = load(c);
  auto s_values = cfg.sweep.s_values;
  std::sort(s_values.begin(), s_values.end());
  if (s_values.size() < 3) throw std::invalid_argument("sweep-s: need at least 3 s values");
  int const workers = std::max(1, std::min<int>(c.workers, int(s_values.size())));
  log("sweep-s: " + std::to_string(s_values.size()) + " points, " + std::to_string(workers) + " workers");

  std::vector<PointResult> results(s_values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < s_values.size();) {
      results[i] = run_point(cfg, s_values[i]);
      if (results[i].result)
        log("s = " + format_double(s_values[i]) + " nm: lambda " + format_double(results[i].result->resonance.wavelength) +
            " nm, Q " + format_double(results[i].result->resonance.Q));
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  auto csv = open_out(cfg, "sweep.csv");
  csv << result_header;
  for (auto const& p : results) write_result_row(csv, p);
  auto py = open_out(cfg, "sweep_plot.py");
  py << plot_script;
  return 0;
}

int cmd_validate(double bloch_fault)
{
  validation::SuiteOptions opt;
  opt.bloch_phase_fault = bloch_fault;
  auto const checks = validation::run_suite(opt);
  std::size_t width = 0;
  for (auto const& c : checks) width = std::max(width, c.name.size());
  int failed = 0;
  for (auto const& c : checks) {
    std::cout << c.name << std::string(width + 2 - c.name.size(), ' ') << (c.passed ? "PASS" : "FAIL") << "  "
              << c.detail << '\n';
    failed += !c.passed;
  }
  std::cout << checks.size() - failed << " / " << checks.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Photonic crystal nanobeam cavity simulator"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--workers", common.workers, "concurrent sweep points")->check(CLI::PositiveNumber);
    sub->add_option("--spacing", common.spacing, "grid spacing override, nm")->check(CLI::PositiveNumber);
  };
  auto* bands_cmd = app.add_subcommand("bands", "mirror unit-cell band structure and gap report");
  auto* res_cmd = app.add_subcommand("resonate", "single cavity resonance, Q and mode volume");
  auto* sweep_cmd = app.add_subcommand("sweep-s", "resonance sweep over the cavity gap s");
  auto* val_cmd = app.add_subcommand("validate", "solver oracle suite");
  for (auto* sub : {bands_cmd, res_cmd, sweep_cmd, val_cmd}) add_common(sub);
  double bloch_fault = 0.0;
  val_cmd->add_option("--bloch-fault", bloch_fault, "phase error injected into the periodic check, rad")
      ->group("");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*bands_cmd) return cmd_bands(common);
    if (*res_cmd) return cmd_resonate(common);
    if (*sweep_cmd) return cmd_sweep(common);
    if (*val_cmd) return cmd_validate(bloch_fault);
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
