/* Copyright 2026 The htnmr Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line front end: molecule ingestion, protocol simulation, NV readout
// synthesis, sensitivity reports and the engine-vs-oracle validation harness.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "htnmr/analytic_signal.hpp"
#include "htnmr/errors.hpp"
#include "htnmr/molecule.hpp"
#include "htnmr/nv_readout.hpp"
#include "htnmr/rng.hpp"
#include "htnmr/sensitivity.hpp"
#include "htnmr/sequence.hpp"
#include "htnmr/spectro.hpp"
#include "htnmr/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct RunConfig {
  std::string molecule_path;
  htnmr::Molecule molecule;
  htnmr::Environment env;
  htnmr::SequenceConfig sequence;
  htnmr::ReadoutConfig readout;
  int m1 = 0;       // detections per block for the direct protocol
  int m_max = 400;  // grid bound for the measurement-count optimizer
  bool pin_counts = false;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::uint64_t hash = 0;
};

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw htnmr::ValidationError("cannot open file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw htnmr::ValidationError("malformed JSON in '" + path + "': " + std::string(e.what()));
  }
  return doc;
}

htnmr::SequenceConfig sequence_from_json(const json& js) {
  htnmr::SequenceConfig cfg;
  cfg.transfer_time = js.value("t_s", cfg.transfer_time);
  cfg.loading_time = js.value("tau_s", cfg.loading_time);
  cfg.blocks = js.value("n", cfg.blocks);
  cfg.detections_per_block = js.value("m", cfg.detections_per_block);
  cfg.pi_pulses = js.value("pi_pulses", cfg.pi_pulses);
  const std::string mode = js.value("mode", std::string("effective"));
  if (mode == "effective")
    cfg.engine_mode = htnmr::EngineMode::effective;
  else if (mode == "explicit")
    cfg.engine_mode = htnmr::EngineMode::explicit_pulses;
  else
    throw htnmr::ValidationError("sequence.mode must be 'effective' or 'explicit'");
  if (js.contains("t_rf_s")) cfg.rf_rotation_time = js["t_rf_s"].get<double>();
  return cfg;
}

htnmr::ReadoutConfig readout_from_json(const json& js) {
  htnmr::ReadoutConfig r;
  r.omega = kTwoPi * js.value("omega_hz", 20.0e3);
  r.t2_nv = js.value("t2_nv_s", r.t2_nv);
  r.contrast = js.value("contrast", r.contrast);
  r.t_exp = js.value("t_exp_s", r.t_exp);
  r.rho_h = js.value("rho_h_per_m3", r.rho_h);
  r.f3 = js.value("f3", r.f3);
  r.noise_per_shot = js.value("noise_per_shot", r.noise_per_shot);
  r.dead_time = js.value("dead_time_s", r.dead_time);
  return r;
}

RunConfig load_run_config(const std::string& config_path, const std::string& molecule_override,
                          std::optional<std::uint64_t> seed_override,
                          const std::string& out_override) {
  json doc = config_path.empty() ? json::object() : load_json_file(config_path);
  RunConfig rc;
  rc.molecule_path = molecule_override.empty()
                         ? doc.value("molecule", std::string())
                         : molecule_override;
  if (rc.molecule_path.empty())
    throw htnmr::ValidationError("no molecule file given (config key 'molecule' or --molecule)");
  // Molecule paths in a config resolve relative to the config file.
  if (!config_path.empty() && molecule_override.empty() &&
      !fs::path(rc.molecule_path).is_absolute()) {
    const fs::path local = fs::path(config_path).parent_path() / rc.molecule_path;
    if (fs::exists(local)) rc.molecule_path = local.string();
  }
  const json mol_doc = load_json_file(rc.molecule_path);
  rc.molecule = htnmr::load_molecule(mol_doc);
  rc.env = htnmr::load_environment(mol_doc);
  if (doc.contains("sequence")) rc.sequence = sequence_from_json(doc["sequence"]);
  if (doc.contains("readout")) rc.readout = readout_from_json(doc["readout"]);
  if (rc.readout.omega <= 0.0) rc.readout.omega = kTwoPi * 20.0e3;
  if (doc.contains("sensitivity")) {
    const json& js = doc["sensitivity"];
    rc.m_max = js.value("m_max", rc.m_max);
    if (js.contains("m")) {
      rc.sequence.detections_per_block = js["m"].get<int>();
      rc.pin_counts = true;
    }
    if (js.contains("m1")) {
      rc.m1 = js["m1"].get<int>();
      rc.pin_counts = true;
    }
  }
  rc.seed = seed_override.value_or(doc.value("seed", 1));
  if (!out_override.empty())
    rc.out_dir = out_override;
  else if (doc.contains("out_dir"))
    rc.out_dir = doc["out_dir"].get<std::string>();
  else if (const char* root = std::getenv("HTNMR_OUT_ROOT"); root && *root)
    rc.out_dir = root;
  else
    rc.out_dir = "out";

  std::ostringstream canon;
  canon << (config_path.empty() ? "{}" : load_json_file(config_path).dump()) << '|'
        << mol_doc.dump() << '|' << rc.seed;
  rc.hash = fnv1a(canon.str());
  return rc;
}

std::string header_line(const RunConfig& rc) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "# htnmr v%s config=0x%016" PRIx64, htnmr::kVersion, rc.hash);
  return buf;
}

// Direct-interrogation companion of a hydrogen-transfer config: same tau and
// n, detection count m1, rotation time scaled to the target Rabi frequency.
htnmr::SequenceConfig standard_config(const RunConfig& rc) {
  htnmr::SequenceConfig cfg = rc.sequence;
  if (rc.m1 > 0) cfg.detections_per_block = rc.m1;
  const double gh = htnmr::emitter_gamma(rc.molecule, htnmr::Role::hydrogen);
  const double g1 = htnmr::emitter_gamma(rc.molecule, htnmr::Role::target);
  cfg.rf_rotation_time = rc.sequence.rf_rotation_time * gh / g1;
  return cfg;
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw htnmr::ValidationError("cannot write '" + path.string() + "'");
  out << contents;
}

int cmd_simulate(const RunConfig& rc, const std::string& mode, bool no_pi_pulses) {
  htnmr::SequenceConfig cfg = mode == "standard" ? standard_config(rc) : rc.sequence;
  if (no_pi_pulses) cfg.pi_pulses = false;
  const bool standard = mode == "standard";

  htnmr::SignalTrace trace = standard
                                 ? htnmr::run_standard_protocol(rc.molecule, rc.env, cfg)
                                 : htnmr::run_protocol(rc.molecule, rc.env, cfg);
  trace = htnmr::apply_dephasing(trace, rc.molecule, cfg);
  const htnmr::SignalTrace noisy =
      htnmr::sample_readout(trace, rc.molecule, rc.env, cfg, rc.readout,
                            htnmr::derive_seed(rc.seed, standard ? 1 : 0));
  const htnmr::Spectrum spec = htnmr::spectrum(noisy);
  const int n_peaks = cfg.pi_pulses ? 1 : 2;
  const auto fits = htnmr::fit_peaks(spec, n_peaks);

  json peaks = json::array();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto est = htnmr::snr(spec, fits, i);
    peaks.push_back({{"center_hz", fits[i].center},
                     {"height", fits[i].height},
                     {"width_hz", fits[i].width},
                     {"snr", est.value},
                     {"snr_capped", est.capped}});
  }

  // All computation done; only now touch the filesystem.
  fs::create_directories(rc.out_dir);
  {
    std::ostringstream os;
    os << header_line(rc) << "\n# k,t_s,expectation,noisy_readout\n";
    for (std::size_t k = 0; k < trace.values.size(); ++k)
      os << (k + 1) << ',' << fmt(trace.times[k]) << ',' << fmt(trace.values[k]) << ','
         << fmt(noisy.values[k]) << '\n';
    write_text_file(fs::path(rc.out_dir) / "trace.csv", os.str());
  }
  {
    std::ostringstream os;
    os << header_line(rc) << "\n# freq_hz,magnitude\n";
    for (std::size_t i = 0; i < spec.freqs.size(); ++i)
      os << fmt(spec.freqs[i]) << ',' << fmt(spec.magnitudes[i]) << '\n';
    write_text_file(fs::path(rc.out_dir) / "spectrum.csv", os.str());
  }
  {
    json out;
    out["version"] = htnmr::kVersion;
    char hash_buf[20];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016" PRIx64, rc.hash);
    out["config_hash"] = hash_buf;
    out["mode"] = standard ? "standard" : "transfer";
    out["pi_pulses"] = cfg.pi_pulses;
    out["resolution_hz"] = spec.resolution;
    out["peaks"] = peaks;
    write_text_file(fs::path(rc.out_dir) / "peaks.json", out.dump(2) + "\n");
  }
  std::printf("simulate: wrote trace.csv, spectrum.csv, peaks.json to %s\n", rc.out_dir.c_str());
  for (const auto& p : peaks)
    std::printf("  peak at %.2f Hz, width %.2f Hz, SNR %.1f\n", p["center_hz"].get<double>(),
                p["width_hz"].get<double>(), p["snr"].get<double>());
  return kExitOk;
}

bool parse_sweep_spec(const std::string& spec, double& lo, double& hi, int& n) {
  const auto p1 = spec.find(':');
  const auto p2 = spec.find(':', p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos) return false;
  try {
    lo = std::stod(spec.substr(0, p1));
    hi = std::stod(spec.substr(p1 + 1, p2 - p1 - 1));
    n = std::stoi(spec.substr(p2 + 1));
  } catch (...) {
    return false;
  }
  return true;
}

int cmd_sensitivity(const RunConfig& rc, const std::string& sweep_spec, int mc_seeds) {
  const htnmr::SequenceConfig std_cfg = standard_config(rc);
  htnmr::SensitivityParams params = htnmr::make_params(rc.molecule, rc.sequence, std_cfg,
                                                       rc.readout);
  const htnmr::SensitivityReport report = htnmr::make_report(params, rc.m_max, rc.pin_counts);

  json out;
  out["version"] = htnmr::kVersion;
  char hash_buf[20];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016" PRIx64, rc.hash);
  out["config_hash"] = hash_buf;
  out["pi_pulses"] = rc.sequence.pi_pulses;
  out["t2_eff_h_s"] = report.t2_eff_h;
  out["t2_eff_1_s"] = report.t2_eff_1;
  out["eta_ratio"] = report.eta;
  out["snr_ratio_pred"] = report.snr_ratio_pred;
  out["optimal_m"] = report.optimal_m;
  out["optimal_m1"] = report.optimal_m1;
  out["amplitude_factor"] = report.amplitude_factor;
  out["m_used"] = rc.pin_counts ? params.m : report.optimal_m;
  out["m1_used"] = rc.pin_counts ? params.m1 : report.optimal_m1;

  if (mc_seeds > 0) {
    htnmr::SequenceConfig ours = rc.sequence;
    htnmr::SequenceConfig standard = std_cfg;
    if (!rc.pin_counts) {
      ours.detections_per_block = report.optimal_m;
      standard.detections_per_block = report.optimal_m1;
    }
    const auto mc = htnmr::snr_ratio(rc.molecule, rc.env, ours, standard, rc.readout, mc_seeds,
                                     rc.seed);
    out["snr_ratio_measured"] = mc.measured;
    out["mc_seeds"] = mc.seeds;
    out["mean_snr_h"] = mc.mean_snr_h;
    out["mean_snr_1"] = mc.mean_snr_1;
  }

  std::string fig2;
  if (!sweep_spec.empty()) {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    if (!parse_sweep_spec(sweep_spec, lo, hi, n))
      throw htnmr::ValidationError("--sweep-t2nv expects LO:HI:N");
    const auto grid = htnmr::log_grid(lo, hi, n);
    const auto sweep = htnmr::sweep_t2nv(params, grid, rc.m_max);
    std::ostringstream os;
    os << header_line(rc) << "\n# t2_nv_s,eta_ratio\n";
    for (const auto& pt : sweep) os << fmt(pt.t2_nv) << ',' << fmt(pt.eta) << '\n';
    fig2 = os.str();
  }

  fs::create_directories(rc.out_dir);
  write_text_file(fs::path(rc.out_dir) / "report.json", out.dump(2) + "\n");
  if (!fig2.empty()) write_text_file(fs::path(rc.out_dir) / "fig2.csv", fig2);

  std::printf("sensitivity: eta ratio %.4f, predicted SNR ratio %.2f (M=%d, M1=%d)\n",
              report.eta, report.snr_ratio_pred, out["m_used"].get<int>(),
              out["m1_used"].get<int>());
  if (out.contains("snr_ratio_measured"))
    std::printf("  measured SNR ratio %.2f over %d seeds\n",
                out["snr_ratio_measured"].get<double>(), mc_seeds);
  std::printf("  report.json%s written to %s\n", fig2.empty() ? "" : " and fig2.csv",
              rc.out_dir.c_str());
  return kExitOk;
}

struct DeviationReport {
  double engine_vs_oracle = 0.0;
  double effective_vs_explicit = 0.0;
};

DeviationReport compare_engines(const htnmr::Molecule& mol, const htnmr::Environment& env,
                                htnmr::SequenceConfig cfg) {
  cfg.engine_mode = htnmr::EngineMode::effective;
  const htnmr::SignalTrace eff = htnmr::run_protocol(mol, env, cfg);
  const htnmr::SignalTrace orc = htnmr::oracle_trace(mol, env, cfg);
  const htnmr::SignalTrace exp = htnmr::run_explicit_pulse_check(mol, env, cfg);
  double amp = 0.0;
  for (double v : orc.values) amp = std::max(amp, std::abs(v));
  DeviationReport dev;
  for (std::size_t k = 0; k < eff.values.size(); ++k) {
    dev.engine_vs_oracle =
        std::max(dev.engine_vs_oracle, std::abs(eff.values[k] - orc.values[k]) / amp);
    dev.effective_vs_explicit =
        std::max(dev.effective_vs_explicit, std::abs(eff.values[k] - exp.values[k]) / amp);
  }
  return dev;
}

int cmd_validate(const RunConfig& rc, int random_count) {
  constexpr double kThreshold = 1.0e-6;
  bool pass = true;
  for (bool pi : {true, false}) {
    htnmr::SequenceConfig cfg = rc.sequence;
    cfg.pi_pulses = pi;
    const auto dev = compare_engines(rc.molecule, rc.env, cfg);
    std::printf("%-28s pi=%d  engine-vs-oracle %.3e  effective-vs-explicit %.3e\n",
                rc.molecule_path.c_str(), pi, dev.engine_vs_oracle, dev.effective_vs_explicit);
    pass = pass && dev.engine_vs_oracle < kThreshold && dev.effective_vs_explicit < kThreshold;
  }
  for (int i = 0; i < random_count; ++i) {
    const int spins = 2 + static_cast<int>((rc.seed + i) % 3);
    const htnmr::Molecule mol = htnmr::random_molecule(htnmr::derive_seed(rc.seed, 100 + i),
                                                       spins);
    htnmr::SequenceConfig cfg = rc.sequence;
    cfg.transfer_time = std::numbers::pi / mol.coupling(0, 1);
    cfg.blocks = std::min(cfg.blocks, 64);
    cfg.pi_pulses = (i % 2) == 0;
    const auto dev = compare_engines(mol, rc.env, cfg);
    std::printf("random %-2d spins=%d pi=%d       engine-vs-oracle %.3e  effective-vs-explicit %.3e\n",
                i, spins, cfg.pi_pulses ? 1 : 0, dev.engine_vs_oracle, dev.effective_vs_explicit);
    pass = pass && dev.engine_vs_oracle < kThreshold && dev.effective_vs_explicit < kThreshold;
  }
  std::printf("validate: %s (threshold %.1e)\n", pass ? "PASS" : "FAIL", kThreshold);
  return pass ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hydrogen-transfer microscale NMR simulator and sensitivity toolkit"};
  app.set_version_flag("--version", std::string("htnmr ") + htnmr::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string molecule_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run-configuration JSON file");
    sub->add_option("--molecule", molecule_path, "Molecule JSON file (overrides config)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "Root random seed");
  };

  std::string mode = "transfer";
  bool no_pi = false;
  CLI::App* sim = app.add_subcommand("simulate", "Run a protocol and write trace/spectrum/peaks");
  add_common(sim);
  sim->add_option("--mode", mode, "Protocol: transfer (hydrogen emitter) or standard")
      ->check(CLI::IsMember({"transfer", "standard"}));
  sim->add_flag("--no-pi-pulses", no_pi, "Drop the loading-stage pi pulses (chemical-shift mode)");

  std::string sweep_spec;
  int mc_seeds = 0;
  CLI::App* sens = app.add_subcommand("sensitivity", "Write a sensitivity report");
  add_common(sens);
  sens->add_option("--sweep-t2nv", sweep_spec, "NV coherence sweep LO:HI:N (seconds, log grid)");
  sens->add_option("--mc-seeds", mc_seeds, "Add a Monte Carlo measured SNR ratio over N seeds");

  int random_count = 0;
  CLI::App* val = app.add_subcommand("validate", "Engine-vs-oracle and effective-vs-explicit checks");
  add_common(val);
  val->add_option("--random", random_count, "Also check N seeded random molecules");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitValidation;
  }

  try {
    const RunConfig rc = load_run_config(
        config_path, molecule_path,
        seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt, out_dir);
    if (sim->parsed()) return cmd_simulate(rc, mode, no_pi);
    if (sens->parsed()) return cmd_sensitivity(rc, sweep_spec, mc_seeds);
    if (val->parsed()) return cmd_validate(rc, random_count);
  } catch (const htnmr::NumericalError& e) {
    std::cerr << "htnmr: numerical check failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const htnmr::ValidationError& e) {
    std::cerr << "htnmr: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "htnmr: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
