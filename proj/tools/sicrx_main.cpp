// sicrx: software GPS L1 C/A receiver with spoofing detection,
// interference-cancellation recovery and pseudorange rectification.
//
// Exit codes: 0 clean or recovered, 2 spoofing detected but unrecovered,
// 3 usage/configuration errors, 4 internal errors.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "sicrx/iq_io.hpp"
#include "sicrx/orchestrator.hpp"

using namespace sicrx;

namespace {

int run_command(const std::string& scenario_path, const std::string& iq_path,
                const std::string& out_dir, const std::string& rectifier, bool defense,
                double epoch, int max_iters, const std::vector<int>& prns) {
  RunConfig config;
  config.defense = defense;
  config.epoch = epoch;
  config.max_recovery_iterations = max_iters;
  config.search_prns = prns;
  if (rectifier == "auto") config.rectifier = RectifierMode::kAuto;
  else if (rectifier == "on") config.rectifier = RectifierMode::kOn;
  else if (rectifier == "off") config.rectifier = RectifierMode::kOff;
  else throw CLI::ValidationError("--rectifier must be auto|on|off");

  const auto report = run_scenario_file(scenario_path, config, out_dir, iq_path);
  std::cout << report.to_text();
  if (!out_dir.empty()) std::cout << "outputs written to " << out_dir << "\n";

  switch (report.final_state) {
    case ReceiverState::kClean:
    case ReceiverState::kRecovered:
      return 0;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"software GPS L1 C/A receiver with spoofing recovery"};
  app.require_subcommand(1);

  // --- gen-scenario ----------------------------------------------------
  auto* gen = app.add_subcommand("gen-scenario", "synthesize an attack scenario config");
  ScenarioOptions opt;
  std::string gen_out = "scenario.cfg";
  std::string gen_iq;
  double lat_deg = 37.7749, lon_deg = -122.4194, height = 50.0;
  std::string takeover = "seamless", nav_mode = "identical";
  bool clean = false;
  gen->add_option("--out", gen_out, "scenario config output path");
  gen->add_option("--save-iq", gen_iq, "also compose and save the IQ stream");
  gen->add_option("--lat", lat_deg, "receiver latitude, deg");
  gen->add_option("--lon", lon_deg, "receiver longitude, deg");
  gen->add_option("--height", height, "receiver height, m");
  gen->add_option("--sats", opt.satellite_count, "legitimate satellite count");
  gen->add_option("--duration", opt.duration, "scenario duration, s");
  gen->add_option("--rate", opt.sample_rate, "sample rate, Sa/s");
  gen->add_option("--cn0", opt.cn0_dbhz, "carrier-to-noise density, dB-Hz");
  gen->add_option("--seed", opt.seed, "scenario seed");
  gen->add_flag("--clean", clean, "no attacker");
  gen->add_option("--power-db", opt.power_advantage_db, "attacker power advantage, dB");
  gen->add_option("--takeover", takeover, "hard|seamless");
  gen->add_option("--nav-mode", nav_mode, "identical|modified");
  gen->add_option("--onset", opt.onset, "attack onset, s");
  gen->add_option("--ramp", opt.ramp_duration, "seamless ramp duration, s");
  gen->add_option("--offset-m", opt.offset_m, "spoofed position offset, m");
  gen->add_option("--offset-dir", opt.offset_dir_enu, "offset direction, ENU")
      ->expected(3);

  // --- run ---------------------------------------------------------------
  auto* runc = app.add_subcommand("run", "run the receiver pipeline on a scenario");
  std::string run_scenario, run_iq, run_out, rectifier = "auto";
  bool no_defense = false;
  double epoch = 1.0;
  int max_iters = 5;
  std::vector<int> prns;
  runc->add_option("scenario", run_scenario, "scenario config path")->required();
  runc->add_option("--iq", run_iq, "pre-recorded IQ file (skips composition)");
  runc->add_option("--out", run_out, "output directory for report/track/recovery files");
  runc->add_option("--rectifier", rectifier, "auto|on|off (default auto)");
  runc->add_flag("--no-defense", no_defense, "plain receiver: detector and recovery off");
  runc->add_option("--epoch", epoch, "epoch length, s");
  runc->add_option("--max-iters", max_iters, "cancellation iteration cap");
  runc->add_option("--search-prns", prns, "restrict the acquisition search set");

  // --- sweep ---------------------------------------------------------------
  auto* sweepc = app.add_subcommand("sweep", "batch scenario sweeps");
  std::string kind = "separation", sweep_out = "sweep.csv";
  SweepParams params;
  sweepc->add_option("--kind", kind, "separation|power");
  sweepc->add_option("--out", sweep_out, "sweep table CSV path");
  sweepc->add_option("--values", params.values, "grid values (m offsets, or dB)");
  sweepc->add_option("--duration", params.duration, "per-cell scenario duration, s");
  sweepc->add_option("--rate", params.sample_rate, "sample rate, Sa/s");
  sweepc->add_option("--cn0", params.cn0_dbhz, "carrier-to-noise density, dB-Hz");
  sweepc->add_option("--seed", params.base_seed, "base seed (per-cell seeds derive from it)");
  sweepc->add_option("--power-db", params.fixed_power_db, "power advantage for separation sweep");
  sweepc->add_option("--offset-m", params.fixed_offset_m, "spoofed offset for power sweep");

  // --- benchmark -------------------------------------------------------------
  auto* bench = app.add_subcommand("benchmark", "time acquisition and cancellation");
  std::string bench_iq;
  int iterations = 5;
  bench->add_option("iq", bench_iq, "IQ file to process")->required();
  bench->add_option("--iterations", iterations, "cancellation iterations to time");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      opt.receiver = {lat_deg * kPi / 180.0, lon_deg * kPi / 180.0, height};
      opt.with_attacker = !clean;
      opt.takeover = takeover == "hard" ? TakeoverMode::kHard : TakeoverMode::kSeamless;
      opt.nav_mode =
          nav_mode == "modified" ? SpoofedNavMode::kModified : SpoofedNavMode::kIdentical;
      const Scenario sc = build_scenario(opt);
      save_scenario(sc, gen_out);
      std::cout << "scenario written to " << gen_out << "\n";
      if (!gen_iq.empty()) {
        save_iq(compose(sc, sc.sample_rate), gen_iq);
        std::cout << "iq written to " << gen_iq << "\n";
      }
      return 0;
    }
    if (runc->parsed()) {
      return run_command(run_scenario, run_iq, run_out, rectifier, !no_defense, epoch,
                         max_iters, prns);
    }
    if (sweepc->parsed()) {
      if (params.values.empty()) {
        if (kind == "power") {
          params.values = {3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0};
        } else {
          for (double m = 500.0; m <= 3500.0; m += 500.0) params.values.push_back(m);
        }
      }
      const auto cells = sweep(
          kind == "power" ? SweepKind::kPowerAdvantage : SweepKind::kPeakSeparation, params);
      write_sweep_csv(cells, sweep_out);
      for (const auto& c : cells) {
        std::printf("value %8.1f  min_sep %7.0f ns  mean_offset %8.2f m  state %s %s\n",
                    c.value, c.min_separation_ns, c.mean_offset_m, to_string(c.final_state),
                    c.error.empty() ? "" : c.error.c_str());
      }
      std::cout << "table written to " << sweep_out << "\n";
      return 0;
    }
    if (bench->parsed()) {
      const auto iq = load_iq(bench_iq);
      const auto report = benchmark(iq, iterations);
      std::cout << report.to_text();
      return 0;
    }
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 3;
}
