#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfcsim/compare.hpp"
#include "sfcsim/plot.hpp"
#include "sfcsim/scenario.hpp"
#include "sfcsim/scenario_io.hpp"
#include "sfcsim/sweep.hpp"
#include "sfcsim/trace_io.hpp"

namespace sfcsim {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInput = 2, kExitNumerical = 3 };

namespace cli_detail {

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

inline Scenario pick_scenario(const std::optional<int>& case_id, const std::string& scenario_file) {
  if (case_id && !scenario_file.empty()) throw InputError("give either --case or --scenario, not both");
  if (case_id) return builtin_case(*case_id);
  if (!scenario_file.empty()) return load_scenario_file(scenario_file);
  throw InputError("one of --case or --scenario is required");
}

inline void write_plots(const std::filesystem::path& dir, const std::string& stem, const TraceSet& tr,
                        const RmsSeries* measured) {
  std::vector<PlotSeries> volt{{"simulated |U|", &tr.time, &tr.u_mag, "#1f77b4"}};
  std::vector<PlotSeries> curr{{"simulated |I|", &tr.time, &tr.i_mag, "#d62728"}};
  if (measured) {
    volt.push_back({"measured |U|", &measured->time, &measured->u, "#555555"});
    curr.push_back({"measured |I|", &measured->time, &measured->i, "#555555"});
  }
  write_svg((dir / (stem + "_voltage.svg")).string(), render_svg(volt, stem + ": voltage at PoC16", "voltage [p.u.]"));
  write_svg((dir / (stem + "_current.svg")).string(), render_svg(curr, stem + ": inverter current", "current [p.u.]"));
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write '" + path.string() + "'");
  os << j.dump(2) << '\n';
}

inline std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(list);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) throw InputError("empty entry in --values list");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw InputError("--values list is empty");
  return out;
}

inline double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
inline double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace cli_detail

// Command-line front end. Subcommands: run, compare, cases, sweep, show.
// Exit codes: 0 ok, 1 usage, 2 input error, 3 numerical failure.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Phasor-domain simulator for a static frequency converter feeding a 16.7 Hz railway catenary",
               "sfcsim"};
  app.require_subcommand(1);

  std::optional<int> case_id;
  std::string scenario_file;
  std::string out_dir = ".";
  bool no_plots = false;

  auto* run_cmd = app.add_subcommand("run", "Simulate a builtin case or scenario file; write trace CSV and plots");
  run_cmd->add_option("--case", case_id, "Builtin case 1..4");
  run_cmd->add_option("--scenario", scenario_file, "Scenario document");
  run_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run_cmd->add_flag("--no-plots", no_plots, "Skip SVG plots");

  std::string trace_file, measured_file, report_file;
  double max_offset = 0.0;
  std::optional<double> fault_start, fault_end;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare a simulated trace with a measured RMS recording");
  cmp_cmd->add_option("--trace", trace_file, "Simulated trace CSV")->required();
  cmp_cmd->add_option("--measured", measured_file, "Measured CSV (time_s,u_pu,i_pu)")->required();
  cmp_cmd->add_option("--max-offset", max_offset, "Search time alignment within +-this many seconds");
  cmp_cmd->add_option("--fault-start", fault_start, "Fault onset in simulation time [s]");
  cmp_cmd->add_option("--fault-end", fault_end, "Fault clearing in simulation time [s]");
  cmp_cmd->add_option("--report", report_file, "Write the JSON report here instead of stdout");

  auto* cases_cmd = app.add_subcommand("cases", "List the builtin cases");

  std::string param_path, values_list;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one simulation per parameter value, in parallel");
  sweep_cmd->add_option("--case", case_id, "Builtin case 1..4 as base");
  sweep_cmd->add_option("--scenario", scenario_file, "Scenario document as base");
  sweep_cmd->add_option("--param", param_path, "Parameter path, e.g. control.i_max")->required();
  sweep_cmd->add_option("--values", values_list, "Comma-separated values with units, e.g. \"1.8 pu,2.0 pu\"")
      ->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores; capped by RAIL_SIM_THREADS)");

  auto* show_cmd = app.add_subcommand("show", "Print the fully resolved scenario document");
  show_cmd->add_option("--case", case_id, "Builtin case 1..4");
  show_cmd->add_option("--scenario", scenario_file, "Scenario document");

  std::vector<const char*> argv{"sfcsim"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'sfcsim --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*run_cmd) {
      const Scenario sc = pick_scenario(case_id, scenario_file);
      const ResolvedScenario rs = resolve(sc);
      const SimResult res = run(rs);
      const auto dir = ensure_dir(out_dir);
      const std::string stem = sc.name;
      write_trace_csv((dir / (stem + "_trace.csv")).string(), res.trace);
      std::optional<RmsSeries> measured;
      if (sc.measured_path) measured = read_rms_csv(*sc.measured_path);
      if (!no_plots) write_plots(dir, stem, res.trace, measured ? &*measured : nullptr);
      out << stem << ": " << res.trace.size() << " samples, " << res.stats.accepted_steps << " steps, "
          << res.stats.mode_switches << " current-limit switches\n";
      out << "  pre-fault |U| = " << std::abs(rs.loadflow.u_poc0) << " p.u., |I| = " << std::abs(rs.loadflow.i_inv0)
          << " p.u.\n";
      out << "  max |I| = " << max_of(res.trace.i_mag) << " p.u., min |U| = " << min_of(res.trace.u_mag)
          << " p.u., max |U| = " << max_of(res.trace.u_mag) << " p.u., max |E| = " << max_of(res.trace.e_mag)
          << " p.u.\n";
      if (measured) {
        std::optional<std::pair<double, double>> window;
        if (!sc.faults.empty()) {
          window = std::make_pair(sc.faults.front().onset_s, sc.faults.front().onset_s + sc.faults.front().duration_s);
        }
        const ComparisonReport rep = compare_series(rms_series(res.trace), *measured, 0.0, window);
        print_table(out, rep);
        write_json(dir / (stem + "_compare.json"), to_json(rep));
      }
      out << "  wrote " << (dir / (stem + "_trace.csv")).string() << '\n';
      return kExitOk;
    }

    if (*cmp_cmd) {
      if (fault_start.has_value() != fault_end.has_value()) {
        throw InputError("--fault-start and --fault-end go together");
      }
      std::optional<std::pair<double, double>> window;
      if (fault_start) window = std::make_pair(*fault_start, *fault_end);
      const RmsSeries sim = read_rms_csv(trace_file);
      const RmsSeries meas = read_rms_csv(measured_file);
      const ComparisonReport rep = compare_series(sim, meas, max_offset, window);
      print_table(out, rep);
      if (report_file.empty()) {
        out << to_json(rep).dump(2) << '\n';
      } else {
        write_json(report_file, to_json(rep));
      }
      return kExitOk;
    }

    if (*cases_cmd) {
      out << std::left << std::setw(7) << "case" << std::setw(12) << "duration" << std::setw(18) << "Z_fault [pu]"
          << std::setw(12) << "position" << std::setw(12) << "train" << "onset\n";
      for (int n = 1; n <= 4; ++n) {
        const Scenario s = builtin_case(n);
        const FaultCase& f = s.faults.front();
        std::ostringstream z, dur, pos, load, onset;
        z << f.impedance.value.real() << (f.impedance.value.imag() < 0 ? " - j" : " + j")
          << std::abs(f.impedance.value.imag());
        dur << f.duration_s * 1e3 << " ms";
        pos << f.position_km << " km";
        load << s.p_load_mw << " MW";
        onset << f.onset_s << " s";
        out << std::left << std::setw(7) << n << std::setw(12) << dur.str() << std::setw(18) << z.str()
            << std::setw(12) << pos.str() << std::setw(12) << load.str() << onset.str() << '\n';
      }
      const Scenario d = default_scenario();
      out << "shared: base " << d.s_base_mva << " MVA / " << d.v_base_kv << " kV, |I|max " << d.gains.i_max
          << " pu, |E|max " << d.gains.e_max << " pu, voltage anti-windup "
          << (d.gains.anti_windup_voltage ? "on" : "off") << ", train " << kLoadBehindFaultKm
          << " km behind the fault\n";
      return kExitOk;
    }

    if (*sweep_cmd) {
      const Scenario base = pick_scenario(case_id, scenario_file);
      const std::vector<std::string> values = split_values(values_list);
      const auto runs = run_sweep(base, param_path, values, threads);
      const auto dir = ensure_dir(out_dir);
      std::ofstream summary(dir / "sweep_summary.csv");
      if (!summary) throw InputError("cannot write sweep summary in '" + out_dir + "'");
      summary << "index,value,status,max_i_pu,min_u_pu,max_u_pu,max_e_pu,limiting_samples\n";
      int status = kExitOk;
      for (std::size_t k = 0; k < runs.size(); ++k) {
        const SweepRun& r = runs[k];
        summary << k << ",\"" << r.value << "\",";
        if (!r.result) {
          summary << "error,,,,,\n";
          err << "run " << k << " (" << param_path << " = " << r.value << "): " << r.error << '\n';
          status = std::max(status, r.input_error ? int{kExitInput} : int{kExitNumerical});
          continue;
        }
        const TraceSet& tr = r.result->trace;
        long lim = 0;
        for (int l : tr.limiting) lim += l;
        summary << "ok," << csv_detail::num(max_of(tr.i_mag)) << ',' << csv_detail::num(min_of(tr.u_mag)) << ','
                << csv_detail::num(max_of(tr.u_mag)) << ',' << csv_detail::num(max_of(tr.e_mag)) << ',' << lim
                << '\n';
        write_trace_csv((dir / ("sweep_" + std::to_string(k) + "_trace.csv")).string(), tr);
      }
      out << "sweep of " << param_path << ": " << runs.size() << " runs, summary in "
          << (dir / "sweep_summary.csv").string() << '\n';
      return status;
    }

    if (*show_cmd) {
      out << serialize(pick_scenario(case_id, scenario_file));
      return kExitOk;
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace sfcsim
