// qht: simulate homodyne data, reconstruct density matrices, run studies.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qht/estimator.hpp"
#include "qht/evaluation.hpp"
#include "qht/measurement.hpp"
#include "qht/patterns.hpp"
#include "qht/sample_io.hpp"
#include "qht/states.hpp"

namespace {

using nlohmann::json;

/// Flat JSON object -> CLI11 config items, so {"eta": 0.8, "n-grid": "1e3,1e4"}
/// behaves like the corresponding flags. Command-line values win.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json doc;
    try {
      doc = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }
};

struct Options {
  std::string state = "coherent";
  double q0 = 3.0;
  double beta = 0.25;
  double eta = 0.9;
  double epsilon = 1.0;
  double r0 = 2.0;
  double B0 = 0.5;
  std::optional<int> N;
  std::vector<double> kappa{1.0};
  std::size_t n = 10000;
  std::string n_grid = "1000,10000,100000";
  int reps = 50;
  std::uint64_t seed = 1;
  int grid = 4096;
  std::string in;
  std::string out;
  std::string summary;
  int threads = 0;
  int j = 0;
  int k = 0;
};

qht::StateModel make_state(const Options& o) { return qht::StateModel::from_name(o.state, o.q0, o.beta); }

qht::EstimatorConfig make_estimator(const Options& o) {
  qht::NoiseConfig{o.eta};
  qht::EstimatorConfig cfg;
  cfg.eta = o.eta;
  cfg.epsilon = o.epsilon;
  cfg.r0 = o.r0;
  cfg.B0 = o.B0;
  cfg.N_override = o.N;
  cfg.kappa = o.kappa.front();
  cfg.threads = o.threads;
  cfg.table.grid_size = o.grid;
  cfg.validate();
  return cfg;
}

std::vector<std::size_t> parse_n_grid(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(value >= 2.0) || value != std::floor(value)) {
      throw std::invalid_argument("--n-grid: '" + item + "' is not an integer >= 2");
    }
    out.push_back(static_cast<std::size_t>(value));
  }
  if (out.empty()) throw std::invalid_argument("--n-grid is empty");
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  return f;
}

template <class Writer>
void emit(const std::string& path, Writer&& writer) {
  if (path.empty() || path == "-") {
    writer(std::cout);
    return;
  }
  auto f = open_output(path);
  writer(f);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

// Human-facing summaries go to stdout unless stdout carries the primary output.
std::ostream& report_stream(const Options& o) { return (o.out.empty() || o.out == "-") ? std::cerr : std::cout; }

std::string sidecar_path(const std::string& path) { return path + ".json"; }

void cmd_sample(const Options& o) {
  const qht::NoiseConfig noise(o.eta);
  const auto state = make_state(o);
  if (o.n < 1) throw std::invalid_argument("--n must be >= 1");
  if (o.out.empty()) throw std::invalid_argument("sample: --out is required");
  const auto records = qht::simulate(state, noise, o.n, o.seed, o.threads);
  emit(o.out, [&](std::ostream& s) { qht::write_samples_csv(s, records); });
  emit(sidecar_path(o.out), [&](std::ostream& s) {
    s << json{{"n", o.n}, {"eta", o.eta}, {"seed", o.seed}, {"state", state.to_json()}}.dump(2) << '\n';
  });
  std::cout << "sample: n=" << o.n << " eta=" << o.eta << " seed=" << o.seed << " state=" << state.name()
            << " -> " << o.out << '\n';
}

void check_declared_eta(const std::string& csv_path, double eta) {
  const std::string meta = sidecar_path(csv_path);
  if (!std::filesystem::exists(meta)) return;
  std::ifstream f(meta);
  const json doc = json::parse(f);
  if (doc.contains("eta") && std::abs(doc.at("eta").get<double>() - eta) > 1e-12) {
    throw std::invalid_argument("eta mismatch: samples in '" + csv_path + "' were generated with eta=" +
                                doc.at("eta").dump() + " but --eta is " + std::to_string(eta));
  }
}

void cmd_estimate(const Options& o) {
  const auto cfg = make_estimator(o);
  if (o.in.empty()) throw std::invalid_argument("estimate: --in is required");
  std::ifstream in(o.in);
  if (!in) throw std::runtime_error("cannot read '" + o.in + "'");
  check_declared_eta(o.in, o.eta);
  std::vector<qht::MeasurementRecord> records;
  try {
    records = qht::read_samples_csv(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(o.in + ": " + e.what());
  }
  const auto result = qht::estimate(records, cfg);
  if (result.out_of_range > 0) {
    std::cerr << "warning: " << result.out_of_range << " record(s) outside the pattern grid were scored as 0\n";
  }
  emit(o.out, [&](std::ostream& s) { s << qht::to_json(result, cfg).dump(2) << '\n'; });
  int surviving = 0;
  for (int a = 0; a < result.thresholded.dim(); ++a) {
    for (int b = 0; b < result.thresholded.dim(); ++b) surviving += std::abs(result.thresholded(a, b)) > 0.0;
  }
  report_stream(o) << "estimate: N_used=" << result.N_used << " n=" << result.n_samples
                   << " norm=" << std::setprecision(6) << result.thresholded.norm() << " surviving=" << surviving
                   << '\n';
}

void cmd_study(const Options& o) {
  const auto cfg = make_estimator(o);
  const auto state = make_state(o);
  const auto n_grid = parse_n_grid(o.n_grid);
  const auto studies = qht::threshold_scale_sweep(state, cfg, n_grid, o.kappa, o.reps, o.seed);
  emit(o.out, [&](std::ostream& s) { qht::write_study_csv(s, studies); });
  std::string summary = o.summary;
  if (summary.empty() && !o.out.empty() && o.out != "-") summary = o.out + ".summary.csv";
  if (!summary.empty()) emit(summary, [&](std::ostream& s) { qht::write_summary_csv(s, studies); });
  qht::write_summary_csv(report_stream(o), studies);
}

void cmd_fit(const Options& o) {
  if (o.in.empty()) throw std::invalid_argument("fit: --in is required");
  std::ifstream in(o.in);
  if (!in) throw std::runtime_error("cannot read '" + o.in + "'");
  std::vector<qht::StudyRow> rows;
  try {
    rows = qht::read_study_csv(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(o.in + ": " + e.what());
  }
  const auto [n_values, means] = qht::mean_by_n(rows, o.kappa.front());
  int reps = 0;
  for (const auto& r : rows) {
    if (std::abs(r.kappa - o.kappa.front()) <= 1e-12 && static_cast<double>(r.n) == n_values.front()) ++reps;
  }
  const auto fit = qht::fit_power_law(n_values, means, qht::NoiseConfig(o.eta).gamma());
  emit(o.out, [&](std::ostream& s) { s << qht::to_json(fit, n_values, reps).dump(2) << '\n'; });
  report_stream(o) << "fit: slope=" << fit.slope << " B_tilde=" << fit.B_tilde << '\n';
}

void cmd_patterns(const Options& o) {
  const qht::NoiseConfig noise(o.eta);
  if (o.j < 0 || o.k < 0) throw std::invalid_argument("--j and --k must be >= 0");
  const int N = std::max(o.j + o.k + 1, o.N.value_or(1));
  qht::TableOptions options;
  options.grid_size = o.grid;
  options.threads = o.threads;
  const auto table = qht::build_table(N, noise, options);
  const auto values = table.grid_values(o.j, o.k);
  emit(o.out, [&](std::ostream& s) {
    s << "x,f\n" << std::setprecision(17);
    for (int m = 0; m < table.grid_size(); ++m) s << table.x_at(m) << ',' << values[m] << '\n';
  });
  if (!o.out.empty() && o.out != "-") {
    json meta = table.metadata();
    meta["j"] = o.j;
    meta["k"] = o.k;
    meta["sup_norm"] = table.sup_norm(o.j, o.k);
    emit(sidecar_path(o.out), [&](std::ostream& s) { s << meta.dump(2) << '\n'; });
  }
  report_stream(o) << "patterns: (" << o.j << "," << o.k << ") eta=" << o.eta << " T=" << table.cutoff()
                   << " sup_norm=" << std::setprecision(10) << table.sup_norm(o.j, o.k) << '\n';
}

void cmd_states(const Options& o) {
  const auto state = make_state(o);
  const int dim = o.N.value_or(40);
  const auto rho = qht::density_matrix(state, dim);
  const bool csv = o.out.size() > 4 && o.out.substr(o.out.size() - 4) == ".csv";
  emit(o.out, [&](std::ostream& s) {
    if (csv) {
      qht::write_csv(s, rho);
    } else {
      json doc = qht::to_json(rho);
      doc["state"] = state.to_json();
      s << std::setprecision(17) << doc.dump(2) << '\n';
    }
  });
  report_stream(o) << "states: " << state.name() << " dim=" << dim << " trace=" << rho.trace().real()
                   << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homodyne tomography: adaptive soft-thresholded pattern-function estimator"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file supplying flag values (flags on the command line override it)");
  app.require_subcommand(1);

  Options o;
  app.add_option("--state", o.state, "vacuum | single-photon | coherent | thermal | cat")->capture_default_str();
  app.add_option("--q0", o.q0, "amplitude for coherent / cat states")->capture_default_str();
  app.add_option("--beta", o.beta, "inverse temperature for the thermal state")->capture_default_str();
  app.add_option("--eta", o.eta, "detection efficiency in (1/2, 1]")->capture_default_str();
  app.add_option("--epsilon", o.epsilon, "tolerance level in (0, 1]")->capture_default_str();
  app.add_option("--r0", o.r0, "decay exponent guess for N(n)")->capture_default_str();
  app.add_option("--B0", o.B0, "decay rate guess for N(n)")->capture_default_str();
  app.add_option("--N", o.N, "explicit index bound N (estimate/study), dimension (states)");
  app.add_option("--kappa", o.kappa, "threshold scale factor(s); study accepts a list")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->capture_default_str();
  app.add_option("--n", o.n, "number of records (sample)")->capture_default_str();
  app.add_option("--n-grid", o.n_grid, "comma separated sample sizes (study)")->capture_default_str();
  app.add_option("--reps", o.reps, "replications per sample size")->capture_default_str();
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--grid", o.grid, "pattern grid size Q (power of two)")->capture_default_str();
  app.add_option("--in", o.in, "input file");
  app.add_option("--out", o.out, "output file (stdout when omitted)");
  app.add_option("--summary", o.summary, "study summary CSV (default <out>.summary.csv)");
  app.add_option("--threads", o.threads, "worker threads (0 = hardware)")->capture_default_str();
  app.add_option("--j", o.j, "row index (patterns)")->capture_default_str();
  app.add_option("--k", o.k, "column index (patterns)")->capture_default_str();

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const Options&);
  };
  const Command commands[] = {
      {"sample", "simulate noisy homodyne records to CSV", cmd_sample},
      {"estimate", "reconstruct a density matrix from a sample CSV", cmd_estimate},
      {"study", "Monte Carlo relative-RMSE study (one block per --kappa)", cmd_study},
      {"fit", "power-law fit of a study CSV", cmd_fit},
      {"patterns", "dump one adapted pattern function", cmd_patterns},
      {"states", "write the density matrix of a catalog state", cmd_states},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  }

  try {
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) c.run(o);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}
