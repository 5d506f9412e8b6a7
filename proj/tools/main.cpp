// bsg: command-line front end of the base-station game simulator.
//
// Every subcommand reads a key = value config file, derives all randomness
// from one seed, and emits a single table as CSV or JSON. Identical inputs
// produce byte-identical output.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bsg/bsg.hpp"

namespace {

using bsg::Table;

nlohmann::json to_json(const Table& table) {
  nlohmann::json doc;
  doc["columns"] = table.columns;
  auto& rows = doc["rows"];
  rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json out_row = nlohmann::json::array();
    for (const auto& cell : row) {
      std::visit([&](const auto& value) { out_row.push_back(value); }, cell);
    }
    rows.push_back(std::move(out_row));
  }
  return doc;
}

void write_table(const Table& table, std::ostream& out, bool json) {
  if (json) {
    out << to_json(table).dump(2) << '\n';
  } else {
    write_csv(table, out);
  }
}

/// `target` is "csv" or "json" for stdout, otherwise a file path whose
/// extension picks the format.
void emit(const Table& table, const std::string& target) {
  if (target == "csv" || target == "json") {
    write_table(table, std::cout, target == "json");
    return;
  }
  std::ofstream file(target, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file: " + target);
  }
  write_table(table, file, target.ends_with(".json"));
}

void dump_channels(const bsg::ChannelMatrix& gains, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  write_csv(bsg::channel_table(gains.gains), file);
}

bsg::UpdateSchedule make_schedule(const std::string& name,
                                  std::uint64_t seed) {
  if (name == "round-robin") return bsg::UpdateSchedule::round_robin();
  if (name == "random") return bsg::UpdateSchedule::random(seed);
  throw std::runtime_error("unknown schedule: " + name);
}

struct CommonArgs {
  std::string config_path;
  std::string out = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;

  void attach(CLI::App* cmd) {
    cmd->add_option("config", config_path, "key = value config file")
        ->required();
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--trials", trials, "override the trial count");
    cmd->add_option("--out", out,
                    "output: 'csv' or 'json' to stdout, or a file path");
  }

  bsg::Config config() const { return bsg::Config::from_file(config_path); }

  std::uint64_t resolve_seed(const bsg::Config& cfg) const {
    return seed ? *seed : cfg.get_uint64("seed", 0);
  }

  int resolve_trials(const bsg::Config& cfg, int fallback) const {
    const int value = trials ? *trials : cfg.get_int("trials", fallback);
    if (value < 1) throw bsg::ConfigError("trials must be >= 1");
    return value;
  }
};

std::vector<int> resolve_k_list(const bsg::Config& cfg,
                                const std::vector<int>& flag_values,
                                const std::vector<int>& fallback) {
  if (!flag_values.empty()) return flag_values;
  if (cfg.has("k_list")) return cfg.get_int_list("k_list");
  return fallback;
}

// --- subcommands -----------------------------------------------------------

int run_select(const CommonArgs& args, const std::string& schedule_name,
               std::uint64_t max_steps, std::optional<std::uint64_t> start_index,
               const std::string& channels_path) {
  const auto cfg = args.config();
  const auto params = bsg::params_from_config(cfg);
  const std::uint64_t seed = args.resolve_seed(cfg);
  const std::uint64_t trial_root = bsg::derive_seed(seed, {bsg::stream::trial, 0});

  const auto gains = bsg::draw_channels(params, {trial_root});
  if (!channels_path.empty()) dump_channels(gains, channels_path);

  const auto start =
      start_index ? bsg::profile_from_index(*start_index, params.num_players,
                                            params.num_stations)
                  : bsg::random_selection_profile(
                        params, bsg::derive_seed(trial_root, {bsg::stream::start}));
  const auto schedule = make_schedule(
      schedule_name, bsg::derive_seed(trial_root, {bsg::stream::schedule}));
  const auto run =
      bsg::run_selection_dynamics(gains, params, start, schedule, max_steps);

  Table table;
  table.columns = {"step", "player", "profile_index", "potential"};
  for (const auto& step : run.log) {
    auto& row = table.add_row();
    row.emplace_back(static_cast<std::uint64_t>(step.step));
    row.emplace_back(static_cast<std::int64_t>(step.player + 1));
    row.emplace_back(static_cast<std::uint64_t>(step.index));
    row.emplace_back(step.potential);
  }
  emit(table, args.out);
  return 0;
}

int run_share(const CommonArgs& args, const std::string& schedule_name,
              const std::string& start_name, double epsilon,
              std::uint64_t max_sweeps, const std::string& channels_path) {
  const auto cfg = args.config();
  const auto params = bsg::params_from_config(cfg);
  const std::uint64_t seed = args.resolve_seed(cfg);
  const std::uint64_t trial_root = bsg::derive_seed(seed, {bsg::stream::trial, 0});

  const auto gains = bsg::draw_channels(params, {trial_root});
  if (!channels_path.empty()) dump_channels(gains, channels_path);

  bsg::PowerProfile start;
  if (start_name == "uniform") {
    start = bsg::uniform_profile(params);
  } else if (start_name == "zero") {
    start = bsg::zero_profile(params);
  } else if (start_name == "random") {
    start = bsg::random_profile(
        params, bsg::derive_seed(trial_root, {bsg::stream::start}));
  } else {
    throw std::runtime_error("unknown start profile: " + start_name);
  }
  const auto schedule = make_schedule(
      schedule_name, bsg::derive_seed(trial_root, {bsg::stream::schedule}));
  const auto run = bsg::run_sharing_dynamics(gains, params, start, schedule,
                                             epsilon, max_sweeps);

  Table table;
  table.columns = {"update", "player", "potential"};
  for (const auto& step : run.log) {
    auto& row = table.add_row();
    row.emplace_back(static_cast<std::uint64_t>(step.update));
    row.emplace_back(static_cast<std::int64_t>(step.player + 1));
    row.emplace_back(step.potential);
  }
  emit(table, args.out);
  return 0;
}

std::string assignment_string(const bsg::SelectionProfile& profile) {
  std::string text;
  for (std::size_t k = 0; k < profile.assignment.size(); ++k) {
    if (k > 0) text += ';';
    text += std::to_string(profile.assignment[k] + 1);
  }
  return text;
}

int run_enumerate(const CommonArgs& args, std::uint64_t cap, bool landscape) {
  const auto cfg = args.config();
  const auto params = bsg::params_from_config(cfg);
  const std::uint64_t seed = args.resolve_seed(cfg);
  const auto gains = bsg::draw_channels(
      params, {bsg::derive_seed(seed, {bsg::stream::trial, 0})});
  const bsg::EnumerationLimits limits{cap};
  const auto report = bsg::enumerate_ne(gains, params, limits);

  Table table;
  if (landscape) {
    const auto potentials = bsg::potential_landscape(gains, params, limits);
    std::set<bsg::ProfileIndex> ne(report.ne_indices.begin(),
                                   report.ne_indices.end());
    table.columns = {"profile_index", "potential", "is_ne"};
    for (std::size_t i = 0; i < potentials.size(); ++i) {
      auto& row = table.add_row();
      row.emplace_back(static_cast<std::uint64_t>(i + 1));
      row.emplace_back(potentials[i]);
      row.emplace_back(static_cast<std::int64_t>(ne.count(i + 1)));
    }
  } else {
    table.columns = {"profile_index", "assignment", "potential", "sum_utility",
                     "unique_potential"};
    for (int k = 1; k <= params.num_players; ++k) {
      table.columns.push_back("u_" + std::to_string(k));
    }
    for (std::size_t i = 0; i < report.ne_indices.size(); ++i) {
      auto& row = table.add_row();
      row.emplace_back(static_cast<std::uint64_t>(report.ne_indices[i]));
      row.emplace_back(assignment_string(bsg::profile_from_index(
          report.ne_indices[i], params.num_players, params.num_stations)));
      row.emplace_back(report.potentials[i]);
      double sum = 0.0;
      for (double u : report.utilities[i]) sum += u;
      row.emplace_back(sum);
      row.emplace_back(static_cast<std::int64_t>(report.is_unique_potential));
      for (double u : report.utilities[i]) row.emplace_back(u);
    }
  }
  emit(table, args.out);
  return 0;
}

int run_poa_pos(const CommonArgs& args, const std::vector<int>& k_flags,
                std::uint64_t cap) {
  const auto cfg = args.config();
  const int num_stations = cfg.get_int("S");
  const double snr_db = cfg.get_double("snr_db");
  const std::uint64_t seed = args.resolve_seed(cfg);
  const int trials = args.resolve_trials(cfg, 500);
  const auto k_list =
      resolve_k_list(cfg, k_flags, {1, 2, 3, 4, 5, 6, 7, 8, 9});

  const auto sweep = bsg::sweep_poa_pos(num_stations, k_list, trials, snr_db,
                                        seed, bsg::EnumerationLimits{cap});

  Table table;
  table.columns = {"K",      "trials", "poa_mean",        "poa_se",
                   "pos_mean", "pos_se", "frac_multiple_ne"};
  for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
    auto& row = table.add_row();
    row.emplace_back(static_cast<std::int64_t>(sweep.axis[i]));
    row.emplace_back(static_cast<std::int64_t>(sweep.trials));
    row.emplace_back(sweep.means.at("poa")[i]);
    row.emplace_back(sweep.std_errors.at("poa")[i]);
    row.emplace_back(sweep.means.at("pos")[i]);
    row.emplace_back(sweep.std_errors.at("pos")[i]);
    row.emplace_back(sweep.means.at("frac_multiple_ne")[i]);
  }
  emit(table, args.out);
  return 0;
}

int run_nonatomic(const CommonArgs& args) {
  const auto cfg = args.config();
  const auto params = bsg::params_from_config(cfg);
  const std::uint64_t seed = args.resolve_seed(cfg);
  const int trials = args.resolve_trials(cfg, 500);

  const auto eq = bsg::nonatomic_equilibrium_fractions(params);
  const auto empirical = bsg::empirical_fractions(params, {seed}, trials);

  Table table;
  table.columns = {"bs", "x_theory", "x_empirical", "x_se", "trials"};
  for (int s = 0; s < params.num_stations; ++s) {
    const auto su = static_cast<std::size_t>(s);
    auto& row = table.add_row();
    row.emplace_back(static_cast<std::int64_t>(s + 1));
    row.emplace_back(eq.fractions.x[su]);
    row.emplace_back(empirical.mean.x[su]);
    row.emplace_back(empirical.std_error[su]);
    row.emplace_back(static_cast<std::int64_t>(empirical.trials));
  }
  emit(table, args.out);
  return 0;
}

int run_braess(const CommonArgs& args, const std::vector<int>& k_flags) {
  const auto cfg = args.config();
  const int num_stations = cfg.get_int("S");
  const double snr_db = cfg.get_double("snr_db");
  const std::uint64_t seed = args.resolve_seed(cfg);
  const int trials = args.resolve_trials(cfg, 500);
  const auto k_list = resolve_k_list(
      cfg, k_flags, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 40});

  const auto sweep =
      bsg::braess_compare(num_stations, k_list, trials, snr_db, seed);

  Table table;
  table.columns = {"K",           "trials",       "selection_mean",
                   "selection_se", "sharing_mean", "sharing_se"};
  for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
    auto& row = table.add_row();
    row.emplace_back(static_cast<std::int64_t>(sweep.axis[i]));
    row.emplace_back(static_cast<std::int64_t>(sweep.trials));
    row.emplace_back(sweep.means.at("selection")[i]);
    row.emplace_back(sweep.std_errors.at("selection")[i]);
    row.emplace_back(sweep.means.at("sharing")[i]);
    row.emplace_back(sweep.std_errors.at("sharing")[i]);
  }
  emit(table, args.out);
  return 0;
}

nlohmann::json error_record(const std::string& type,
                            const std::string& message) {
  return nlohmann::json{{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"base-station selection and sharing games"};
  app.require_subcommand(1);

  CommonArgs select_args;
  std::string select_schedule = "random";
  std::uint64_t select_max_steps = 1'000'000;
  std::optional<std::uint64_t> select_start;
  std::string select_channels;
  auto* select = app.add_subcommand(
      "select-run", "selection dynamics; one row per update");
  select_args.attach(select);
  select->add_option("--schedule", select_schedule, "random | round-robin")
      ->check(CLI::IsMember({"random", "round-robin"}));
  select->add_option("--max-steps", select_max_steps, "update budget");
  select->add_option("--start-index", select_start,
                     "starting profile index (default: random)");
  select->add_option("--dump-channels", select_channels,
                     "also write the drawn gains as CSV");

  CommonArgs share_args;
  std::string share_schedule = "round-robin";
  std::string share_start = "uniform";
  double share_epsilon = 1e-9;
  std::uint64_t share_max_sweeps = 10'000;
  std::string share_channels;
  auto* share =
      app.add_subcommand("share-run", "sharing dynamics; one row per update");
  share_args.attach(share);
  share->add_option("--schedule", share_schedule, "round-robin | random")
      ->check(CLI::IsMember({"random", "round-robin"}));
  share->add_option("--start", share_start, "uniform | zero | random")
      ->check(CLI::IsMember({"uniform", "zero", "random"}));
  share->add_option("--eps", share_epsilon, "convergence tolerance");
  share->add_option("--max-sweeps", share_max_sweeps, "sweep budget");
  share->add_option("--dump-channels", share_channels,
                    "also write the drawn gains as CSV");

  CommonArgs enum_args;
  std::uint64_t enum_cap = 10'000'000;
  bool enum_landscape = false;
  auto* enumerate = app.add_subcommand(
      "enumerate", "equilibria of one realization; one row per equilibrium");
  enum_args.attach(enumerate);
  enumerate->add_option("--cap", enum_cap, "profile enumeration cap");
  enumerate->add_flag("--landscape", enum_landscape,
                      "emit the full potential landscape instead");

  CommonArgs poa_args;
  std::vector<int> poa_k;
  std::uint64_t poa_cap = 10'000'000;
  auto* poa = app.add_subcommand(
      "poa-pos", "efficiency sweep over K; one row per player count");
  poa_args.attach(poa);
  poa->add_option("--k-list", poa_k, "player counts to sweep");
  poa->add_option("--cap", poa_cap, "profile enumeration cap");

  CommonArgs nonatomic_args;
  auto* nonatomic = app.add_subcommand(
      "nonatomic", "equilibrium fractions vs Monte-Carlo; one row per station");
  nonatomic_args.attach(nonatomic);

  CommonArgs braess_args;
  std::vector<int> braess_k;
  auto* braess = app.add_subcommand(
      "braess", "selection vs sharing welfare; one row per player count");
  braess_args.attach(braess);
  braess->add_option("--k-list", braess_k, "player counts to sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed()) {
      return run_select(select_args, select_schedule, select_max_steps,
                        select_start, select_channels);
    }
    if (share->parsed()) {
      return run_share(share_args, share_schedule, share_start, share_epsilon,
                       share_max_sweeps, share_channels);
    }
    if (enumerate->parsed()) {
      return run_enumerate(enum_args, enum_cap, enum_landscape);
    }
    if (poa->parsed()) {
      return run_poa_pos(poa_args, poa_k, poa_cap);
    }
    if (nonatomic->parsed()) {
      return run_nonatomic(nonatomic_args);
    }
    if (braess->parsed()) {
      return run_braess(braess_args, braess_k);
    }
  } catch (const bsg::EnumerationCapError& e) {
    std::cerr << error_record("enumeration_cap_exceeded", e.what()).dump()
              << '\n';
    return 1;
  } catch (const bsg::ConfigError& e) {
    std::cerr << error_record("config_error", e.what()).dump() << '\n';
    return 1;
  } catch (const bsg::ConvergenceError& e) {
    std::cerr << error_record("convergence_failure", e.what()).dump() << '\n';
    return 1;
  } catch (const bsg::SharingConvergenceError& e) {
    std::cerr << error_record("convergence_failure", e.what()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_record("error", e.what()).dump() << '\n';
    return 1;
  }
  return 0;
}
