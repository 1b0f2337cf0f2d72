#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "bellsim/density.hpp"
#include "bellsim/descriptor.hpp"
#include "bellsim/error.hpp"
#include "bellsim/format.hpp"
#include "bellsim/inequality.hpp"
#include "bellsim/rng.hpp"
#include "bellsim/stations.hpp"
#include "bellsim/symmetry.hpp"
#include "bellsim/zoo.hpp"

namespace bellsim::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kSourceSeedStream = 1;
constexpr std::uint64_t kSettingSeedStream = 2;
constexpr std::uint64_t kTransformSeedStream = 3;

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out = "bellsim-out";
  bool deterministic = false;
  double tol = kBoundTolerance;
};

struct ScheduleOptions {
  std::string schedule_file;
  std::optional<std::uint64_t> trials;
  std::string policy;
  std::string angles_a;
  std::string angles_b;
};

/// Expectation values for reports: 12 significant digits, with exact-path
/// rounding noise below 1e-12 shown as 0.
double report_value(double v) { return std::abs(v) < 1e-12 ? 0.0 : round12(v); }

json reals(const std::vector<double>& values) {
  json arr = json::array();
  for (double v : values) arr.push_back(report_value(v));
  return arr;
}

std::string timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                  std::chrono::system_clock::now())));
}

class Context {
 public:
  Context(const GlobalOptions& global, const std::vector<std::string>& args, std::ostream& out)
      : global_(global), args_(args), out_(out) {}

  const GlobalOptions& global() const { return global_; }
  std::ostream& out() const { return out_; }

  void set_config(json config) { config_ = std::move(config); }

  fs::path path(const std::string& file) const {
    fs::path dir(global_.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, fmt::format("cannot create output directory {}", dir.string()));
    return dir / file;
  }

  json provenance() const {
    json p;
    if (!global_.deterministic) p["generated_at"] = timestamp();
    p["argv"] = args_;
    p["config"] = config_;
    return p;
  }

  /// Timestamp (unless deterministic) and config echo, one entry per line.
  std::vector<std::string> comment_lines() const {
    std::vector<std::string> lines;
    if (!global_.deterministic) lines.push_back(fmt::format("generated_at {}", timestamp()));
    json echo;
    echo["argv"] = args_;
    echo["config"] = config_;
    lines.push_back(fmt::format("config {}", echo.dump()));
    return lines;
  }

  std::string comment_header(std::string_view prefix) const {
    std::string s;
    for (const auto& line : comment_lines()) s += fmt::format("{} {}\n", prefix, line);
    return s;
  }

  void write_json(const std::string& file, json body) const {
    json doc = provenance();
    for (auto& [k, v] : body.items()) doc[k] = v;
    write_text(file, doc.dump(2) + "\n");
  }

  void write_text(const std::string& file, const std::string& text) const {
    const auto p = path(file);
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_error, fmt::format("cannot write {}", p.string()));
    f << text;
    if (!f) throw Error(ErrorCode::io_error, fmt::format("failed writing {}", p.string()));
    out_ << "wrote " << p.string() << '\n';
  }

 private:
  const GlobalOptions& global_;
  const std::vector<std::string>& args_;
  std::ostream& out_;
  json config_;
};

std::vector<Setting> settings_from(std::string_view text, Station station, const std::vector<double>& fallback) {
  const auto angles = text.empty() ? fallback : parse_real_list(text);
  if (angles.empty()) throw Error(ErrorCode::config_error, "angle list is empty");
  std::vector<Setting> out;
  for (double a : angles) out.emplace_back(station, a);
  return out;
}

std::vector<double> angles_of(const std::vector<Setting>& settings) {
  std::vector<double> out;
  for (const auto& s : settings) out.push_back(s.angle());
  return out;
}

ChshSettings parse_chsh_angles(std::string_view text) {
  const auto v = parse_real_list(text);
  if (v.size() != 4) throw Error(ErrorCode::config_error, "CHSH needs four angles: a,a',b,b'");
  return {Setting(Station::S1, v[0]), Setting(Station::S1, v[1]), Setting(Station::S2, v[2]),
          Setting(Station::S2, v[3])};
}

json chsh_angles_json(const ChshSettings& s) {
  return {{"a", report_value(s.a.angle())},
          {"aprime", report_value(s.a_prime.angle())},
          {"b", report_value(s.b.angle())},
          {"bprime", report_value(s.b_prime.angle())}};
}

json chsh_json(const ChshResult& r) {
  json j = chsh_angles_json(r.settings);
  j["correlations"] = {{"ab", report_value(r.correlations[0])},
                       {"abprime", report_value(r.correlations[1])},
                       {"aprimeb", report_value(r.correlations[2])},
                       {"aprimebprime", report_value(r.correlations[3])}};
  j["S"] = report_value(r.s_value);
  j["local_bound"] = r.local_bound;
  j["tol"] = r.tol;
  j["within_bound"] = r.within_local_bound;
  return j;
}

void check_tol(double tol) {
  if (!(tol > 0) || !std::isfinite(tol)) {
    throw Error(ErrorCode::invalid_tolerance, fmt::format("--tol must be positive, got {}", tol));
  }
}

Schedule build_schedule(const std::string& model_arg, const ScheduleOptions& opts, const GlobalOptions& global) {
  Schedule schedule;
  schedule.seed_source = rng::derive_seed(global.seed, kSourceSeedStream);
  schedule.seed_settings = rng::derive_seed(global.seed, kSettingSeedStream);
  std::error_code ec;
  if (fs::is_regular_file(model_arg, ec)) schedule = load_schedule(model_arg, schedule);
  if (!opts.schedule_file.empty()) schedule = load_schedule(opts.schedule_file, schedule);
  if (opts.trials) schedule.trials = *opts.trials;
  if (!opts.policy.empty()) schedule.policy = parse_setting_policy(opts.policy);
  if (!opts.angles_a.empty()) schedule.angles_a = parse_real_list(opts.angles_a);
  if (!opts.angles_b.empty()) schedule.angles_b = parse_real_list(opts.angles_b);
  validate_schedule(schedule);
  return schedule;
}

json schedule_json(const Schedule& s) {
  json j;
  j["trials"] = s.trials;
  j["policy"] = std::string(to_string(s.policy));
  j["angles_a"] = reals(s.angles_a);
  j["angles_b"] = reals(s.angles_b);
  j["seed_source"] = s.seed_source;
  j["seed_settings"] = s.seed_settings;
  if (s.seed_s1) j["seed_s1"] = *s.seed_s1;
  if (s.seed_s2) j["seed_s2"] = *s.seed_s2;
  return j;
}

json lambda_table(const LocalModel& model, const std::vector<double>& cond) {
  json j;
  for (std::size_t l = 0; l < cond.size(); ++l) j[model.source().label(l)] = report_value(cond[l]);
  return j;
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string model;
  ScheduleOptions schedule;
  std::string chsh;
};

void cmd_simulate(Context& ctx, const SimulateOptions& opts) {
  const LocalModel model = resolve_model(opts.model);
  ScheduleOptions sched_opts = opts.schedule;
  if (!sched_opts.trials && sched_opts.schedule_file.empty() && !fs::is_regular_file(opts.model)) {
    sched_opts.trials = 10000;
  }
  const Schedule schedule = build_schedule(opts.model, sched_opts, ctx.global());
  std::optional<ChshSettings> chsh_settings;
  if (!opts.chsh.empty()) chsh_settings = parse_chsh_angles(opts.chsh);

  json config;
  config["command"] = "simulate";
  config["model"] = opts.model;
  config["seed"] = ctx.global().seed;
  config["schedule"] = schedule_json(schedule);
  if (chsh_settings) config["chsh"] = chsh_angles_json(*chsh_settings);
  ctx.set_config(config);

  const auto records = run_experiment(model, schedule);
  const LocalModel seeded =
      schedule.seed_s1 || schedule.seed_s2
          ? model.with_station_seeds(schedule.seed_s1.value_or(model.gen(Station::S1).seed),
                                     schedule.seed_s2.value_or(model.gen(Station::S2).seed))
          : model;

  std::ostringstream csv;
  csv << ctx.comment_header("#");
  write_trials_csv(csv, records, model.source());
  ctx.write_text("trials.csv", csv.str());

  const auto stats = summarize_trials(records, model.source().size());
  json pairs = json::array();
  for (const auto& [key, s] : stats) {
    const Setting a(Station::S1, key.first), b(Station::S2, key.second);
    const auto exact = correlate(seeded, a, b);
    json p;
    p["a"] = report_value(key.first);
    p["b"] = report_value(key.second);
    p["count"] = s.count;
    p["e_ab"] = report_value(s.e_ab);
    p["std_error"] = report_value(s.std_error);
    p["exact_e_ab"] = report_value(exact.e_ab);
    p["marginal_a"] = report_value(s.marginal_a);
    p["marginal_b"] = report_value(s.marginal_b);
    p["cond_a"] = lambda_table(model, s.cond_a);
    p["cond_b"] = lambda_table(model, s.cond_b);
    p["reference_e_ab"] = report_value(reference_correlation(a, b));
    pairs.push_back(p);
  }
  json body;
  body["model"] = model.name();
  body["trials"] = records.size();
  body["pairs"] = pairs;
  if (chsh_settings) {
    const auto& c = *chsh_settings;
    const std::array<std::pair<double, double>, 4> keys = {{{c.a.angle(), c.b.angle()},
                                                            {c.a.angle(), c.b_prime.angle()},
                                                            {c.a_prime.angle(), c.b.angle()},
                                                            {c.a_prime.angle(), c.b_prime.angle()}}};
    std::array<double, 4> e{};
    bool complete = true;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto it = stats.find(keys[i]);
      if (it == stats.end()) {
        complete = false;
        break;
      }
      e[i] = it->second.e_ab;
    }
    json chsh_body;
    chsh_body["empirical"] = complete ? chsh_json(chsh_from_correlations(c, e, ctx.global().tol)) : json(nullptr);
    chsh_body["exact"] = chsh_json(chsh(seeded, c, Method::exact, 0, 0, ctx.global().tol));
    body["chsh"] = chsh_body;
  }
  ctx.write_json("summary.json", body);
  ctx.out() << fmt::format("simulated {} trials of {}\n", records.size(), model.name());
}

// --- check -----------------------------------------------------------------

struct CheckOptions {
  std::string model;
  std::string mode = "both";
  std::string angles_a;
  std::string angles_b;
  bool tables = false;
};

void cmd_check(Context& ctx, const CheckOptions& opts) {
  check_tol(ctx.global().tol);
  const LocalModel model = resolve_model(opts.model);
  std::vector<FactorMode> modes;
  if (opts.mode == "both") modes = {FactorMode::given_lambda, FactorMode::given_lambda_and_m};
  else modes = {parse_factor_mode(opts.mode)};
  const auto sa = settings_from(opts.angles_a, Station::S1, model.angles());
  const auto sb = settings_from(opts.angles_b, Station::S2, model.angles());

  json config;
  config["command"] = "check";
  config["model"] = opts.model;
  config["mode"] = opts.mode;
  config["tol"] = ctx.global().tol;
  config["angles_a"] = reals(angles_of(sa));
  config["angles_b"] = reals(angles_of(sb));
  ctx.set_config(config);

  json factorization = json::array();
  std::map<FactorMode, bool> overall;
  std::map<FactorMode, double> worst;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    for (std::size_t j = 0; j < sb.size(); ++j) {
      const auto table = tabulate_joint(model, sa[i], sb[j]);
      if (opts.tables) {
        std::ostringstream csv;
        csv << ctx.comment_header("#");
        write_joint_csv(csv, table);
        ctx.write_text(fmt::format("joint_a{}_b{}.csv", i + 1, j + 1), csv.str());
      }
      json entry;
      entry["a"] = report_value(sa[i].angle());
      entry["b"] = report_value(sb[j].angle());
      for (FactorMode mode : modes) {
        const auto r = check_factorization(table, mode, ctx.global().tol);
        json rj;
        rj["mode"] = std::string(to_string(mode));
        rj["tol"] = r.tol;
        rj["max_deviation"] = report_value(r.max_deviation);
        rj["pass"] = r.pass;
        rj["max_total_variation"] = report_value(r.max_total_variation);
        entry[std::string(to_string(mode))] = rj;
        overall.try_emplace(mode, true);
        overall[mode] = overall[mode] && r.pass;
        worst[mode] = std::max(worst[mode], r.max_deviation);
      }
      factorization.push_back(entry);
    }
  }

  json conditional;
  json cond_a = json::array(), cond_b = json::array();
  for (const auto& s : sa) cond_a.push_back({{"a", report_value(s.angle())},
                                             {"marginal", report_value(exact_marginal(model, s))},
                                             {"cond", lambda_table(model, conditional_expectations(model, s))}});
  for (const auto& s : sb) cond_b.push_back({{"b", report_value(s.angle())},
                                             {"marginal", report_value(exact_marginal(model, s))},
                                             {"cond", lambda_table(model, conditional_expectations(model, s))}});
  conditional["A"] = cond_a;
  conditional["B"] = cond_b;

  json summary;
  for (FactorMode mode : modes) {
    summary[std::string(to_string(mode))] = {{"pass", overall[mode]}, {"max_deviation", report_value(worst[mode])}};
    ctx.out() << fmt::format("{:<20} {} max_deviation={}\n", to_string(mode), overall[mode] ? "PASS" : "FAIL",
                             format_real(worst[mode]));
  }
  json body;
  body["model"] = model.name();
  body["summary"] = summary;
  body["factorization"] = factorization;
  body["conditional_expectations"] = conditional;
  ctx.write_json("check.json", body);
}

// --- transform -------------------------------------------------------------

struct TransformOptions {
  std::string model;
  std::vector<std::string> ops;
  std::string scope = "both";
  bool round = false;
  std::string name;
};

void cmd_transform(Context& ctx, const TransformOptions& opts) {
  if (opts.ops.empty()) throw Error(ErrorCode::config_error, "transform needs at least one --op");
  LocalModel model = resolve_model(opts.model);
  const LocalModel original = model;
  const SignScope scope = parse_sign_scope(opts.scope);

  json config;
  config["command"] = "transform";
  config["model"] = opts.model;
  config["ops"] = opts.ops;
  config["scope"] = opts.scope;
  config["round"] = opts.round;
  config["seed"] = ctx.global().seed;
  ctx.set_config(config);

  json steps = json::array();
  for (std::size_t i = 0; i < opts.ops.size(); ++i) {
    const auto parts = split_list(opts.ops[i], ':');
    if (parts.empty()) throw Error(ErrorCode::config_error, "empty --op");
    const auto& op = parts[0];
    const std::uint64_t seed = rng::derive_seed(rng::derive_seed(ctx.global().seed, kTransformSeedStream), i);
    json step;
    step["op"] = op;
    if (op == "rademacher" || op == "time_symmetrize") {
      const double mean = parts.size() > 1 ? parse_real(parts[1]) : 0.0;
      const auto sign = make_sign_function(model.grid(), mean, seed);
      model = time_symmetrize(model, sign, scope, seed);
      step["seed"] = seed;
      step["mean"] = report_value(sign.mean());
    } else if (op == "layer_double") {
      model = layer_double(model);
    } else if (op == "target") {
      if (parts.size() < 3) throw Error(ErrorCode::config_error, "target needs target:<station>:<alpha>[:<angle>]");
      const Station station = parse_station(parts[1]);
      const double alpha = parse_real(parts[2]);
      const double angle = parts.size() > 3 ? parse_real(parts[3]) : model.angles().front();
      TargetOptions topts;
      topts.round = opts.round;
      topts.scope = scope;
      auto [next, target] = target_marginal(model, Setting(station, angle), alpha, seed, topts);
      model = std::move(next);
      step["seed"] = seed;
      step["alpha"] = report_value(alpha);
      step["base"] = report_value(target.base);
      step["achieved"] = report_value(target.achieved);
      step["mean"] = report_value(target.sign_mean);
    } else if (op == "lambda_sign") {
      if (parts.size() < 2) throw Error(ErrorCode::config_error, "lambda_sign needs lambda_sign:<s1>/<s2>/...");
      std::vector<int> signs;
      for (const auto& t : split_list(parts[1], '/')) signs.push_back(static_cast<int>(parse_real(t)));
      model = lambda_symmetrize(model, std::move(signs), scope);
    } else {
      throw Error(ErrorCode::config_error, fmt::format("unknown transform op '{}'", op));
    }
    steps.push_back(step);
  }
  if (!opts.name.empty()) model = model.renamed(opts.name);

  std::string comment;
  for (const auto& line : ctx.comment_lines()) comment += line + "\n";
  std::ostringstream text;
  write_model(text, model, comment);
  {
    std::istringstream back(text.str());
    (void)parse_model(back);
  }
  ctx.write_text("model.ini", text.str());

  const auto settings = optimal_chsh_settings();
  const auto before = chsh(original, settings, Method::exact, 0, 0, ctx.global().tol);
  const auto after = chsh(model, settings, Method::exact, 0, 0, ctx.global().tol);
  json body;
  body["model"] = model.name();
  body["steps"] = steps;
  body["chsh_before"] = chsh_json(before);
  body["chsh_after"] = chsh_json(after);
  json cond = json::array();
  for (double angle : model.angles()) {
    cond.push_back({{"angle", report_value(angle)},
                    {"cond_a", lambda_table(model, conditional_expectations(model, Setting(Station::S1, angle)))},
                    {"cond_b", lambda_table(model, conditional_expectations(model, Setting(Station::S2, angle)))}});
  }
  body["conditional_expectations"] = cond;
  ctx.write_json("transform.json", body);
  ctx.out() << fmt::format("S before={} after={}\n", format_real(before.s_value), format_real(after.s_value));
}

// --- chsh ------------------------------------------------------------------

struct ChshOptions {
  std::string model;
  std::string angles;
  std::string method = "exact";
  std::uint64_t trials = 100000;
};

void cmd_chsh(Context& ctx, const ChshOptions& opts) {
  check_tol(ctx.global().tol);
  const LocalModel model = resolve_model(opts.model);
  const ChshSettings settings = opts.angles.empty() ? optimal_chsh_settings() : parse_chsh_angles(opts.angles);
  const Method method = parse_method(opts.method);
  const std::uint64_t trials = method == Method::exact ? 0 : opts.trials;
  if (method == Method::monte_carlo && trials == 0) throw Error(ErrorCode::zero_trials, "--trials must be positive");

  json config;
  config["command"] = "chsh";
  config["model"] = opts.model;
  config["angles"] = chsh_angles_json(settings);
  config["method"] = std::string(to_string(method));
  config["trials"] = trials;
  config["seed"] = ctx.global().seed;
  config["tol"] = ctx.global().tol;
  ctx.set_config(config);

  const auto result = chsh(model, settings, method, trials, ctx.global().seed, ctx.global().tol);
  const auto reference = reference_chsh(settings, ctx.global().tol);
  const auto bound = deterministic_bound(2);

  json body;
  body["model"] = model.name();
  body["result"] = chsh_json(result);
  if (method == Method::monte_carlo) body["std_errors"] = reals({result.std_errors.begin(), result.std_errors.end()});
  body["reference"] = chsh_json(reference);
  body["deterministic_bound"] = {{"bound", bound.bound}, {"strategies", bound.strategies_visited}};
  body["gap_to_reference"] = report_value(std::abs(reference.s_value) - std::abs(result.s_value));
  ctx.write_json("chsh.json", body);

  std::ostringstream csv;
  csv << ctx.comment_header("#");
  csv << "model,a,aprime,b,bprime,method,trials,seed,S,within_bound\n";
  csv << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", model.name(), format_real(settings.a.angle()),
                     format_real(settings.a_prime.angle()), format_real(settings.b.angle()),
                     format_real(settings.b_prime.angle()), to_string(method), trials, ctx.global().seed,
                     format_real(report_value(result.s_value)), result.within_local_bound ? "true" : "false");
  ctx.write_text("chsh.csv", csv.str());
  ctx.out() << fmt::format("S={} within_bound={} reference={} gap={}\n", format_real(report_value(result.s_value)),
                           result.within_local_bound, format_real(reference.s_value),
                           format_real(report_value(std::abs(reference.s_value) - std::abs(result.s_value))));
}

// --- audit -----------------------------------------------------------------

struct AuditOptions {
  std::string model;
  ScheduleOptions schedule;
  std::size_t perturbations = 3;
};

void cmd_audit(Context& ctx, const AuditOptions& opts) {
  const LocalModel model = resolve_model(opts.model);
  ScheduleOptions sched_opts = opts.schedule;
  if (!sched_opts.trials && sched_opts.schedule_file.empty() && !fs::is_regular_file(opts.model)) {
    sched_opts.trials = 1000;
  }
  const Schedule schedule = build_schedule(opts.model, sched_opts, ctx.global());

  json config;
  config["command"] = "audit";
  config["model"] = opts.model;
  config["seed"] = ctx.global().seed;
  config["perturbations"] = opts.perturbations;
  config["schedule"] = schedule_json(schedule);
  ctx.set_config(config);

  const auto report = locality_audit(model, schedule, opts.perturbations);
  json body;
  body["model"] = model.name();
  body["trials_checked"] = report.trials_checked;
  body["mismatches"] = report.mismatches;
  body["pass"] = report.pass;
  if (!report.first_mismatch.empty()) body["first_mismatch"] = report.first_mismatch;
  ctx.write_json("audit.json", body);
  ctx.out() << fmt::format("audit {} trials={} mismatches={}\n", report.pass ? "PASS" : "FAIL",
                           report.trials_checked, report.mismatches);
}

void add_schedule_options(CLI::App* sub, ScheduleOptions& opts) {
  sub->add_option("--schedule", opts.schedule_file, "Descriptor file with a [schedule] section");
  sub->add_option("--trials", opts.trials, "Number of trials");
  sub->add_option("--policy", opts.policy, "Setting policy: fixed, cycle, seeded_random");
  sub->add_option("--angles-a", opts.angles_a, "Comma-separated S1 angles (radians, 'pi/4' accepted)");
  sub->add_option("--angles-b", opts.angles_b, "Comma-separated S2 angles");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-station EPR experiment simulator and verification harness", "bellsim"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Base seed for every random stream");
  app.add_option("--out", global.out, "Output directory");
  app.add_flag("--deterministic", global.deterministic, "Omit timestamps so reruns are byte-identical");
  app.add_option("--tol", global.tol, "Tolerance for bound and factorization verdicts");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run trials and write the trial stream plus a summary");
  simulate->add_option("--model", sim.model, "Zoo name or descriptor path")->required();
  add_schedule_options(simulate, sim.schedule);
  simulate->add_option("--chsh", sim.chsh, "Four angles a,a',b,b' for an empirical CHSH value");

  CheckOptions chk;
  auto* check = app.add_subcommand("check", "Factorization and parameter-independence report");
  check->add_option("--model", chk.model, "Zoo name or descriptor path")->required();
  check->add_option("--mode", chk.mode, "given_lambda, given_lambda_and_m or both");
  check->add_option("--angles-a", chk.angles_a, "S1 angles (default: model setting alphabet)");
  check->add_option("--angles-b", chk.angles_b, "S2 angles (default: model setting alphabet)");
  check->add_flag("--tables", chk.tables, "Also export every joint table as CSV");

  TransformOptions tr;
  auto* transform = app.add_subcommand("transform", "Apply marginal-zeroing transforms and write a descriptor");
  transform->add_option("--model", tr.model, "Zoo name or descriptor path")->required();
  transform->add_option("--op", tr.ops,
                        "rademacher[:mean] | layer_double | target:<S1|S2>:<alpha>[:<angle>] | "
                        "lambda_sign:<s>/<s>/...")
      ->required();
  transform->add_option("--scope", tr.scope, "Sign scope: both, S1 or S2");
  transform->add_flag("--round", tr.round, "Round marginal targets to the nearest representable mean");
  transform->add_option("--name", tr.name, "Name for the transformed model");

  ChshOptions ch;
  auto* chsh_cmd = app.add_subcommand("chsh", "Evaluate the CHSH combination");
  chsh_cmd->add_option("--model", ch.model, "Zoo name or descriptor path")->required();
  chsh_cmd->add_option("--angles", ch.angles, "a,a',b,b' (default 0,pi/2,pi/4,3*pi/4)");
  chsh_cmd->add_option("--method", ch.method, "exact or monte_carlo");
  chsh_cmd->add_option("--trials", ch.trials, "Monte-Carlo trials per setting pair");

  AuditOptions au;
  auto* audit = app.add_subcommand("audit", "Counterfactual locality audit");
  audit->add_option("--model", au.model, "Zoo name or descriptor path")->required();
  add_schedule_options(audit, au.schedule);
  audit->add_option("--perturbations", au.perturbations, "Remote settings tried per trial");

  auto* zoo = app.add_subcommand("zoo", "Built-in models");
  zoo->require_subcommand(1);
  auto* zoo_list = zoo->add_subcommand("list", "List zoo models");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Context ctx(global, args, out);
    if (simulate->parsed()) cmd_simulate(ctx, sim);
    else if (check->parsed()) cmd_check(ctx, chk);
    else if (transform->parsed()) cmd_transform(ctx, tr);
    else if (chsh_cmd->parsed()) cmd_chsh(ctx, ch);
    else if (audit->parsed()) cmd_audit(ctx, au);
    else if (zoo_list->parsed()) {
      for (const auto& e : zoo_entries()) out << fmt::format("{:<20} {}\n", e.name, e.summary);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? kExitConfig : kExitModel;
  }
  return kExitOk;
}

}  // namespace bellsim::cli
