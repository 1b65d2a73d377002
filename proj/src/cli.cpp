#include "mortmix/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "mortmix/csv.hpp"
#include "mortmix/data_io.hpp"
#include "mortmix/errors.hpp"
#include "mortmix/estimation.hpp"
#include "mortmix/hazard_models.hpp"
#include "mortmix/mixture.hpp"
#include "mortmix/simulation.hpp"

namespace mortmix::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelFlags {
  std::string family = "gm";
  std::map<std::string, double> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app) {
    app.add_option("--family", family, "Model family: gm, ggm, beard, kannisto, siler")
        ->capture_default_str()
        ->check(CLI::IsMember({"gm", "ggm", "beard", "kannisto", "siler"}));
    for (const char* name : {"a", "b", "c", "gamma", "k", "a1", "b1", "a2", "b2"}) {
      values[name] = 0.0;
      options[name] = app.add_option(std::string("--") + name, values[name], help_for(name));
    }
  }

  static std::string help_for(const std::string& name) {
    if (name == "a") return "Baseline level (Siler: alias for --a2)";
    if (name == "b") return "Baseline rate of ageing (Siler: alias for --b2)";
    if (name == "c") return "Makeham term";
    if (name == "gamma") return "Frailty variance (ggm)";
    if (name == "k") return "Beard deceleration (beard)";
    if (name == "a1") return "Siler infant level";
    if (name == "b1") return "Siler infant decline";
    if (name == "a2") return "Siler senescent level";
    return "Siler senescent rate";
  }

  bool given(const std::string& name) const { return options.at(name)->count() > 0; }

  HazardModel model() const {
    const auto fam = parse_family(family);
    if (!fam) throw UsageError("unknown family '" + family + "'");
    const bool siler = *fam == Family::siler;
    std::vector<double> params;
    for (const auto& name : parameter_names(*fam)) {
      std::string source = name;
      if (siler && (name == "a2" || name == "b2") && !given(name)) source = name.substr(0, 1);
      if (!given(source)) throw UsageError("--" + name + " is required for family " + family);
      params.push_back(values.at(source));
    }
    HazardModel m = make_model(*fam, params);
    const auto report = validate(m);
    if (!report.ok()) {
      std::string msg = "invalid parameters:";
      for (const auto& e : report.violations) msg += " " + e + ";";
      throw UsageError(msg);
    }
    return m;
  }
};

std::vector<double> parse_ages(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw UsageError("--ages expects start:stop:step");
  try {
    return make_age_grid(csv::parse_number(parts[0]), csv::parse_number(parts[1]), csv::parse_number(parts[2]));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--ages: ") + e.what());
  }
}

json model_json(const HazardModel& m) {
  json params = json::object();
  const auto names = parameter_names(family_of(m));
  const auto values = parameters(m);
  for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = values[i];
  return {{"family", family_tag(family_of(m))}, {"parameters", params}};
}

std::string_view method_tag(PiMethod m) {
  switch (m) {
    case PiMethod::zero_makeham_term:
      return "zero_makeham_term";
    case PiMethod::incomplete_gamma:
      return "incomplete_gamma";
    case PiMethod::hypergeometric:
      return "hypergeometric";
    case PiMethod::quadrature:
      return "quadrature";
  }
  return "unknown";
}

std::string opt_field(std::optional<double> v) { return v ? csv::format_number(*v) : std::string(); }

void write_file(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out.flush()) throw IoError("write to '" + path.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move output into '" + path.string() + "'");
}

void require_parent_dir(const std::string& path, const char* flag) {
  if (path.empty()) return;
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError(std::string(flag) + ": directory '" + parent.string() + "' does not exist");
  }
}

// eval

struct EvalArgs {
  ModelFlags model;
  std::string ages = "0:110:0.5";
  std::string out;
};

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  const HazardModel m = args.model.model();
  const auto grid = parse_ages(args.ages);
  require_parent_dir(args.out, "--out");
  const MakehamMixture mix(m);

  std::ostringstream table;
  table << "age,hazard,survival,density,g1,g2,p\n";
  for (double x : grid) {
    std::optional<double> g1;
    std::optional<double> g2;
    if (mix.has_component(Component::premature)) g1 = mix.premature_density(x);
    if (mix.has_component(Component::senescent)) g2 = mix.senescent_density(x);
    table << csv::format_number(x) << ',' << csv::format_number(total_hazard(m, x)) << ','
          << csv::format_number(survival(m, x)) << ',' << csv::format_number(density(m, x)) << ','
          << opt_field(g1) << ',' << opt_field(g2) << ',' << csv::format_number(premature_prevalence(m, x)) << '\n';
  }
  if (args.out.empty()) {
    out << table.str();
  } else {
    write_file(args.out, table.str());
  }
  return kExitOk;
}

// decompose

struct DecomposeArgs {
  ModelFlags model;
  std::string ages = "0:110:0.5";
  std::string grid_out;
};

int cmd_decompose(const DecomposeArgs& args, std::ostream& out) {
  const HazardModel m = args.model.model();
  const auto grid = parse_ages(args.ages);
  require_parent_dir(args.grid_out, "--grid-out");
  const auto d = decompose(m, grid);
  const auto pi = mixing_proportion_detailed(m);

  json j = model_json(m);
  j["pi"] = d.pi;
  j["pi_method"] = method_tag(pi.method);
  j["pi_fallback"] = pi.fell_back;
  j["threshold_age"] = d.threshold_age;
  j["modal_age_overall"] = d.modal_age_overall;
  j["modal_age_senescent"] = d.modal_age_senescent;
  j["modal_age_premature"] = d.modal_age_premature ? json(*d.modal_age_premature) : json(nullptr);
  j["life_expectancy"] = d.life_expectancy;

  if (!args.grid_out.empty()) {
    std::ostringstream table;
    table << "age,g1,g2,f,p\n";
    for (std::size_t i = 0; i < d.component_density_grid.size(); ++i) {
      const auto& c = d.component_density_grid[i];
      table << csv::format_number(c.age) << ',' << opt_field(c.g1) << ',' << opt_field(c.g2) << ','
            << csv::format_number(c.f) << ',' << csv::format_number(d.prevalence_grid[i].prevalence) << '\n';
    }
    write_file(args.grid_out, table.str());
    j["grid_file"] = args.grid_out;
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

// fit

struct FitArgs {
  std::string deaths;
  std::string exposures;
  std::string family = "gm";
  int min_age = 20;
  std::vector<std::string> sexes = {"female", "male"};
  std::string out;
  std::string population;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t starts = 16;
  double prior_alpha = 1.0;
  double prior_beta = 1.0;
  std::vector<std::string> priors;
};

PriorSpec build_priors(const FitArgs& args) {
  if (!(args.prior_alpha > 0.0) || !(args.prior_beta > 0.0)) {
    throw UsageError("--prior-alpha and --prior-beta must be > 0");
  }
  PriorSpec spec{InverseGammaPrior{args.prior_alpha, args.prior_beta}, {}};
  for (const auto& text : args.priors) {
    // name=alpha,beta
    const auto eq = text.find('=');
    const auto comma = text.find(',', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || comma == std::string::npos) {
      throw UsageError("--prior expects name=alpha,beta, got '" + text + "'");
    }
    InverseGammaPrior p;
    try {
      p.alpha = csv::parse_number(text.substr(eq + 1, comma - eq - 1));
      p.beta = csv::parse_number(text.substr(comma + 1));
    } catch (const std::invalid_argument&) {
      throw UsageError("--prior expects name=alpha,beta, got '" + text + "'");
    }
    if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw UsageError("--prior: alpha and beta must be > 0");
    spec.per_parameter[text.substr(0, eq)] = p;
  }
  return spec;
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  const auto family = parse_family(args.family);
  if (!family) throw UsageError("unknown family '" + args.family + "'");
  const auto names = parameter_names(*family);
  const PriorSpec priors = build_priors(args);
  for (const auto& [name, prior] : priors.per_parameter) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw UsageError("--prior: family " + args.family + " has no parameter '" + name + "'");
    }
  }
  std::vector<Sex> sexes;
  for (const auto& s : args.sexes) {
    const auto sex = parse_sex(s);
    if (!sex) throw UsageError("--sex: unknown value '" + s + "'");
    sexes.push_back(*sex);
  }
  for (const auto* path : {&args.deaths, &args.exposures}) {
    if (!fs::is_regular_file(*path)) throw IoError("cannot read '" + *path + "'");
  }
  require_parent_dir(args.out, "--out");

  const auto deaths = parse_hmd(fs::path(args.deaths), TableKind::deaths);
  const auto exposures = parse_hmd(fs::path(args.exposures), TableKind::exposures);
  const std::string population = args.population.empty() ? fs::path(args.deaths).stem().string() : args.population;
  const auto slices = build_slices(deaths, exposures, args.min_age, sexes, population);

  FitOptions options;
  options.min_age = args.min_age;
  options.seed = args.seed;
  options.threads = args.threads;
  options.starts = args.starts;
  const auto series = fit_series(slices, *family, priors, options);

  if (args.out.empty()) {
    write_results(out, series.results);
  } else {
    write_results(fs::path(args.out), series.results);
  }
  for (const auto& e : series.errors) {
    err << "slice " << e.population << ' ' << e.year << ' ' << sex_tag(e.sex) << " failed: " << e.message << '\n';
  }
  return series.errors.empty() ? kExitOk : kExitPartial;
}

// simulate

struct SimulateArgs {
  ModelFlags model;
  std::size_t n = 100000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
  std::string summary_out;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const HazardModel m = args.model.model();
  if (args.n < 1) throw UsageError("--n must be >= 1");
  require_parent_dir(args.out, "--out");
  require_parent_dir(args.summary_out, "--summary-out");

  const auto causes = makeham_causes(m);
  SimulationOptions options;
  options.threads = args.threads;
  const auto samples = simulate_cohort(causes, args.n, args.seed, options);

  std::ostringstream table;
  write_samples_csv(table, samples, causes);
  write_file(args.out, table.str());

  json j = model_json(m);
  j["n"] = args.n;
  j["seed"] = args.seed;
  j["censored"] = censored_count(samples);
  j["samples_file"] = args.out;
  const double analytic = mixing_proportion(m);
  j["analytic_pi"] = analytic;
  if (censored_count(samples) < samples.size()) {
    const auto est = empirical_pi(samples, 0);
    j["empirical_pi"] = est.value;
    j["standard_error"] = est.standard_error;
    j["z_score"] = est.standard_error > 0.0 ? json((est.value - analytic) / est.standard_error) : json(nullptr);
  }
  const std::string text = j.dump(2) + "\n";
  if (!args.summary_out.empty()) write_file(args.summary_out, text);
  out << text;
  return kExitOk;
}

// CLI11 only reads the top-level app's config file, so a subcommand's
// --config is expanded here: each key=value entry becomes --key value unless
// that flag is already on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  if (!fs::is_regular_file(path)) throw IoError("cannot read config file " + path);

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (!item.parents.empty() || item.name == "config") continue;
    const std::string flag = "--" + item.name;
    if (given(flag)) continue;
    for (const auto& value : item.inputs) {
      injected.push_back(flag);
      injected.push_back(value);
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Makeham mixture decomposition of mortality: evaluation, fitting and simulation", "mortmix"};
  app.require_subcommand(1);
  std::string config_path;  // consumed by expand_config
  app.set_help_all_flag("--help-all", "Help for every command");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Tabulate hazard, survival, density and mixture components over an age grid");
  eval_args.model.attach(*eval);
  eval->add_option("--ages", eval_args.ages, "Age grid start:stop:step")->capture_default_str();
  eval->add_option("--out", eval_args.out, "Output CSV (default: standard output)");
  eval->add_option("--config", config_path, "Flat key=value file of flag values; explicit flags win");

  DecomposeArgs dec_args;
  auto* dec = app.add_subcommand("decompose", "Mixing proportion, threshold age and modal ages as JSON");
  dec_args.model.attach(*dec);
  dec->add_option("--ages", dec_args.ages, "Grid for --grid-out, start:stop:step")->capture_default_str();
  dec->add_option("--grid-out", dec_args.grid_out, "Also write the component density grid to this CSV");
  dec->add_option("--config", config_path, "Flat key=value file of flag values; explicit flags win");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "MAP fit of a model to HMD 1x1 deaths and exposures");
  fit->add_option("--deaths", fit_args.deaths, "HMD deaths file")->required();
  fit->add_option("--exposures", fit_args.exposures, "HMD exposures file")->required();
  fit->add_option("--family", fit_args.family, "Model family")
      ->capture_default_str()
      ->check(CLI::IsMember({"gm", "ggm", "beard", "kannisto", "siler"}));
  fit->add_option("--min-age", fit_args.min_age, "Youngest age used")->capture_default_str();
  fit->add_option("--sex", fit_args.sexes, "Sexes to fit: female, male, total")
      ->capture_default_str()
      ->delimiter(',');
  fit->add_option("--out", fit_args.out, "Results CSV (default: standard output)");
  fit->add_option("--population", fit_args.population, "Population label (default: deaths file stem)");
  fit->add_option("--seed", fit_args.seed, "Multistart seed")->capture_default_str();
  fit->add_option("--threads", fit_args.threads, "Worker threads across slices")->capture_default_str();
  fit->add_option("--starts", fit_args.starts, "Multistart points per slice")->capture_default_str();
  fit->add_option("--prior-alpha", fit_args.prior_alpha, "Inverse-gamma shape for every parameter")
      ->capture_default_str();
  fit->add_option("--prior-beta", fit_args.prior_beta, "Inverse-gamma scale for every parameter")
      ->capture_default_str();
  fit->add_option("--prior", fit_args.priors, "Per-parameter override name=alpha,beta (repeatable)");
  fit->add_option("--config", config_path, "Flat key=value file of flag values; explicit flags win");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Competing-risks simulation of lifetimes with cause labels");
  sim_args.model.attach(*sim);
  sim->add_option("--n", sim_args.n, "Number of lifetimes")->capture_default_str();
  sim->add_option("--seed", sim_args.seed, "Random seed")->capture_default_str();
  sim->add_option("--threads", sim_args.threads, "Worker threads")->capture_default_str();
  sim->add_option("--out", sim_args.out, "Samples CSV")->required();
  sim->add_option("--summary-out", sim_args.summary_out, "Also write the summary JSON here");
  sim->add_option("--config", config_path, "Flat key=value file of flag values; explicit flags win");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (eval->parsed()) return cmd_eval(eval_args, out);
    if (dec->parsed()) return cmd_decompose(dec_args, out);
    if (fit->parsed()) return cmd_fit(fit_args, out, err);
    if (sim->parsed()) return cmd_simulate(sim_args, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const AlignmentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace mortmix::cli
