#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/suites.hpp"

namespace tractorlab::cli {

namespace {

struct Raw {
  std::string model, signature, report, suite, config;
  int m = 0, points = 0, jobs = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  bool timing = false;
};

struct Given {
  CLI::Option *model, *m, *signature, *tol, *points, *seed, *report, *suite, *jobs, *config,
      *timing;
};

Given add_common(CLI::App* app, Raw& raw) {
  Given g{};
  g.model = app->add_option("--model", raw.model, "model name (see list-models)");
  g.m = app->add_option("--m", raw.m, "quaternionic dimension, dim = 4m + 3 (1 or 2)");
  g.signature = app->add_option("--signature", raw.signature, "P,Q with P + Q = m + 1");
  g.tol = app->add_option("--tol", raw.tol, "tolerance for every residual check");
  g.points = app->add_option("--points", raw.points, "sample points per check");
  g.seed = app->add_option("--seed", raw.seed, "sampling seed (default TRACTORLAB_SEED or 0)");
  g.report = app->add_option("--report", raw.report, "write the JSON report to this path");
  g.suite = app->add_option("--suite", raw.suite, "suite name or comma list (verify)");
  g.jobs = app->add_option("--jobs", raw.jobs, "parallel tasks");
  g.config = app->add_option("--config", raw.config, "JSON file mirroring the flags");
  g.timing = app->add_flag("--timing", raw.timing, "record wall time in the report");
  return g;
}

std::string default_model(const std::string& command) {
  if (command == "stratify") return "flat_projective";
  return "round_sphere";
}

std::string default_suite(const std::string& command, const std::string& model) {
  if (command == "stratify") return "stratify";
  if (command == "holonomy") return "holonomy";
  if (command == "descend") return model == "flat_projective" ? "m0" : "descent";
  if (command == "all") return "all";
  return "standard";
}

void apply_config(const std::string& path, Settings& s, bool& have_signature,
                  bool& have_seed) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config file must hold an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") s.model = v.get<std::string>();
      else if (key == "m") s.m = v.get<int>();
      else if (key == "signature") {
        std::pair<int, int> pq;
        if (v.is_string()) pq = parse_signature(v.get<std::string>());
        else {
          auto a = v.get<std::vector<int>>();
          if (a.size() != 2) throw std::invalid_argument("signature needs two entries");
          pq = {a[0], a[1]};
        }
        s.p = pq.first;
        s.q = pq.second;
        have_signature = true;
      } else if (key == "tol") s.tol = v.get<double>();
      else if (key == "points") s.points = v.get<int>();
      else if (key == "seed") {
        s.seed = v.get<std::uint64_t>();
        have_seed = true;
      } else if (key == "report") s.report = v.get<std::string>();
      else if (key == "suite") s.suite = v.get<std::string>();
      else if (key == "jobs") s.jobs = v.get<int>();
      else if (key == "timing") s.timing = v.get<bool>();
      else throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
}

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-')
    throw std::invalid_argument("TRACTORLAB_SEED must be a non-negative integer, got '" + text +
                                "'");
  return v;
}

// Parses into `app`; returns the subcommand name and merged settings.
Settings resolve_parsed(CLI::App& app, const Raw& raw, const Given& g,
                        std::optional<std::string> env_seed) {
  Settings s;
  for (auto* sub : app.get_subcommands()) s.command = sub->get_name();
  bool have_signature = false, have_seed = false;
  s.model.clear();
  s.m = 1;

  if (env_seed && !env_seed->empty()) s.seed = parse_seed(*env_seed);
  if (g.config->count()) apply_config(raw.config, s, have_signature, have_seed);

  if (g.model->count()) s.model = raw.model;
  if (g.m->count()) s.m = raw.m;
  if (g.signature->count()) {
    auto pq = parse_signature(raw.signature);
    s.p = pq.first;
    s.q = pq.second;
    have_signature = true;
  }
  if (g.tol->count()) s.tol = raw.tol;
  if (g.points->count()) s.points = raw.points;
  if (g.seed->count()) s.seed = raw.seed;
  if (g.report->count()) s.report = raw.report;
  if (g.suite->count()) s.suite = raw.suite;
  if (g.jobs->count()) s.jobs = raw.jobs;
  if (g.timing->count()) s.timing = raw.timing;

  if (s.model.empty()) s.model = default_model(s.command);
  if (!have_signature) {
    if (s.model == "round_sphere_minus") {
      s.p = s.m;
      s.q = 1;
    } else {
      s.p = s.m + 1;
      s.q = 0;
    }
  }
  if (s.suite.empty()) s.suite = default_suite(s.command, s.model);
  if (s.points < 1) throw std::invalid_argument("--points must be at least 1");
  if (s.jobs < 1) throw std::invalid_argument("--jobs must be at least 1");
  if (s.tol && !(*s.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
  return s;
}

struct Parser {
  CLI::App app{"Numerical projective tractor calculus checks", "tractorlab"};
  Raw raw;
  Given given{};

  Parser() {
    app.require_subcommand(1);
    const char* commands[][2] = {
        {"verify", "run a named suite on a model"},
        {"stratify", "curved orbit decomposition of the flat model"},
        {"holonomy", "sampled tractor holonomy and its negative control"},
        {"descend", "descent to the leaf space (M0 checks on the flat model)"},
        {"list-models", "list models and suites"},
        {"all", "every applicable suite on a model"}};
    // Options are shared; only the chosen subcommand fills them.
    for (auto& c : commands) {
      auto* sub = app.add_subcommand(c[0], c[1]);
      Given g = add_common(sub, raw);
      subs.push_back({sub, g});
    }
  }

  void parse(const std::vector<std::string>& args) {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    for (auto& [sub, g] : subs)
      if (sub->parsed()) given = g;
  }

  std::vector<std::pair<CLI::App*, Given>> subs;
};

void list_models(std::ostream& out) {
  out << "models:\n";
  for (const auto& info : model_list()) out << "  " << info.name << "  " << info.description << "\n";
  out << "suites:\n";
  for (const auto& info : suite_list()) out << "  " << info.name << "  " << info.description << "\n";
  out << "m in {1, 2}; --signature P,Q with P + Q = m + 1\n";
}

}  // namespace

std::pair<int, int> parse_signature(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("--signature expects P,Q, got '" + text + "'");
  try {
    std::size_t a = 0, b = 0;
    std::string ps = text.substr(0, comma), qs = text.substr(comma + 1);
    int p = std::stoi(ps, &a), q = std::stoi(qs, &b);
    if (a != ps.size() || b != qs.size() || p < 0 || q < 0) throw std::invalid_argument("");
    return {p, q};
  } catch (const std::exception&) {
    throw std::invalid_argument("--signature expects non-negative integers P,Q, got '" + text +
                                "'");
  }
}

Settings resolve(const std::vector<std::string>& args, std::optional<std::string> env_seed) {
  Parser parser;
  try {
    parser.parse(args);
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }
  return resolve_parsed(parser.app, parser.raw, parser.given, env_seed);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::optional<std::string> env_seed) {
  Parser parser;
  try {
    parser.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return parser.app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return parser.app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    parser.app.exit(e, out, err);
    return kUsage;
  }

  Settings s;
  try {
    s = resolve_parsed(parser.app, parser.raw, parser.given, env_seed);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (s.command == "list-models") {
    list_models(out);
    return kPass;
  }

  VerificationReport rep;
  try {
    ModelGeometry model = get_model(s.model, s.m, s.p, s.q);
    SuiteOptions opt;
    opt.points = s.points;
    opt.seed = s.seed;
    opt.tol = s.tol;
    opt.jobs = s.jobs;
    opt.timing = s.timing;
    rep = run_suite(model, s.suite, opt);
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SuiteError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  const std::string json = rep.to_json();
  if (s.report.empty()) {
    out << json;
  } else {
    std::ofstream f(s.report, std::ios::binary);
    if (!f) {
      err << "error: cannot write report '" << s.report << "'\n";
      return kUsage;
    }
    f << json;
    int passed = 0;
    for (const auto& c : rep.checks) {
      passed += c.passed;
      out << (c.passed ? "PASS " : "FAIL ") << c.check_name << "  "
          << format_number(c.max_residual) << " <= " << format_number(c.tolerance) << "\n";
    }
    out << passed << "/" << rep.checks.size() << " checks passed; report " << s.report << "\n";
  }
  return rep.all_passed() ? kPass : kFail;
}

}  // namespace tractorlab::cli
