// Copyright 2026 The hbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hbench: command-line front end. Every subcommand is a thin composition of
// library calls; outputs go to --out-dir and are written atomically.
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbench/hbench.hpp"
#include "hbench/service.hpp"

namespace fs = std::filesystem;
using namespace hbench;

namespace {

struct Common {
  fs::path out_dir = ".";
  int verbosity = 0;
  std::optional<std::uint64_t> seed;
};

std::uint64_t resolve_seed(const Common& c, std::uint64_t fallback = 0) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("HBENCH_SEED")) {
    std::uint64_t v = 0;
    const std::string s = env;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("HBENCH_SEED must be a nonnegative integer, got '" + s + "'");
    return v;
  }
  return fallback;
}

void emit(const Common& c, const std::string& name, std::string_view content) {
  const fs::path p = c.out_dir / name;
  io::write_file_atomic(p, content);
  std::cout << p.string() << "\n";
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Transform make_transform(const std::string& kind, double slope, double scale,
                         const std::vector<double>& interval) {
  Transform g;
  g.kind = parse_transform(kind);
  g.slope = slope;
  g.scale = scale;
  if (!interval.empty()) {
    if (interval.size() != 2) throw ConfigError("--interval takes two values: lo hi");
    g.interval = std::pair{interval[0], interval[1]};
  }
  g.validate();
  return g;
}

json axiom_report_to_json(const AxiomReport& r) {
  auto one = [](const AxiomResult& a) {
    json j = {{"pass", a.pass}};
    j["counterexample"] = a.counterexample ? json(*a.counterexample) : json(nullptr);
    j["alpha"] = a.alpha ? json(*a.alpha) : json(nullptr);
    return j;
  };
  return {{"transform", r.transform},
          {"monotonicity", one(r.monotonicity)},
          {"utility_equivalence", one(r.equivalence)},
          {"positive_homogeneity", one(r.homogeneity)},
          {"all_pass", r.all_pass()}};
}

json part_worths_to_json(const PartWorths& pw) {
  json out = json::array();
  for (const auto& s : pw.stakeholders) {
    json beta = json::object();
    for (std::size_t a = 0; a < pw.catalog.attributes.size(); ++a) {
      const auto& at = pw.catalog.attributes[a];
      json lv = json::object();
      for (std::size_t l = 0; l < at.levels.size(); ++l) lv[at.levels[l]] = s.beta[a][l];
      beta[at.metric_id] = lv;
    }
    out.push_back({{"stakeholder", s.stakeholder_id},
                   {"alpha", s.alpha},
                   {"beta", beta},
                   {"residual_norm", s.residual_norm},
                   {"condition", s.condition}});
  }
  return out;
}

json design_to_json(const ConjointDesign& d) {
  json profiles = json::array();
  for (const auto& p : d.profiles) {
    json levels = json::object();
    for (std::size_t a = 0; a < d.catalog.attributes.size(); ++a)
      levels[d.catalog.attributes[a].metric_id] = d.catalog.attributes[a].levels[p.levels[a]];
    profiles.push_back({{"id", p.id}, {"levels", levels}});
  }
  return {{"seed", d.seed},
          {"catalog", service::catalog_to_json(d.catalog)},
          {"profiles", profiles},
          {"matrix", io::matrix_to_json(d.matrix)}};
}

json coupling_to_json(const CouplingReport& r) {
  json pairs = json::array();
  for (const auto& p : r.top_pairs)
    pairs.push_back({{"i", p.i}, {"j", p.j}, {"weight", p.weight}});
  json j = {{"spectral_radius", r.spectral_radius},
            {"threshold", r.threshold},
            {"coupling", r.high ? "high" : "low"},
            {"symmetric", r.symmetric},
            {"top_pairs", pairs}};
  j["eigenvalues"] = r.symmetric ? json(r.eigenvalues) : json(nullptr);
  return j;
}

UtilityVector read_utilities(const fs::path& p) { return read_utilities_csv(io::read_file(p)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hbench: adaptive multilayer benchmark network engine", "hbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--out-dir,-o", common.out_dir, "Directory for output files")->capture_default_str();
  app.add_flag("-v,--verbose", common.verbosity, "Verbose diagnostics on stderr");
  app.add_option("--seed", common.seed, "Seed (falls back to HBENCH_SEED)");

  // build
  auto* build = app.add_subcommand("build", "Validate a network spec and write its canonical form");
  fs::path network_path;
  build->add_option("--network", network_path, "Network spec (JSON)")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Spectral coupling report for A_T");
  std::optional<double> threshold;
  analyze->add_option("--network", network_path)->required();
  analyze->add_option("--threshold", threshold, "Coupling threshold (default 1 + 0.1 mean diag)");

  // fit
  auto* fit = app.add_subcommand("fit", "Generate a conjoint design and fit part-worths");
  fs::path catalog_path, responses_path;
  std::size_t n_profiles = 0;
  std::string mode = "range";
  fit->add_option("--catalog", catalog_path, "Attribute catalog (JSON)")->required();
  fit->add_option("--profiles", n_profiles, "Number of profiles (default 2x coefficients)");
  fit->add_option("--responses", responses_path, "Ratings CSV: stakeholder_id,profile_id,rating");
  fit->add_option("--mode", mode, "Utility extraction: range | sum")->capture_default_str();

  // weights
  auto* weights = app.add_subcommand("weights", "Utilities to weights, aggregates and axiom audit");
  fs::path utilities_path;
  std::string transform_kind = "relu";
  double slope = 1.0, scale = 1.0, tau = 0.5;
  std::vector<double> interval;
  weights->add_option("--utilities", utilities_path, "Utilities CSV")->required();
  weights->add_option("--network", network_path, "Network spec for w~ and importances");
  weights->add_option("--transform", transform_kind, "relu | exponential | logistic")
      ->capture_default_str();
  weights->add_option("--slope", slope, "Logistic slope")->capture_default_str();
  weights->add_option("--scale", scale, "Exponential scale")->capture_default_str();
  weights->add_option("--interval", interval, "Declared input interval: lo hi")->expected(2);
  weights->add_option("--tau", tau, "Diffusion time")->capture_default_str();

  // score
  auto* score_cmd = app.add_subcommand("score", "Leaderboard through the full pipeline");
  fs::path weights_path, models_path;
  score_cmd->add_option("--network", network_path)->required();
  score_cmd->add_option("--weights", weights_path, "Weights CSV")->required();
  score_cmd->add_option("--models", models_path, "Models CSV: model_id,metric_id,value")->required();
  score_cmd->add_option("--tau", tau)->capture_default_str();
  score_cmd->add_option("--transform", transform_kind, "Recorded in the fingerprint")
      ->capture_default_str();
  score_cmd->add_option("--mode", mode, "Recorded in the fingerprint")->capture_default_str();

  // evolve
  auto* evolve = app.add_subcommand("evolve", "Run the projected update dynamics");
  fs::path schedule_path, config_path;
  std::string initial = "zero";
  evolve->add_option("--network", network_path)->required();
  evolve->add_option("--utilities", utilities_path)->required();
  evolve->add_option("--schedule", schedule_path, "Shift events (JSON)");
  evolve->add_option("--config", config_path, "Dynamics config (JSON)");
  evolve->add_option("--models", models_path, "Tracked models CSV");
  evolve->add_option("--initial", initial, "Initial weights: zero | target")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run scenario documents end to end");
  std::vector<fs::path> scenario_paths;
  simulate->add_option("--scenario", scenario_paths, "Scenario document(s)")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP session service");
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path response_log;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--response-log", response_log, "Append accepted responses (JSONL)");

  // CLI11 reports a stray word as a missing subcommand; name it instead.
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("-", 0) == 0) {
      if ((a == "-o" || a == "--out-dir" || a == "--seed") && i + 1 < argc) ++i;
      continue;
    }
    if (app.get_subcommands([&a](CLI::App* s) { return s->get_name() == a; }).empty()) {
      std::cerr << "hbench: unknown subcommand '" << a << "'\n\n" << app.help();
      return 2;
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "hbench: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (build->parsed()) {
      const NetworkSpec spec = load_spec(network_path);
      const ValidationReport rep = validate_network(spec);
      emit(common, "validation.json", dump(validation_report_to_json(rep)));
      if (!rep.accepted()) {
        std::cerr << "hbench: " << rep.summary() << "\n";
        return 1;
      }
      const BenchmarkNetwork net = build_network(spec);
      emit(common, "network.json", save_spec_text(net));
      if (common.verbosity)
        std::cerr << "supra size " << layout_of(net).total() << ", hash " << network_hash(net)
                  << "\n";
    } else if (analyze->parsed()) {
      const BenchmarkNetwork net = load_network(network_path);
      const CouplingReport r = coupling_report(net, threshold);
      emit(common, "coupling.json", dump(coupling_to_json(r)));
      if (r.symmetric) {
        std::string out = "index,eigenvalue\n";
        for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
          out += std::to_string(i + 1) + "," + csv::format_double(r.eigenvalues[i]) + "\n";
        emit(common, "eigenvalues.csv", out);
      }
    } else if (fit->parsed()) {
      const AttributeCatalog cat =
          service::catalog_from_json(io::parse_json(io::read_file(catalog_path), "catalog"));
      cat.validate();
      const std::size_t n = n_profiles ? n_profiles : 2 * cat.n_columns();
      const ConjointDesign d = generate_design(cat, n, resolve_seed(common));
      emit(common, "design.json", dump(design_to_json(d)));
      if (!responses_path.empty()) {
        const PartWorths pw = fit_part_worths(d, read_responses_csv(io::read_file(responses_path)));
        emit(common, "part_worths.json", dump(part_worths_to_json(pw)));
        const UtilityVector U = aggregate_utilities(pw, parse_mode(mode));
        if (U.degenerate)
          std::cerr << "hbench: warning: sum extraction is identically zero under effects coding\n";
        emit(common, "utilities.csv", write_utilities_csv(U));
      }
    } else if (weights->parsed()) {
      const UtilityVector U = read_utilities(utilities_path);
      const Transform g = make_transform(transform_kind, slope, scale, interval);
      json out;
      std::optional<BenchmarkNetwork> net;
      WeightState W = transform_weights(U, g);
      std::vector<double> a(W.w.rows(), 1.0);
      if (!network_path.empty()) {
        net = load_network(network_path);
        W = align_weights(W, *net);
        a = net->importances();
      }
      out["W"] = {{"stakeholder_ids", W.stakeholder_ids},
                  {"metric_ids", W.metric_ids},
                  {"values", io::matrix_to_json(W.w)}};
      out["provenance"] = W.provenance;
      out["w_bar"] = aggregate_group_weights(W.w, a, false);
      out["w_bar_normalized"] = nullptr;
      double total = 0.0;
      for (double x : a) total += x;
      if (total > 0.0) out["w_bar_normalized"] = aggregate_group_weights(W.w, a, true);
      out["w_tilde"] = nullptr;
      if (net) {
        out["tau"] = tau;
        out["w_tilde"] = network_adjusted_weights(W.w, influence_kernel(*net, tau));
      }
      out["axioms"] = axiom_report_to_json(audit_transform(g));
      emit(common, "weights.json", dump(out));
      emit(common, "weights.csv", write_weights_csv(W));
    } else if (score_cmd->parsed()) {
      const BenchmarkNetwork net = load_network(network_path);
      const WeightState W = read_weights_csv(io::read_file(weights_path));
      const auto models = read_models_csv(io::read_file(models_path), net);
      ScoringFingerprint fp{network_hash(net), tau, std::string(transform_kind), mode};
      const Leaderboard lb = leaderboard(net, W, models, tau, fp);
      emit(common, "leaderboard.json", dump(leaderboard_to_json(lb)));
      emit(common, "leaderboard.csv", leaderboard_to_csv(lb));
    } else if (evolve->parsed()) {
      const BenchmarkNetwork net = load_network(network_path);
      const UtilityVector U = align_utilities(read_utilities(utilities_path), net);
      DynamicsConfig cfg;
      if (!config_path.empty())
        cfg = dynamics_config_from_json(io::parse_json(io::read_file(config_path), "config"));
      UtilitySchedule sched{U.u, {}};
      if (!schedule_path.empty())
        sched.shifts =
            shifts_from_json(io::parse_json(io::read_file(schedule_path), "schedule"), net);
      std::vector<MetricVector> models;
      if (!models_path.empty()) models = read_models_csv(io::read_file(models_path), net);
      DenseMatrix W0(net.n_stakeholders(), net.n_metrics());
      if (initial == "target") W0 = apply_transform(U.u, cfg.transform);
      else if (initial != "zero") throw ConfigError("--initial must be 'zero' or 'target'");
      W0 = project(W0, cfg.constraints);
      const DynamicsTrace trace = run(net, W0, sched, models, cfg);
      emit(common, "trace.jsonl", trace_to_jsonl(trace));
      emit(common, "summary.json", dump(trace_summary_to_json(trace)));
    } else if (simulate->parsed()) {
      // Independent scenarios run concurrently; outputs are written in
      // argument order afterwards.
      std::vector<std::future<ScenarioReport>> jobs;
      for (const auto& p : scenario_paths)
        jobs.push_back(std::async(std::launch::async, [p, &common] {
          Scenario s = load_scenario(p);
          if (common.seed) s.seed = *common.seed;
          return run_scenario(s);
        }));
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        const ScenarioReport rep = jobs[i].get();
        Common c = common;
        if (scenario_paths.size() > 1) c.out_dir = common.out_dir / scenario_paths[i].stem();
        emit(c, "report.json", dump(scenario_report_to_json(rep)));
        emit(c, "trace.jsonl", trace_to_jsonl(rep.trace));
        emit(c, "series.csv", scenario_report_to_csv(rep));
      }
    } else if (serve->parsed()) {
      service::StoreOptions opt;
      if (!response_log.empty()) opt.response_log = response_log;
      service::SessionStore store(opt);
      httplib::Server srv;
      service::register_routes(srv, store);
      std::cerr << "hbench: listening on " << host << ":" << port << "\n";
      if (!srv.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const ParseError& e) {
    std::cerr << "hbench: " << e.what() << "\n";
    return 1;
  } catch (const hbench::Error& e) {
    std::cerr << "hbench: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "hbench: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "hbench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
