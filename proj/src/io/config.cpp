#include "io/config.hpp"

#include <fstream>
#include <set>

namespace fsr::io {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error("config: " + what); }

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) bad("unknown key \"" + it.key() + "\" in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

void read_index(const json& obj, const char* key, Eigen::Index& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<std::int64_t>();
}

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "simulate") return Mode::simulate;
  if (name == "fit") return Mode::fit;
  if (name == "infer") return Mode::infer;
  if (name == "benchmark") return Mode::benchmark;
  bad("unknown mode \"" + name + "\"");
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::simulate: return "simulate";
    case Mode::fit: return "fit";
    case Mode::infer: return "infer";
    case Mode::benchmark: return "benchmark";
  }
  return "?";
}

void RunConfig::validate() const {
  schedule.validate();
  if (threads < 1) bad("threads must be >= 1");
  if (replications < 1) bad("replications must be >= 1");
  if (inference.chains < 0) bad("inference.chains must be >= 0");
  if (inference.burn_in < 0) bad("inference.burn_in must be >= 0");
  for (double tau : inference.levels)
    if (!(tau > 0 && tau < 1)) bad("levels must lie in (0, 1)");
  if (mode == Mode::simulate || mode == Mode::benchmark) dgp.validate();
  if (mode == Mode::fit || mode == Mode::infer) {
    if (input.path.empty()) bad("input.path is required for fit/infer");
  }
  if (fit.output_grid != 0 && fit.output_grid < 2)
    bad("fit.output_grid must be 0 or >= 2");
}

RunConfig config_from_json(const json& doc) {
  RunConfig c;
  require_keys(doc, "document",
               {"mode", "seed", "threads", "out", "schedule", "inference", "dgp",
                "input", "fit", "replications"});
  if (auto it = doc.find("mode"); it != doc.end())
    c.mode = parse_mode(it->get<std::string>());
  read(doc, "seed", c.seed);
  read(doc, "threads", c.threads);
  read(doc, "out", c.out);
  read(doc, "replications", c.replications);

  if (auto it = doc.find("schedule"); it != doc.end()) {
    require_keys(*it, "schedule", {"gamma", "alpha", "max_step"});
    read(*it, "gamma", c.schedule.gamma);
    read(*it, "alpha", c.schedule.alpha);
    read(*it, "max_step", c.schedule.max_step);
  }
  if (auto it = doc.find("inference"); it != doc.end()) {
    require_keys(*it, "inference", {"enabled", "chains", "levels", "burn_in"});
    read(*it, "enabled", c.inference.enabled);
    read_index(*it, "chains", c.inference.chains);
    read(*it, "levels", c.inference.levels);
    read_index(*it, "burn_in", c.inference.burn_in);
  }
  if (auto it = doc.find("dgp"); it != doc.end()) {
    require_keys(*it, "dgp",
                 {"n", "m", "tail", "noise_variance", "score_covariance_scale",
                  "beta3"});
    read(*it, "n", c.dgp.n);
    read_index(*it, "m", c.dgp.m);
    if (auto t = it->find("tail"); t != it->end()) {
      const std::string name = t->get<std::string>();
      if (name == "gaussian") c.dgp.tail = ResidualTail::gaussian;
      else if (name == "student_t3") c.dgp.tail = ResidualTail::student_t3;
      else bad("dgp.tail must be \"gaussian\" or \"student_t3\"");
    }
    read(*it, "noise_variance", c.dgp.noise_variance);
    read(*it, "score_covariance_scale", c.dgp.score_covariance_scale);
    if (auto b = it->find("beta3"); b != it->end()) {
      const std::string name = b->get<std::string>();
      if (name == "verbatim") c.dgp.beta3 = Beta3Variant::verbatim;
      else if (name == "sine") c.dgp.beta3 = Beta3Variant::sine;
      else bad("dgp.beta3 must be \"verbatim\" or \"sine\"");
    }
  }
  if (auto it = doc.find("input"); it != doc.end()) {
    require_keys(*it, "input",
                 {"path", "covariates", "response_prefix", "standardize",
                  "on_malformed"});
    read(*it, "path", c.input.path);
    read(*it, "covariates", c.input.covariates);
    read(*it, "response_prefix", c.input.response_prefix);
    read(*it, "standardize", c.input.standardize);
    if (auto p = it->find("on_malformed"); p != it->end()) {
      const std::string name = p->get<std::string>();
      if (name == "skip") c.input.on_malformed = MalformedPolicy::skip;
      else if (name == "abort") c.input.on_malformed = MalformedPolicy::abort;
      else bad("input.on_malformed must be \"skip\" or \"abort\"");
    }
  }
  if (auto it = doc.find("fit"); it != doc.end()) {
    require_keys(*it, "fit", {"trajectory_stride", "output_grid"});
    read(*it, "trajectory_stride", c.fit.trajectory_stride);
    read_index(*it, "output_grid", c.fit.output_grid);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open \"" + path + "\"");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("parse failure in \"" + path + "\": " + e.what());
  }
  return config_from_json(doc);
}

nlohmann::json config_to_json(const RunConfig& c) {
  json doc;
  doc["mode"] = mode_name(c.mode);
  doc["seed"] = c.seed;
  // threads is deliberately not echoed: results are parallelism-invariant,
  // so the worker count is execution plumbing, not part of the experiment.
  doc["out"] = c.out;
  doc["replications"] = c.replications;
  doc["schedule"] = {{"gamma", c.schedule.gamma},
                     {"alpha", c.schedule.alpha},
                     {"max_step", c.schedule.max_step}};
  doc["inference"] = {{"enabled", c.inference.enabled},
                      {"chains", static_cast<std::int64_t>(c.inference.chains)},
                      {"levels", c.inference.levels},
                      {"burn_in", static_cast<std::int64_t>(c.inference.burn_in)}};
  if (c.mode == Mode::simulate || c.mode == Mode::benchmark)
    doc["dgp"] = {{"n", c.dgp.n},
                  {"m", static_cast<std::int64_t>(c.dgp.m)},
                  {"tail", c.dgp.tail == ResidualTail::gaussian ? "gaussian"
                                                                : "student_t3"},
                  {"noise_variance", c.dgp.noise_variance},
                  {"score_covariance_scale", c.dgp.score_covariance_scale},
                  {"beta3",
                   c.dgp.beta3 == Beta3Variant::verbatim ? "verbatim" : "sine"}};
  if (c.mode == Mode::fit || c.mode == Mode::infer) {
    doc["input"] = {{"path", c.input.path},
                    {"covariates", c.input.covariates},
                    {"response_prefix", c.input.response_prefix},
                    {"standardize", c.input.standardize},
                    {"on_malformed",
                     c.input.on_malformed == MalformedPolicy::skip ? "skip"
                                                                   : "abort"}};
  }
  if (c.mode == Mode::fit)
    doc["fit"] = {{"trajectory_stride", c.fit.trajectory_stride},
                  {"output_grid", static_cast<std::int64_t>(c.fit.output_grid)}};
  return doc;
}

}  // namespace fsr::io
