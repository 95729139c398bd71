// Copyright (c) The Streamcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

#include "streamcap/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "streamcap/format.hpp"

namespace streamcap {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw ScenarioError("scenario: " + message);
}

const json& need_object(const json& v, const std::string& section) {
  if (!v.is_object()) fail("section '" + section + "' must be an object");
  return v;
}

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      fail("unknown key '" + key + "' in section '" + section + "'");
    }
  }
}

double get_number(const json& obj, const std::string& section,
                  const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail("missing key '" + key + "' in section '" + section + "'");
  if (!it->is_number()) fail("key '" + key + "' in section '" + section + "' must be a number");
  return it->get<double>();
}

double get_number_or(const json& obj, const std::string& section,
                     const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj, section, key);
}

int get_int_or(const json& obj, const std::string& section,
               const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    fail("key '" + key + "' in section '" + section + "' must be an integer");
  }
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& section,
                       const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail("missing key '" + key + "' in section '" + section + "'");
  if (!it->is_string()) fail("key '" + key + "' in section '" + section + "' must be a string");
  return it->get<std::string>();
}

JobGraph parse_graph(const json& g) {
  check_keys(g, "graph", {"source", "sink", "operators", "edges"});
  JobGraph graph;
  graph.source = get_string(g, "graph", "source");
  graph.sink = get_string(g, "graph", "sink");
  auto ops = g.find("operators");
  if (ops == g.end() || !ops->is_array()) {
    fail("key 'operators' in section 'graph' must be an array");
  }
  for (const auto& op : *ops) {
    if (!op.is_string()) fail("operators must be strings in section 'graph'");
    graph.operators.push_back(op.get<std::string>());
  }
  auto edges = g.find("edges");
  if (edges == g.end() || !edges->is_array()) {
    fail("key 'edges' in section 'graph' must be an array");
  }
  for (const auto& e : *edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
        !e[1].is_string()) {
      fail("every edge must be a [from, to] string pair in section 'graph'");
    }
    graph.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return graph;
}

OperatorGroundTruth parse_truth(const json& t, const std::string& section) {
  need_object(t, section);
  check_keys(t, section,
             {"base_rate", "memory_knee_mb", "memory_exponent",
              "scaling_exponent", "skew_factor", "noise_level", "selectivity"});
  OperatorGroundTruth gt;
  gt.base_rate = get_number(t, section, "base_rate");
  gt.memory_knee_mb = get_number_or(t, section, "memory_knee_mb", 512.0);
  gt.memory_exponent = get_number_or(t, section, "memory_exponent", 0.0);
  gt.scaling_exponent = get_number_or(t, section, "scaling_exponent", 0.0);
  gt.skew_factor = get_number_or(t, section, "skew_factor", 0.0);
  gt.noise_level = get_number_or(t, section, "noise_level", 0.0);
  gt.selectivity = get_number_or(t, section, "selectivity", 1.0);
  if (gt.base_rate <= 0) fail("base_rate must be > 0 in section '" + section + "'");
  if (gt.memory_knee_mb <= 0) fail("memory_knee_mb must be > 0 in section '" + section + "'");
  if (gt.scaling_exponent < 0 || gt.scaling_exponent >= 1) {
    fail("scaling_exponent must be in [0, 1) in section '" + section + "'");
  }
  if (gt.skew_factor < 0) fail("skew_factor must be >= 0 in section '" + section + "'");
  if (gt.noise_level < 0) fail("noise_level must be >= 0 in section '" + section + "'");
  if (gt.selectivity <= 0) fail("selectivity must be > 0 in section '" + section + "'");
  return gt;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ScenarioError("scenario: " + origin + " is not valid JSON: " +
                        e.what());
  }
  need_object(root, "top level");
  check_keys(root, "top level",
             {"schema_version", "name", "seed", "graph", "ground_truth",
              "testbed", "ce_params", "search_space", "explorer_params"});
  const int version = get_int_or(root, "top level", "schema_version", 0);
  if (version != 1) fail("schema_version must be 1");

  Scenario sc;
  if (root.contains("name")) sc.name = get_string(root, "top level", "name");
  if (!root.contains("seed")) fail("missing key 'seed' in section 'top level'");
  if (!root.at("seed").is_number_integer() ||
      root.at("seed").get<std::int64_t>() < 0) {
    fail("key 'seed' must be a non-negative integer");
  }
  sc.seed = root.at("seed").get<std::uint64_t>();

  if (!root.contains("graph")) fail("missing section 'graph'");
  sc.spec.graph = parse_graph(need_object(root.at("graph"), "graph"));
  validate_graph(sc.spec.graph);

  if (!root.contains("ground_truth")) fail("missing section 'ground_truth'");
  const json& gts = need_object(root.at("ground_truth"), "ground_truth");
  for (const auto& [op, body] : gts.items()) {
    if (std::find(sc.spec.graph.operators.begin(),
                  sc.spec.graph.operators.end(),
                  op) == sc.spec.graph.operators.end()) {
      fail("unknown key '" + op + "' in section 'ground_truth'");
    }
    sc.spec.per_operator[op] = parse_truth(body, "ground_truth." + op);
  }
  for (const auto& op : sc.spec.graph.operators) {
    if (!sc.spec.per_operator.count(op)) {
      fail("missing key '" + op + "' in section 'ground_truth'");
    }
  }

  if (!root.contains("testbed")) fail("missing section 'testbed'");
  const json& tb = need_object(root.at("testbed"), "testbed");
  check_keys(tb, "testbed",
             {"max_injectable_rate", "tick_seconds", "warmup_time_constant_s"});
  sc.spec.max_injectable_rate = get_number(tb, "testbed", "max_injectable_rate");
  sc.spec.tick_seconds = get_number_or(tb, "testbed", "tick_seconds", 5.0);
  sc.spec.warmup_time_constant_s =
      get_number_or(tb, "testbed", "warmup_time_constant_s", 0.0);
  if (sc.spec.max_injectable_rate <= 0) fail("max_injectable_rate must be > 0");
  if (sc.spec.tick_seconds <= 0) fail("tick_seconds must be > 0");
  if (sc.spec.warmup_time_constant_s < 0) {
    fail("warmup_time_constant_s must be >= 0");
  }

  if (root.contains("ce_params")) {
    const json& ce = need_object(root.at("ce_params"), "ce_params");
    check_keys(ce, "ce_params",
               {"warmup_s", "cooldown_s", "cooldown_rate", "rampup_s",
                "observe_s", "success_threshold", "sensibility",
                "max_iterations"});
    sc.ce_params.warmup_s = get_number_or(ce, "ce_params", "warmup_s", 120.0);
    sc.ce_params.cooldown_s = get_number_or(ce, "ce_params", "cooldown_s", 15.0);
    sc.ce_params.cooldown_rate =
        get_number_or(ce, "ce_params", "cooldown_rate", 6400.0);
    sc.ce_params.rampup_s = get_number_or(ce, "ce_params", "rampup_s", 60.0);
    sc.ce_params.observe_s = get_number_or(ce, "ce_params", "observe_s", 15.0);
    sc.ce_params.success_threshold =
        get_number_or(ce, "ce_params", "success_threshold", 0.99);
    sc.ce_params.sensibility =
        get_number_or(ce, "ce_params", "sensibility", 0.01);
    sc.ce_params.max_iterations =
        get_int_or(ce, "ce_params", "max_iterations", 8);
    if (sc.ce_params.success_threshold <= 0 ||
        sc.ce_params.success_threshold >= 1) {
      fail("success_threshold must be in (0, 1)");
    }
    if (sc.ce_params.sensibility <= 0 || sc.ce_params.sensibility >= 1) {
      fail("sensibility must be in (0, 1)");
    }
    if (sc.ce_params.max_iterations < 1) fail("max_iterations must be >= 1");
  }

  sc.search_space.pi_min = static_cast<int>(sc.spec.graph.operators.size());
  sc.search_space.pi_max = 48;
  if (root.contains("search_space")) {
    const json& ss = need_object(root.at("search_space"), "search_space");
    check_keys(ss, "search_space",
               {"pi_min", "pi_max", "memory_mb", "memory_granularity_mb"});
    sc.search_space.pi_min =
        get_int_or(ss, "search_space", "pi_min", sc.search_space.pi_min);
    sc.search_space.pi_max =
        get_int_or(ss, "search_space", "pi_max", sc.search_space.pi_max);
    sc.memory_granularity_mb = get_int_or(ss, "search_space",
                                          "memory_granularity_mb",
                                          kDefaultMemoryGranularityMb);
    if (ss.contains("memory_mb")) {
      if (!ss.at("memory_mb").is_array()) {
        fail("key 'memory_mb' in section 'search_space' must be an array");
      }
      for (const auto& v : ss.at("memory_mb")) {
        if (!v.is_number_integer() || v.get<int>() <= 0) {
          fail("memory_mb entries must be positive integers");
        }
        sc.search_space.memory_mb.push_back(v.get<int>());
      }
    }
  }
  if (sc.search_space.memory_mb.empty()) {
    for (int m = sc.memory_granularity_mb; m <= 4096;
         m += sc.memory_granularity_mb) {
      sc.search_space.memory_mb.push_back(m);
    }
  }
  if (sc.memory_granularity_mb <= 0) fail("memory_granularity_mb must be > 0");
  for (std::size_t i = 0; i < sc.search_space.memory_mb.size(); ++i) {
    const int m = sc.search_space.memory_mb[i];
    if (m % sc.memory_granularity_mb != 0) {
      fail("memory value " + std::to_string(m) +
           " is not a multiple of the granularity");
    }
    if (i > 0 && m <= sc.search_space.memory_mb[i - 1]) {
      fail("memory_mb must be strictly ascending");
    }
  }
  if (sc.search_space.pi_min <
          static_cast<int>(sc.spec.graph.operators.size()) ||
      sc.search_space.pi_min > sc.search_space.pi_max) {
    fail("search_space parallelism bounds are invalid");
  }

  if (root.contains("explorer_params")) {
    const json& ep = need_object(root.at("explorer_params"), "explorer_params");
    check_keys(ep, "explorer_params",
               {"min_extra_measurements", "rmse_worsen_stop",
                "max_measurements", "overprovision"});
    sc.explorer_params.min_extra_measurements =
        get_int_or(ep, "explorer_params", "min_extra_measurements", 3);
    sc.explorer_params.rmse_worsen_stop =
        get_number_or(ep, "explorer_params", "rmse_worsen_stop", 0.10);
    sc.explorer_params.max_measurements =
        get_int_or(ep, "explorer_params", "max_measurements", 20);
    sc.explorer_params.overprovision =
        get_number_or(ep, "explorer_params", "overprovision", 1.10);
    if (sc.explorer_params.min_extra_measurements <= 0 ||
        sc.explorer_params.rmse_worsen_stop <= 0 ||
        sc.explorer_params.max_measurements <= 0 ||
        sc.explorer_params.overprovision <= 0) {
      fail("explorer_params values must be positive");
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("scenario: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

void save_model(const CapacityModel& model, const std::string& path) {
  json m;
  m["family"] = std::string(family_name(model.family));
  m["a"] = model.a;
  m["b"] = model.b;
  m["c"] = model.c;
  json root;
  root["schema_version"] = 1;
  root["model"] = m;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write model file '" + path + "'");
  out << root.dump(2) << "\n";
}

CapacityModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open model file '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioError("model file '" + path + "' is not valid JSON: " +
                        e.what());
  }
  need_object(root, "model file");
  check_keys(root, "model file", {"schema_version", "model"});
  if (get_int_or(root, "model file", "schema_version", 0) != 1) {
    fail("model schema_version must be 1");
  }
  if (!root.contains("model")) fail("missing section 'model'");
  const json& m = need_object(root.at("model"), "model");
  check_keys(m, "model", {"family", "a", "b", "c"});
  CapacityModel model;
  auto family = family_from_name(get_string(m, "model", "family"));
  if (!family) fail("unknown model family");
  model.family = *family;
  model.a = get_number(m, "model", "a");
  model.b = get_number(m, "model", "b");
  model.c = get_number(m, "model", "c");
  return model;
}

std::string measurements_csv(const ExplorationReport& report) {
  std::ostringstream out;
  out << "step,memory_mb,task_slots,mst,cost_rmse,family\n";
  for (std::size_t i = 0; i < report.log.size(); ++i) {
    const ExplorationStep& step = report.log[i];
    out << i << "," << step.memory_mb << "," << step.task_slots << ","
        << format_double(step.co.mst.mst) << "," << format_double(step.cost)
        << ","
        << (step.family ? std::string(family_name(*step.family)) : "none")
        << "\n";
  }
  return out.str();
}

}  // namespace streamcap
