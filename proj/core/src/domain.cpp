// Copyright 2026 The Lingo Authors
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

#include "lingo/domain.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lingo/domains/graphics.hpp"
#include "lingo/domains/strings.hpp"

namespace lingo {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::unique_ptr<Domain> make_domain(std::string_view name) {
  if (name == "strings") return std::make_unique<StringDomain>();
  if (name == "graphics") return std::make_unique<GraphicsDomain>();
  throw std::invalid_argument("unknown domain '" + std::string(name) + "'");
}

nlohmann::json task_to_json(const Task& task, const Domain& domain) {
  nlohmann::json examples = nlohmann::json::array();
  for (const auto& ex : task.examples) {
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& v : ex.inputs) inputs.push_back(domain.encode_value(v));
    examples.push_back({{"inputs", inputs}, {"output", domain.encode_value(ex.output)}});
  }
  nlohmann::json j = {{"id", task.id},
                      {"split", task.split == Split::kTrain ? "train" : "test"},
                      {"request", task.request->str()},
                      {"examples", examples}};
  j["descriptions"] = nlohmann::json::array();
  if (task.has_description()) j["descriptions"].push_back(join_tokens(task.description));
  if (task.ground_truth) j["program"] = task.ground_truth->str();
  return j;
}

Task task_from_json(const nlohmann::json& j, const Domain& domain) {
  Task t;
  t.id = j.at("id").get<std::string>();
  std::string split = j.at("split").get<std::string>();
  if (split != "train" && split != "test") throw std::invalid_argument("bad split '" + split + "'");
  t.split = split == "train" ? Split::kTrain : Split::kTest;
  t.request = parse_type(j.at("request").get<std::string>());
  for (const auto& ex : j.at("examples")) {
    Example e;
    for (const auto& v : ex.at("inputs")) e.inputs.push_back(domain.decode_value(v));
    e.output = domain.decode_value(ex.at("output"));
    t.examples.push_back(std::move(e));
  }
  if (t.examples.empty()) throw std::invalid_argument("task " + t.id + " has no examples");
  if (j.contains("descriptions") && !j["descriptions"].empty())
    t.description = tokenize(j["descriptions"][0].get<std::string>());
  if (j.contains("program")) t.ground_truth = parse(j["program"].get<std::string>());
  return t;
}

void save_dataset(const std::string& path, const std::vector<Task>& tasks, const Domain& domain) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& t : tasks) records.push_back(task_to_json(t, domain));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << nlohmann::json{{"domain", domain.name()}, {"tasks", records}}.dump(1) << '\n';
}

std::vector<Task> load_dataset(const std::string& path, const Domain& domain) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("domain").get<std::string>() != domain.name())
    throw std::invalid_argument("dataset " + path + " is for domain " + j.at("domain").get<std::string>());
  std::vector<Task> tasks;
  for (const auto& r : j.at("tasks")) tasks.push_back(task_from_json(r, domain));
  return tasks;
}

}  // namespace lingo
