// Copyright 2026 The UTC-EQ Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON game documents:
//   {"players": n, "root": node, "utility_range": [lo, hi] (optional)}
//   node = {"type": "chance", "outcomes": [{"p": .., "node": ..}, ...]}
//        | {"type": "player", "player": k, "infoset": "label",
//           "actions": [{"label": .., "node": ..}, ...]}
//        | {"type": "terminal", "utils": [...]}

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "utc_eq/game.hpp"
#include "utc_eq/games.hpp"

namespace utc_eq {

namespace detail {

inline nlohmann::json node_to_json(const ExtensiveFormGame& g, int id) {
  const GameNode& n = g.node(id);
  nlohmann::json j;
  switch (n.kind) {
    case NodeKind::kTerminal:
      j["type"] = "terminal";
      j["utils"] = n.utils;
      break;
    case NodeKind::kChance: {
      j["type"] = "chance";
      auto& out = j["outcomes"] = nlohmann::json::array();
      for (std::size_t k = 0; k < n.children.size(); ++k) {
        out.push_back({{"p", n.chance_probs[k]}, {"node", node_to_json(g, n.children[k])}});
      }
      break;
    }
    case NodeKind::kPlayer: {
      const Infoset& is = g.infoset(n.infoset);
      j["type"] = "player";
      j["player"] = n.player;
      j["infoset"] = is.label;
      auto& out = j["actions"] = nlohmann::json::array();
      for (std::size_t a = 0; a < n.children.size(); ++a) {
        out.push_back({{"label", is.actions[a]}, {"node", node_to_json(g, n.children[a])}});
      }
      break;
    }
  }
  return j;
}

inline int node_from_json(GameBuilder& b, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw GameError("node must be an object with a type");
  const std::string type = j.at("type").get<std::string>();
  if (type == "terminal") return b.terminal(j.at("utils").get<std::vector<double>>());
  if (type == "chance") {
    const int id = b.chance();
    for (const auto& o : j.at("outcomes")) b.add_outcome(id, o.at("p").get<double>(), node_from_json(b, o.at("node")));
    return id;
  }
  if (type == "player") {
    std::vector<std::string> labels;
    for (const auto& a : j.at("actions")) labels.push_back(a.at("label").get<std::string>());
    const int id = b.decision(j.at("player").get<int>(), j.at("infoset").get<std::string>(), labels);
    int k = 0;
    for (const auto& a : j.at("actions")) b.set_child(id, k++, node_from_json(b, a.at("node")));
    return id;
  }
  throw GameError("unknown node type '" + type + "'");
}

}  // namespace detail

inline nlohmann::json game_to_json(const ExtensiveFormGame& game) {
  nlohmann::json j;
  j["players"] = game.num_players();
  j["root"] = detail::node_to_json(game, game.root());
  if (const auto& r = game.declared_utility_range()) j["utility_range"] = {r->first, r->second};
  return j;
}

/// Parses and validates (structure, chance mass, perfect recall).
inline ExtensiveFormGame game_from_json(const nlohmann::json& j) {
  try {
    GameBuilder b(j.at("players").get<int>());
    const int root = detail::node_from_json(b, j.at("root"));
    if (j.contains("utility_range")) {
      const auto r = j.at("utility_range").get<std::vector<double>>();
      if (r.size() != 2) throw GameError("utility_range needs two entries");
      b.declare_utility_range(r[0], r[1]);
    }
    ExtensiveFormGame g = b.build(root);
    require_valid(g);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw GameError(std::string("invalid game document: ") + e.what());
  }
}

/// Canonical text form; two isomorphic games serialize identically.
inline std::string serialize_game(const ExtensiveFormGame& game) { return game_to_json(game).dump(); }

inline void save_game(const ExtensiveFormGame& game, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << game_to_json(game).dump(1) << "\n";
}

inline ExtensiveFormGame load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open game file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw GameError("cannot parse '" + path + "': " + e.what());
  }
  return game_from_json(j);
}

inline ExtensiveFormGame make_game(const GameSpec& spec) {
  switch (spec.variant) {
    case GameSpec::Variant::kKuhn:
      return gen_kuhn(spec.param("P", 2), spec.param("D", 3));
    case GameSpec::Variant::kLeduc:
      return gen_leduc(spec.param("P", 2), spec.param("R", 3), spec.param("S", 2));
    case GameSpec::Variant::kSheriff:
      return gen_sheriff(spec.param("N", 10), spec.param("B", 2), spec.param("R", 2));
    case GameSpec::Variant::kFig1:
      return gen_fig1_example();
    case GameSpec::Variant::kFig3:
      return gen_fig3_example();
    case GameSpec::Variant::kFile:
      return load_game(spec.path);
  }
  throw ConfigError("unhandled game variant");
}

inline ExtensiveFormGame make_game(const std::string& spec) { return make_game(parse_game_spec(spec)); }

}  // namespace utc_eq
