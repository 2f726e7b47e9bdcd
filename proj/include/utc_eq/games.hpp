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

// Benchmark and counterexample game generators.

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "utc_eq/game.hpp"

namespace utc_eq {

/// Invalid generator parameters or game-spec strings.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// One betting round with at most one bet: active players act in seat order,
// each may check or bet; after a bet every other active player calls or
// folds in seat order starting after the bettor.
struct BettingRound {
  GameBuilder& b;
  int bet_size;
  // label prefix for the acting player's infoset (private info + public
  // history before this round)
  std::function<std::string(int player)> private_prefix;
  // Continuation after the round: remaining players, updated contributions,
  // round history string.
  std::function<int(const std::vector<int>& active, const std::vector<double>& contrib,
                    const std::string& history)>
      next;

  int run(const std::vector<int>& active, const std::vector<double>& contrib) {
    return open(active, contrib, 0, "");
  }

 private:
  int open(const std::vector<int>& active, const std::vector<double>& contrib, std::size_t pos,
           const std::string& hist) {
    if (pos == active.size()) return next(active, contrib, hist);
    const int p = active[pos];
    const int node = b.decision(p, private_prefix(p) + "/" + hist, {"check", "bet"});
    b.set_child(node, 0, open(active, contrib, pos + 1, hist + "k"));
    std::vector<double> c = contrib;
    c[p] += bet_size;
    std::vector<int> responders;
    for (std::size_t k = 1; k < active.size(); ++k) responders.push_back(active[(pos + k) % active.size()]);
    b.set_child(node, 1, respond(active, c, responders, 0, {}, hist + "b"));
    return node;
  }

  int respond(const std::vector<int>& active, const std::vector<double>& contrib,
              const std::vector<int>& responders, std::size_t k, std::vector<int> folded,
              const std::string& hist) {
    if (k == responders.size()) {
      std::vector<int> still;
      for (int p : active) {
        if (std::find(folded.begin(), folded.end(), p) == folded.end()) still.push_back(p);
      }
      return next(still, contrib, hist);
    }
    const int p = responders[k];
    const int node = b.decision(p, private_prefix(p) + "/" + hist, {"call", "fold"});
    std::vector<double> c = contrib;
    c[p] += bet_size;
    b.set_child(node, 0, respond(active, c, responders, k + 1, folded, hist + "c"));
    folded.push_back(p);
    b.set_child(node, 1, respond(active, contrib, responders, k + 1, folded, hist + "f"));
    return node;
  }
};

// Winners split the pot; everyone loses their contribution.
inline std::vector<double> pot_payoffs(const std::vector<double>& contrib,
                                       const std::vector<int>& winners) {
  const double pot = std::accumulate(contrib.begin(), contrib.end(), 0.0);
  std::vector<double> u(contrib.size());
  for (std::size_t p = 0; p < contrib.size(); ++p) u[p] = -contrib[p];
  for (int w : winners) u[w] += pot / static_cast<double>(winners.size());
  return u;
}

// Ordered tuples of `len` draws where value v may be drawn at most
// counts[v] times; probability of drawing without replacement.
inline void ordered_draws(std::vector<int>& counts, int len, std::vector<int>& cur, double prob,
                          std::vector<std::pair<std::vector<int>, double>>& out) {
  if (static_cast<int>(cur.size()) == len) {
    out.emplace_back(cur, prob);
    return;
  }
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  for (int v = 0; v < static_cast<int>(counts.size()); ++v) {
    if (counts[v] == 0) continue;
    const double p = prob * counts[v] / total;
    --counts[v];
    cur.push_back(v);
    ordered_draws(counts, len, cur, p, out);
    cur.pop_back();
    ++counts[v];
  }
}

}  // namespace detail

/// n-player Kuhn poker: ante 1, one private card each from `deck` distinct
/// cards, one betting round with bet size 1, highest card wins at showdown.
/// The deal is one chance node with an outcome per ordered deal.
inline ExtensiveFormGame gen_kuhn(int players, int deck) {
  if (players < 2) throw ConfigError("kuhn: players P=" + std::to_string(players) + " must be >= 2");
  if (deck < players) {
    throw ConfigError("kuhn: deck D=" + std::to_string(deck) + " must be >= players P=" +
                      std::to_string(players));
  }
  GameBuilder b(players);
  const int root = b.chance();
  std::vector<int> counts(deck, 1), cur;
  std::vector<std::pair<std::vector<int>, double>> deals;
  detail::ordered_draws(counts, players, cur, 1.0, deals);
  std::vector<int> everyone(players);
  std::iota(everyone.begin(), everyone.end(), 0);
  for (const auto& deal : deals) {
    const std::vector<int>& cards = deal.first;
    detail::BettingRound round{
        b, 1,
        [&cards](int p) { return "P" + std::to_string(p) + "/card" + std::to_string(cards[p]); },
        [&b, &cards](const std::vector<int>& active, const std::vector<double>& contrib,
                     const std::string&) {
          int best = active.front();
          for (int p : active) {
            if (cards[p] > cards[best]) best = p;
          }
          return b.terminal(detail::pot_payoffs(contrib, {best}));
        }};
    b.add_outcome(root, deal.second, round.run(everyone, std::vector<double>(players, 1.0)));
  }
  return b.build(root);
}

/// Leduc hold'em: ante 1, one private card, one community card, two betting
/// rounds with at most one bet each (sizes 2 then 4). A private card pairing
/// the community card wins; otherwise the highest rank; ties split. Cards of
/// equal rank are interchangeable, so deals are drawn by rank.
inline ExtensiveFormGame gen_leduc(int players, int ranks, int suits) {
  if (players < 2) throw ConfigError("leduc: players P=" + std::to_string(players) + " must be >= 2");
  if (ranks < 1 || suits < 1) throw ConfigError("leduc: ranks R and suits S must be >= 1");
  if (players + 1 > ranks * suits) {
    throw ConfigError("leduc: need P+1 <= R*S cards, got P=" + std::to_string(players) +
                      ", R*S=" + std::to_string(ranks * suits));
  }
  GameBuilder b(players);
  const int root = b.chance();
  std::vector<int> counts(ranks, suits), cur;
  std::vector<std::pair<std::vector<int>, double>> deals;
  detail::ordered_draws(counts, players, cur, 1.0, deals);
  std::vector<int> everyone(players);
  std::iota(everyone.begin(), everyone.end(), 0);

  for (const auto& deal : deals) {
    const std::vector<int>& hand = deal.first;
    auto card_label = [&hand](int p) {
      return "P" + std::to_string(p) + "/rank" + std::to_string(hand[p]);
    };
    auto fold_win = [&b](const std::vector<int>& active, const std::vector<double>& contrib) {
      return b.terminal(detail::pot_payoffs(contrib, active));
    };
    detail::BettingRound first{b, 2, card_label, nullptr};
    first.next = [&](const std::vector<int>& active, const std::vector<double>& contrib,
                     const std::string& hist1) -> int {
      if (active.size() == 1) return fold_win(active, contrib);
      std::vector<int> left(ranks, suits);
      for (int r : hand) --left[r];
      const int total = std::accumulate(left.begin(), left.end(), 0);
      const int chance = b.chance();
      for (int c = 0; c < ranks; ++c) {
        if (left[c] == 0) continue;
        detail::BettingRound second{
            b, 4,
            [&, c, hist1](int p) {
              return card_label(p) + "/" + hist1 + "/board" + std::to_string(c);
            },
            [&, c](const std::vector<int>& still, const std::vector<double>& contrib2,
                   const std::string&) -> int {
              if (still.size() == 1) return fold_win(still, contrib2);
              auto strength = [&](int p) { return hand[p] == c ? ranks + hand[p] : hand[p]; };
              int top = -1;
              for (int p : still) top = std::max(top, strength(p));
              std::vector<int> winners;
              for (int p : still) {
                if (strength(p) == top) winners.push_back(p);
              }
              return b.terminal(detail::pot_payoffs(contrib2, winners));
            }};
        b.add_outcome(chance, static_cast<double>(left[c]) / total, second.run(active, contrib));
      }
      return chance;
    };
    b.add_outcome(root, deal.second, first.run(everyone, std::vector<double>(players, 1.0)));
  }
  return b.build(root);
}

struct SheriffPayoffs {
  double item_value = 1.0;
  double item_penalty = 2.0;
  double sheriff_penalty = 3.0;
};

/// Sheriff of Nottingham. Player 0 (smuggler) loads 0..items illegal items,
/// then `rounds` bargaining rounds follow, each a bribe in 0..max_bribe and a
/// non-binding accept/reject from player 1 (sheriff). A final bribe is then
/// answered by the binding pass/inspect decision. The sheriff never sees the
/// load.
inline ExtensiveFormGame gen_sheriff(int items, int max_bribe, int rounds,
                                     const SheriffPayoffs& pay = {}) {
  if (items < 0) throw ConfigError("sheriff: items N=" + std::to_string(items) + " must be >= 0");
  if (max_bribe < 0) {
    throw ConfigError("sheriff: max bribe B=" + std::to_string(max_bribe) + " must be >= 0");
  }
  if (rounds < 1) throw ConfigError("sheriff: rounds R=" + std::to_string(rounds) + " must be >= 1");
  GameBuilder b(2);
  std::vector<std::string> loads, bribes;
  for (int n = 0; n <= items; ++n) loads.push_back(std::to_string(n));
  for (int x = 0; x <= max_bribe; ++x) bribes.push_back(std::to_string(x));

  std::function<int(int, int, const std::string&)> bargain = [&](int load, int round,
                                                                 const std::string& hist) -> int {
    const bool last = round == rounds;
    const int smuggler = b.decision(0, "S/load" + std::to_string(load) + "/" + hist, bribes);
    for (int x = 0; x <= max_bribe; ++x) {
      const std::string h = hist + "b" + std::to_string(x);
      const int sheriff =
          last ? b.decision(1, "N/" + h, {"pass", "inspect"}) : b.decision(1, "N/" + h, {"accept", "reject"});
      if (last) {
        b.set_child(sheriff, 0, b.terminal({pay.item_value * load - x, static_cast<double>(x)}));
        const double fine = load > 0 ? pay.item_penalty * load : -pay.sheriff_penalty;
        b.set_child(sheriff, 1, b.terminal({-fine, fine}));
      } else {
        b.set_child(sheriff, 0, bargain(load, round + 1, h + "a"));
        b.set_child(sheriff, 1, bargain(load, round + 1, h + "r"));
      }
      b.set_child(smuggler, x, sheriff);
    }
    return smuggler;
  };
  const int root = b.decision(0, "S/", loads);
  for (int n = 0; n <= items; ++n) b.set_child(root, n, bargain(n, 0, ""));
  return b.build(root);
}

/// Two-player game where an untimed deviator profits by playing c2 before
/// asking for recommendations at A or B. Player 1's payoff is zero.
inline ExtensiveFormGame gen_fig1_example() {
  GameBuilder b(2);
  const int root = b.chance();
  const auto p1 = [](double u) { return std::vector<double>{u, 0.0}; };
  for (const char* name : {"A", "B"}) {
    const std::string s = name;
    std::string lower(1, static_cast<char>(std::tolower(s[0])));
    const int j = b.decision(0, s, {lower + "1", lower + "2"});
    b.set_child(j, 0, b.terminal(p1(0)));
    b.set_child(j, 1, b.terminal(p1(0)));
    b.add_outcome(root, 1.0 / 3.0, j);
  }
  const int c = b.decision(0, "C", {"c1", "c2"});
  b.add_outcome(root, 1.0 / 3.0, c);
  b.set_child(c, 0, b.terminal(p1(0)));
  const int nature = b.chance();
  b.set_child(c, 1, nature);
  // Guessing subgames: matching the opponent's action pays +1, else -10.
  const auto guess = [&](const std::string& mine, const std::string& theirs) {
    const int j = b.decision(0, mine, {mine == "D" ? "d1" : "e1", mine == "D" ? "d2" : "e2"});
    const std::string t = theirs == "F" ? "f" : "g";
    for (int a = 0; a < 2; ++a) {
      const int k = b.decision(1, theirs, {t + "1", t + "2"});
      b.set_child(k, 0, b.terminal(p1(a == 0 ? 1 : -10)));
      b.set_child(k, 1, b.terminal(p1(a == 0 ? -10 : 1)));
      b.set_child(j, a, k);
    }
    return j;
  };
  b.add_outcome(nature, 0.5, guess("D", "F"));
  b.add_outcome(nature, 0.5, guess("E", "G"));
  return b.build(root);
}

/// Two-player game where a deviator profits by asking for the
/// recommendation at B before acting at A. Player 1's payoff is zero.
inline ExtensiveFormGame gen_fig3_example() {
  GameBuilder b(2);
  const auto leaf = [&](double u) { return b.terminal({u, 0.0}); };
  const auto opponent = [&](double u1, double u2) {
    const int k = b.decision(1, "C", {"c1", "c2"});
    b.set_child(k, 0, leaf(u1));
    b.set_child(k, 1, leaf(u2));
    return k;
  };
  const int a = b.decision(0, "A", {"a1", "a2", "a3"});
  const int bb = b.decision(0, "B", {"b1", "b2"});
  b.set_child(bb, 0, opponent(0, 0));
  b.set_child(bb, 1, opponent(0, 0));
  b.set_child(a, 0, bb);
  b.set_child(a, 1, opponent(1, -1));
  b.set_child(a, 2, opponent(-1, 1));
  return b.build(a);
}

/// Parsed "variant:K=V,..." game spec.
struct GameSpec {
  enum class Variant { kKuhn, kLeduc, kSheriff, kFig1, kFig3, kFile };
  Variant variant = Variant::kFig1;
  std::map<std::string, int> params;
  std::string path;  // kFile only

  int param(const std::string& key, int fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

inline GameSpec parse_game_spec(const std::string& text) {
  GameSpec spec;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  static const std::map<std::string, GameSpec::Variant> kVariants = {
      {"kuhn", GameSpec::Variant::kKuhn},       {"leduc", GameSpec::Variant::kLeduc},
      {"sheriff", GameSpec::Variant::kSheriff}, {"fig1", GameSpec::Variant::kFig1},
      {"fig3", GameSpec::Variant::kFig3},       {"file", GameSpec::Variant::kFile}};
  auto it = kVariants.find(head);
  if (it == kVariants.end()) throw ConfigError("unknown game variant '" + head + "'");
  spec.variant = it->second;
  if (spec.variant == GameSpec::Variant::kFile) {
    if (rest.empty()) throw ConfigError("file: game spec needs a path");
    spec.path = rest;
    return spec;
  }
  static const std::map<GameSpec::Variant, std::vector<std::string>> kKeys = {
      {GameSpec::Variant::kKuhn, {"P", "D"}},
      {GameSpec::Variant::kLeduc, {"P", "R", "S"}},
      {GameSpec::Variant::kSheriff, {"N", "B", "R"}},
      {GameSpec::Variant::kFig1, {}},
      {GameSpec::Variant::kFig3, {}}};
  const auto& allowed = kKeys.at(spec.variant);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    auto comma = rest.find(',', pos);
    if (comma == std::string::npos) comma = rest.size();
    const std::string item = rest.substr(pos, comma - pos);
    pos = comma + 1;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed game parameter '" + item + "'");
    const std::string key = item.substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown parameter '" + key + "' for game '" + head + "'");
    }
    try {
      std::size_t used = 0;
      const int value = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing characters");
      spec.params[key] = value;
    } catch (const std::exception&) {
      throw ConfigError("parameter '" + key + "' needs an integer value");
    }
  }
  return spec;
}

}  // namespace utc_eq
