/*
 * Copyright 2026 The bgan-hash Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "bgan/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include <json.hpp>

#include "bgan/error.hpp"
#include "bgan/model.hpp"
#include "bgan/random.hpp"
#include "bgan/trainer.hpp"

namespace bgan {

LabelIndex::LabelIndex(const LabelSet& labels) : labels_(&labels), rows_(index_by_id(labels.ids)) {
  labels.validate();
}

std::span<const std::uint32_t> LabelIndex::of(ItemId id) const {
  const auto it = rows_.find(id);
  if (it == rows_.end()) throw InvalidArgument("no labels for item " + std::to_string(id));
  return labels_->labels[it->second];
}

bool relevance(ItemId query, ItemId item, const LabelIndex& labels) {
  return labels_intersect(labels.of(query), labels.of(item));
}

double average_precision(std::span<const std::uint8_t> flags, std::size_t cap) {
  cap = std::min(cap, flags.size());
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < cap; ++r) {
    if (!flags[r]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double precision_at_k(std::span<const std::uint8_t> flags, std::size_t k) {
  if (k == 0 || k > flags.size())
    throw InvalidArgument("precision_at_k: k=" + std::to_string(k) + " outside 1.." +
                          std::to_string(flags.size()));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r) hits += flags[r] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::vector<std::uint8_t> ranked_relevance(const HammingIndex& index,
                                           std::span<const std::uint64_t> query,
                                           ItemId query_id, const LabelIndex& labels) {
  const auto q_labels = labels.of(query_id);
  std::vector<std::uint8_t> flags;
  flags.reserve(index.size());
  for (const RankedEntry& e : index.rank_all(query)) {
    if (e.id == query_id) continue;
    flags.push_back(labels_intersect(q_labels, labels.of(e.id)) ? 1 : 0);
  }
  return flags;
}

EvalReport evaluate(const HammingIndex& index, const CodeSet& queries, const LabelSet& labels,
                    const EvalOptions& options) {
  queries.validate();
  if (queries.bits != index.bits())
    throw InvalidArgument("query codes have L=" + std::to_string(queries.bits) +
                          ", database L=" + std::to_string(index.bits()));
  const LabelIndex lookup(labels);
  EvalReport report;
  report.map_at = options.map_at;
  report.database_size = index.size();
  report.code_bits = index.bits();

  std::vector<std::vector<std::uint8_t>> kept;
  for (std::size_t q = 0; q < queries.n(); ++q) {
    auto flags = ranked_relevance(index, queries.code(q), queries.ids[q], lookup);
    if (std::find(flags.begin(), flags.end(), 1) == flags.end()) {
      report.excluded_queries.push_back(queries.ids[q]);
      continue;
    }
    report.per_query.push_back(
        {queries.ids[q], average_precision(flags, options.map_at.value_or(flags.size()))});
    kept.push_back(std::move(flags));
  }
  if (!report.excluded_queries.empty())
    std::clog << "warning: " << report.excluded_queries.size()
              << " queries have no relevant database item and are excluded (first id "
              << report.excluded_queries.front() << ")\n";
  if (kept.empty()) return report;

  double sum = 0.0;
  for (const auto& qa : report.per_query) sum += qa.ap;
  report.map = sum / static_cast<double>(report.per_query.size());

  std::size_t length = kept.front().size();
  for (const auto& f : kept) length = std::min(length, f.size());
  for (std::size_t k : options.precision_ks) {
    if (k == 0 || k > length) continue;
    double p = 0.0;
    for (const auto& f : kept) p += precision_at_k(f, k);
    report.precision_at[k] = p / static_cast<double>(kept.size());
  }

  report.pr_curve.assign(length, {0.0, 0.0});
  for (const auto& f : kept) {
    std::size_t total = 0;
    for (std::uint8_t v : f) total += v;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < length; ++r) {
      hits += f[r];
      report.pr_curve[r].recall += static_cast<double>(hits) / static_cast<double>(total);
      report.pr_curve[r].precision += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  for (auto& pt : report.pr_curve) {
    pt.recall /= static_cast<double>(kept.size());
    pt.precision /= static_cast<double>(kept.size());
  }
  return report;
}

double mean_ap(const HammingIndex& index, const CodeSet& queries, const LabelSet& labels,
               std::optional<std::size_t> map_at) {
  EvalOptions options;
  options.map_at = map_at;
  options.precision_ks.clear();
  return evaluate(index, queries, labels, options).map;
}

namespace {

CodeSet random_codes(const CodeSet& like, Rng& rng) {
  std::vector<double> values(like.n() * like.bits);
  for (double& v : values) v = (rng.next() >> 63) ? 1.0 : -1.0;
  return pack_codes(like.ids, values, like.bits);
}

}  // namespace

double random_code_map(const CodeSet& database, const CodeSet& queries, const LabelSet& labels,
                       std::uint64_t seed, std::optional<std::size_t> map_at) {
  Rng rng(seed);
  CodeSet db = random_codes(database, rng);
  const CodeSet q = random_codes(queries, rng);
  return mean_ap(HammingIndex(std::move(db)), q, labels, map_at);
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["map"] = map;
  j["map_at"] = map_at ? nlohmann::json(*map_at) : nlohmann::json("all");
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [k, v] : precision_at) p[std::to_string(k)] = v;
  j["precision_at"] = p;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& qa : per_query) per.push_back({{"id", qa.id}, {"ap", qa.ap}});
  j["per_query"] = per;
  j["excluded_queries"] = excluded_queries;
  j["pr_points"] = pr_curve.size();
  j["protocol"] = {{"relevance", "label sets intersect; query id removed from its own ranking"},
                   {"ties", "equal Hamming distance ordered by ascending item id"},
                   {"pr_curve", "pointwise mean over queries at every rank"},
                   {"database_size", database_size},
                   {"code_bits", code_bits}};
  return j.dump(2) + "\n";
}

std::string EvalReport::pr_csv() const {
  std::string out = "rank,recall,precision\n";
  char buf[96];
  for (std::size_t r = 0; r < pr_curve.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", r + 1, pr_curve[r].recall,
                  pr_curve[r].precision);
    out += buf;
  }
  return out;
}

// -- ablation ---------------------------------------------------------------

std::string_view loss_mode_name(LossMode m) noexcept {
  switch (m) {
    case LossMode::NeighborOnly: return "n";
    case LossMode::NeighborContent: return "n+c";
    case LossMode::NeighborAdversarial: return "n+a";
    case LossMode::Full: return "full";
  }
  return "?";
}

LossMode parse_loss_mode(std::string_view name) {
  for (LossMode m : {LossMode::NeighborOnly, LossMode::NeighborContent,
                     LossMode::NeighborAdversarial, LossMode::Full})
    if (loss_mode_name(m) == name) return m;
  throw InvalidArgument("unknown loss mode '" + std::string(name) + "' (n, n+c, n+a, full)");
}

RunConfig apply_loss_mode(RunConfig config, LossMode mode) {
  if (mode == LossMode::NeighborOnly || mode == LossMode::NeighborAdversarial)
    config.lambda1 = 0.0;
  if (mode == LossMode::NeighborOnly || mode == LossMode::NeighborContent) config.lambda2 = 0.0;
  return config;
}

std::vector<AblationCell> ablation_run(const RunConfig& base, const AblationGrid& grid,
                                       const AblationData& data) {
  const std::vector<std::size_t> bits =
      grid.bits.empty() ? std::vector<std::size_t>{base.code_bits()} : grid.bits;
  const std::vector<std::uint64_t> seeds =
      grid.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : grid.seeds;
  std::vector<AblationCell> cells;
  for (std::size_t L : bits)
    for (LossMode mode : grid.modes)
      for (Activation act : grid.activations)
        for (std::uint64_t seed : seeds) {
          RunConfig cfg = apply_loss_mode(base, mode);
          cfg.activation = act;
          cfg.architecture.code_bits = L;
          cfg.seed = seed;
          TrainResult result = train(cfg, data.train_images, data.neighborhood);
          const HammingIndex index(encode_codes(result.model, data.train_images));
          const CodeSet queries = encode_codes(result.model, data.query_images);
          cells.push_back({mode, act, L, seed, mean_ap(index, queries, data.labels),
                           result.log.size()});
        }
  return cells;
}

std::string ablation_csv(std::span<const AblationCell> cells) {
  std::string out = "mode,activation,bits,seed,map,epochs\n";
  char buf[160];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%llu,%.6f,%zu\n",
                  std::string(loss_mode_name(c.mode)).c_str(),
                  std::string(activation_name(c.activation)).c_str(), c.bits,
                  static_cast<unsigned long long>(c.seed), c.map, c.epochs);
    out += buf;
  }
  return out;
}

}  // namespace bgan
