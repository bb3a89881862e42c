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

#pragma once

// Retrieval metrics over Hamming rankings and the loss/activation ablation.
//
// An item is relevant to a query when their label sets intersect. A query
// never counts itself: if its id is in the database it is removed from its
// own ranking. Queries without any relevant database item are left out of
// every average and reported as excluded.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bgan/config.hpp"
#include "bgan/dataset.hpp"
#include "bgan/hashlayer.hpp"
#include "bgan/neighborhood.hpp"
#include "bgan/retrieval.hpp"

namespace bgan {

/// Label lookup by item id.
class LabelIndex {
 public:
  explicit LabelIndex(const LabelSet& labels);
  /// Throws InvalidArgument for an unlabeled id.
  std::span<const std::uint32_t> of(ItemId id) const;
  bool contains(ItemId id) const { return rows_.count(id) != 0; }

 private:
  const LabelSet* labels_;
  std::unordered_map<ItemId, std::size_t> rows_;
};

bool relevance(ItemId query, ItemId item, const LabelIndex& labels);

/// Mean over relevant positions r <= cap of precision@r; 0 when none of the
/// first cap flags is relevant. cap is clipped to the list length.
double average_precision(std::span<const std::uint8_t> flags, std::size_t cap);
inline double average_precision(std::span<const std::uint8_t> flags) {
  return average_precision(flags, flags.size());
}

/// (relevant in top k) / k.
double precision_at_k(std::span<const std::uint8_t> flags, std::size_t k);

/// Relevance flags along the ranking of `query`, the query id removed.
std::vector<std::uint8_t> ranked_relevance(const HammingIndex& index,
                                           std::span<const std::uint64_t> query,
                                           ItemId query_id, const LabelIndex& labels);

struct PrPoint {
  double recall;
  double precision;
};

struct QueryAp {
  ItemId id;
  double ap;
};

struct EvalOptions {
  std::optional<std::size_t> map_at;  // full ranking when unset
  std::vector<std::size_t> precision_ks{1, 10, 50, 100};
};

struct EvalReport {
  double map = 0.0;
  std::map<std::size_t, double> precision_at;
  std::vector<PrPoint> pr_curve;  // one point per rank position
  std::vector<QueryAp> per_query;
  std::vector<ItemId> excluded_queries;
  std::optional<std::size_t> map_at;
  std::size_t database_size = 0;
  std::size_t code_bits = 0;

  std::string to_json() const;
  std::string pr_csv() const;
};

/// Evaluates every query code against the index. precision_at entries with
/// K beyond the ranking length are skipped.
EvalReport evaluate(const HammingIndex& index, const CodeSet& queries, const LabelSet& labels,
                    const EvalOptions& options = {});

double mean_ap(const HammingIndex& index, const CodeSet& queries, const LabelSet& labels,
               std::optional<std::size_t> map_at = std::nullopt);

/// mAP of codes drawn uniformly at random for the same items.
double random_code_map(const CodeSet& database, const CodeSet& queries, const LabelSet& labels,
                       std::uint64_t seed, std::optional<std::size_t> map_at = std::nullopt);

// -- ablation ---------------------------------------------------------------

enum class LossMode { NeighborOnly, NeighborContent, NeighborAdversarial, Full };

std::string_view loss_mode_name(LossMode m) noexcept;
LossMode parse_loss_mode(std::string_view name);

/// lambda weights of the disabled components set to zero.
RunConfig apply_loss_mode(RunConfig config, LossMode mode);

struct AblationData {
  ImageSet train_images;
  NeighborhoodMatrix neighborhood;  // over train_images rows
  ImageSet query_images;
  LabelSet labels;  // covers train and query ids
};

struct AblationCell {
  LossMode mode;
  Activation activation;
  std::size_t bits;
  std::uint64_t seed;
  double map;
  std::size_t epochs;
};

struct AblationGrid {
  std::vector<LossMode> modes{LossMode::NeighborOnly, LossMode::NeighborContent,
                              LossMode::NeighborAdversarial, LossMode::Full};
  std::vector<Activation> activations{Activation::App, Activation::Tanh, Activation::TwoStep};
  std::vector<std::size_t> bits;  // empty: the base config's code length
  std::vector<std::uint64_t> seeds;  // empty: the base config's seed
};

/// Trains one model per grid cell and reports its query mAP.
std::vector<AblationCell> ablation_run(const RunConfig& base, const AblationGrid& grid,
                                       const AblationData& data);

/// CSV: mode,activation,bits,seed,map,epochs.
std::string ablation_csv(std::span<const AblationCell> cells);

}  // namespace bgan
