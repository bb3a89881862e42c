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

// Sign binarization, its continuation surrogates, the staged beta schedule
// and bit-packed code storage.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bgan/autograd.hpp"
#include "bgan/config.hpp"
#include "bgan/dataset.hpp"

namespace bgan {

/// +1 where z >= 0, -1 elsewhere (zero maps to +1).
std::vector<std::int8_t> sign_binarize(std::span<const double> z);
inline double sign_value(double z) noexcept { return z >= 0.0 ? 1.0 : -1.0; }

enum class SurrogateKind { App, Tanh };

/// clip(beta z, -1, 1) or tanh(beta z). Requires beta >= 1.
double surrogate(double z, double beta, SurrogateKind kind);
std::vector<double> surrogate_activation(std::span<const double> z, double beta,
                                         SurrogateKind kind);
/// Differentiable form used inside the training graph.
Var surrogate_activation(Var z, double beta, SurrogateKind kind);

/// Surrogate used by an activation mode; two_step trains with tanh.
SurrogateKind surrogate_for(Activation a) noexcept;

class ContinuationSchedule;

/// Moves to the next stage when the current stage has plateaued (or when
/// force is set, e.g. the per-stage epoch budget ran out). On the terminal
/// stage it marks the schedule finished instead. loss_history holds one
/// mean total loss per completed epoch since the start of training.
ContinuationSchedule advance_stage(ContinuationSchedule schedule,
                                   std::span<const double> loss_history,
                                   bool force = false);

class ContinuationSchedule {
 public:
  ContinuationSchedule(std::vector<double> betas, std::size_t plateau_window,
                       double relative_threshold);

  /// Schedule implied by a run: two_step collapses to the single stage {1}.
  static ContinuationSchedule from_config(const RunConfig& cfg);

  double beta() const noexcept { return betas_[stage_]; }
  std::size_t stage() const noexcept { return stage_; }
  std::size_t stage_count() const noexcept { return betas_.size(); }
  bool terminal() const noexcept { return stage_ + 1 == betas_.size(); }
  /// Set once the terminal stage has plateaued.
  bool finished() const noexcept { return finished_; }
  std::size_t stage_start_epoch() const noexcept { return stage_start_; }
  std::size_t plateau_window() const noexcept { return window_; }
  double relative_threshold() const noexcept { return threshold_; }
  const std::vector<double>& betas() const noexcept { return betas_; }

  /// True when the mean loss of the last plateau-window epochs of the
  /// current stage improves on the window before it by less than the
  /// relative threshold.
  bool plateaued(std::span<const double> loss_history) const;

 private:
  friend ContinuationSchedule advance_stage(ContinuationSchedule,
                                            std::span<const double>, bool);
  std::vector<double> betas_;
  std::size_t stage_ = 0;
  std::size_t stage_start_ = 0;
  std::size_t window_;
  double threshold_;
  bool finished_ = false;
};

/// n bit-packed L-bit codes; bit k of word k / 64 is (b_k + 1) / 2 and the
/// unused high bits of the last word are zero.
struct CodeSet {
  std::vector<ItemId> ids;
  std::size_t bits = 0;
  std::vector<std::uint64_t> words;

  std::size_t n() const noexcept { return ids.size(); }
  std::size_t words_per_code() const noexcept { return (bits + 63) / 64; }
  std::span<const std::uint64_t> code(std::size_t i) const {
    return {words.data() + i * words_per_code(), words_per_code()};
  }

  void validate() const;
  friend bool operator==(const CodeSet&, const CodeSet&) = default;
};

/// values: n x bits row-major, entries exactly +1 or -1.
CodeSet pack_codes(std::span<const ItemId> ids, std::span<const double> values,
                   std::size_t bits);
std::vector<double> unpack_codes(const CodeSet& codes);

}  // namespace bgan
