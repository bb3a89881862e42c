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

#include "bgan/hashlayer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bgan/error.hpp"

namespace bgan {

std::vector<std::int8_t> sign_binarize(std::span<const double> z) {
  std::vector<std::int8_t> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] >= 0.0 ? 1 : -1;
  return out;
}

double surrogate(double z, double beta, SurrogateKind kind) {
  if (!(beta >= 1.0)) throw InvalidArgument("surrogate activation needs beta >= 1");
  const double s = beta * z;
  if (kind == SurrogateKind::Tanh) return std::tanh(s);
  return s >= 1.0 ? 1.0 : (s <= -1.0 ? -1.0 : s);
}

std::vector<double> surrogate_activation(std::span<const double> z, double beta,
                                         SurrogateKind kind) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = surrogate(z[i], beta, kind);
  return out;
}

Var surrogate_activation(Var z, double beta, SurrogateKind kind) {
  if (!(beta >= 1.0)) throw InvalidArgument("surrogate activation needs beta >= 1");
  if (kind == SurrogateKind::Tanh) return ops::tanh_act(ops::scale(z, beta));
  return ops::app_act(z, beta);
}

SurrogateKind surrogate_for(Activation a) noexcept {
  return a == Activation::App ? SurrogateKind::App : SurrogateKind::Tanh;
}

ContinuationSchedule::ContinuationSchedule(std::vector<double> betas,
                                           std::size_t plateau_window,
                                           double relative_threshold)
    : betas_(std::move(betas)), window_(plateau_window), threshold_(relative_threshold) {
  if (betas_.empty() || betas_.front() != 1.0)
    throw InvalidArgument("beta schedule must start at 1");
  for (std::size_t i = 1; i < betas_.size(); ++i)
    if (!(betas_[i] > betas_[i - 1]))
      throw InvalidArgument("beta schedule must be strictly increasing");
  if (window_ == 0) throw InvalidArgument("plateau window must be >= 1");
}

ContinuationSchedule ContinuationSchedule::from_config(const RunConfig& cfg) {
  if (cfg.activation == Activation::TwoStep)
    return ContinuationSchedule({1.0}, cfg.plateau_window, cfg.plateau_threshold);
  return ContinuationSchedule(cfg.beta_schedule, cfg.plateau_window, cfg.plateau_threshold);
}

bool ContinuationSchedule::plateaued(std::span<const double> loss_history) const {
  if (loss_history.size() < stage_start_) return false;
  const auto stage = loss_history.subspan(stage_start_);
  if (stage.size() < 2 * window_) return false;
  const auto w = static_cast<std::ptrdiff_t>(window_);
  const auto end = stage.end();
  const double recent = std::accumulate(end - w, end, 0.0) / static_cast<double>(window_);
  const double before = std::accumulate(end - 2 * w, end - w, 0.0) / static_cast<double>(window_);
  const double improvement = (before - recent) / std::max(std::abs(before), 1e-12);
  return improvement < threshold_;
}

ContinuationSchedule advance_stage(ContinuationSchedule schedule,
                                   std::span<const double> loss_history, bool force) {
  if (loss_history.empty()) throw InvalidArgument("advance_stage needs a loss history");
  if (schedule.finished_) return schedule;
  if (!force && !schedule.plateaued(loss_history)) return schedule;
  if (schedule.terminal()) {
    schedule.finished_ = true;
  } else {
    ++schedule.stage_;
    schedule.stage_start_ = loss_history.size();
  }
  return schedule;
}

void CodeSet::validate() const {
  if (bits == 0) throw InvalidArgument("code length must be >= 1");
  if (words.size() != ids.size() * words_per_code())
    throw InvalidArgument("code payload holds " + std::to_string(words.size()) +
                          " words, expected " + std::to_string(ids.size() * words_per_code()));
  const std::size_t tail = bits % 64;
  if (tail != 0) {
    const std::uint64_t unused = ~((std::uint64_t{1} << tail) - 1);
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (words[(i + 1) * words_per_code() - 1] & unused)
        throw InvalidArgument("code " + std::to_string(i) + " has bits set beyond L");
  }
}

CodeSet pack_codes(std::span<const ItemId> ids, std::span<const double> values,
                   std::size_t bits) {
  if (bits == 0) throw InvalidArgument("code length must be >= 1");
  if (values.size() != ids.size() * bits)
    throw InvalidArgument("pack_codes: " + std::to_string(values.size()) +
                          " values for " + std::to_string(ids.size()) + " codes of " +
                          std::to_string(bits) + " bits");
  CodeSet out;
  out.ids.assign(ids.begin(), ids.end());
  out.bits = bits;
  const std::size_t wpc = out.words_per_code();
  out.words.assign(ids.size() * wpc, 0);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t k = 0; k < bits; ++k) {
      const double b = values[i * bits + k];
      if (b == 1.0)
        out.words[i * wpc + k / 64] |= std::uint64_t{1} << (k % 64);
      else if (b != -1.0)
        throw InvalidArgument("pack_codes: entry (" + std::to_string(i) + "," +
                              std::to_string(k) + ") is not +-1");
    }
  return out;
}

std::vector<double> unpack_codes(const CodeSet& codes) {
  const std::size_t wpc = codes.words_per_code();
  std::vector<double> out(codes.n() * codes.bits);
  for (std::size_t i = 0; i < codes.n(); ++i)
    for (std::size_t k = 0; k < codes.bits; ++k)
      out[i * codes.bits + k] = (codes.words[i * wpc + k / 64] >> (k % 64)) & 1u ? 1.0 : -1.0;
  return out;
}

}  // namespace bgan
