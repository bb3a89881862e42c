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

// Command-line driver: dataset synthesis, neighborhood construction,
// training, encoding, search, evaluation, reconstruction and ablation.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bgan/config.hpp"
#include "bgan/data_io.hpp"
#include "bgan/error.hpp"
#include "bgan/evaluation.hpp"
#include "bgan/kernels.hpp"
#include "bgan/model.hpp"
#include "bgan/neighborhood.hpp"
#include "bgan/retrieval.hpp"
#include "bgan/trainer.hpp"
#include "bgan/version.hpp"

using namespace bgan;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

// -- synth --------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  std::size_t per_class = 220, classes = 3, channels = 1, height = 16, width = 16, query = 60;
  std::uint64_t seed = 0;
};

void run_synth(const SynthArgs& a) {
  const SyntheticDataset d =
      make_synthetic_dataset(a.seed, a.per_class, a.classes, {a.channels, a.height, a.width});
  if (a.query >= d.images.n()) throw InvalidArgument("--query must leave training items");
  std::vector<std::size_t> train, query;
  for (std::size_t i = 0; i < d.images.n(); ++i)
    (i + a.query < d.images.n() ? train : query).push_back(i);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  save_images(select_rows(d.images, train), dir / "train.images");
  save_images(select_rows(d.images, query), dir / "query.images");
  save_features(select_rows(d.features, train), dir / "train.features");
  save_features(select_rows(d.features, query), dir / "query.features");
  save_labels(d.labels, dir / "labels.json");
  std::printf("wrote %zu train and %zu query items to %s\n", train.size(), query.size(),
              dir.string().c_str());
}

// -- neighborhood -------------------------------------------------------------

struct NeighborhoodArgs {
  std::string features, out, labels;
  std::size_t k1 = 20, k2 = 30;
};

void run_neighborhood(const NeighborhoodArgs& a) {
  const FeatureSet f = load_features(a.features);
  const auto lists = cosine_knn(f, a.k1);
  const NeighborhoodMatrix s1 = build_s1(lists, f.n());
  const NeighborhoodMatrix s = build_final_s(s1, lists, expand_neighbors(lists, a.k2));
  save_neighborhood(s, a.out);
  std::printf("items %zu, positive pairs %zu, mean positives %.2f (before expansion %.2f)\n", s.n(),
              s.positive_pair_count(), s.mean_positive_count(), s1.mean_positive_count());
  if (!a.labels.empty()) {
    // Align the label rows with the feature rows.
    const LabelSet all = load_labels(a.labels);
    const auto row_of = index_by_id(all.ids);
    std::vector<std::size_t> rows;
    for (ItemId id : f.ids) {
      const auto it = row_of.find(id);
      if (it == row_of.end()) throw InvalidArgument("no labels for item " + std::to_string(id));
      rows.push_back(it->second);
    }
    const LabelSet labels = select_rows(all, rows);
    std::printf("precision %.4f (before expansion %.4f)\n", neighborhood_precision(s, labels),
                neighborhood_precision(s1, labels));
  }
}

// -- train --------------------------------------------------------------------

struct TrainArgs {
  std::string config, images, neighborhood, out_dir, init;
  bool quiet = false;
};

void run_train(const TrainArgs& a) {
  const RunConfig cfg = config_or_default(a.config);
  const ImageSet images = load_images(a.images);
  const NeighborhoodMatrix s = load_neighborhood(a.neighborhood);
  TrainOptions opt;
  opt.out_dir = a.out_dir;
  if (!a.quiet)
    opt.on_epoch = [](const EpochRecord& r) {
      std::printf("epoch %3zu  stage %zu  beta %-5g %s\n", r.epoch, r.stage, r.beta,
                  r.loss.describe().c_str());
      std::fflush(stdout);
    };
  const TrainResult r = a.init.empty()
                            ? train(cfg, images, s, opt)
                            : train(make_train_state(cfg, load_checkpoint(a.init)), images, s, opt);
  save_checkpoint(r.model, fs::path(a.out_dir) / "final");
  std::printf("%zu epochs, %zu stages; checkpoint %s\n", r.log.size(), r.stages_completed,
              (fs::path(a.out_dir) / "final").string().c_str());
}

// -- encode / search / eval ----------------------------------------------------

struct EncodeArgs {
  std::string checkpoint, images, out;
};

void run_encode(const EncodeArgs& a) {
  BganModel m = load_checkpoint(a.checkpoint);
  const CodeSet codes = encode_codes(m, load_images(a.images));
  save_codes(codes, a.out);
  std::printf("encoded %zu items to %zu-bit codes\n", codes.n(), codes.bits);
}

struct SearchArgs {
  std::string codes, query, out;
  std::size_t k = 10;
};

void run_search(const SearchArgs& a) {
  const HammingIndex index(load_codes(a.codes));
  const CodeSet q = load_codes(a.query);
  if (q.bits != index.bits())
    throw InvalidArgument("query codes have " + std::to_string(q.bits) + " bits, database " +
                          std::to_string(index.bits()));
  const std::size_t k = std::min(a.k, index.size());
  std::ostringstream csv;
  csv << "query_id,rank,item_id,distance\n";
  for (std::size_t i = 0; i < q.n(); ++i) {
    const RankedResult top = index.top_k(q.code(i), k);
    for (std::size_t r = 0; r < top.size(); ++r)
      csv << q.ids[i] << ',' << r + 1 << ',' << top[r].id << ',' << top[r].distance << '\n';
  }
  if (a.out.empty())
    std::cout << csv.str();
  else
    write_text(a.out, csv.str());
}

struct EvalArgs {
  std::string codes, query_codes, labels, out, pr_csv;
  std::size_t map_at = 0;
  std::uint64_t random_seed = 1;
};

void run_eval(const EvalArgs& a) {
  const CodeSet db = load_codes(a.codes);
  const CodeSet q = load_codes(a.query_codes);
  const LabelSet labels = load_labels(a.labels);
  EvalOptions opt;
  if (a.map_at > 0) opt.map_at = a.map_at;
  const EvalReport r = evaluate(HammingIndex(db), q, labels, opt);
  write_text(a.out, r.to_json());
  if (!a.pr_csv.empty()) write_text(a.pr_csv, r.pr_csv());
  std::printf("mAP %.4f over %zu queries (%zu excluded); random-code mAP %.4f\n", r.map,
              r.per_query.size(), r.excluded_queries.size(),
              random_code_map(db, q, labels, a.random_seed, opt.map_at));
  for (const auto& [k, p] : r.precision_at) std::printf("P@%zu %.4f\n", k, p);
}

// -- recon ----------------------------------------------------------------------

struct ReconArgs {
  std::string checkpoint, images, out;
  std::size_t count = 16;
};

// Rows of (original, reconstruction) pairs; grey PGM, or PPM for 3 channels.
void run_recon(const ReconArgs& a) {
  BganModel m = load_checkpoint(a.checkpoint);
  const ImageSet all = load_images(a.images);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < std::min(a.count, all.n()); ++i) rows.push_back(i);
  const ImageSet images = select_rows(all, rows);
  const Tensor recon = reconstruct(m, images);
  const std::size_t C = images.channels, H = images.height, W = images.width;
  const std::size_t pad = 1, cell_w = 2 * W + 3 * pad, cell_h = H + pad;
  const std::size_t out_w = cell_w, out_h = rows.size() * cell_h + pad;
  const bool color = C == 3;
  const std::size_t planes = color ? 3 : 1;
  std::vector<unsigned char> px(out_w * out_h * planes, 255);
  auto put = [&](std::size_t y, std::size_t x, std::size_t c, double v) {
    v = std::clamp(v, 0.0, 1.0);
    px[(y * out_w + x) * planes + c] = static_cast<unsigned char>(v * 255.0 + 0.5);
  };
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t c = 0; c < planes; ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
          const std::size_t i = ((n * C + c) * H + y) * W + x;
          const std::size_t oy = pad + n * cell_h + y;
          put(oy, pad + x, c, images.pixels[i]);
          put(oy, 2 * pad + W + x, c, recon[i]);
        }
  std::ostringstream out;
  out << (color ? "P6\n" : "P5\n") << out_w << ' ' << out_h << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  write_text(a.out, out.str());
  std::printf("wrote %zu original/reconstruction pairs to %s\n", rows.size(), a.out.c_str());
}

// -- ablate -------------------------------------------------------------------

struct AblateArgs {
  std::string config, images, neighborhood, query_images, labels, out;
  std::vector<std::string> modes{"n", "n+c", "n+a", "full"};
  std::vector<std::string> activations{"app", "tanh", "two_step"};
  std::vector<std::size_t> bits;
  std::vector<std::uint64_t> seeds;
};

void run_ablate(const AblateArgs& a) {
  const RunConfig base = config_or_default(a.config);
  AblationData d{load_images(a.images), load_neighborhood(a.neighborhood),
                 load_images(a.query_images), load_labels(a.labels)};
  AblationGrid grid;
  grid.modes.clear();
  for (const auto& m : a.modes) grid.modes.push_back(parse_loss_mode(m));
  grid.activations.clear();
  for (const auto& act : a.activations) grid.activations.push_back(parse_activation(act));
  grid.bits = a.bits;
  grid.seeds = a.seeds;
  const std::string csv = ablation_csv(ablation_run(base, grid, d));
  std::cout << csv;
  if (!a.out.empty()) write_text(a.out, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised binary hashing with an adversarial autoencoder"};
  app.set_version_flag("--version", std::string(kVersionString));
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "Kernel variant: scalar or avx2 (default: best available)");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic labelled grating dataset");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--per-class", synth.per_class, "Items per class");
  c_synth->add_option("--classes", synth.classes, "Number of classes");
  c_synth->add_option("--channels", synth.channels, "Image channels");
  c_synth->add_option("--height", synth.height, "Image height");
  c_synth->add_option("--width", synth.width, "Image width");
  c_synth->add_option("--query", synth.query, "Trailing items held out as queries");
  c_synth->add_option("--seed", synth.seed, "Random seed");

  NeighborhoodArgs nb;
  auto* c_nb = app.add_subcommand("neighborhood", "Build the pseudo-similarity structure");
  c_nb->add_option("--features", nb.features, "Feature file")->required();
  c_nb->add_option("--k1", nb.k1, "Nearest neighbours per item");
  c_nb->add_option("--k2", nb.k2, "Expansion candidates per item (0 disables)");
  c_nb->add_option("--out", nb.out, "Output neighborhood file")->required();
  c_nb->add_option("--labels", nb.labels, "Labels, to report precision");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model");
  c_train->add_option("--config", tr.config, "Run config JSON (defaults when omitted)");
  c_train->add_option("--images", tr.images, "Training images")->required();
  c_train->add_option("--neighborhood", tr.neighborhood, "Neighborhood over the images")->required();
  c_train->add_option("--out-dir", tr.out_dir, "Log, checkpoints and manifest")->required();
  c_train->add_option("--init", tr.init, "Start from this checkpoint stem");
  c_train->add_flag("--quiet", tr.quiet, "No per-epoch output");

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode", "Encode images to binary codes");
  c_enc->add_option("--checkpoint", enc.checkpoint, "Checkpoint stem")->required();
  c_enc->add_option("--images", enc.images, "Images")->required();
  c_enc->add_option("--out", enc.out, "Output code file")->required();

  SearchArgs se;
  auto* c_search = app.add_subcommand("search", "Hamming ranking of query codes");
  c_search->add_option("--codes", se.codes, "Database codes")->required();
  c_search->add_option("--query", se.query, "Query codes")->required();
  c_search->add_option("--k", se.k, "Results per query");
  c_search->add_option("--out", se.out, "CSV output (stdout when omitted)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Retrieval metrics");
  c_eval->add_option("--codes", ev.codes, "Database codes")->required();
  c_eval->add_option("--query-codes", ev.query_codes, "Query codes")->required();
  c_eval->add_option("--labels", ev.labels, "Labels covering database and queries")->required();
  c_eval->add_option("--out", ev.out, "Report JSON")->required();
  c_eval->add_option("--map-at", ev.map_at, "Cap the ranking used by mAP (0: full)");
  c_eval->add_option("--pr-csv", ev.pr_csv, "Write the precision-recall curve as CSV");
  c_eval->add_option("--random-seed", ev.random_seed, "Seed of the random-code baseline");

  ReconArgs re;
  auto* c_recon = app.add_subcommand("recon", "Reconstruct images from their codes");
  c_recon->add_option("--checkpoint", re.checkpoint, "Checkpoint stem")->required();
  c_recon->add_option("--images", re.images, "Images")->required();
  c_recon->add_option("--out", re.out, "Output PGM/PPM grid")->required();
  c_recon->add_option("--count", re.count, "Number of images");

  AblateArgs ab;
  auto* c_ab = app.add_subcommand("ablate", "Loss and activation ablation grid");
  c_ab->add_option("--config", ab.config, "Base run config JSON");
  c_ab->add_option("--images", ab.images, "Training images")->required();
  c_ab->add_option("--neighborhood", ab.neighborhood, "Neighborhood over the images")->required();
  c_ab->add_option("--query-images", ab.query_images, "Query images")->required();
  c_ab->add_option("--labels", ab.labels, "Labels")->required();
  c_ab->add_option("--modes", ab.modes, "Loss modes: n, n+c, n+a, full");
  c_ab->add_option("--activations", ab.activations, "app, tanh, two_step");
  c_ab->add_option("--bits", ab.bits, "Code lengths");
  c_ab->add_option("--seeds", ab.seeds, "Seeds");
  c_ab->add_option("--out", ab.out, "CSV output");

  std::string config_out;
  auto* c_cfg = app.add_subcommand("config", "Write the default run config");
  c_cfg->add_option("--out", config_out, "Output JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!isa.empty())
      kernels::set_active_isa(isa == "scalar" ? kernels::Isa::Scalar
                              : isa == "avx2" ? kernels::Isa::Avx2
                                              : throw InvalidArgument("unknown --isa " + isa));
    if (*c_synth) run_synth(synth);
    if (*c_nb) run_neighborhood(nb);
    if (*c_train) run_train(tr);
    if (*c_enc) run_encode(enc);
    if (*c_search) run_search(se);
    if (*c_eval) run_eval(ev);
    if (*c_recon) run_recon(re);
    if (*c_ab) run_ablate(ab);
    if (*c_cfg) save_config(RunConfig{}, config_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bgan: %s\n", e.what());
    return 1;
  }
  return 0;
}
