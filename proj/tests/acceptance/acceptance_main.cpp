// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Usage: doclayout_acceptance <doclayout-binary> <data-dir> <work-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doclayout/ensemble.hpp"
#include "doclayout/evaluation.hpp"
#include "doclayout/geometry.hpp"
#include "doclayout/io.hpp"
#include "doclayout/sweep.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace doclayout;
using testing::rect_mask;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

// ---------------------------------------------------------------------------

Outcome rle_round_trip() {
  std::mt19937 rng(1001);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const BinaryMask m = testing::random_mask(rng, dim(rng), dim(rng), density(rng));
    if (rle_decode(rle_encode(m)) != m) return fail("mask " + std::to_string(i) + " differs");
  }
  return {true, "1000 masks"};
}

Polygon random_polygon(std::mt19937& rng) {
  std::uniform_int_distribution<int> count(3, 9);
  std::uniform_real_distribution<double> coord(-4.0, 36.0);
  std::uniform_int_distribution<int> lattice(-2, 34);
  const bool on_lattice = rng() % 3 == 0;  // half-integer centers hit edges exactly
  std::vector<Point> v(static_cast<std::size_t>(count(rng)));
  for (Point& p : v) {
    p = on_lattice ? Point{lattice(rng) * 0.5 + 0.0, lattice(rng) * 0.5 + 0.0}
                   : Point{coord(rng), coord(rng)};
  }
  return Polygon(std::move(v));
}

Outcome rasterization_oracle() {
  std::mt19937 rng(2002);
  for (int i = 0; i < 200; ++i) {
    const Polygon poly = random_polygon(rng);
    const BinaryMask got = rasterize_polygon(poly, 32, 32);
    const auto want = testing::brute_rasterize(poly, 32, 32);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (got.get(x, y) != want[y][x]) {
          return fail("polygon " + std::to_string(i) + " pixel (" + std::to_string(x) + "," +
                      std::to_string(y) + ")");
        }
      }
    }
  }
  return {true, "200 polygons on 32x32"};
}

bool discretely_convex(const BinaryMask& f, std::mt19937& rng) {
  std::vector<std::pair<int, int>> on;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      if (f.get(x, y)) on.emplace_back(x, y);
    }
  }
  const auto segment_filled = [&](std::pair<int, int> a, std::pair<int, int> b) {
    const int dx = b.first - a.first;
    const int dy = b.second - a.second;
    const int g = std::gcd(std::abs(dx), std::abs(dy));
    for (int k = 1; k < g; ++k) {
      if (!f.get(a.first + dx / g * k, a.second + dy / g * k)) return false;
    }
    return true;
  };
  if (on.size() <= 400) {
    for (std::size_t i = 0; i < on.size(); ++i) {
      for (std::size_t j = i + 1; j < on.size(); ++j) {
        if (!segment_filled(on[i], on[j])) return false;
      }
    }
    return true;
  }
  std::uniform_int_distribution<std::size_t> pick(0, on.size() - 1);
  for (int k = 0; k < 40000; ++k) {
    if (!segment_filled(on[pick(rng)], on[pick(rng)])) return false;
  }
  return true;
}

Outcome hull_fill_properties() {
  BinaryMask ring = BinaryMask::filled(3, 3);
  ring.set(1, 1, false);
  if (mask_area(hull_fill(ring)) != 9) return fail("3x3 ring does not fill to 9");

  std::mt19937 rng(3003);
  std::uniform_int_distribution<int> dim(1, 48);
  std::uniform_real_distribution<double> density(0.0, 0.15);
  for (int i = 0; i < 500; ++i) {
    const int w = dim(rng);
    const int h = dim(rng);
    const BinaryMask m = i % 2 ? testing::random_mask(rng, w, h, density(rng))
                               : testing::random_blobs(rng, w, h, 1 + i % 4);
    const BinaryMask f = hull_fill(m);
    if (mask_combine(m, f, CombineMode::kDifference).area() != 0) {
      return fail("mask " + std::to_string(i) + " not a superset");
    }
    if (hull_fill(f) != f) return fail("mask " + std::to_string(i) + " not idempotent");
    if (!discretely_convex(f, rng)) return fail("mask " + std::to_string(i) + " not convex");
  }
  return {true, "ring=9, 500 masks"};
}

Outcome dice_iou_oracle() {
  std::mt19937 rng(4004);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    // Every 50th pair is empty on one or both sides.
    const BinaryMask a = i % 50 == 0 ? BinaryMask(32, 32) : testing::random_mask(rng, 32, 32, density(rng));
    const BinaryMask b = i % 100 == 0 ? BinaryMask(32, 32) : testing::random_mask(rng, 32, 32, density(rng));
    const auto na = testing::brute_area(a);
    const auto nb = testing::brute_area(b);
    const auto inter = testing::brute_overlap(a, b);
    const double want_dice = na + nb == 0 ? 1.0 : 2.0 * inter / static_cast<double>(na + nb);
    const double want_iou = na + nb - inter == 0 ? 1.0 : inter / static_cast<double>(na + nb - inter);
    if (dice(a, b) != want_dice) return fail("dice differs on pair " + std::to_string(i));
    if (iou(a, b) != want_iou) return fail("iou differs on pair " + std::to_string(i));
    if ((na > 0 || nb > 0) && dice(a, b) < iou(a, b)) return fail("dice < iou on pair " + std::to_string(i));
  }
  return {true, "500 pairs, exact"};
}

// ---------------------------------------------------------------------------
// mAP oracle. Scene masks live on a 48x12 page: truth t is the 4x4 block at
// column 5t, a "partial" prediction covers half of it (IoU exactly 0.5), and
// false positives sit in the bottom strip.

struct SceneMasks {
  std::vector<BinaryMask> truths;
  std::vector<BinaryMask> exact;
  std::vector<BinaryMask> partial;
  BinaryMask fp = rect_mask(48, 12, 0, 8, 4, 12);

  SceneMasks() {
    for (int t = 0; t < 9; ++t) {
      truths.push_back(rect_mask(48, 12, 5 * t, 0, 5 * t + 4, 4));
      exact.push_back(truths.back());
      partial.push_back(rect_mask(48, 12, 5 * t, 0, 5 * t + 4, 2));
    }
  }
};

// Reference labelling: visit predictions by descending confidence (stable),
// each takes the unmatched truth with the highest pixel-counted IoU >= 0.5.
std::vector<bool> reference_flags(const std::vector<const BinaryMask*>& preds,
                                  const std::vector<double>& conf,
                                  const std::vector<BinaryMask>& truths) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return conf[a] > conf[b]; });
  std::vector<bool> taken(truths.size(), false);
  std::vector<bool> flags;
  for (std::size_t p : order) {
    double best = -1.0;
    std::size_t best_t = truths.size();
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (taken[t]) continue;
      const auto inter = testing::brute_overlap(*preds[p], truths[t]);
      const auto uni = testing::brute_area(*preds[p]) + testing::brute_area(truths[t]) - inter;
      const double v = static_cast<double>(inter) / static_cast<double>(uni);
      if (v >= 0.5 && v > best) {
        best = v;
        best_t = t;
      }
    }
    if (best_t < truths.size()) taken[best_t] = true;
    flags.push_back(best_t < truths.size());
  }
  return flags;
}

Outcome map_oracle() {
  const SceneMasks masks;
  std::mt19937 rng(5005);
  std::size_t scenes = 0;
  double worst = 0.0;

  // Each prediction picks a target in {FP, exact t, partial t}.
  const auto check_scene = [&](int num_truths, const std::vector<int>& targets,
                               const std::vector<double>& conf) -> bool {
    const std::vector<BinaryMask> truths(masks.truths.begin(), masks.truths.begin() + num_truths);
    std::vector<const BinaryMask*> preds;
    for (int code : targets) {
      if (code == 0) {
        preds.push_back(&masks.fp);
      } else if (code <= num_truths) {
        preds.push_back(&masks.exact[code - 1]);
      } else {
        preds.push_back(&masks.partial[code - 1 - num_truths]);
      }
    }
    std::vector<ScoredMask> scored;
    for (std::size_t i = 0; i < preds.size(); ++i) scored.push_back({std::cref(*preds[i]), conf[i]});
    const double got = average_precision_50(scored, truths);
    const double want = testing::brute_ap(reference_flags(preds, conf, truths), truths.size());
    worst = std::max(worst, std::abs(got - want));
    ++scenes;
    return std::abs(got - want) <= 1e-12;
  };

  for (int t = 0; t <= 5; ++t) {
    const int codes = 1 + 2 * t;
    for (int p = 0; t + p <= 10; ++p) {
      double combos = std::pow(codes, p);
      const bool exhaustive = combos <= 6000;
      const long long n = exhaustive ? static_cast<long long>(combos) : 3000;
      for (long long k = 0; k < n; ++k) {
        std::vector<int> targets(static_cast<std::size_t>(p));
        long long rest = k;
        for (int& c : targets) {
          if (exhaustive) {
            c = static_cast<int>(rest % codes);
            rest /= codes;
          } else {
            c = static_cast<int>(rng() % static_cast<unsigned>(codes));
          }
        }
        // Distinct confidences, then coarse ties.
        std::vector<double> distinct(static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i) distinct[i] = 0.95 - 0.05 * i;
        std::shuffle(distinct.begin(), distinct.end(), rng);
        std::vector<double> ties(static_cast<std::size_t>(p));
        for (double& c : ties) c = 0.3 + 0.2 * static_cast<double>(rng() % 3);
        if (!check_scene(t, targets, distinct) || !check_scene(t, targets, ties)) {
          return fail("scene with " + std::to_string(t) + " truths, " + std::to_string(p) +
                      " predictions differs by " + std::to_string(worst));
        }
      }
    }
  }
  std::ostringstream detail;
  detail << scenes << " scenes, max |diff| " << worst;
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------

ModelPredictionSet single(const std::string& model, const std::string& id,
                          std::vector<InstancePrediction> preds) {
  ModelPredictionSet s;
  s.model_id = model;
  s.per_document[id] = DocumentPredictions{std::move(preds), true};
  return s;
}

Outcome table_fill_fixture() {
  const DocumentRecord doc("table", 120, 120,
                           {GroundTruthInstance{ClassLabel::kTable, {testing::rect_polygon(10, 10, 110, 110)}}});
  BinaryMask holed = rect_mask(120, 120, 10, 10, 110, 110);
  for (int y = 40; y < 80; ++y) {
    for (int x = 35; x < 85; ++x) holed.set(x, y, false);
  }
  const auto general = single("general", "table", {{ClassLabel::kTable, 0.9, holed, "general"}});
  EnsembleConfig no_fill;
  no_fill.hull_fill_classes = ClassSet{};
  const double before = evaluate_document(run_pipeline(doc, general, no_fill), doc)[ClassLabel::kTable];
  const double after = evaluate_document(run_pipeline(doc, general, EnsembleConfig{}), doc)[ClassLabel::kTable];
  std::ostringstream detail;
  detail.precision(17);
  detail << "before " << before << ", after " << after;
  const bool ok = std::abs(before - 16000.0 / 18000.0) <= 1e-12 && after == 1.0;
  return {ok, detail.str()};
}

Outcome image_override_fixture() {
  const DocumentRecord doc("figure", 80, 60,
                           {GroundTruthInstance{ClassLabel::kImage, {testing::rect_polygon(10, 10, 70, 50)}}});
  BinaryMask gapped = rect_mask(80, 60, 10, 10, 70, 50);
  for (int y = 20; y < 40; ++y) {
    for (int x = 25; x < 55; ++x) gapped.set(x, y, false);
  }
  const auto general = single("general", "figure", {{ClassLabel::kImage, 0.8, gapped, "general"}});
  const auto image_model = single(
      "image", "figure", {{ClassLabel::kImage, 0.9, rect_mask(80, 60, 10, 10, 70, 50), "image"}});
  EnsembleConfig on;
  EnsembleConfig off;
  off.image_override_enabled = false;
  const double with = evaluate_document(run_pipeline(doc, general, image_model, on), doc)[ClassLabel::kImage];
  const double without = evaluate_document(run_pipeline(doc, general, image_model, off), doc)[ClassLabel::kImage];
  std::ostringstream detail;
  detail << "override " << with << " > general-only " << without;
  return {with > without, detail.str()};
}

Outcome gate_soundness() {
  std::mt19937 rng(8008);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  int opened = 0;
  for (int d = 0; d < 200; ++d) {
    const std::string id = "doc" + std::to_string(d);
    const DocumentRecord doc(id, 24, 24, {});
    std::vector<InstancePrediction> g;
    std::vector<InstancePrediction> im;
    const int ng = static_cast<int>(rng() % 6);
    const int ni = static_cast<int>(rng() % 4);
    for (int i = 0; i < ng; ++i) {
      g.emplace_back(kAllClasses[rng() % 4], conf(rng), testing::random_blobs(rng, 24, 24, 1), "general");
    }
    for (int i = 0; i < ni; ++i) {
      im.emplace_back(ClassLabel::kImage, conf(rng), testing::random_blobs(rng, 24, 24, 1), "image");
    }
    const EnsembleConfig config;
    const auto result = run_pipeline(doc, single("general", id, g), single("image", id, im), config);
    const auto kept = filter_by_confidence(g, config);
    const bool gate = std::any_of(kept.begin(), kept.end(),
                                  [](const auto& p) { return p.label == ClassLabel::kImage; });
    bool specialist_present = false;
    for (ClassLabel c : kAllClasses) {
      for (const auto& p : result.surviving_instances[c]) specialist_present |= p.source_model == "image";
    }
    if (specialist_present && !gate) return fail("image-model instance leaked into " + id);
    opened += gate ? 1 : 0;
  }
  return {true, "200 documents, gate open on " + std::to_string(opened)};
}

Outcome threshold_monotonicity() {
  std::mt19937 rng(9009);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  for (int list = 0; list < 100; ++list) {
    std::vector<InstancePrediction> preds;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      preds.emplace_back(kAllClasses[rng() % 4], conf(rng), BinaryMask(2, 2), "general");
    }
    std::vector<double> thresholds(10);
    for (double& t : thresholds) t = conf(rng);
    std::sort(thresholds.begin(), thresholds.end());
    ClassMap<long> previous = ClassMap<long>::generate([](ClassLabel) { return 1L << 30; });
    for (double t : thresholds) {
      EnsembleConfig config;
      for (ClassLabel c : kAllClasses) config.threshold_per_class[c] = t;
      ClassMap<long> counts{};
      for (const auto& p : filter_by_confidence(preds, config)) ++counts[p.label];
      for (ClassLabel c : kAllClasses) {
        if (counts[c] > previous[c]) return fail("count grew on list " + std::to_string(list));
      }
      previous = counts;
    }
  }
  return {true, "100 lists x 10 thresholds"};
}

Outcome sweep_correctness() {
  const ClassMap<std::pair<int, double>> planted{{std::pair{640, 0.25}, std::pair{480, 0.25},
                                                  std::pair{640, 0.35}, std::pair{800, 0.45}}};
  const auto fx = testing::planted_sweep(planted, kDefaultSweepSizes);
  const SweepGrid grid = run_sweep(fx.docs, fx.predictions, kDefaultSweepSizes,
                                   kDefaultSweepThresholds, EnsembleConfig{});
  const std::size_t cells = grid.image_sizes().size() * grid.thresholds().size();
  if (cells != 20) return fail(std::to_string(cells) + " cells");
  const OptimalSelection sel = select_optimal(grid);
  const auto scan = testing::scan_optimal(grid);
  std::ostringstream detail;
  detail << "20 cells;";
  for (ClassLabel c : kAllClasses) {
    detail << ' ' << class_name(c) << '=' << sel.per_class[c].image_size << '@'
           << sel.per_class[c].threshold;
    if (sel.per_class[c] != fx.planted[c]) return fail("wrong cell for " + std::string(class_name(c)));
    if (sel.per_class[c] != scan[c]) return fail("scan disagrees for " + std::string(class_name(c)));
  }
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

Outcome cli_determinism(const std::string& cli, const fs::path& data, const fs::path& work) {
  const fs::path config = data / ".." / ".." / "configs" / "paper.toml";
  std::vector<std::string> submissions;
  for (int round = 0; round < 2; ++round) {
    const fs::path dir = work / ("round" + std::to_string(round));
    fs::remove_all(dir);
    const std::string fuse = shell_quote(cli) + " fuse --dataset " + shell_quote((data / "dataset.json").string()) +
                             " --general " + shell_quote((data / "general.json").string()) +
                             " --image-model " + shell_quote((data / "image_model.json").string()) +
                             " --config " + shell_quote(config.string()) + " --out-dir " +
                             shell_quote(dir.string()) + " > /dev/null";
    if (std::system(fuse.c_str()) != 0) return fail("fuse failed");
    const std::string submit = shell_quote(cli) + " submit --fused " + shell_quote((dir / "fused.json").string()) +
                               " --out " + shell_quote((dir / "final.csv").string()) + " > /dev/null";
    if (std::system(submit.c_str()) != 0) return fail("submit failed");
    submissions.push_back(read_text_file(dir / "final.csv"));
  }
  if (submissions[0] != submissions[1]) return fail("submissions differ");
  if (submissions[0].empty()) return fail("empty submission");
  return {true, std::to_string(submissions[0].size()) + " identical bytes"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: " << argv[0] << " <doclayout-binary> <data-dir> <work-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path data = argv[2];
  const fs::path work = argv[3];
  fs::create_directories(work);

  const std::vector<Criterion> criteria = {
      {"rle-round-trip", 5, rle_round_trip},
      {"rasterization-oracle", 30, rasterization_oracle},
      {"hull-fill-properties", 60, hull_fill_properties},
      {"dice-iou-oracle", 0, dice_iou_oracle},
      {"map50-oracle", 0, map_oracle},
      {"table-fill-fixture", 0, table_fill_fixture},
      {"image-override-fixture", 0, image_override_fixture},
      {"gate-soundness", 0, gate_soundness},
      {"threshold-monotonicity", 0, threshold_monotonicity},
      {"sweep-correctness", 60, sweep_correctness},
      {"end-to-end-determinism", 0, [&] { return cli_determinism(cli, data, work); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.ok && c.budget_seconds > 0 && seconds > c.budget_seconds) {
      outcome = fail(outcome.detail + "; over the " + std::to_string(c.budget_seconds) + " s budget");
    }
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.3fs", seconds);
    std::cout << (outcome.ok ? "PASS " : "FAIL ") << c.name << " (" << timing << ") " << outcome.detail
              << '\n';
    failures += outcome.ok ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << '\n';
  return failures == 0 ? 0 : 1;
}
