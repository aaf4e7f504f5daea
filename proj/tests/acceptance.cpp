// Acceptance run: one [PASS]/[FAIL] line per criterion, exit status 0 only
// when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <json.hpp>

#include "support.hpp"
#include "topobar/bifiltration.hpp"
#include "topobar/learn.hpp"
#include "topobar/matching.hpp"
#include "topobar/svm.hpp"
#include "topobar/synth.hpp"

using namespace topobar;
using namespace testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

int sh(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

Outcome persistence_oracle() {
  std::mt19937_64 rng(2024);
  std::size_t checks = 0;
  for (int image = 0; image < 100; ++image) {
    const RoiImage roi = random_roi(rng, 8);
    for (Direction d : {Direction::increasing, Direction::decreasing}) {
      const auto k = filter_complex(build_complex(roi), roi.intensity, d);
      const auto bars = compute_barcodes(k);
      for (double t : distinct_entries(k)) {
        const BettiNumbers b = betti_at(k, t);
        if (bars.dim0.alive_at(t) != b.b0 || bars.dim1.alive_at(t) != b.b1) {
          return {false, "mismatch on image " + std::to_string(image) + " at t=" + std::to_string(t)};
        }
        ++checks;
      }
    }
  }
  return {true, "100 images, " + std::to_string(checks) + " thresholds x 2 dims agree"};
}

Outcome ring_example() {
  const RoiImage roi = ring_roi();
  const auto k = filter_complex(build_complex(roi), roi.intensity, Direction::increasing);
  const Barcode d1 = compute_barcodes(k).dim1;
  const bool bars_ok = d1.size() == 1 && d1.intervals[0].birth == 0.0 && d1.intervals[0].death == 1.0;
  const bool betti_ok = betti_at(k, 0.0).b1 == 1 && betti_at(k, 0.5).b1 == 1 && betti_at(k, 1.0).b1 == 0;
  std::ostringstream s;
  s << "dim1 = {";
  for (const auto& i : d1.intervals) s << "[" << i.birth << ", " << i.death << "]";
  s << "}";
  return {bars_ok && betti_ok, s.str()};
}

Outcome matching_oracle() {
  std::mt19937_64 rng(77);
  double worst = 0;
  for (int pair = 0; pair < 500; ++pair) {
    const Barcode a = pair % 2 ? random_barcode(rng, 5) : random_real_barcode(rng, 5);
    const Barcode b = pair % 2 ? random_barcode(rng, 5) : random_real_barcode(rng, 5);
    worst = std::max(worst, std::abs(barcode_distance(a, b) - brute_force_distance(a, b)));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "500 pairs, max |D - brute| = %.3g", worst);
  return {worst <= 1e-9, buf};
}

Outcome metric_axioms() {
  std::mt19937_64 rng(91);
  int violations = 0;
  for (int triple = 0; triple < 200; ++triple) {
    const Barcode a = random_real_barcode(rng, 8), b = random_real_barcode(rng, 8), c = random_real_barcode(rng, 8);
    const double ab = barcode_distance(a, b), ba = barcode_distance(b, a);
    const double ac = barcode_distance(a, c), bc = barcode_distance(b, c);
    Barcode shuffled = a;
    std::shuffle(shuffled.intervals.begin(), shuffled.intervals.end(), rng);
    if (std::abs(ab - ba) > 1e-9) ++violations;
    if (ab < 0 || ac < 0 || bc < 0) ++violations;
    if (barcode_distance(a, shuffled) > 1e-9) ++violations;
    if (a.intervals != b.intervals && ab <= 1e-9) ++violations;
    if (ac > ab + bc + 1e-9) ++violations;
  }
  return {violations == 0, "200 triples, " + std::to_string(violations) + " violations"};
}

Outcome panel_contract() {
  std::size_t nesting_checks = 0;
  const auto thresholds = slice_thresholds(kDefaultSlices);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto cls = static_cast<SynthClass>(i % 3);
    const SynthSample s = generate({cls, 14, 24, 0.1, 1000 + i});
    const RoiImage roi = extract_roi(s.image, s.mask);
    if (compute_panel(roi).size() != 160) return {false, "sliced panel size differs from 160"};
    if (compute_intensity_only(roi).size() != 4) return {false, "baseline panel size differs from 4"};
    const SimplicialComplex complex = build_complex(roi);
    for (Direction id : {Direction::increasing, Direction::decreasing}) {
      const auto k = filter_complex(complex, roi.intensity, id);
      for (Direction bd : {Direction::increasing, Direction::decreasing}) {
        std::set<std::pair<Simplex, double>> previous;
        for (double t : thresholds) {
          const auto sub = restrict_complex(k, [&](VertexId v) { return in_slice(roi.border_dist[v], t, bd); });
          std::set<std::pair<Simplex, double>> current;
          for (std::size_t j = 0; j < sub.size(); ++j) current.emplace(sub.simplices[j], sub.entry[j]);
          if (!std::includes(current.begin(), current.end(), previous.begin(), previous.end())) {
            return {false, "slice nesting broken on image " + std::to_string(i)};
          }
          previous = std::move(current);
          ++nesting_checks;
        }
      }
    }
  }
  return {true, "10 images: 160 / 4 barcodes, " + std::to_string(nesting_checks) + " nested slices"};
}

double embedding_error(const DistanceMatrix& d) {
  const Embedding e = cmds_embed(d, 2);
  double worst = 0;
  for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.values.rows(); ++j) {
      worst = std::max(worst, std::abs((e.coords.row(i) - e.coords.row(j)).norm() - d.values(i, j)));
    }
  }
  return worst;
}

Outcome cmds() {
  DistanceMatrix tri{{"a", "b", "c"}, Eigen::MatrixXd(3, 3)};
  tri.values << 0, 3, 4, 3, 0, 5, 4, 5, 0;
  DistanceMatrix square{{"a", "b", "c", "d"}, Eigen::MatrixXd(4, 4)};
  const double r2 = std::sqrt(2.0);
  square.values << 0, 1, r2, 1, 1, 0, 1, r2, r2, 1, 0, 1, 1, r2, 1, 0;
  const double e1 = embedding_error(tri), e2 = embedding_error(square);
  char buf[96];
  std::snprintf(buf, sizeof buf, "max error 3-4-5 %.2g, unit square %.2g", e1, e2);
  return {e1 <= 1e-6 && e2 <= 1e-6, buf};
}

Outcome svm_sanity() {
  SplitMix64 rng(7);
  Eigen::MatrixXd x(40, 2);
  std::vector<std::string> y;
  for (int i = 0; i < 40; ++i) {
    const double c = i % 2 ? 2.0 : -2.0;
    x(i, 0) = c + 0.5 * rng.gaussian();
    x(i, 1) = 0.5 * rng.gaussian();
    y.push_back(i % 2 ? "b" : "a");
  }
  const double acc = loocv(x, y, {1.0, 10.0, 1e-3}).accuracy();

  Eigen::MatrixXd two(2, 1);
  two << -1, 1;
  const KernelModel m = svm_train(two, {"A", "B"}, {1.0, 1e6, 1e-3});
  Eigen::VectorXd origin(1);
  origin << 0.0;
  const double at_zero = m.decision(m.machines[0], origin);
  Eigen::VectorXd left(1), right(1);
  left << -1;
  right << 1;
  const bool sides = m.predict(left) == "A" && m.predict(right) == "B";
  char buf[128];
  std::snprintf(buf, sizeof buf, "blobs LOOCV %.1f%%, 2-point decision(0) = %.2g", 100 * acc, at_zero);
  return {acc >= 0.95 && std::abs(at_zero) <= 1e-9 && sides, buf};
}

struct PipelineRun {
  fs::path root;
  double accuracy_1d = 0, accuracy_2d = 0;
  int status = 0;
};

PipelineRun run_pipeline(const fs::path& root, const std::string& env) {
  PipelineRun r{root};
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string exe = env + " " + TOPOBAR_EXE;
  const std::string log = " >> " + q(root / "log.txt") + " 2>&1";
  r.status |= sh(exe + " synth --out " + q(root / "data") + " --seed 1 --per-class 20 --noise 0.1" + log);
  const fs::path manifest = root / "data" / "manifest.csv";
  for (const char* mode : {"1d", "2d"}) {
    const fs::path panels = root / (std::string("panels_") + mode);
    const fs::path dist = root / (std::string("dist_") + mode + ".csv");
    const fs::path out = root / (std::string("report_") + mode + ".json");
    r.status |= sh(exe + " extract --mode " + mode + " --manifest " + q(manifest) + " --out " + q(panels) + log);
    r.status |= sh(exe + " distmat --panels " + q(panels) + " --out " + q(dist) + log);
    r.status |= sh(exe + " classify --distmat " + q(dist) + " --manifest " + q(manifest) + " --mode " + mode +
                   " --out " + q(out) + log);
    if (r.status == 0) {
      const auto report = nlohmann::json::parse(read_text(out));
      (std::string(mode) == "1d" ? r.accuracy_1d : r.accuracy_2d) = report["accuracy"].get<double>();
    }
  }
  return r;
}

PipelineRun first_run;

Outcome directional_benchmark() {
  first_run = run_pipeline(fs::temp_directory_path() / "topobar_acceptance_a", "");
  if (first_run.status != 0) return {false, "pipeline failed, see " + (first_run.root / "log.txt").string()};
  std::size_t sliced = 0, baseline = 0;
  for (const auto& e : fs::directory_iterator(first_run.root / "panels_2d")) sliced += read_panel(e.path()).size() == 160;
  for (const auto& e : fs::directory_iterator(first_run.root / "panels_1d")) baseline += read_panel(e.path()).size() == 4;
  char buf[160];
  std::snprintf(buf, sizeof buf, "1d %.2f%% vs 2d %.2f%% LOOCV (60 images; %zu/60 panels with 160, %zu/60 with 4)",
                100 * first_run.accuracy_1d, 100 * first_run.accuracy_2d, sliced, baseline);
  const bool pass = first_run.accuracy_2d > first_run.accuracy_1d && first_run.accuracy_2d >= 0.8 && sliced == 60 &&
                    baseline == 60;
  return {pass, buf};
}

Outcome determinism() {
  if (first_run.status != 0 || first_run.root.empty()) return {false, "first pipeline run unavailable"};
  // Second run with a different worker count to vary the schedule.
  const PipelineRun second = run_pipeline(fs::temp_directory_path() / "topobar_acceptance_b", "TOPOBAR_THREADS=3");
  if (second.status != 0) return {false, "second pipeline run failed"};
  std::size_t compared = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(first_run.root)) {
    if (!e.is_regular_file() || e.path().filename() == "log.txt") continue;
    const fs::path rel = fs::relative(e.path(), first_run.root);
    ++compared;
    if (read_text(e.path()) != read_text(second.root / rel)) ++differing;
  }
  // Panel contract repeated on the same images.
  const Outcome again = panel_contract();
  return {differing == 0 && compared > 0 && again.pass,
          std::to_string(compared) + " files compared (images, panels, matrices, reports), " +
              std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  report(1, "persistence-oracle equivalence", persistence_oracle);
  report(2, "ring example", ring_example);
  report(3, "matching-metric oracle", matching_oracle);
  report(4, "metric axioms", metric_axioms);
  report(5, "panel contract", panel_contract);
  report(6, "CMDS reproduction", cmds);
  report(7, "SVM sanity", svm_sanity);
  report(8, "directional 1d vs 2d benchmark", directional_benchmark);
  report(9, "determinism", determinism);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
