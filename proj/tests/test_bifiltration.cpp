#include <doctest.h>

#include <random>
#include <set>

#include "support.hpp"
#include "topobar/bifiltration.hpp"

using namespace topobar;
using namespace testing;

TEST_CASE("slice thresholds") {
  const auto t20 = slice_thresholds(20);
  REQUIRE(t20.size() == 20);
  CHECK(t20.front() == doctest::Approx(0.05));
  CHECK(t20.back() == 1.0);
  CHECK(slice_thresholds(1) == std::vector<double>{1.0});
  CHECK(slice_thresholds(4) == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(slice_thresholds(0), InputError);
}

TEST_CASE("panel keys") {
  const auto keys = panel_keys(PanelMode::sliced);
  CHECK(keys.size() == 160);
  CHECK(std::set<PanelKey>(keys.begin(), keys.end()).size() == 160);
  CHECK(panel_keys(PanelMode::intensity_only).size() == 4);
  CHECK(panel_keys(PanelMode::sliced, 3).size() == 24);

  const PanelKey k{7, Direction::decreasing, Direction::increasing, 1};
  CHECK(k.name() == "s7_Bi_d1");
  CHECK(PanelKey::parse("s7_Bi_d1") == k);
  CHECK(PanelKey{0, Direction::increasing, Direction::decreasing, 0}.name() == "I_d0");
  CHECK(PanelKey::parse("I_d0") == PanelKey{0, Direction::increasing, Direction::decreasing, 0});
  for (const char* bad : {"s0_bi_d0", "s1_xi_d0", "s1_bi_d2", "s1_bi", "", "s-1_bi_d0"}) {
    CHECK_FALSE(PanelKey::parse(bad).has_value());
  }
  for (const auto& key : keys) CHECK(PanelKey::parse(key.name()) == key);
}

TEST_CASE("panel mode names") {
  CHECK(to_string(PanelMode::sliced) == "2d");
  CHECK(parse_panel_mode("1d") == PanelMode::intensity_only);
  CHECK_THROWS_AS(parse_panel_mode("3d"), InputError);
}

TEST_CASE("panels hold every key") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const RoiImage roi = random_roi(rng);
    const BarcodePanel panel = compute_panel(roi);
    CHECK(panel.size() == 160);
    const auto keys = panel_keys(PanelMode::sliced);
    for (std::size_t i = 0; i < keys.size(); ++i) CHECK(panel.barcodes[i].first == keys[i]);
    CHECK(compute_intensity_only(roi).size() == 4);
  }
}

TEST_CASE("last increasing slice equals the intensity-only baseline") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const RoiImage roi = random_roi(rng);
    const BarcodePanel panel = compute_panel(roi);
    const BarcodePanel base = compute_intensity_only(roi);
    for (Direction i : {Direction::increasing, Direction::decreasing}) {
      for (int dim : {0, 1}) {
        CHECK(panel.at({20, Direction::increasing, i, dim}) == base.at({0, Direction::increasing, i, dim}));
        CHECK(panel.at({20, Direction::decreasing, i, dim}) == base.at({0, Direction::increasing, i, dim}));
      }
    }
    // The full complex always has an essential component.
    const auto& full = panel.at({20, Direction::increasing, Direction::increasing, 0}).intervals;
    CHECK(std::any_of(full.begin(), full.end(), [](const Interval& i) { return i.death == kDefaultCap; }));
  }
}

TEST_CASE("slice subcomplexes are nested") {
  std::mt19937_64 rng(47);
  const auto t = slice_thresholds(20);
  for (int trial = 0; trial < 20; ++trial) {
    const RoiImage roi = random_roi(rng);
    const auto k = filter_complex(build_complex(roi), roi.intensity, Direction::increasing);
    for (Direction b : {Direction::increasing, Direction::decreasing}) {
      std::set<std::pair<Simplex, double>> previous;
      for (double threshold : t) {
        const auto sub = restrict_complex(k, [&](VertexId v) { return in_slice(roi.border_dist[v], threshold, b); });
        std::set<std::pair<Simplex, double>> current;
        for (std::size_t i = 0; i < sub.size(); ++i) current.emplace(sub.simplices[i], sub.entry[i]);
        CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
        previous = std::move(current);
      }
      CHECK(previous.size() == k.size());
    }
  }
}

TEST_CASE("constant border distance keeps everything in increasing slices") {
  std::vector<std::uint8_t> in(9, 0);
  in[4] = 1;
  const RoiImage roi = extract_roi(image_from(3, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8}), make_mask(3, 3, in), 0);
  REQUIRE(roi.size() == 1);
  const BarcodePanel panel = compute_panel(roi);
  for (int s = 1; s <= 20; ++s) {
    CHECK(panel.at({s, Direction::increasing, Direction::increasing, 0}).size() == 1);
  }
  CHECK(panel.at({1, Direction::decreasing, Direction::increasing, 0}).empty());
}

TEST_CASE("ring example in the baseline") {
  const BarcodePanel base = compute_intensity_only(ring_roi());
  const Barcode& d1 = base.at({0, Direction::increasing, Direction::increasing, 1});
  REQUIRE(d1.size() == 1);
  CHECK(d1.intervals[0] == Interval{0.0, 1.0});
}

TEST_CASE("constant intensity baseline has one bar from 0") {
  const RoiImage roi = extract_roi(image_from(3, 3, std::vector<double>(9, 5.0)), full_mask(3, 3), 1);
  const BarcodePanel base = compute_intensity_only(roi);
  const Barcode& d0 = base.at({0, Direction::increasing, Direction::increasing, 0});
  REQUIRE(d0.size() == 1);
  CHECK(d0.intervals[0] == Interval{0.0, 1.1});
}

TEST_CASE("panel JSON round trip and determinism") {
  std::mt19937_64 rng(53);
  const RoiImage roi = random_roi(rng);
  BarcodePanel panel = compute_panel(roi);
  panel.image_id = "img_7";
  panel.index = 7;
  const std::string text = panel_to_json(panel);
  const BarcodePanel back = panel_from_json(text);
  CHECK(back.image_id == "img_7");
  CHECK(back.index == 7);
  CHECK(back.mode == PanelMode::sliced);
  CHECK(back.barcodes == panel.barcodes);
  CHECK(panel_to_json(back) == text);

  BarcodePanel again = compute_panel(roi);
  again.image_id = "img_7";
  again.index = 7;
  CHECK(panel_to_json(again) == text);

  const auto dir = temp_dir("panel");
  write_panel(dir / "p.json", panel);
  CHECK(read_text(dir / "p.json") == text);
  CHECK(read_panel(dir / "p.json").barcodes == panel.barcodes);

  BarcodePanel base = compute_intensity_only(roi);
  CHECK(panel_from_json(panel_to_json(base)).barcodes == base.barcodes);
}

TEST_CASE("malformed panel JSON is rejected") {
  CHECK_THROWS_AS(panel_from_json("{"), FormatError);
  CHECK_THROWS_AS(panel_from_json(R"({"image":"a","index":0,"mode":"1d","slices":0,"barcodes":{}})"), FormatError);
  CHECK_THROWS_AS(
      panel_from_json(
          R"({"image":"a","index":0,"mode":"1d","slices":0,"barcodes":{"i_d0":[],"i_d1":[],"I_d0":[],"I_d1":[[0.5,0.2]]}})"),
      FormatError);
  CHECK_NOTHROW(panel_from_json(
      R"({"image":"a","index":0,"mode":"1d","slices":0,"barcodes":{"i_d0":[],"i_d1":[],"I_d0":[],"I_d1":[[0.2,0.5]]}})"));
}
