// topobar: barcode features, matching distances and SVM classification for
// masked grayscale images.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "topobar/bifiltration.hpp"
#include "topobar/image_io.hpp"
#include "topobar/learn.hpp"
#include "topobar/matching.hpp"
#include "topobar/parallel.hpp"
#include "topobar/svg.hpp"
#include "topobar/svm.hpp"
#include "topobar/synth.hpp"

namespace fs = std::filesystem;
using namespace topobar;

namespace {

struct Range {
  int lo = 0;
  int hi = 0;
};

Range parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    Range r{std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    if (r.lo > r.hi) throw std::invalid_argument(text);
    return r;
  } catch (const std::exception&) {
    throw InputError("bad exponent range '" + text + "' (expected lo:hi)");
  }
}

// Defaults, overridden by a key=value config file, overridden by flags.
struct RunConfig {
  int border = kDefaultBorderWidth;
  int slices = kDefaultSlices;
  double cap = kDefaultCap;
  std::string mode = "2d";
  std::string sigma_range = "-8:14";
  std::string c_range = "-5:15";
  bool standardize = false;
  std::uint64_t seed = 1;
  int per_class = 20;
  double noise = 0.1;
  int min_size = 14;
  int max_size = 24;
};

std::map<std::string, std::string> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(path.string() + " line " + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    std::replace(key.begin(), key.end(), '-', '_');
    out[key] = value;
  }
  return out;
}

// Binds a flag to a RunConfig field and remembers the config-file key so an
// unset flag can fall back to the file.
class ConfigBinder {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& field, const std::string& help) {
    CLI::Option* opt = app->add_option(flag, field, help)->capture_default_str();
    bindings_.push_back({opt, key});
    setters_[key] = [&field, key](const std::string& v) {
      if (!CLI::detail::lexical_cast(v, field)) throw InputError("config: bad value for " + key + ": " + v);
    };
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& flag, const std::string& key, bool& field, const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, field, help);
    bindings_.push_back({opt, key});
    setters_[key] = [&field, key](const std::string& v) {
      if (v == "1" || v == "true" || v == "yes" || v == "on") field = true;
      else if (v == "0" || v == "false" || v == "no" || v == "off") field = false;
      else throw InputError("config: bad value for " + key + ": " + v);
    };
    return opt;
  }

  // Applies config values for every bound key the user did not pass. A key
  // may be bound in several subcommands; all of them share one field.
  void apply(const std::map<std::string, std::string>& config) const {
    for (const auto& [key, value] : config) {
      const auto setter = setters_.find(key);
      if (setter == setters_.end()) continue;
      const bool given = std::any_of(bindings_.begin(), bindings_.end(),
                                     [&](const auto& b) { return b.key == key && b.option->count() > 0; });
      if (!given) setter->second(value);
    }
  }

 private:
  struct Binding {
    CLI::Option* option;
    std::string key;
  };
  std::vector<Binding> bindings_;
  std::map<std::string, std::function<void(const std::string&)>> setters_;
};

// Panel ids: image file stem, suffixed with the manifest index when stems
// repeat.
std::vector<std::string> entry_ids(const LabeledDataset& ds) {
  std::map<std::string, int> seen;
  for (const auto& e : ds.entries) ++seen[e.image.stem().string()];
  std::vector<std::string> ids;
  for (const auto& e : ds.entries) {
    std::string id = e.image.stem().string();
    if (seen[id] > 1) id += "_" + std::to_string(e.id);
    ids.push_back(id);
  }
  return ids;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

std::vector<BarcodePanel> read_panel_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<BarcodePanel> panels;
  for (const auto& f : files) panels.push_back(read_panel(f));
  if (panels.empty()) throw InputError("no panel files in " + dir.string());
  std::stable_sort(panels.begin(), panels.end(),
                   [](const BarcodePanel& a, const BarcodePanel& b) { return a.index < b.index; });
  for (const auto& p : panels) {
    if (p.mode != panels.front().mode || p.slices != panels.front().slices) {
      throw InputError("panel directory mixes layouts: " + panels.front().image_id + " is " +
                       std::string(to_string(panels.front().mode)) + ", " + p.image_id + " is " +
                       std::string(to_string(p.mode)));
    }
  }
  return panels;
}

int cmd_synth(const RunConfig& cfg, const fs::path& out) {
  SynthDatasetOptions opt{cfg.per_class, cfg.seed, cfg.noise, cfg.min_size, cfg.max_size};
  const LabeledDataset ds = generate_dataset(out, opt);
  std::cerr << "[synth] wrote " << ds.size() << " images and " << (out / "manifest.csv").string() << "\n";
  return 0;
}

int cmd_extract(const RunConfig& cfg, const fs::path& manifest, const fs::path& out) {
  const PanelMode mode = parse_panel_mode(cfg.mode);
  if (cfg.slices < 1) throw InputError("--slices must be at least 1");
  if (cfg.border < 0) throw InputError("--border must be nonnegative");
  if (!(cfg.cap > 1.0)) throw InputError("--cap must exceed 1");
  const LabeledDataset ds = load_manifest(manifest);
  const auto ids = entry_ids(ds);

  std::vector<std::optional<BarcodePanel>> panels(ds.size());
  std::vector<std::string> errors(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    const auto& e = ds.entries[i];
    try {
      const RoiImage roi = extract_roi(load_image(e.image), load_mask(e.mask), cfg.border, ids[i]);
      BarcodePanel p = mode == PanelMode::sliced ? compute_panel(roi, cfg.slices, cfg.cap)
                                                 : compute_intensity_only(roi, cfg.cap);
      p.index = e.id;
      panels[i] = std::move(p);
    } catch (const InputError& err) {
      errors[i] = err.what();
    }
  });

  fs::create_directories(out);
  int failures = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!panels[i]) {
      ++failures;
      std::cerr << "[extract] " << ids[i] << ": " << errors[i] << "\n";
      continue;
    }
    write_panel(out / (ids[i] + ".json"), *panels[i]);
    std::cerr << "[extract] " << (i + 1) << "/" << ds.size() << " " << ids[i] << ": " << panels[i]->size()
              << " barcodes\n";
  }
  return failures ? 1 : 0;
}

int cmd_distmat(const fs::path& panel_dir, const fs::path& out) {
  const auto panels = read_panel_dir(panel_dir);
  const DistanceMatrix d = distance_matrix(panels);
  d.validate();
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_distance_csv(out, d);
  std::cerr << "[distmat] " << d.size() << "x" << d.size() << " (" << to_string(panels.front().mode) << ") -> "
            << out.string() << "\n";
  return 0;
}

std::map<std::string, std::string> labels_by_id(const fs::path& manifest) {
  const LabeledDataset ds = load_manifest(manifest);
  const auto ids = entry_ids(ds);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < ds.size(); ++i) out[ids[i]] = ds.entries[i].label;
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_classify(const RunConfig& cfg, const fs::path& distmat, const fs::path& panel_dir, const fs::path& manifest,
                 const fs::path& out, const std::string& subset) {
  DistanceMatrix d;
  std::string mode = cfg.mode;
  if (!panel_dir.empty()) {
    const auto panels = read_panel_dir(panel_dir);
    mode = std::string(to_string(panels.front().mode));
    d = distance_matrix(panels);
  } else if (!distmat.empty()) {
    d = read_distance_csv(distmat);
  } else {
    throw InputError("classify needs --distmat or --panels");
  }
  const auto label_of = labels_by_id(manifest);

  // Classified rows may be a subset; the comparison columns never shrink.
  const auto wanted = split_list(subset);
  std::vector<std::size_t> rows;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto it = label_of.find(d.ids[i]);
    if (it == label_of.end()) throw InputError("no manifest label for " + d.ids[i]);
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), it->second) == wanted.end()) continue;
    rows.push_back(i);
    labels.push_back(it->second);
  }
  if (std::set<std::string>(labels.begin(), labels.end()).size() < 2) {
    throw InputError("classification needs at least two classes");
  }
  FeatureMatrix f = select_rows(as_features(d), rows);
  if (cfg.standardize) standardize_columns(f);

  const Range sr = parse_range(cfg.sigma_range), cr = parse_range(cfg.c_range);
  const LoocvResult best = grid_sweep(f.values, labels, power_grid(sr.lo, sr.hi), power_grid(cr.lo, cr.hi));

  nlohmann::ordered_json report;
  report["mode"] = mode;
  report["samples"] = labels.size();
  report["comparison_set"] = d.size();
  report["standardized"] = cfg.standardize;
  report["sigma_exponents"] = {sr.lo, sr.hi};
  report["C_exponents"] = {cr.lo, cr.hi};
  report["best"] = {{"sigma", best.sigma}, {"C", best.C}};
  report["accuracy"] = best.accuracy();
  report["correct"] = best.correct;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  for (const auto& pc : best.per_class) {
    per_class.push_back({{"label", pc.label}, {"correct", pc.correct}, {"total", pc.total}, {"accuracy", pc.accuracy()}});
  }
  report["per_class"] = std::move(per_class);
  nlohmann::ordered_json predictions = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    predictions.push_back({{"id", f.row_ids[r]}, {"label", labels[r]}, {"predicted", best.predictions[r]}});
  }
  report["predictions"] = std::move(predictions);

  std::ostringstream table;
  char line[160];
  table << "| Filtration | Overall |";
  for (const auto& pc : best.per_class) table << " " << pc.label << " |";
  table << "\n|---|---|";
  for (std::size_t i = 0; i < best.per_class.size(); ++i) table << "---|";
  std::snprintf(line, sizeof line, "\n| %s | %.2f%% |", mode.c_str(), 100.0 * best.accuracy());
  table << line;
  for (const auto& pc : best.per_class) {
    std::snprintf(line, sizeof line, " %.2f%% |", 100.0 * pc.accuracy());
    table << line;
  }
  table << "\n";

  write_text(out, report.dump(2) + "\n");
  fs::path table_path = out;
  table_path.replace_extension(".md");
  write_text(table_path, table.str());
  std::cout << table.str();
  std::cerr << "[classify] best sigma=" << best.sigma << " C=" << best.C << " accuracy=" << best.accuracy() << "\n";
  return 0;
}

int cmd_embed(const fs::path& distmat, int k, const fs::path& manifest, const fs::path& out) {
  if (k != 2 && k != 3) throw InputError("--k must be 2 or 3");
  const DistanceMatrix d = read_distance_csv(distmat);
  const Embedding e = cmds_embed(d, k);
  if (e.truncated) {
    std::cerr << "[embed] warning: only " << e.coords.cols() << " positive eigenvalue(s); emitting "
              << e.coords.cols() << " of " << k << " axes\n";
  }
  std::vector<std::string> labels(d.size());
  if (!manifest.empty()) {
    const auto label_of = labels_by_id(manifest);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto it = label_of.find(d.ids[i]);
      if (it != label_of.end()) labels[i] = it->second;
    }
  }
  fs::path csv = out, svg = out;
  csv += ".csv";
  svg += ".svg";
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_embedding_csv(csv, d.ids, e);
  std::string title = "CMDS embedding, " + std::to_string(d.size()) + " images";
  if (e.coords.cols() >= 3) title += " (axes 1-2 shown, axis 3 dropped)";
  write_text(svg, scatter_svg(e.coords, d.ids, labels, title));
  std::cerr << "[embed] " << csv.string() << ", " << svg.string() << "\n";
  return 0;
}

int cmd_plot(const fs::path& panel_file, const std::string& key_name, const fs::path& out, double cap) {
  const BarcodePanel panel = read_panel(panel_file);
  const auto key = PanelKey::parse(key_name);
  const Barcode* barcode = key ? panel.find(*key) : nullptr;
  if (!barcode) throw InputError("panel " + panel.image_id + " has no barcode '" + key_name + "'");
  const std::string title = panel.image_id + " " + key_name + " (dim " + std::to_string(key->dim) + ")";
  write_text(out, barcode_svg(*barcode, title, cap));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistent-homology barcode features for masked grayscale images"};
  app.require_subcommand(1);
  RunConfig cfg;
  fs::path config_file;
  app.add_option("--config", config_file, "key=value file; flags override it")->check(CLI::ExistingFile);

  ConfigBinder bind;
  fs::path out, manifest, panels, distmat, panel_file;
  std::string key, subset;
  int k = 2;

  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic dataset");
  synth->add_option("--out", out, "Output directory")->required();
  bind.add(synth, "--per-class", "per_class", cfg.per_class, "Images per class");
  bind.add(synth, "--seed", "seed", cfg.seed, "Random seed");
  bind.add(synth, "--noise", "noise", cfg.noise, "Gaussian noise sigma on the [0,1] scale");
  bind.add(synth, "--min-size", "min_size", cfg.min_size, "Minimum lesion diameter (pixels)");
  bind.add(synth, "--max-size", "max_size", cfg.max_size, "Maximum lesion diameter (pixels)");

  auto* extract = app.add_subcommand("extract", "Compute one barcode panel per manifest image");
  extract->add_option("--manifest", manifest, "CSV manifest image,mask,label")->required();
  extract->add_option("--out", out, "Panel output directory")->required();
  bind.add(extract, "--mode", "mode", cfg.mode, "1d (intensity only) or 2d (sliced)")->check(CLI::IsMember({"1d", "2d"}));
  bind.add(extract, "--slices", "slices", cfg.slices, "Border slices");
  bind.add(extract, "--border", "border", cfg.border, "Healthy ring width (pixels)");
  bind.add(extract, "--cap", "cap", cfg.cap, "Death value of infinite bars");

  auto* dist = app.add_subcommand("distmat", "Pairwise summed matching distances");
  dist->add_option("--panels", panels, "Panel directory")->required();
  dist->add_option("--out", out, "Output CSV")->required();

  auto* classify = app.add_subcommand("classify", "Grid-swept LOOCV with an RBF SVM");
  classify->add_option("--distmat", distmat, "Distance matrix CSV");
  classify->add_option("--panels", panels, "Panel directory (distances computed on the fly)");
  classify->add_option("--manifest", manifest, "Manifest supplying labels")->required();
  classify->add_option("--out", out, "Report JSON; a .md table is written alongside")->required();
  classify->add_option("--classes", subset, "Comma-separated labels to classify (comparison set stays full)");
  bind.add(classify, "--mode", "mode", cfg.mode, "Mode tag for reports built from a distance matrix");
  bind.add(classify, "--sigma-range", "sigma_range", cfg.sigma_range, "sigma = 2^lo..2^hi");
  bind.add(classify, "--c-range", "c_range", cfg.c_range, "C = 2^lo..2^hi");
  bind.flag(classify, "--standardize", "standardize", cfg.standardize, "z-score feature columns");

  auto* embed = app.add_subcommand("embed", "Classical MDS of a distance matrix");
  embed->add_option("--distmat", distmat, "Distance matrix CSV")->required();
  embed->add_option("--k", k, "Dimensions (2 or 3)")->capture_default_str();
  embed->add_option("--manifest", manifest, "Manifest supplying labels for colours");
  embed->add_option("--out", out, "Output prefix (.csv and .svg)")->required();

  auto* plot = app.add_subcommand("plot", "Draw one barcode of a panel as SVG");
  plot->add_option("--panel", panel_file, "Panel JSON")->required();
  plot->add_option("--key", key, "Barcode key, e.g. s20_bi_d0")->required();
  plot->add_option("--out", out, "Output SVG")->required();
  bind.add(plot, "--cap", "cap", cfg.cap, "Axis maximum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!config_file.empty()) bind.apply(read_config(config_file));
    if (synth->parsed()) return cmd_synth(cfg, out);
    if (extract->parsed()) return cmd_extract(cfg, manifest, out);
    if (dist->parsed()) return cmd_distmat(panels, out);
    if (classify->parsed()) return cmd_classify(cfg, distmat, panels, manifest, out, subset);
    if (embed->parsed()) return cmd_embed(distmat, k, manifest, out);
    if (plot->parsed()) return cmd_plot(panel_file, key, out, cfg.cap);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
