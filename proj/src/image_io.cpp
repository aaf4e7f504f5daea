#include "topobar/image_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace topobar {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Tokenizer for the PGM header and P2 body: whitespace separated, '#' starts
// a comment running to end of line. Tracks line numbers for diagnostics.
class PgmReader {
 public:
  explicit PgmReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_])) && bytes_[pos_] != '#') {
      ++pos_;
    }
    return bytes_.substr(start, pos_ - start);
  }

  long integer(const char* what) {
    const std::string tok = token();
    long value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw FormatError("PGM line " + std::to_string(line_) + ": expected " + what + ", got '" + tok + "'");
    }
    if (value < 0) {
      throw FormatError("PGM line " + std::to_string(line_) + ": negative " + what);
    }
    return value;
  }

  // After maxval exactly one whitespace byte precedes the raster.
  std::size_t raster_offset() const { return pos_ + 1; }
  int line() const { return line_; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

std::size_t LesionMask::count() const {
  return static_cast<std::size_t>(std::count_if(inside.begin(), inside.end(), [](auto v) { return v != 0; }));
}

long RoiImage::index_of(int row, int col) const {
  if (row < 0 || col < 0 || row >= image_height || col >= image_width) return -1;
  return lookup_[static_cast<std::size_t>(row) * image_width + col];
}

std::vector<std::string> LabeledDataset::classes() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (std::find(out.begin(), out.end(), e.label) == out.end()) out.push_back(e.label);
  }
  return out;
}

GrayImage parse_pgm(const std::string& bytes) {
  PgmReader reader(bytes);
  const std::string magic = reader.token();
  if (magic != "P2" && magic != "P5") throw FormatError("PGM line 1: bad magic '" + magic + "'");
  GrayImage img;
  const long width = reader.integer("width");
  const long height = reader.integer("height");
  const long maxval = reader.integer("maxval");
  if (width < 1 || height < 1) throw FormatError("PGM line " + std::to_string(reader.line()) + ": empty image");
  if (maxval < 1 || maxval > 65535) {
    throw FormatError("PGM line " + std::to_string(reader.line()) + ": maxval out of range");
  }
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  img.values.resize(n);

  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = reader.integer("pixel value");
      if (v > maxval) throw FormatError("PGM line " + std::to_string(reader.line()) + ": value exceeds maxval");
      img.values[i] = static_cast<double>(v);
    }
    return img;
  }

  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const std::size_t offset = reader.raster_offset();
  if (offset > bytes.size() || bytes.size() - offset < n * bpp) {
    throw FormatError("PGM line " + std::to_string(reader.line()) + ": truncated raster");
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bpp == 1 ? raw[i] : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
    if (v > static_cast<unsigned>(maxval)) throw FormatError("PGM raster: value exceeds maxval");
    img.values[i] = static_cast<double>(v);
  }
  return img;
}

GrayImage parse_csv_grid(const std::string& text) {
  GrayImage img;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int blank_run = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      ++blank_run;
      continue;
    }
    if (blank_run > 0 && img.height > 0) {
      throw FormatError("CSV line " + std::to_string(line_no - blank_run) + ": blank line inside grid");
    }
    blank_run = 0;
    int cols = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = rest.substr(0, comma);
      double v = 0;
      if (!parse_number(cell, v)) {
        throw FormatError("CSV line " + std::to_string(line_no) + ": bad number '" + std::string(trim(cell)) + "'");
      }
      if (v < 0) throw FormatError("CSV line " + std::to_string(line_no) + ": negative value");
      img.values.push_back(v);
      ++cols;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (img.height == 0) {
      img.width = cols;
    } else if (cols != img.width) {
      throw FormatError("CSV line " + std::to_string(line_no) + ": ragged row (" + std::to_string(cols) +
                        " values, expected " + std::to_string(img.width) + ")");
    }
    ++img.height;
  }
  if (img.height == 0) throw FormatError("CSV line 1: empty grid");
  return img;
}

GrayImage load_image(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) return parse_pgm(bytes);
    return parse_csv_grid(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

LesionMask make_mask(int width, int height, std::vector<std::uint8_t> inside) {
  if (width < 1 || height < 1 || inside.size() != static_cast<std::size_t>(width) * height) {
    throw InputError("mask dimensions do not match its data");
  }
  LesionMask mask{width, height, std::move(inside)};
  for (auto& v : mask.inside) v = v ? 1 : 0;
  const std::size_t total = mask.count();
  if (total == 0) throw InputError("mask has no lesion pixels");

  // Flood fill from the first lesion pixel over 8-neighbours.
  std::vector<std::uint8_t> seen(mask.inside.size(), 0);
  std::vector<std::size_t> stack;
  const auto first = static_cast<std::size_t>(
      std::find(mask.inside.begin(), mask.inside.end(), std::uint8_t{1}) - mask.inside.begin());
  stack.push_back(first);
  seen[first] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const std::size_t p = stack.back();
    stack.pop_back();
    ++reached;
    const int r = static_cast<int>(p / width), c = static_cast<int>(p % width);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= height || cc >= width) continue;
        const std::size_t q = static_cast<std::size_t>(rr) * width + cc;
        if (mask.inside[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
  }
  if (reached != total) throw InputError("mask lesion pixels are not 8-connected");
  return mask;
}

LesionMask mask_from_image(const GrayImage& img) {
  std::vector<std::uint8_t> inside(img.values.size());
  std::transform(img.values.begin(), img.values.end(), inside.begin(), [](double v) { return v != 0.0; });
  return make_mask(img.width, img.height, std::move(inside));
}

LesionMask load_mask(const std::filesystem::path& path) {
  try {
    return mask_from_image(load_image(path));
  } catch (const FormatError&) {
    throw;
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<double> normalize_unit(const std::vector<double>& values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, range = *hi - *lo;
  if (!(range > 0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::clamp((values[i] - min) / range, 0.0, 1.0);
  return out;
}

namespace {

// Exact 1D squared distance transform (lower envelope of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;  // z[0] is -inf, so this stops at k == 0
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double diff = q - v[j];
    d[q] = diff * diff + f[v[j]];
  }
}

// Squared Euclidean distance from every pixel to the nearest seed pixel.
std::vector<double> squared_distance_transform(int width, int height, const std::vector<std::uint8_t>& seeds) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) grid[i] = seeds[i] ? 0.0 : inf;
  const int longest = std::max(width, height);
  std::vector<double> f(longest), d(longest), z(longest + 1);
  std::vector<int> v(longest);
  f.resize(height);
  d.resize(height);
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r) f[r] = grid[static_cast<std::size_t>(r) * width + c];
    edt_1d(f, d, v, z);
    for (int r = 0; r < height; ++r) grid[static_cast<std::size_t>(r) * width + c] = d[r];
  }
  f.resize(width);
  d.resize(width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) f[c] = grid[static_cast<std::size_t>(r) * width + c];
    edt_1d(f, d, v, z);
    for (int c = 0; c < width; ++c) grid[static_cast<std::size_t>(r) * width + c] = d[c];
  }
  return grid;
}

}  // namespace

RoiImage extract_roi(const GrayImage& img, const LesionMask& mask, int border_width, std::string source_id) {
  if (img.width != mask.width || img.height != mask.height) {
    throw InputError("image is " + std::to_string(img.width) + "x" + std::to_string(img.height) + " but mask is " +
                     std::to_string(mask.width) + "x" + std::to_string(mask.height));
  }
  if (border_width < 0) throw InputError("border width must be nonnegative");
  if (mask.count() == 0) throw InputError("mask has no lesion pixels");

  const int w = img.width, h = img.height;
  const auto at = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };

  // Chebyshev dilation as a separable running max: rows, then columns.
  std::vector<std::uint8_t> horiz(mask.inside.size(), 0), roi(mask.inside.size(), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.inside[at(r, c)]) continue;
      for (int cc = std::max(0, c - border_width); cc <= std::min(w - 1, c + border_width); ++cc) horiz[at(r, cc)] = 1;
    }
  }
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) {
      if (!horiz[at(r, c)]) continue;
      for (int rr = std::max(0, r - border_width); rr <= std::min(h - 1, r + border_width); ++rr) roi[at(rr, c)] = 1;
    }
  }

  // Boundary: lesion pixels with a non-lesion 8-neighbour; off-image counts as non-lesion.
  std::vector<std::uint8_t> boundary(mask.inside.size(), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.inside[at(r, c)]) continue;
      bool edge = false;
      for (int dr = -1; dr <= 1 && !edge; ++dr) {
        for (int dc = -1; dc <= 1 && !edge; ++dc) {
          const int rr = r + dr, cc = c + dc;
          edge = rr < 0 || cc < 0 || rr >= h || cc >= w || !mask.inside[at(rr, cc)];
        }
      }
      boundary[at(r, c)] = edge;
    }
  }
  const std::vector<double> dist2 = squared_distance_transform(w, h, boundary);

  RoiImage out;
  out.source_id = std::move(source_id);
  out.image_width = w;
  out.image_height = h;
  out.lookup_.assign(mask.inside.size(), -1);
  std::vector<double> raw_intensity, raw_dist;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t p = at(r, c);
      if (!roi[p]) continue;
      out.lookup_[p] = static_cast<long>(out.pixels.size());
      out.pixels.push_back({r, c});
      out.in_lesion.push_back(mask.inside[p]);
      raw_intensity.push_back(img.values[p]);
      raw_dist.push_back(std::sqrt(dist2[p]));
    }
  }
  out.intensity = normalize_unit(raw_intensity);
  out.border_dist = normalize_unit(raw_dist);
  return out;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.emplace_back(trim(cell));
  return cells;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

LabeledDataset load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_csv_row(line);
      break;
    }
  }
  const auto column = [&](const char* name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t image_col = column("image"), mask_col = column("mask"), label_col = column("label");

  LabeledDataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_row(line);
    if (cells.size() != header.size()) {
      throw FormatError(path.string() + " line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    }
    DatasetEntry e;
    e.id = ds.entries.size();
    e.image = base / cells[image_col];
    e.mask = base / cells[mask_col];
    e.label = cells[label_col];
    for (const auto* p : {&e.image, &e.mask}) {
      if (!std::filesystem::is_regular_file(*p)) {
        throw InputError(path.string() + " line " + std::to_string(line_no) + ": missing file " + p->string());
      }
    }
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

void write_manifest(const std::filesystem::path& path, const LabeledDataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const std::filesystem::path base = path.parent_path();
  out << "image,mask,label\n";
  for (const auto& e : dataset.entries) {
    out << csv_cell(e.image.lexically_relative(base).generic_string()) << ','
        << csv_cell(e.mask.lexically_relative(base).generic_string()) << ',' << csv_cell(e.label) << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval) {
  if (maxval < 1 || maxval > 65535) throw InputError("PGM maxval out of range");
  std::string data = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                     std::to_string(maxval) + "\n";
  const bool wide = maxval > 255;
  for (double v : img.values) {
    const long q = std::lround(v);
    if (q < 0 || q > maxval) throw InputError("pixel value out of PGM range");
    if (wide) data += static_cast<char>((q >> 8) & 0xFF);
    data += static_cast<char>(q & 0xFF);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

void write_mask_pgm(const std::filesystem::path& path, const LesionMask& mask) {
  GrayImage img{mask.width, mask.height, {}};
  img.values.reserve(mask.inside.size());
  for (auto v : mask.inside) img.values.push_back(v ? 255.0 : 0.0);
  write_pgm(path, img, 255);
}

}  // namespace topobar
