#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ped/font.hpp"
#include "ped/image.hpp"
#include "ped/rng.hpp"

namespace ped {

inline constexpr int kWordCount = 26 * 26 * 26;  // all 3-letter words

inline constexpr double kInk = 0.05;
inline constexpr double kBackground = 0.97;

// Glyphs are the 5x7 font upscaled by 4: 20x28 pixels each.
inline constexpr int kGlyphScale = 4;
inline constexpr int kGlyphWidth = kFontCols * kGlyphScale;    // 20
inline constexpr int kGlyphHeight = kFontRows * kGlyphScale;   // 28
inline constexpr int kGlyphGap = 8;
inline constexpr int kTextTop = 3;                             // rows [3,31)
inline constexpr int kTextBottom = kTextTop + kGlyphHeight;
inline constexpr int kTextLeft = 12;
inline constexpr int kTextRight = kTextLeft + 3 * kGlyphWidth + 2 * kGlyphGap;

enum class ErrorKind { None, Blot, DragLine, SlipLine };
enum class Label { Good, Bad };

inline std::string to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::None: return "none";
    case ErrorKind::Blot: return "blot";
    case ErrorKind::DragLine: return "drag_line";
    case ErrorKind::SlipLine: return "slip_line";
  }
  throw std::logic_error("unreachable");
}

inline ErrorKind error_kind_from_string(const std::string& s) {
  if (s == "none") return ErrorKind::None;
  if (s == "blot") return ErrorKind::Blot;
  if (s == "drag_line") return ErrorKind::DragLine;
  if (s == "slip_line") return ErrorKind::SlipLine;
  throw std::invalid_argument("unknown error kind: " + s);
}

// Geometry ranges for the three artifact generators. Defaults sized to
// perturb the text enough to make it ambiguous without dominating it.
struct ErrorGeometry {
  double blot_axis_min = 10.0, blot_axis_max = 20.0;  // full ellipse axes, px
  int drag_thickness_max = 3;                        // streak 1..3 px thick
  int drag_min_length = 40;                          // >= 40% of width
  int slip_band_min = 5, slip_band_max = 12;         // displaced rows
  int slip_offset_min = 3, slip_offset_max = 8;      // horizontal shift, px
};

struct LabeledSample {
  std::string image_id;
  std::string word;  // [A-Z]{3}
  Label label = Label::Good;
  ErrorKind error = ErrorKind::None;
  std::uint64_t seed = 0;  // error-injection seed; 0 for good images

  bool operator==(const LabeledSample&) const = default;
};

struct DatasetManifest {
  std::vector<LabeledSample> entries;
  std::uint64_t global_seed = 0;

  bool operator==(const DatasetManifest&) const = default;

  std::map<std::pair<Label, ErrorKind>, int> counts() const {
    std::map<std::pair<Label, ErrorKind>, int> c;
    for (const auto& e : entries) ++c[{e.label, e.error}];
    return c;
  }
};

// ---------------------------------------------------------------------------
// Rendering

inline void check_word(const std::string& word) {
  if (word.size() != 3)
    throw std::invalid_argument("word must have exactly 3 letters: '" + word +
                                "'");
  for (char c : word)
    if (c < 'A' || c > 'Z')
      throw std::invalid_argument(std::string("invalid character '") + c +
                                  "' in word (A-Z only)");
}

// Deterministic 35x100 raster: three dark glyphs on a light background.
inline GrayImage render_word(const std::string& word) {
  check_word(word);
  GrayImage img(kImageWidth, kImageHeight, kBackground);
  for (int g = 0; g < 3; ++g) {
    const int x0 = kTextLeft + g * (kGlyphWidth + kGlyphGap);
    for (int fr = 0; fr < kFontRows; ++fr)
      for (int fc = 0; fc < kFontCols; ++fc) {
        if (!glyph_bit(word[g], fr, fc)) continue;
        for (int dy = 0; dy < kGlyphScale; ++dy)
          for (int dx = 0; dx < kGlyphScale; ++dx)
            img.at(kTextTop + fr * kGlyphScale + dy,
                   x0 + fc * kGlyphScale + dx) = kInk;
      }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Error injection

namespace detail {

inline void draw_blot(GrayImage& img, std::mt19937_64& rng,
                      const ErrorGeometry& geo) {
  const double a = uniform_real(rng, geo.blot_axis_min, geo.blot_axis_max) / 2;
  const double b = uniform_real(rng, geo.blot_axis_min, geo.blot_axis_max) / 2;
  const int rc = static_cast<int>(uniform_int(rng, kTextTop, kTextBottom - 1));
  const int cc = static_cast<int>(uniform_int(rng, kTextLeft, kTextRight - 1));
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const double dr = (r - rc) / b, dc = (c - cc) / a;
      if (dr * dr + dc * dc <= 1.0) img.at(r, c) = kInk;
    }
}

inline void draw_drag_line(GrayImage& img, std::mt19937_64& rng,
                           const ErrorGeometry& geo) {
  const int t = static_cast<int>(uniform_int(rng, 1, geo.drag_thickness_max));
  const int len =
      static_cast<int>(uniform_int(rng, geo.drag_min_length, img.width));
  const int c0 = static_cast<int>(uniform_int(rng, 0, img.width - len));
  const int r0 = static_cast<int>(uniform_int(rng, kTextTop, kTextBottom - t));
  for (int r = r0; r < r0 + t; ++r)
    for (int c = c0; c < c0 + len; ++c) img.at(r, c) = kInk;
}

inline void draw_slip_line(GrayImage& img, std::mt19937_64& rng,
                           const ErrorGeometry& geo) {
  const int h = static_cast<int>(
      uniform_int(rng, geo.slip_band_min, geo.slip_band_max));
  const int lo = std::max(0, kTextTop - h + 1);
  const int hi = std::min(img.height - h, kTextBottom - 1);
  const int r0 = static_cast<int>(uniform_int(rng, lo, hi));
  const int off = static_cast<int>(
      uniform_int(rng, geo.slip_offset_min, geo.slip_offset_max));
  const bool leftward = (rng() & 1u) != 0;
  const int shift = leftward ? -off : off;
  for (int r = r0; r < r0 + h; ++r) {
    std::vector<double> row(img.width, kBackground);
    for (int c = 0; c < img.width; ++c) {
      const int src = c - shift;
      if (src >= 0 && src < img.width) row[c] = img.at(r, src);
    }
    for (int c = 0; c < img.width; ++c) img.at(r, c) = row[c];
  }
}

}  // namespace detail

// Applies one artifact of the given kind. Placement is re-drawn (from the
// same deterministic stream) until the artifact changes at least 15 pixels,
// so a blot landing entirely inside a stroke cannot produce an unlabeled
// "bad" duplicate. A uniform input can exhaust the retries; the last
// attempt is returned then.
inline GrayImage inject_error(const GrayImage& img, ErrorKind kind,
                              std::uint64_t seed,
                              const ErrorGeometry& geo = {}) {
  if (kind == ErrorKind::None)
    throw std::invalid_argument("inject_error: kind must not be None");
  std::mt19937_64 rng(seed);
  GrayImage out = img;
  for (int attempt = 0; attempt < 64; ++attempt) {
    out = img;
    switch (kind) {
      case ErrorKind::Blot: detail::draw_blot(out, rng, geo); break;
      case ErrorKind::DragLine: detail::draw_drag_line(out, rng, geo); break;
      case ErrorKind::SlipLine: detail::draw_slip_line(out, rng, geo); break;
      case ErrorKind::None: break;
    }
    if (pixel_diff_count(img, out) >= 15) break;
  }
  return out;
}

// Pure render of one manifest entry.
inline GrayImage render_sample(const LabeledSample& s,
                               const ErrorGeometry& geo = {}) {
  GrayImage img = render_word(s.word);
  if (s.label == Label::Bad) img = inject_error(img, s.error, s.seed, geo);
  return img;
}

// ---------------------------------------------------------------------------
// Corpus generation

namespace detail {

inline std::string word_at(int index) {
  std::string w = "AAA";
  w[0] = static_cast<char>('A' + index / 676);
  w[1] = static_cast<char>('A' + (index / 26) % 26);
  w[2] = static_cast<char>('A' + index % 26);
  return w;
}

inline void fisher_yates(std::vector<int>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace detail

// scale in (0,1]; 1.0 is the full 17576+17576 corpus. Good set: one image
// per selected word. Bad set: the same words, error kinds round-robin over
// a seed-shuffled order so the three kinds partition the set (counts differ
// by at most 1).
inline DatasetManifest generate_dataset(std::uint64_t global_seed,
                                        double scale = 1.0) {
  if (!(scale > 0.0 && scale <= 1.0))
    throw std::invalid_argument("generate_dataset: scale must be in (0,1]");
  const int n_words = std::max(
      1, static_cast<int>(static_cast<double>(kWordCount) * scale + 0.5));

  std::vector<int> indices(kWordCount);
  for (int i = 0; i < kWordCount; ++i) indices[i] = i;
  if (n_words < kWordCount) {
    std::mt19937_64 rng(derive_seed(global_seed, "word_subset"));
    detail::fisher_yates(indices, rng);
    indices.resize(static_cast<std::size_t>(n_words));
    std::sort(indices.begin(), indices.end());
  }

  DatasetManifest m;
  m.global_seed = global_seed;
  m.entries.reserve(static_cast<std::size_t>(2 * n_words));
  for (int idx : indices) {
    const std::string w = detail::word_at(idx);
    m.entries.push_back({"good_" + w, w, Label::Good, ErrorKind::None, 0});
  }

  // Round-robin error assignment over a shuffled word order.
  std::vector<int> order(indices.begin(), indices.end());
  {
    std::mt19937_64 rng(derive_seed(global_seed, "error_assign"));
    detail::fisher_yates(order, rng);
  }
  static constexpr ErrorKind kKinds[3] = {ErrorKind::Blot, ErrorKind::DragLine,
                                          ErrorKind::SlipLine};
  std::map<int, ErrorKind> kind_of;
  for (std::size_t i = 0; i < order.size(); ++i)
    kind_of[order[i]] = kKinds[i % 3];

  for (int idx : indices) {
    const std::string w = detail::word_at(idx);
    m.entries.push_back({"bad_" + w, w, Label::Bad, kind_of[idx],
                         derive_seed(global_seed, "inject",
                                     static_cast<std::uint64_t>(idx))});
  }
  return m;
}

// ---------------------------------------------------------------------------
// Persistence: manifest.csv + images/<image_id>.pgm

inline void write_dataset(const DatasetManifest& m,
                          const std::filesystem::path& dir,
                          const ErrorGeometry& geo = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  std::ofstream out(dir / "manifest.csv");
  if (!out)
    throw std::runtime_error("write_dataset: cannot open manifest in " +
                             dir.string());
  out << "image_id,word,label,error,seed\n";
  for (const auto& e : m.entries) {
    out << e.image_id << ',' << e.word << ','
        << (e.label == Label::Good ? "good" : "bad") << ','
        << to_string(e.error) << ',' << e.seed << '\n';
    write_pgm(render_sample(e, geo), dir / "images" / (e.image_id + ".pgm"));
  }
  std::ofstream seed_out(dir / "seed.txt");
  seed_out << m.global_seed << '\n';
}

inline DatasetManifest load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.csv");
  if (!in)
    throw std::runtime_error("load_dataset: no manifest.csv in " +
                             dir.string());
  DatasetManifest m;
  std::string line;
  std::getline(in, line);  // header
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, word, label, error, seed;
    if (!std::getline(ss, id, ',') || !std::getline(ss, word, ',') ||
        !std::getline(ss, label, ',') || !std::getline(ss, error, ',') ||
        !std::getline(ss, seed, ','))
      throw std::runtime_error("load_dataset: malformed manifest row " +
                               std::to_string(row));
    try {
      m.entries.push_back({id, word,
                           label == "good" ? Label::Good : Label::Bad,
                           error_kind_from_string(error),
                           std::stoull(seed)});
    } catch (const std::exception&) {
      throw std::runtime_error("load_dataset: malformed manifest row " +
                               std::to_string(row));
    }
    check_word(m.entries.back().word);
  }
  std::ifstream seed_in(dir / "seed.txt");
  if (seed_in) seed_in >> m.global_seed;
  return m;
}

// Loads the stored raster for one entry; the id is named on failure.
inline GrayImage load_image(const std::filesystem::path& dir,
                            const std::string& image_id) {
  const auto path = dir / "images" / (image_id + ".pgm");
  if (!std::filesystem::exists(path))
    throw std::runtime_error("load_image: missing image file for id '" +
                             image_id + "'");
  return read_pgm(path);
}

}  // namespace ped
