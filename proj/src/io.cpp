#include "zsl/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "zsl/error.hpp"

namespace zsl::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

std::string fmt_double(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string exact(double x) { return fmt_double("%.17g", x); }

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void f32(float v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string kind) : b_(bytes), kind_(std::move(kind)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw FormatError(kind_ + ": " + what + " at byte offset " + std::to_string(at));
  }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) fail(std::string("truncated ") + what, pos_);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, b_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  double f32(const char* what) {
    need(4, what);
    float v;
    std::memcpy(&v, b_.data() + pos_, 4);
    if (!std::isfinite(v)) fail("non-finite value", pos_);
    pos_ += 4;
    return static_cast<double>(v);
  }
  double f64(const char* what) {
    need(8, what);
    double v;
    std::memcpy(&v, b_.data() + pos_, 8);
    if (!std::isfinite(v)) fail("non-finite value", pos_);
    pos_ += 8;
    return v;
  }
  std::string str(const char* what) {
    const std::size_t at = pos_;
    const auto len = u32(what);
    if (remaining() < len) fail(std::string("truncated ") + what, at);
    std::string s = b_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  void magic(const char* expected) {
    need(4, "magic");
    if (b_.compare(0, 4, expected) != 0) fail(std::string("bad magic, expected ") + expected, 0);
    pos_ = 4;
  }
  void finish() const {
    if (pos_ != b_.size()) fail(std::to_string(remaining()) + " trailing bytes", pos_);
  }

 private:
  const std::string& b_;
  std::string kind_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- features

std::string encode_features(const std::vector<LabeledImage>& images) {
  std::uint32_t parts = 0, dim = 0;
  if (!images.empty() && !images.front().image.parts.empty()) {
    parts = static_cast<std::uint32_t>(images.front().image.parts.size());
    dim = static_cast<std::uint32_t>(images.front().image.parts.front().size());
  }
  ByteWriter w;
  w.raw("ZSLF", 4);
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(images.size()));
  w.u32(parts);
  w.u32(dim);
  for (const auto& img : images) {
    if (img.image.parts.size() != parts)
      throw UsageError("image '" + img.image.image_id + "' has " + std::to_string(img.image.parts.size()) +
                       " parts; feature files need a constant part count of " + std::to_string(parts));
    w.str(img.image.image_id);
    w.str(img.class_id);
    for (const auto& p : img.image.parts) {
      if (p.size() != dim) throw UsageError("image '" + img.image.image_id + "' has a part of wrong dimension");
      for (Eigen::Index k = 0; k < p.size(); ++k) w.f32(static_cast<float>(p(k)));
    }
  }
  return w.take();
}

std::vector<LabeledImage> decode_features(const std::string& bytes) {
  ByteReader r(bytes, "feature file");
  r.magic("ZSLF");
  const std::size_t version_at = r.offset();
  if (r.u32("version") != kFeatureVersion) r.fail("unsupported version", version_at);
  const std::size_t count_at = r.offset();
  const std::uint32_t count = r.u32("image count");
  const std::size_t parts_at = r.offset();
  const std::uint32_t parts = r.u32("part count");
  const std::size_t dim_at = r.offset();
  const std::uint32_t dim = r.u32("feature dimension");
  if (parts == 0 && count > 0) r.fail("zero parts per image", parts_at);
  if (dim == 0 && count > 0) r.fail("zero feature dimension", dim_at);
  const std::uint64_t payload = std::uint64_t{parts} * dim * 4 + 8;
  if (payload * count > r.remaining()) r.fail("declared image count exceeds file size", count_at);

  std::vector<LabeledImage> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    LabeledImage img;
    img.image.image_id = r.str("image id");
    img.class_id = r.str("class id");
    r.need(static_cast<std::size_t>(parts) * dim * 4, "feature payload");
    for (std::uint32_t p = 0; p < parts; ++p) {
      Vector f(dim);
      for (std::uint32_t k = 0; k < dim; ++k) f(k) = r.f32("feature value");
      img.image.parts.push_back(std::move(f));
    }
    out.push_back(std::move(img));
  }
  r.finish();
  return out;
}

void save_features(const fs::path& path, const std::vector<LabeledImage>& images) {
  write_file(path, encode_features(images));
}

std::vector<LabeledImage> load_features(const fs::path& path) { return decode_features(read_file(path)); }

// ------------------------------------------------------------------- model

std::string encode_model(const ModelParams& m) {
  ByteWriter w;
  w.raw("ZSLM", 4);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(m.embed_dim()));
  w.u32(static_cast<std::uint32_t>(m.visual_dim()));
  w.u32(static_cast<std::uint32_t>(m.lang_proj.size()));
  auto row_major = [&w](const Matrix& x) {
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) w.f64(x(r, c));
  };
  for (const auto& [mod, proj] : m.lang_proj) {
    w.str(mod);
    w.u32(static_cast<std::uint32_t>(proj.cols()));
    row_major(proj);
  }
  for (Eigen::Index k = 0; k < m.lang_bias.size(); ++k) w.f64(m.lang_bias(k));
  row_major(m.vis_proj);
  for (Eigen::Index k = 0; k < m.vis_bias.size(); ++k) w.f64(m.vis_bias(k));
  return w.take();
}

ModelParams decode_model(const std::string& bytes) {
  ByteReader r(bytes, "model file");
  r.magic("ZSLM");
  const std::size_t version_at = r.offset();
  if (r.u32("version") != kModelVersion) r.fail("unsupported version", version_at);
  const std::size_t embed_at = r.offset();
  const std::uint32_t embed = r.u32("embedding dimension");
  const std::size_t visual_at = r.offset();
  const std::uint32_t visual = r.u32("visual dimension");
  const std::size_t count_at = r.offset();
  const std::uint32_t modalities = r.u32("modality count");
  if (embed == 0) r.fail("zero embedding dimension", embed_at);
  if (visual == 0) r.fail("zero visual dimension", visual_at);
  if (std::uint64_t{modalities} * 8 > r.remaining()) r.fail("declared modality count exceeds file size", count_at);

  auto read_matrix = [&r](std::uint32_t rows, std::uint32_t cols) {
    r.need(static_cast<std::size_t>(rows) * cols * 8, "matrix");
    Matrix x(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) x(i, j) = r.f64("parameter");
    return x;
  };
  ModelParams m;
  for (std::uint32_t k = 0; k < modalities; ++k) {
    const std::size_t at = r.offset();
    std::string mod = r.str("modality id");
    const std::size_t dim_at = r.offset();
    const std::uint32_t dim = r.u32("modality dimension");
    if (dim == 0) r.fail("zero modality dimension", dim_at);
    if (m.lang_proj.count(mod)) r.fail("duplicate modality '" + mod + "'", at);
    m.lang_proj.emplace(std::move(mod), read_matrix(embed, dim));
  }
  m.lang_bias = read_matrix(embed, 1).col(0);
  m.vis_proj = read_matrix(embed, visual);
  m.vis_bias = read_matrix(embed, 1).col(0);
  r.finish();
  return m;
}

void save_model(const fs::path& path, const ModelParams& m) { write_file(path, encode_model(m)); }

ModelParams load_model(const fs::path& path) { return decode_model(read_file(path)); }

// -------------------------------------------------------------- attributes

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string> csv_fields(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw FormatError("attribute file line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

}  // namespace

AttributeTable parse_attributes(const std::string& text) {
  AttributeTable t;
  std::vector<std::vector<double>> rows;
  std::set<ClassId> seen;
  bool have_header = false;
  std::size_t width = 0;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (trim(lines[n]).empty()) continue;
    auto fields = csv_fields(lines[n], line_no);
    if (!have_header) {
      if (fields.size() < 2) throw FormatError("attribute file line 1: header needs at least one attribute");
      for (std::size_t k = 1; k < fields.size(); ++k) t.attributes.push_back(trim(fields[k]));
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width)
      throw FormatError("attribute file line " + std::to_string(line_no) + ": ragged row with " +
                        std::to_string(fields.size()) + " fields, header has " + std::to_string(width));
    const ClassId id = trim(fields[0]);
    if (!seen.insert(id).second)
      throw DataError("attribute file line " + std::to_string(line_no) + ": duplicate class '" + id + "'");
    std::vector<double> row;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      if (!parse_double(fields[k], v))
        throw FormatError("attribute file line " + std::to_string(line_no) + ": '" + fields[k] + "' is not a number");
      if (v < 0.0 || v > 100.0)
        throw DataError("attribute file line " + std::to_string(line_no) + ": strength " + trim(fields[k]) +
                        " outside [0, 100]");
      row.push_back(v);
    }
    t.classes.push_back(id);
    rows.push_back(std::move(row));
  }
  if (!have_header) throw FormatError("attribute file is empty");
  t.strengths.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.attributes.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.strengths(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

AttributeTable load_attributes(const fs::path& path) { return parse_attributes(read_file(path)); }

std::string format_attributes(const AttributeTable& t) {
  std::string out = "class";
  for (const auto& a : t.attributes) out += "," + csv_quote(a);
  out += "\n";
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    out += csv_quote(t.classes[i]);
    for (Eigen::Index j = 0; j < t.strengths.cols(); ++j)
      out += "," + exact(t.strengths(static_cast<Eigen::Index>(i), j));
    out += "\n";
  }
  return out;
}

void save_attributes(const fs::path& path, const AttributeTable& t) { write_file(path, format_attributes(t)); }

// ------------------------------------------------------------ word vectors

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_count(const std::string& s, std::size_t& out) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) return false;
  out = std::stoull(s);
  return true;
}

}  // namespace

WordVectorTable parse_word_vectors(const std::string& text, std::vector<std::string>* warnings) {
  WordVectorTable w;
  std::map<std::string, std::size_t> first_line;
  const auto lines = split_lines(text);
  bool first_entry = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    const auto toks = split_ws(lines[n]);
    if (toks.empty()) continue;
    std::size_t count = 0, dim = 0;
    if (first_entry && toks.size() == 2 && parse_count(toks[0], count) && parse_count(toks[1], dim)) {
      if (dim == 0) throw FormatError("word vector file line " + std::to_string(line_no) + ": zero dimension");
      w.dim = dim;
      first_entry = false;
      continue;
    }
    first_entry = false;
    const std::size_t d = toks.size() - 1;
    if (d == 0) throw FormatError("word vector file line " + std::to_string(line_no) + ": token without values");
    if (w.dim == 0) w.dim = d;
    if (d != w.dim)
      throw FormatError("word vector file line " + std::to_string(line_no) + ": " + std::to_string(d) +
                        " values, expected " + std::to_string(w.dim));
    Vector v(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      double x = 0.0;
      if (!parse_double(toks[k + 1], x))
        throw FormatError("word vector file line " + std::to_string(line_no) + ": '" + toks[k + 1] +
                          "' is not a finite number");
      v(static_cast<Eigen::Index>(k)) = x;
    }
    auto [it, inserted] = first_line.emplace(toks[0], line_no);
    if (!inserted) {
      if (warnings)
        warnings->push_back("word vector file line " + std::to_string(line_no) + ": duplicate token '" + toks[0] +
                            "' overrides line " + std::to_string(it->second));
      it->second = line_no;
    }
    w.vectors[toks[0]] = std::move(v);
  }
  return w;
}

WordVectorTable load_word_vectors(const fs::path& path, std::vector<std::string>* warnings) {
  return parse_word_vectors(read_file(path), warnings);
}

void save_word_vectors(const fs::path& path, const WordVectorTable& w) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : w.vectors) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::string out = std::to_string(keys.size()) + " " + std::to_string(w.dim) + "\n";
  for (const auto& k : keys) {
    out += k;
    const Vector& v = w.vectors.at(k);
    for (Eigen::Index i = 0; i < v.size(); ++i) out += " " + exact(v(i));
    out += "\n";
  }
  write_file(path, out);
}

// ------------------------------------------------------------------ splits

ZeroShotSplit parse_splits(const std::string& text) {
  ZeroShotSplit s;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = lines[n];
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string where = "splits file line " + std::to_string(n + 1);
    if (toks.size() != 2) throw FormatError(where + ": expected '<partition> <class_id>'");
    std::set<ClassId>* target = nullptr;
    if (toks[0] == "train") target = &s.train_classes;
    else if (toks[0] == "val") target = &s.val_classes;
    else if (toks[0] == "test") target = &s.test_classes;
    else throw FormatError(where + ": unknown partition '" + toks[0] + "'");
    const std::string existing = s.partition_of(toks[1]);
    if (!existing.empty() && existing != toks[0])
      throw DataError(where + ": class '" + toks[1] + "' already in partition " + existing);
    target->insert(toks[1]);
  }
  return s;
}

ZeroShotSplit load_splits(const fs::path& path) { return parse_splits(read_file(path)); }

void save_splits(const fs::path& path, const ZeroShotSplit& s) {
  std::string out;
  for (const auto& c : s.train_classes) out += "train " + c + "\n";
  for (const auto& c : s.val_classes) out += "val " + c + "\n";
  for (const auto& c : s.test_classes) out += "test " + c + "\n";
  write_file(path, out);
}

// ------------------------------------------------------------------ corpus

std::map<ClassId, std::string> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("corpus directory '" + dir.string() + "' does not exist");
  std::map<ClassId, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      out[entry.path().stem().string()] = read_file(entry.path());
  return out;
}

void save_corpus(const fs::path& dir, const std::map<ClassId, std::string>& articles) {
  fs::create_directories(dir);
  for (const auto& [c, text] : articles) write_file(dir / (c + ".txt"), text);
}

// -------------------------------------------------------------- vocabulary

void save_vocabulary(const fs::path& path, const Vocabulary& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += v.terms[i] + "\t" + std::to_string(v.doc_freq[i]) + "\n";
  write_file(path, out);
}

Vocabulary load_vocabulary(const fs::path& path) {
  Vocabulary v;
  const auto lines = split_lines(read_file(path));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto tab = lines[n].find('\t');
    std::size_t df = 0;
    if (tab == std::string::npos || !parse_count(lines[n].substr(tab + 1), df))
      throw FormatError("vocabulary file line " + std::to_string(n + 1) + ": expected 'term<TAB>count'");
    v.terms.push_back(lines[n].substr(0, tab));
    v.doc_freq.push_back(df);
  }
  if (!std::is_sorted(v.terms.begin(), v.terms.end()) ||
      std::adjacent_find(v.terms.begin(), v.terms.end()) != v.terms.end())
    throw FormatError("vocabulary file terms are not unique and sorted");
  return v;
}

// ---------------------------------------------------------- language parts

void save_language_parts(const fs::path& path, const std::map<ClassId, LanguagePartSet>& parts) {
  std::string out;
  for (const auto& [c, set] : parts)
    for (std::size_t j = 0; j < set.parts.size(); ++j)
      for (const auto& [mod, tok] : set.parts[j].tokens) {
        out += c + "\t" + std::to_string(j) + "\t" + mod + "\t";
        for (Eigen::Index k = 0; k < tok.size(); ++k) out += (k ? " " : "") + exact(tok(k));
        out += "\n";
      }
  write_file(path, out);
}

std::map<ClassId, LanguagePartSet> load_language_parts(const fs::path& path) {
  std::map<ClassId, LanguagePartSet> out;
  const auto lines = split_lines(read_file(path));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const std::string where = "language part file line " + std::to_string(n + 1);
    std::vector<std::string> cols;
    std::istringstream in(lines[n]);
    std::string col;
    while (std::getline(in, col, '\t')) cols.push_back(col);
    std::size_t part = 0;
    if (cols.size() != 4 || !parse_count(cols[1], part)) throw FormatError(where + ": expected 4 tab-separated columns");
    const auto vals = split_ws(cols[3]);
    Vector v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t k = 0; k < vals.size(); ++k)
      if (!parse_double(vals[k], v(static_cast<Eigen::Index>(k)))) throw FormatError(where + ": bad value");
    auto& set = out[cols[0]];
    set.class_id = cols[0];
    if (part > set.parts.size()) throw FormatError(where + ": part index out of order");
    if (part == set.parts.size()) set.parts.emplace_back();
    set.parts[part].tokens[cols[2]] = v;
  }
  return out;
}

// ----------------------------------------------------------------- reports

std::string format_report_table(const ReportRows& rows) {
  std::set<std::size_t> ks;
  for (const auto& [name, r] : rows)
    for (const auto& [k, v] : r.recall_at) ks.insert(k);
  std::vector<std::string> header = {"protocol", "images", "classes", "top1"};
  for (auto k : ks) header.push_back("R@" + std::to_string(k));
  header.push_back("mAUC");
  for (auto k : ks) header.push_back("R@" + std::to_string(k) + "/img");

  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& [name, r] : rows) {
    std::vector<std::string> row = {name, std::to_string(r.images), std::to_string(r.classes),
                                    fmt_double("%.2f", r.top1_per_class)};
    for (auto k : ks) row.push_back(r.recall_at.count(k) ? fmt_double("%.2f", r.recall_at.at(k)) : "-");
    row.push_back(fmt_double("%.2f", 100.0 * r.mauc));
    for (auto k : ks)
      row.push_back(r.recall_at_per_image.count(k) ? fmt_double("%.2f", r.recall_at_per_image.at(k)) : "-");
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(widths[c] - row[c].size(), ' ');
      out += c == 0 ? row[c] + pad : "  " + pad + row[c];
    }
    out += "\n";
  }
  return out;
}

std::string format_report_kv(const ReportRows& rows) {
  std::string out;
  for (const auto& [name, r] : rows) {
    out += name + ".images = " + std::to_string(r.images) + "\n";
    out += name + ".classes = " + std::to_string(r.classes) + "\n";
    out += name + ".top1 = " + fmt_double("%.6f", r.top1_per_class) + "\n";
    for (const auto& [k, v] : r.recall_at) out += name + ".recall@" + std::to_string(k) + " = " + fmt_double("%.6f", v) + "\n";
    for (const auto& [k, v] : r.recall_at_per_image)
      out += name + ".recall_per_image@" + std::to_string(k) + " = " + fmt_double("%.6f", v) + "\n";
    out += name + ".mauc = " + fmt_double("%.6f", r.mauc) + "\n";
  }
  return out;
}

ReportRows parse_report_kv(const std::string& text) {
  ReportRows rows;
  auto row_for = [&rows](const std::string& name) -> MetricReport& {
    for (auto& [n, r] : rows)
      if (n == name) return r;
    rows.emplace_back(name, MetricReport{});
    return rows.back().second;
  };
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty() || trim(lines[n])[0] == '#') continue;
    const std::string where = "report line " + std::to_string(n + 1);
    const auto eq = lines[n].find('=');
    if (eq == std::string::npos) throw FormatError(where + ": expected 'key = value'");
    const std::string key = trim(lines[n].substr(0, eq));
    double value = 0.0;
    if (!parse_double(lines[n].substr(eq + 1), value)) throw FormatError(where + ": bad value");
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw FormatError(where + ": key '" + key + "' has no row prefix");
    MetricReport& r = row_for(key.substr(0, dot));
    const std::string metric = key.substr(dot + 1);
    auto suffix_k = [&](const std::string& prefix) {
      return static_cast<std::size_t>(std::stoul(metric.substr(prefix.size())));
    };
    if (metric == "images") r.images = static_cast<std::size_t>(value);
    else if (metric == "classes") r.classes = static_cast<std::size_t>(value);
    else if (metric == "top1") r.top1_per_class = value;
    else if (metric == "mauc") r.mauc = value;
    else if (metric.rfind("recall_per_image@", 0) == 0) r.recall_at_per_image[suffix_k("recall_per_image@")] = value;
    else if (metric.rfind("recall@", 0) == 0) r.recall_at[suffix_k("recall@")] = value;
    else throw FormatError(where + ": unknown metric '" + metric + "'");
  }
  return rows;
}

std::string format_train_log(const TrainReport& r) {
  std::string out;
  for (std::size_t e = 0; e < r.epoch_objective.size(); ++e) {
    out += "epoch " + std::to_string(e + 1) + " objective " + fmt_double("%.9g", r.epoch_objective[e]);
    if (e < r.epoch_val_top1.size()) out += " val_top1 " + fmt_double("%.4f", r.epoch_val_top1[e]);
    out += "\n";
  }
  return out;
}

std::string format_train_summary(const TrainReport& r, const TrainConfig& cfg) {
  std::string out;
  out += "batch_size = " + std::to_string(cfg.batch_size) + "\n";
  out += "momentum = " + exact(cfg.momentum) + "\n";
  out += "epochs = " + std::to_string(cfg.epochs) + "\n";
  out += "learning_rate = " + exact(cfg.learning_rate) + "\n";
  out += "embed_dim = " + std::to_string(cfg.embed_dim) + "\n";
  out += "loss.margin_delta = " + exact(cfg.loss.margin_delta) + "\n";
  out += "loss.reg_alpha = " + exact(cfg.loss.reg_alpha) + "\n";
  out += "loss.rank_beta = " + exact(cfg.loss.rank_beta) + "\n";
  out += std::string("loss.full_universe_negatives = ") + (cfg.loss.full_universe_negatives ? "true" : "false") + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  if (!r.epoch_objective.empty()) out += "final_objective = " + fmt_double("%.9g", r.epoch_objective.back()) + "\n";
  if (!r.epoch_val_top1.empty()) out += "final_val_top1 = " + fmt_double("%.4f", r.epoch_val_top1.back()) + "\n";
  if (!cfg.deterministic) out += "wall_clock_seconds = " + fmt_double("%.3f", r.wall_clock_seconds) + "\n";
  return out;
}

}  // namespace zsl::io
