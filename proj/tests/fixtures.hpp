#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>

#include "zsl/core.hpp"

namespace fixtures {

inline zsl::Vector vec(std::initializer_list<double> xs) {
  zsl::Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline zsl::Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  zsl::Vector v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline zsl::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  zsl::Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal(rng);
  return m;
}

// Three classes (one per partition), two images each, two visual parts of
// dimension 2, one "attr" modality of dimension 2.
inline zsl::Dataset toy_dataset() {
  zsl::Dataset d;
  const char* ids[] = {"a", "b", "c"};
  double k = 1.0;
  for (const char* id : ids) {
    zsl::LanguagePart p;
    p.tokens["attr"] = vec({k, 1.0 - k / 4.0});
    d.classes[id] = zsl::LanguagePartSet{id, {p}};
    for (int i = 0; i < 2; ++i) {
      zsl::LabeledImage img;
      img.class_id = id;
      img.image.image_id = std::string(id) + "_" + std::to_string(i);
      img.image.parts = {vec({k, -k + i}), vec({0.5 * i, k})};
      d.images.push_back(img);
    }
    k += 1.0;
  }
  d.split.train_classes = {"a"};
  d.split.val_classes = {"b"};
  d.split.test_classes = {"c"};
  return d;
}

inline zsl::ModelParams random_params(std::mt19937_64& rng, Eigen::Index embed, Eigen::Index visual,
                                      const std::map<std::string, Eigen::Index>& modalities) {
  zsl::ModelParams m;
  for (const auto& [mod, dim] : modalities) m.lang_proj[mod] = random_matrix(rng, embed, dim);
  m.lang_bias = random_vector(rng, embed);
  m.vis_proj = random_matrix(rng, embed, visual);
  m.vis_bias = random_vector(rng, embed);
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("zsl_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
