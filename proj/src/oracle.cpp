#include "zsl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "zsl/error.hpp"

namespace zsl::oracle {

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  const std::size_t total = spec.n_train_classes + spec.n_val_classes + spec.n_test_classes;
  if (spec.n_train_classes == 0 || spec.n_val_classes == 0 || spec.n_test_classes == 0 ||
      spec.parts_per_image == 0 || spec.visual_dim == 0 || spec.token_dim == 0 || spec.images_per_class == 0 ||
      spec.code_bits == 0)
    throw ConfigError("synthetic spec counts must all be at least 1");
  if (spec.code_bits > 30 || (std::size_t{1} << spec.code_bits) < total)
    throw ConfigError("code_bits too small for the number of classes (or above 30)");
  if (spec.token_dim < spec.code_bits || spec.visual_dim < spec.code_bits)
    throw ConfigError("token_dim and visual_dim must be at least code_bits");
  if (spec.bits_per_part == 0 || spec.bits_per_part > spec.code_bits)
    throw ConfigError("bits_per_part must lie in [1, code_bits]");
  if (!(spec.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");

  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto bits = static_cast<Eigen::Index>(spec.code_bits);

  SynthData out;
  auto& truth = out.truth;
  auto& d = out.dataset;

  // Token map is non-negative so generated tokens can be stored as
  // attribute strengths; each token lies in [0, 1].
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  truth.token_map.resize(static_cast<Eigen::Index>(spec.token_dim), bits);
  for (Eigen::Index c = 0; c < bits; ++c)
    for (Eigen::Index r = 0; r < truth.token_map.rows(); ++r)
      truth.token_map(r, c) = (r % bits == c) ? 0.5 + 0.4 * unit(rng) : 0.1 * unit(rng) / static_cast<double>(bits);
  const double col_scale = 1.0 / std::sqrt(static_cast<double>(bits));
  truth.visual_map.resize(static_cast<Eigen::Index>(spec.visual_dim), bits);
  for (Eigen::Index c = 0; c < bits; ++c)
    for (Eigen::Index r = 0; r < truth.visual_map.rows(); ++r) truth.visual_map(r, c) = col_scale * normal(rng);

  // Windows always cover the whole code, so a noiseless dataset stays
  // separable whatever the part count.
  const std::size_t window = std::max(spec.bits_per_part,
                                      (spec.code_bits + spec.parts_per_image - 1) / spec.parts_per_image);
  for (std::size_t p = 0; p < spec.parts_per_image; ++p) {
    const std::size_t start = p * spec.code_bits / spec.parts_per_image;
    std::vector<int> block;
    for (std::size_t b = 0; b < window; ++b)
      block.push_back(static_cast<int>((start + b) % spec.code_bits));
    std::sort(block.begin(), block.end());
    truth.blocks.push_back(std::move(block));
  }

  const int width = std::max(3, static_cast<int>(std::to_string(total).size()));
  std::set<std::vector<int>> used;
  for (std::size_t k = 0; k < total; ++k) {
    const ClassId id = numbered("c", k, width);
    std::vector<int> code(spec.code_bits);
    do {
      for (auto& b : code) b = coin(rng) ? 1 : 0;
    } while (used.count(code));
    used.insert(code);
    Vector z(bits);
    for (Eigen::Index b = 0; b < bits; ++b) z(b) = code[static_cast<std::size_t>(b)];
    truth.codes[id] = z;

    LanguagePart part;
    part.tokens[kSynthModality] = truth.token_map * z;
    d.classes[id] = LanguagePartSet{id, {part}};

    if (k < spec.n_train_classes)
      d.split.train_classes.insert(id);
    else if (k < spec.n_train_classes + spec.n_val_classes)
      d.split.val_classes.insert(id);
    else
      d.split.test_classes.insert(id);
  }

  for (const auto& [id, z] : truth.codes) {
    for (std::size_t i = 0; i < spec.images_per_class; ++i) {
      LabeledImage img;
      img.class_id = id;
      img.image.image_id = id + "_" + numbered("i", i, 3);
      for (std::size_t p = 0; p < spec.parts_per_image; ++p) {
        Vector u = Vector::Zero(bits);
        for (int b : truth.blocks[p]) u(b) = 2.0 * z(b) - 1.0;
        Vector x = truth.visual_map * u;
        for (Eigen::Index r = 0; r < x.size(); ++r) x(r) += spec.noise_sigma * normal(rng);
        img.image.parts.push_back(std::move(x));
      }
      d.images.push_back(std::move(img));
    }
  }
  return out;
}

ModelParams reference_params(const SynthTruth& truth) {
  const Eigen::Index k = truth.token_map.cols();
  const Matrix token_pinv = truth.token_map.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix visual_pinv = truth.visual_map.completeOrthogonalDecomposition().pseudoInverse();

  // Language side recovers [z; 1 - z], visual side [u; -u] with u = 2z - 1 on
  // the observed block, so v.s counts agreeing minus disagreeing bits.
  ModelParams m;
  Matrix lang(2 * k, truth.token_map.rows());
  lang << token_pinv, -token_pinv;
  m.lang_proj[kSynthModality] = lang;
  m.lang_bias = Vector::Zero(2 * k);
  m.lang_bias.tail(k).setOnes();
  m.vis_proj.resize(2 * k, truth.visual_map.rows());
  m.vis_proj << visual_pinv, -visual_pinv;
  m.vis_bias = Vector::Zero(2 * k);
  return m;
}

namespace {

double naive_dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += a(k) * b(k);
  return s;
}

Vector naive_visual(const Vector& f, const ModelParams& m) {
  Vector v(m.vis_proj.rows());
  for (Eigen::Index r = 0; r < m.vis_proj.rows(); ++r) {
    double s = m.vis_bias(r);
    for (Eigen::Index c = 0; c < m.vis_proj.cols(); ++c) s += m.vis_proj(r, c) * f(c);
    v(r) = s;
  }
  return v;
}

Vector naive_preact(const LanguagePart& p, const ModelParams& m) {
  Vector a(m.lang_bias.size());
  for (Eigen::Index r = 0; r < a.size(); ++r) {
    double s = m.lang_bias(r);
    for (const auto& [mod, tok] : p.tokens) {
      const Matrix& w = m.lang_proj.at(mod);
      for (Eigen::Index c = 0; c < w.cols(); ++c) s += w(r, c) * tok(c);
    }
    a(r) = s;
  }
  return a;
}

Vector relu(Vector a) {
  for (Eigen::Index r = 0; r < a.size(); ++r) a(r) = a(r) > 0.0 ? a(r) : 0.0;
  return a;
}

}  // namespace

double naive_compatibility(const std::vector<Vector>& x, const std::vector<Vector>& y) {
  if (x.empty() || y.empty()) throw DataError("compatibility of an empty part set");
  double total = 0.0;
  for (const auto& v : x)
    for (const auto& s : y) {
      const double dot = naive_dot(v, s);
      if (dot > 0.0) total += dot;
    }
  return total / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

double naive_compatibility(const VisualPartSet& x, const LanguagePartSet& y, const ModelParams& m) {
  std::vector<Vector> v, s;
  for (const auto& f : x.parts) v.push_back(naive_visual(f, m));
  for (const auto& p : y.parts) s.push_back(relu(naive_preact(p, m)));
  return naive_compatibility(v, s);
}

std::vector<double*> coordinates(ModelParams& m) {
  std::vector<double*> out;
  auto add = [&out](auto& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(x.data() + i);
  };
  for (auto& [mod, w] : m.lang_proj) add(w);
  add(m.lang_bias);
  add(m.vis_proj);
  add(m.vis_bias);
  return out;
}

std::vector<const double*> coordinates(const ParamGradients& g) {
  std::vector<const double*> out;
  auto add = [&out](const auto& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(x.data() + i);
  };
  for (const auto& [mod, w] : g.lang_proj) add(w);
  add(g.lang_bias);
  add(g.vis_proj);
  add(g.vis_bias);
  return out;
}

std::vector<std::string> coordinate_names(const ModelParams& m) {
  std::vector<std::string> out;
  auto add = [&out](const std::string& name, const auto& x) {
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      for (Eigen::Index r = 0; r < x.rows(); ++r)
        out.push_back(name + "(" + std::to_string(r) + "," + std::to_string(c) + ")");
  };
  for (const auto& [mod, w] : m.lang_proj) add("lang_proj[" + mod + "]", w);
  add("lang_bias", m.lang_bias);
  add("vis_proj", m.vis_proj);
  add("vis_bias", m.vis_bias);
  return out;
}

std::vector<double> kink_arguments(const Batch& batch, const Dataset& d, const ModelParams& m,
                                   const LossConfig& cfg) {
  std::set<ClassId> batch_classes;
  for (auto n : batch) batch_classes.insert(d.images.at(n).class_id);
  std::set<ClassId> universe = batch_classes;
  if (cfg.full_universe_negatives) universe = d.split.train_classes;

  std::vector<double> args;
  std::map<ClassId, std::vector<Vector>> lang;
  for (const auto& c : universe) {
    auto& embedded = lang[c];
    for (const auto& p : d.classes.at(c).parts) {
      const Vector a = naive_preact(p, m);
      for (Eigen::Index r = 0; r < a.size(); ++r) args.push_back(a(r));
      embedded.push_back(relu(a));
    }
  }

  for (auto n : batch) {
    const auto& img = d.images[n];
    std::vector<Vector> v;
    for (const auto& f : img.image.parts) v.push_back(naive_visual(f, m));

    for (const auto& c : batch_classes) {
      const auto& s = lang.at(c);
      std::vector<double> dots;
      for (const auto& vi : v)
        for (const auto& sj : s) dots.push_back(naive_dot(vi, sj));
      const bool matching = c == img.class_id;
      bool any_positive = false;
      for (double x : dots) {
        args.push_back(x);
        any_positive = any_positive || x > 0.0;
      }
      std::size_t forced = dots.size();
      if (matching && !any_positive) {
        forced = 0;
        for (std::size_t k = 1; k < dots.size(); ++k)
          if (dots[k] > dots[forced]) forced = k;
      }
      // Order among entries decides which one is forced positive.
      for (std::size_t k = 0; k < dots.size(); ++k)
        for (std::size_t l = k + 1; l < dots.size(); ++l)
          args.push_back(matching && !any_positive ? dots[k] - dots[l] : 1.0);
      for (std::size_t k = 0; k < dots.size(); ++k) {
        const double y = matching && (dots[k] > 0.0 || k == forced) ? 1.0 : -1.0;
        args.push_back(1.0 - y * dots[k]);
      }
    }

    std::map<ClassId, double> score;
    for (const auto& c : universe) {
      const auto& s = lang.at(c);
      double total = 0.0;
      for (const auto& vi : v)
        for (const auto& sj : s) {
          const double dot = naive_dot(vi, sj);
          args.push_back(dot);
          if (dot > 0.0) total += dot;
        }
      score[c] = total / (static_cast<double>(v.size()) * static_cast<double>(s.size()));
    }
    for (const auto& c : universe)
      if (c != img.class_id) args.push_back(cfg.margin_delta + score[c] - score[img.class_id]);
  }
  return args;
}

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

bool same_signs(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (sign_of(a[i]) != sign_of(b[i])) return false;
  return true;
}

}  // namespace

FdGradient fd_gradient(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg,
                       double h) {
  if (!(h > 0.0)) throw UsageError("finite-difference step must be positive");
  FdGradient out;
  out.grad = ParamGradients::zeros_like(m);
  out.skipped = ParamGradients::zeros_like(m);

  ModelParams work = m;
  const auto coords = coordinates(work);
  const auto grad_coords = coordinates(out.grad);
  const auto skip_coords = coordinates(out.skipped);
  const auto base_args = kink_arguments(batch, d, m, cfg);
  out.n_coordinates = coords.size();

  for (std::size_t k = 0; k < coords.size(); ++k) {
    double* x = coords[k];
    const double saved = *x;
    *x = saved + h;
    const double plus = total_objective(batch, d, work, cfg);
    *x = saved - h;
    const double minus = total_objective(batch, d, work, cfg);
    *x = saved + 10.0 * h;
    const bool stable_up = same_signs(base_args, kink_arguments(batch, d, work, cfg));
    *x = saved - 10.0 * h;
    const bool stable_down = same_signs(base_args, kink_arguments(batch, d, work, cfg));
    *x = saved;
    *const_cast<double*>(grad_coords[k]) = (plus - minus) / (2.0 * h);
    if (!stable_up || !stable_down) {
      *const_cast<double*>(skip_coords[k]) = 1.0;
      ++out.n_skipped;
    }
  }
  return out;
}

GradCheckResult check_gradient(const Batch& batch, const Dataset& d, const ModelParams& m, const LossConfig& cfg,
                               double h, double tolerance) {
  const ParamGradients analytic = gradient(batch, d, m, cfg);
  const FdGradient numeric = fd_gradient(batch, d, m, cfg, h);
  const auto a = coordinates(analytic);
  const auto f = coordinates(numeric.grad);
  const auto skip = coordinates(numeric.skipped);
  const auto names = coordinate_names(m);

  GradCheckResult r;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (*skip[k] != 0.0) {
      ++r.skipped;
      continue;
    }
    ++r.checked;
    const double denom = std::max({std::abs(*a[k]), std::abs(*f[k]), kRelErrorFloor});
    const double err = std::abs(*a[k] - *f[k]) / denom;
    if (err > r.max_rel_error || r.worst_coordinate.empty()) {
      r.max_rel_error = err;
      r.worst_coordinate = names[k];
    }
  }
  r.passed = r.checked > 0 && r.max_rel_error <= tolerance;
  return r;
}

GradCheckInstance random_gradcheck_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GradCheckInstance inst;
  const int embed = uniform_int(2, 8);
  const int visual = uniform_int(2, 8);
  const std::map<ModalityId, int> modality_dims = {{"bow", uniform_int(2, 6)}, {"word2vec", uniform_int(2, 6)}};
  const int n_classes = uniform_int(2, 4);

  auto& d = inst.dataset;
  for (int c = 0; c < n_classes; ++c) {
    const ClassId id = numbered("k", static_cast<std::size_t>(c), 2);
    d.split.train_classes.insert(id);
    LanguagePartSet set{id, {}};
    const int n_parts = uniform_int(1, 3);
    for (int j = 0; j < n_parts; ++j) {
      LanguagePart part;
      for (const auto& [mod, dim] : modality_dims) {
        if (part.tokens.size() == 1 && unit(rng) < 0.3) continue;
        Vector t(dim);
        for (auto& x : t) x = normal(rng);
        part.tokens[mod] = t;
      }
      set.parts.push_back(part);
    }
    d.classes[id] = set;
    const int n_images = uniform_int(1, 2);
    for (int i = 0; i < n_images; ++i) {
      LabeledImage img;
      img.class_id = id;
      img.image.image_id = id + "_" + std::to_string(i);
      const int n_vis = uniform_int(1, 3);
      for (int p = 0; p < n_vis; ++p) {
        Vector f(visual);
        for (auto& x : f) x = normal(rng);
        img.image.parts.push_back(f);
      }
      inst.batch.push_back(d.images.size());
      d.images.push_back(img);
    }
  }

  auto& m = inst.params;
  auto fill = [&](Matrix& w, Eigen::Index rows, Eigen::Index cols, double scale) {
    w.resize(rows, cols);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = scale * normal(rng);
  };
  for (const auto& [mod, dim] : modality_dims) fill(m.lang_proj[mod], embed, dim, 0.6);
  Matrix tmp;
  fill(tmp, embed, 1, 0.3);
  m.lang_bias = tmp.col(0);
  fill(m.vis_proj, embed, visual, 0.6);
  fill(tmp, embed, 1, 0.3);
  m.vis_bias = tmp.col(0);

  inst.loss.margin_delta = 0.1 + 0.9 * unit(rng);
  inst.loss.reg_alpha = 0.1 * unit(rng);
  inst.loss.rank_beta = 2.0 * unit(rng);
  inst.loss.full_universe_negatives = unit(rng) < 0.5;
  // The batch may omit a class so full-universe negatives differ.
  if (inst.loss.full_universe_negatives && inst.batch.size() > 2) inst.batch.pop_back();
  return inst;
}

}  // namespace zsl::oracle

namespace zsl::oracle {

SynthResources make_resources(const SynthData& data, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xA5A5A5A5ull);
  std::normal_distribution<double> normal(0.0, 1.0);
  SynthResources res;
  const auto& classes = data.dataset.classes;
  const auto token_dim = data.truth.token_map.rows();
  const auto bits = data.truth.token_map.cols();

  auto& t = res.attributes;
  for (Eigen::Index j = 0; j < token_dim; ++j) t.attributes.push_back(numbered("s", static_cast<std::size_t>(j), 2));
  t.strengths.resize(static_cast<Eigen::Index>(classes.size()), token_dim);
  Eigen::Index row = 0;
  for (const auto& [id, set] : classes) {
    t.classes.push_back(id);
    t.strengths.row(row++) = 100.0 * set.parts.front().tokens.at(kSynthModality).transpose();
  }

  auto& w = res.word_vectors;
  w.dim = static_cast<std::size_t>(token_dim);
  for (const auto& a : t.attributes) {
    Vector v(token_dim);
    for (auto& x : v) x = normal(rng);
    w.vectors[a] = v;
  }
  for (Eigen::Index i = 0; i < t.strengths.rows(); ++i) {
    Vector v = Vector::Zero(token_dim);
    const double total = t.strengths.row(i).sum();
    for (Eigen::Index j = 0; j < token_dim; ++j)
      v += (total > 0.0 ? t.strengths(i, j) / total : 0.0) * w.vectors.at(t.attributes[static_cast<std::size_t>(j)]);
    for (auto& x : v) x += 0.05 * normal(rng);
    w.vectors[t.classes[static_cast<std::size_t>(i)]] = v;
  }

  // Articles: a preamble and two headed sections. Each paragraph mentions a
  // random subset of the code words plus filler shared by every article.
  std::uniform_int_distribution<Eigen::Index> pick_bit(0, bits - 1);
  std::uniform_int_distribution<int> paragraphs_per_section(1, 3);
  for (const auto& [id, z] : data.truth.codes) {
    std::string text;
    auto paragraph = [&] {
      std::string p = "the bird";
      for (int k = 0; k < 12; ++k) {
        const Eigen::Index b = pick_bit(rng);
        p += (z(b) > 0.5 ? " trait" : " lacks") + std::to_string(b);
      }
      return p + " " + id + ".\n\n";
    };
    for (int k = paragraphs_per_section(rng); k > 0; --k) text += paragraph();
    for (const char* heading : {"== Description ==\n", "== Behaviour ==\n"}) {
      text += heading;
      for (int k = paragraphs_per_section(rng); k > 0; --k) text += paragraph();
    }
    res.corpus[id] = text;
  }
  return res;
}

}  // namespace zsl::oracle
