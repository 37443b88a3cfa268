#include "zsl/core.hpp"

#include <algorithm>

namespace zsl {

ModelParams ModelParams::zeros_like(const ModelParams& like) {
  ModelParams z;
  for (const auto& [id, w] : like.lang_proj) z.lang_proj[id] = Matrix::Zero(w.rows(), w.cols());
  z.lang_bias = Vector::Zero(like.lang_bias.size());
  z.vis_proj = Matrix::Zero(like.vis_proj.rows(), like.vis_proj.cols());
  z.vis_bias = Vector::Zero(like.vis_bias.size());
  return z;
}

double ModelParams::projection_squared_norm() const {
  double total = vis_proj.squaredNorm();
  for (const auto& [id, w] : lang_proj) total += w.squaredNorm();
  return total;
}

bool ModelParams::all_finite() const {
  if (!lang_bias.allFinite() || !vis_proj.allFinite() || !vis_bias.allFinite()) return false;
  return std::all_of(lang_proj.begin(), lang_proj.end(),
                     [](const auto& kv) { return kv.second.allFinite(); });
}

std::size_t ModelParams::size() const {
  std::size_t n = static_cast<std::size_t>(lang_bias.size() + vis_proj.size() + vis_bias.size());
  for (const auto& [id, w] : lang_proj) n += static_cast<std::size_t>(w.size());
  return n;
}

ModelDims dims_of(const ModelParams& m) {
  ModelDims dims;
  dims.visual_dim = m.visual_dim();
  dims.embed_dim = m.embed_dim();
  for (const auto& [id, w] : m.lang_proj) dims.modality_dims[id] = static_cast<std::size_t>(w.cols());
  return dims;
}

std::string ZeroShotSplit::partition_of(const ClassId& c) const {
  if (train_classes.count(c)) return "train";
  if (val_classes.count(c)) return "val";
  if (test_classes.count(c)) return "test";
  return "";
}

std::size_t Dataset::visual_dim() const {
  for (const auto& img : images)
    if (!img.image.parts.empty()) return static_cast<std::size_t>(img.image.parts.front().size());
  return 0;
}

std::map<ModalityId, std::size_t> Dataset::modality_dims() const {
  std::map<ModalityId, std::size_t> dims;
  for (const auto& [cid, set] : classes)
    for (const auto& part : set.parts)
      for (const auto& [mod, tok] : part.tokens) dims.emplace(mod, static_cast<std::size_t>(tok.size()));
  return dims;
}

std::vector<std::size_t> Dataset::images_of(const std::set<ClassId>& wanted) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < images.size(); ++i)
    if (wanted.count(images[i].class_id)) idx.push_back(i);
  return idx;
}

namespace {

std::size_t overlap(const std::set<ClassId>& a, const std::set<ClassId>& b) {
  std::size_t n = 0;
  for (const auto& c : a) n += b.count(c);
  return n;
}

}  // namespace

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  const auto& s = d.split;

  if (s.train_classes.empty()) out.push_back({"split", "train partition is empty"});
  if (s.val_classes.empty()) out.push_back({"split", "val partition is empty"});
  if (s.test_classes.empty()) out.push_back({"split", "test partition is empty"});
  if (overlap(s.train_classes, s.test_classes))
    out.push_back({"split", "train and test partitions overlap"});
  if (overlap(s.train_classes, s.val_classes))
    out.push_back({"split", "train and val partitions overlap"});
  if (overlap(s.val_classes, s.test_classes))
    out.push_back({"split", "val and test partitions overlap"});

  // Visual side. The first part seen fixes the dataset-wide dimension.
  std::size_t ref_dim = 0;
  std::string ref_image;
  for (const auto& img : d.images) {
    const auto& id = img.image.image_id;
    const std::string entity = "image '" + id + "'";
    if (img.image.parts.empty()) out.push_back({entity, "has no visual parts"});
    bool dim_reported = false;
    bool finite_reported = false;
    for (const auto& part : img.image.parts) {
      if (part.size() == 0) {
        if (!dim_reported) out.push_back({entity, "has a zero-dimensional visual part"});
        dim_reported = true;
        continue;
      }
      if (ref_dim == 0) {
        ref_dim = static_cast<std::size_t>(part.size());
        ref_image = id;
      } else if (static_cast<std::size_t>(part.size()) != ref_dim && !dim_reported) {
        out.push_back({entity + " vs image '" + ref_image + "'",
                       "visual part dimension " + std::to_string(part.size()) +
                           " differs from " + std::to_string(ref_dim)});
        dim_reported = true;
      }
      if (!part.allFinite() && !finite_reported) {
        out.push_back({entity, "visual part has non-finite entries"});
        finite_reported = true;
      }
    }
    const std::size_t memberships = s.train_classes.count(img.class_id) +
                                    s.val_classes.count(img.class_id) +
                                    s.test_classes.count(img.class_id);
    if (memberships == 0)
      out.push_back({entity, "class '" + img.class_id + "' is absent from every split partition"});
    else if (memberships > 1)
      out.push_back({entity, "class '" + img.class_id + "' is in more than one split partition"});
    if (!d.classes.count(img.class_id))
      out.push_back({entity, "class '" + img.class_id + "' has no language parts"});
  }

  // Language side.
  for (const auto* part_set : {&s.train_classes, &s.val_classes, &s.test_classes})
    for (const auto& c : *part_set)
      if (!d.classes.count(c)) out.push_back({"class '" + c + "'", "split class has no language parts"});

  const auto declared = d.modality_dims();
  for (const auto& [cid, set] : d.classes) {
    const std::string entity = "class '" + cid + "'";
    if (set.class_id != cid) out.push_back({entity, "language part set carries class id '" + set.class_id + "'"});
    if (set.parts.empty()) out.push_back({entity, "has no language parts"});
    for (std::size_t j = 0; j < set.parts.size(); ++j) {
      const auto& part = set.parts[j];
      const std::string pe = entity + " part " + std::to_string(j);
      if (part.tokens.empty()) out.push_back({pe, "language part has no tokens"});
      for (const auto& [mod, tok] : part.tokens) {
        if (static_cast<std::size_t>(tok.size()) != declared.at(mod) || tok.size() == 0)
          out.push_back({pe, "modality '" + mod + "' has dimension " + std::to_string(tok.size()) +
                                 ", declared " + std::to_string(declared.at(mod))});
        if (!tok.allFinite()) out.push_back({pe, "modality '" + mod + "' has non-finite entries"});
      }
    }
  }
  return out;
}

Dataset restrict_parts(const Dataset& d, std::size_t max_parts) {
  Dataset r = d;
  for (auto& img : r.images)
    if (img.image.parts.size() > max_parts) img.image.parts.resize(max_parts);
  return r;
}

}  // namespace zsl
