#include "mpad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mpad::data {

namespace fs = std::filesystem;

std::string anomaly_type_str(AnomalyType t) {
  switch (t) {
    case AnomalyType::none: return "none";
    case AnomalyType::drilling: return "drilling";
    case AnomalyType::missing_dots: return "missing_dots";
    case AnomalyType::sawing: return "sawing";
    case AnomalyType::scratching: return "scratching";
    case AnomalyType::other: return "other";
  }
  throw std::logic_error("unreachable anomaly type");
}

AnomalyType anomaly_type_from_str(const std::string& s) {
  if (s == "none") return AnomalyType::none;
  if (s == "drilling") return AnomalyType::drilling;
  if (s == "missing_dots") return AnomalyType::missing_dots;
  if (s == "sawing") return AnomalyType::sawing;
  if (s == "scratching") return AnomalyType::scratching;
  throw std::invalid_argument("unknown anomaly_type: '" + s + "'");
}

void validate_split(const DatasetSplit& split) {
  for (const auto& s : split.samples) {
    if (s.views.size() < 1) throw std::invalid_argument("sample with no views");
    if (s.label != 0 && s.label != 1) throw std::invalid_argument("label must be 0 or 1");
    if (split.role == SplitRole::train && s.label != 0)
      throw std::invalid_argument("one-class contract violated: anomalous sample '" +
                                  s.id + "' in a train split");
    if ((s.anomaly_type == AnomalyType::none) != (s.label == 0))
      throw std::invalid_argument("anomaly_type must be none exactly when label is 0");
    const int h = s.views.front().height, w = s.views.front().width;
    for (const auto& v : s.views) {
      if (v.height != h || v.width != w)
        throw std::invalid_argument("views of sample '" + s.id + "' differ in size");
      for (double px : v.pixels)
        if (px < 0.0 || px > 1.0)
          throw std::invalid_argument("pixel outside [0,1] in sample '" + s.id + "'");
    }
  }
}

nd::Tensor stack_views(const ViewStack& sample) {
  if (sample.views.empty()) throw std::invalid_argument("stack_views: no views");
  const int h = sample.views.front().height, w = sample.views.front().width;
  std::vector<double> data;
  data.reserve(sample.views.size() * static_cast<std::size_t>(h) * w);
  for (const auto& v : sample.views) {
    if (v.height != h || v.width != w)
      throw std::invalid_argument("stack_views: mismatched view sizes");
    data.insert(data.end(), v.pixels.begin(), v.pixels.end());
  }
  return nd::Tensor::from_data({1, static_cast<int>(sample.views.size()), h, w},
                               std::move(data));
}

nd::Tensor view_tensor(const ViewStack& sample, std::size_t view_index) {
  if (view_index >= sample.views.size())
    throw std::invalid_argument("view_tensor: view index out of range");
  const Image& v = sample.views[view_index];
  return nd::Tensor::from_data({1, 1, v.height, v.width}, v.pixels);
}

// ---------------------------------------------------------------------------
// Multi-perspective digit stacks

TrainTest synth_multiview_mnist(const IdxData& digits, const MultiviewMnistConfig& cfg,
                                Rng& rng) {
  if (cfg.normal_digit < 0 || cfg.normal_digit > 9)
    throw std::invalid_argument("normal_digit must be in 0..9");
  if (cfg.normal_frac < 0.0 || cfg.normal_frac > 1.0)
    throw std::invalid_argument("normal_frac must be in [0,1]");
  std::vector<std::size_t> normal_pool, other_pool;
  for (std::size_t i = 0; i < digits.images.size(); ++i) {
    if (digits.labels[i] == cfg.normal_digit)
      normal_pool.push_back(i);
    else
      other_pool.push_back(i);
  }
  if (normal_pool.size() < 2)
    throw std::invalid_argument("need at least 2 images of the normal digit, have " +
                                std::to_string(normal_pool.size()));
  if (other_pool.empty()) throw std::invalid_argument("no images of non-normal digits");

  auto prep = [&](std::size_t idx) {
    const Image& src = digits.images[idx];
    if (src.height == cfg.target_size && src.width == cfg.target_size) return src;
    return bilinear_resize(src, cfg.target_size, cfg.target_size);
  };
  auto draw = [&](const std::vector<std::size_t>& pool) {
    return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
  };
  auto distinct_pair = [&](const std::vector<std::size_t>& pool) {
    const std::size_t a = draw(pool);
    std::size_t b = draw(pool);
    while (b == a) b = draw(pool);
    return std::pair<std::size_t, std::size_t>{a, b};
  };

  TrainTest out;
  out.train.role = SplitRole::train;
  out.train.normal_class_desc = "digit " + std::to_string(cfg.normal_digit);
  for (int i = 0; i < cfg.n_train_stacks; ++i) {
    auto [a, b] = distinct_pair(normal_pool);
    ViewStack s;
    s.views = {prep(a), prep(b)};
    s.label = 0;
    s.id = "train" + std::to_string(i);
    out.train.samples.push_back(std::move(s));
  }

  out.test.role = SplitRole::test;
  out.test.normal_class_desc = out.train.normal_class_desc;
  const int n_normal = static_cast<int>(std::lround(cfg.n_test * cfg.normal_frac));
  for (int i = 0; i < cfg.n_test; ++i) {
    ViewStack s;
    if (i < n_normal) {
      auto [a, b] = distinct_pair(normal_pool);
      s.views = {prep(a), prep(b)};
      s.label = 0;
      s.anomaly_type = AnomalyType::none;
    } else {
      // Two randomly selected non-normal digit images form one anomalous stack.
      s.views = {prep(draw(other_pool)), prep(draw(other_pool))};
      s.label = 1;
      s.anomaly_type = AnomalyType::other;
    }
    s.id = "test" + std::to_string(i);
    out.test.samples.push_back(std::move(s));
  }
  validate_split(out.train);
  validate_split(out.test);
  return out;
}

// ---------------------------------------------------------------------------
// Manifest I/O

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

constexpr const char* kManifestHeader = "experiment_id,view_a_path,view_b_path,label,anomaly_type";

}  // namespace

DatasetSplit load_dices_split(const std::string& manifest_path, SplitRole role) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty manifest: " + manifest_path);
  if (line != kManifestHeader)
    throw std::runtime_error("bad manifest header, expected '" + std::string(kManifestHeader) + "'");

  DatasetSplit split;
  split.role = role;
  split.normal_class_desc = "good dice";
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 5)
      throw std::runtime_error("manifest row with " + std::to_string(f.size()) +
                               " fields: " + line);
    if (!seen_ids.insert(f[0]).second)
      throw std::runtime_error("duplicate experiment id '" + f[0] + "'");
    ViewStack s;
    s.id = f[0];
    s.views.push_back(read_png_gray((base / f[1]).string()));
    s.views.push_back(read_png_gray((base / f[2]).string()));
    if (f[3] != "0" && f[3] != "1")
      throw std::runtime_error("bad label '" + f[3] + "' for experiment '" + f[0] + "'");
    s.label = (f[3] == "1");
    s.anomaly_type = anomaly_type_from_str(f[4]);
    split.samples.push_back(std::move(s));
  }
  validate_split(split);
  return split;
}

void save_dices_split(const DatasetSplit& split, const std::string& dir,
                      const std::string& manifest_name) {
  fs::create_directories(fs::path(dir) / "images");
  std::ofstream out(fs::path(dir) / manifest_name);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << kManifestHeader << "\n";
  for (const auto& s : split.samples) {
    if (s.views.size() != 2)
      throw std::invalid_argument("manifest export requires exactly 2 views per sample");
    const std::string a = "images/" + s.id + "_a.png";
    const std::string b = "images/" + s.id + "_b.png";
    write_png_gray((fs::path(dir) / a).string(), s.views[0]);
    write_png_gray((fs::path(dir) / b).string(), s.views[1]);
    out << s.id << "," << a << "," << b << "," << s.label << ","
        << anomaly_type_str(s.anomaly_type) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Procedural dice

std::vector<int> apportion(int n, const std::vector<double>& proportions) {
  double total = 0.0;
  for (double p : proportions) {
    if (p < 0.0) throw std::invalid_argument("apportion: negative proportion");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("apportion: proportions must sum to 1");
  std::vector<int> counts(proportions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    const double exact = proportions[i] * n;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(-(exact - counts[i]), i);  // largest remainder first
  }
  std::sort(remainders.begin(), remainders.end());
  for (int k = 0; k < n - assigned; ++k) counts[remainders[k].second] += 1;
  return counts;
}

namespace {

// Pose and appearance of one rendered die view, in face coordinates
// spanning [-1,1]^2 before rotation/offset.
struct DicePose {
  int face_value = 1;
  double rotation_deg = 0.0;
  double half_size_frac = 0.36;  // face half-size as a fraction of image size
  double offset_y = 0.0, offset_x = 0.0;
  double face_color = 0.85;
  double dot_color = 0.15;
  double background = 0.10;
};

struct Defect {
  AnomalyType type = AnomalyType::none;
  double y = 0.0, x = 0.0;  // face coordinates
  double angle_deg = 0.0;
  int dot_index = 0;
};

std::vector<std::pair<double, double>> dot_layout(int value) {
  switch (value) {
    case 1: return {{0, 0}};
    case 2: return {{-0.5, -0.5}, {0.5, 0.5}};
    case 3: return {{-0.5, -0.5}, {0, 0}, {0.5, 0.5}};
    case 4: return {{-0.5, -0.5}, {-0.5, 0.5}, {0.5, -0.5}, {0.5, 0.5}};
    case 5: return {{-0.5, -0.5}, {-0.5, 0.5}, {0, 0}, {0.5, -0.5}, {0.5, 0.5}};
    case 6:
      return {{-0.5, -0.5}, {-0.5, 0.5}, {0, -0.5}, {0, 0.5}, {0.5, -0.5}, {0.5, 0.5}};
    default: throw std::invalid_argument("dice face value must be 1..6");
  }
}

Image render_dice(const DicePose& pose, const Defect& defect, int size) {
  Image img = Image::zeros(size, size);
  const double rad = pose.rotation_deg * M_PI / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cy = (size - 1) / 2.0 + pose.offset_y;
  const double cx = (size - 1) / 2.0 + pose.offset_x;
  const double half = pose.half_size_frac * size;

  auto dots = dot_layout(pose.face_value);
  if (defect.type == AnomalyType::missing_dots && !dots.empty())
    dots.erase(dots.begin() + (defect.dot_index % dots.size()));

  const double dot_r = 0.18;
  const double drill_r = 0.34;
  const double scratch_rad = defect.angle_deg * M_PI / 180.0;
  const double sc = std::cos(scratch_rad), ss = std::sin(scratch_rad);

  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      // Pixel position in face coordinates.
      const double dy = (i - cy) / half, dx = (j - cx) / half;
      const double fy = c * dy + s * dx;
      const double fx = -s * dy + c * dx;
      double v = pose.background;
      if (std::abs(fy) <= 1.0 && std::abs(fx) <= 1.0) {
        v = pose.face_color;
        for (auto [py, px] : dots) {
          const double ddy = fy - py, ddx = fx - px;
          if (ddy * ddy + ddx * ddx <= dot_r * dot_r) {
            v = pose.dot_color;
            break;
          }
        }
        switch (defect.type) {
          case AnomalyType::drilling: {
            const double ddy = fy - defect.y, ddx = fx - defect.x;
            if (ddy * ddy + ddx * ddx <= drill_r * drill_r) v = pose.dot_color * 0.5;
            break;
          }
          case AnomalyType::sawing:
            // The cut removes a whole slab off one face edge.
            if (fx >= 0.55) v = pose.dot_color * 0.5;
            break;
          case AnomalyType::scratching: {
            // Wide gouge through (y, x) at the given angle.
            const double dist = std::abs(ss * (fy - defect.y) - sc * (fx - defect.x));
            if (dist <= 0.16) v = std::max(0.0, v - 0.55);
            break;
          }
          default: break;
        }
      }
      img.at(i, j) = v;
    }
  return img;
}

ViewStack make_dice_sample(Rng& rng, AnomalyType defect_type, int size,
                           double noise_sigma, const std::string& id) {
  const int face = static_cast<int>(rng.uniform_int(1, 6));
  const int faces[2] = {face, 7 - face};  // opposite faces of a standard die
  // Exactly one randomly chosen view shows the defect.
  const int defect_view = static_cast<int>(rng.uniform_int(0, 1));

  ViewStack out;
  out.label = (defect_type == AnomalyType::none) ? 0 : 1;
  out.anomaly_type = defect_type;
  out.id = id;
  for (int v = 0; v < 2; ++v) {
    DicePose pose;
    pose.face_value = faces[v];
    // The physical rig has fixed cameras and a centered part, so the pose
    // wobble is small; the defect has to carry the separation signal.
    pose.rotation_deg = rng.uniform(-7.0, 7.0);
    pose.half_size_frac = rng.uniform(0.36, 0.40);
    pose.offset_y = rng.uniform(-0.5, 0.5);
    pose.offset_x = rng.uniform(-0.5, 0.5);
    pose.face_color = rng.uniform(0.82, 0.92);
    pose.dot_color = rng.uniform(0.10, 0.20);
    pose.background = rng.uniform(0.05, 0.10);

    Defect defect;
    if (out.label == 1 && v == defect_view) {
      defect.type = defect_type;
      defect.y = rng.uniform(-0.6, 0.6);
      defect.x = rng.uniform(-0.6, 0.6);
      defect.angle_deg = rng.uniform(0.0, 180.0);
      defect.dot_index = static_cast<int>(rng.uniform_int(0, 5));
    }
    Image img = render_dice(pose, defect, size);
    if (noise_sigma > 0.0)
      for (double& px : img.pixels) px += rng.normal(0.0, noise_sigma);
    clip01(img);
    out.views.push_back(std::move(img));
  }
  return out;
}

}  // namespace

TrainTest synth_dices(const SynthDicesConfig& cfg, Rng& rng) {
  if (cfg.anomaly_mix.size() != 4)
    throw std::invalid_argument("anomaly_mix needs 4 proportions");
  const int n_anom = static_cast<int>(std::lround(cfg.n_test * cfg.anomaly_frac));
  const std::vector<int> per_type = apportion(n_anom, cfg.anomaly_mix);
  const AnomalyType types[4] = {AnomalyType::drilling, AnomalyType::missing_dots,
                                AnomalyType::sawing, AnomalyType::scratching};

  TrainTest out;
  out.train.role = SplitRole::train;
  out.train.normal_class_desc = "good dice";
  for (int i = 0; i < cfg.n_train; ++i)
    out.train.samples.push_back(make_dice_sample(rng, AnomalyType::none, cfg.image_size,
                                                 cfg.pixel_noise_sigma,
                                                 "train" + std::to_string(i)));

  out.test.role = SplitRole::test;
  out.test.normal_class_desc = out.train.normal_class_desc;
  int tid = 0;
  for (int i = 0; i < cfg.n_test - n_anom; ++i)
    out.test.samples.push_back(make_dice_sample(rng, AnomalyType::none, cfg.image_size,
                                                cfg.pixel_noise_sigma,
                                                "test" + std::to_string(tid++)));
  for (int t = 0; t < 4; ++t)
    for (int i = 0; i < per_type[t]; ++i)
      out.test.samples.push_back(make_dice_sample(rng, types[t], cfg.image_size,
                                                  cfg.pixel_noise_sigma,
                                                  "test" + std::to_string(tid++)));
  validate_split(out.train);
  validate_split(out.test);
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation

AugmentationPolicy policy_for_set(AugmentedSetId id) {
  AugmentationPolicy p;
  switch (id) {
    case AugmentedSetId::all: break;
    case AugmentedSetId::no_erase: p.enable_erase = false; break;
    case AugmentedSetId::no_constituents: p.enable_constituents = false; break;
    case AugmentedSetId::no_geometry: p.enable_geometry = false; break;
  }
  return p;
}

Image augment(const Image& image, const AugmentationPolicy& policy, Rng& rng) {
  Image out = image;
  if (policy.enable_erase) {
    const double frac = rng.uniform(policy.erase_area_min, policy.erase_area_max);
    // Rectangle with a random aspect ratio covering ~frac of the image.
    const double aspect = rng.uniform(0.5, 2.0);
    int rh = std::max(1, static_cast<int>(std::lround(std::sqrt(frac * aspect) * out.height)));
    int rw = std::max(1, static_cast<int>(std::lround(std::sqrt(frac / aspect) * out.width)));
    rh = std::min(rh, out.height);
    rw = std::min(rw, out.width);
    const int top = static_cast<int>(rng.uniform_int(0, out.height - rh));
    const int left = static_cast<int>(rng.uniform_int(0, out.width - rw));
    for (int i = top; i < top + rh; ++i)
      for (int j = left; j < left + rw; ++j) out.at(i, j) = 0.0;
  }
  if (policy.enable_constituents) {
    // One of: brightness, contrast, saturation (no-op on grayscale), noise.
    switch (rng.uniform_int(0, 3)) {
      case 0: {
        const double d = rng.uniform(-policy.brightness_delta, policy.brightness_delta);
        for (double& v : out.pixels) v += d;
        break;
      }
      case 1: {
        const double f = 1.0 + rng.uniform(-policy.contrast_delta, policy.contrast_delta);
        double mean = 0.0;
        for (double v : out.pixels) mean += v;
        mean /= static_cast<double>(out.pixels.size());
        for (double& v : out.pixels) v = mean + f * (v - mean);
        break;
      }
      case 2:
        // Saturation is undefined for single-channel data; keep the draw for
        // stream stability and leave the image unchanged.
        rng.uniform(-policy.saturation_delta, policy.saturation_delta);
        break;
      case 3:
        for (double& v : out.pixels) v += rng.normal(0.0, policy.gaussian_sigma);
        break;
    }
  }
  if (policy.enable_geometry) {
    switch (rng.uniform_int(0, 2)) {
      case 0: out = flip_horizontal(out); break;
      case 1: out = flip_vertical(out); break;
      case 2: out = rotate(out, rng.uniform(policy.rotation_min_deg, policy.rotation_max_deg)); break;
    }
  }
  clip01(out);
  return out;
}

DatasetSplit build_augmented_set(const DatasetSplit& train, AugmentedSetId set_id,
                                 std::uint64_t master_seed) {
  validate_split(train);
  if (train.role != SplitRole::train)
    throw std::invalid_argument("build_augmented_set: expected a train split");
  const AugmentationPolicy policy = policy_for_set(set_id);
  DatasetSplit out = train;
  for (std::size_t i = 0; i < train.samples.size(); ++i) {
    ViewStack aug = train.samples[i];
    aug.id += "_aug";
    for (std::size_t v = 0; v < aug.views.size(); ++v) {
      // Independent parameters per view, stable under any evaluation order.
      Rng rng = Rng::derive(master_seed, i * aug.views.size() + v);
      aug.views[v] = augment(aug.views[v], policy, rng);
    }
    out.samples.push_back(std::move(aug));
  }
  return out;
}

}  // namespace mpad::data
