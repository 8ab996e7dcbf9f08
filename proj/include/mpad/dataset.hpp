#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpad/image.hpp"
#include "mpad/rng.hpp"
#include "mpad/tensor.hpp"

namespace mpad::data {

// `other` marks anomalies without a dice defect taxonomy (e.g. digit
// stacks); it never appears in dices manifests.
enum class AnomalyType { none, drilling, missing_dots, sawing, scratching, other };

std::string anomaly_type_str(AnomalyType t);
AnomalyType anomaly_type_from_str(const std::string& s);

// One object seen from K perspectives.
struct ViewStack {
  std::vector<Image> views;
  int label = 0;  // 0 non-anomalous, 1 anomalous
  AnomalyType anomaly_type = AnomalyType::none;
  std::string id;
};

enum class SplitRole { train, test };

struct DatasetSplit {
  std::vector<ViewStack> samples;
  SplitRole role = SplitRole::train;
  std::string normal_class_desc;
};

// Validates the one-class contract and shape/range invariants.
void validate_split(const DatasetSplit& split);

// Channel-stack the views into a (1, K, H, W) tensor in view order.
nd::Tensor stack_views(const ViewStack& sample);
// Single view as a (1, 1, H, W) tensor.
nd::Tensor view_tensor(const ViewStack& sample, std::size_t view_index);

// ---------------------------------------------------------------------------
// Multi-perspective "digit" dataset: train stacks pair two distinct images
// of the normal digit; anomalous test stacks pair two randomly drawn images
// of other digits.
struct MultiviewMnistConfig {
  int normal_digit = 0;
  int n_train_stacks = 500;
  int n_test = 100;
  double normal_frac = 0.10;
  int target_size = 28;
};

struct TrainTest {
  DatasetSplit train;
  DatasetSplit test;
};

TrainTest synth_multiview_mnist(const IdxData& digits, const MultiviewMnistConfig& cfg,
                                Rng& rng);

// ---------------------------------------------------------------------------
// Dices manifest: CSV `experiment_id,view_a_path,view_b_path,label,anomaly_type`
// with 8-bit grayscale PNGs; paths relative to the manifest directory.
DatasetSplit load_dices_split(const std::string& manifest_path, SplitRole role);
void save_dices_split(const DatasetSplit& split, const std::string& dir,
                      const std::string& manifest_name);

// ---------------------------------------------------------------------------
// Procedural dice renderer: stand-in for the physical two-camera dataset.
struct SynthDicesConfig {
  int n_train = 500;
  int n_test = 100;
  // Histogram over {drilling, missing_dots, sawing, scratching}.
  std::vector<double> anomaly_mix = {0.17, 0.33, 0.17, 0.33};
  int image_size = 32;
  double pixel_noise_sigma = 0.06;
  double anomaly_frac = 0.5;  // fraction of the test split that is anomalous
};

TrainTest synth_dices(const SynthDicesConfig& cfg, Rng& rng);

// Largest-remainder apportionment of n into the given proportions.
std::vector<int> apportion(int n, const std::vector<double>& proportions);

// ---------------------------------------------------------------------------
// Augmentation
struct AugmentationPolicy {
  bool enable_erase = true;
  bool enable_constituents = true;
  bool enable_geometry = true;
  double erase_area_min = 0.02;
  double erase_area_max = 0.15;
  double brightness_delta = 0.2;
  double contrast_delta = 0.2;
  double saturation_delta = 0.2;  // no-op on single-channel images
  double gaussian_sigma = 0.05;
  double rotation_min_deg = -30.0;
  double rotation_max_deg = 30.0;
};

enum class AugmentedSetId { all, no_erase, no_constituents, no_geometry };

AugmentationPolicy policy_for_set(AugmentedSetId id);

// One randomly parameterized transform per enabled category; output clipped
// to [0,1].
Image augment(const Image& image, const AugmentationPolicy& policy, Rng& rng);

// Original samples plus one augmented copy each (independent random
// parameters per view). |output| = 2 * |input|.
DatasetSplit build_augmented_set(const DatasetSplit& train, AugmentedSetId set_id,
                                 std::uint64_t master_seed);

}  // namespace mpad::data
