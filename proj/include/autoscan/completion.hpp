#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "autoscan/geometry.hpp"
#include "autoscan/rng.hpp"
#include "autoscan/scene.hpp"

namespace autoscan {

struct Completion {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

/// Predicts an object's complete surface cloud from whatever has been
/// observed so far. Implementations must return exactly `n` points with unit
/// normals. (Prediction precision is non-critical for the task loop; the
/// default below simply resamples the hidden ground truth.)
class CompletionOracle {
 public:
  virtual ~CompletionOracle() = default;
  virtual Completion complete(const std::vector<Vec3>& observed,
                              int instance_id, int n) = 0;
};

namespace detail {

inline const GroundTruthObject& object_by_instance(const SceneModel& scene,
                                                   int instance_id) {
  for (const GroundTruthObject& o : scene.objects)
    if (o.instance_id == instance_id) return o;
  throw std::out_of_range("unknown instance id " + std::to_string(instance_id));
}

inline Completion resample(const GroundTruthObject& obj, int n) {
  Completion c;
  c.points.reserve(n);
  c.normals.reserve(n);
  const std::size_t m = obj.points.size();
  for (int i = 0; i < n; ++i) {
    std::size_t idx = (std::size_t)i * m / n;
    c.points.push_back(obj.points[idx]);
    c.normals.push_back(obj.normals[idx]);
  }
  return c;
}

}  // namespace detail

/// Deterministic stride resample of the ground-truth cloud.
class GroundTruthOracle : public CompletionOracle {
 public:
  explicit GroundTruthOracle(const SceneModel& scene) : scene_(scene) {}

  Completion complete(const std::vector<Vec3>&, int instance_id,
                      int n) override {
    return detail::resample(detail::object_by_instance(scene_, instance_id), n);
  }

 private:
  const SceneModel& scene_;
};

/// Ground truth plus isotropic Gaussian jitter — exercises the task loop's
/// robustness to imprecise predictions. The jitter is a pure function of
/// (seed, instance), so repeated queries agree.
class NoisyOracle : public CompletionOracle {
 public:
  NoisyOracle(const SceneModel& scene, std::uint64_t seed, double sigma)
      : scene_(scene), seed_(seed), sigma_(sigma) {}

  Completion complete(const std::vector<Vec3>&, int instance_id,
                      int n) override {
    Completion c =
        detail::resample(detail::object_by_instance(scene_, instance_id), n);
    Rng rng(mix_seed(mix_seed(seed_, 0x09ac1e3177e9ull),
                     (std::uint64_t)instance_id));
    for (Vec3& p : c.points) {
      p.x += rng.normal() * sigma_;
      p.y += rng.normal() * sigma_;
      p.z += rng.normal() * sigma_;
      if (p.z < 0.0) p.z = 0.0;
    }
    return c;
  }

 private:
  const SceneModel& scene_;
  std::uint64_t seed_;
  double sigma_;
};

inline std::unique_ptr<CompletionOracle> make_oracle(const SceneModel& scene,
                                                     bool noisy,
                                                     std::uint64_t seed,
                                                     double jitter_sigma) {
  if (noisy)
    return std::make_unique<NoisyOracle>(scene, seed, jitter_sigma);
  return std::make_unique<GroundTruthOracle>(scene);
}

}  // namespace autoscan
