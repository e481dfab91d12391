#pragma once

#include "mvg/condition.hpp"
#include "mvg/gmm.hpp"
#include "mvg/schedule.hpp"
#include "mvg/tensor.hpp"

#include <span>
#include <vector>

namespace mvg {

/// Noise predictor eps(x, t, y).  Implementations are deterministic and
/// shape-preserving; `predict` must be safe to call concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Tensor predict(const Tensor& x, int t, const Condition& y) const = 0;
};

/// Exact posterior-mean noise E[eps | x_t = x, y] when the clean data is
/// distributed as m.conditional(y):
///   eps = -sqrt(1 - abar_t) * grad_x log p_t(x | y).
/// Responsibilities are evaluated in log space.
Tensor gmm_eps(const Tensor& x, int t, const Condition& y, const GmmModel& m,
               const NoiseSchedule& s);

/// Same quantity for an explicit mixture (no condition lookup).
Tensor mixture_eps(const Tensor& x, int t, const Mixture& mixture,
                   const NoiseSchedule& s);

/// Empirical (Parzen) optimal denoiser over a finite dataset.  Throws
/// std::domain_error when abar_t == 1.
Tensor parzen_eps(const Tensor& x, int t, std::span<const Tensor> dataset,
                  const NoiseSchedule& s);

class GmmDenoiser final : public Denoiser {
 public:
  GmmDenoiser(const GmmModel& model, const NoiseSchedule& schedule)
      : model_(model), schedule_(schedule) {}

  Tensor predict(const Tensor& x, int t, const Condition& y) const override {
    return gmm_eps(x, t, y, model_, schedule_);
  }

 private:
  const GmmModel& model_;
  const NoiseSchedule& schedule_;
};

/// Ignores the condition.
class ParzenDenoiser final : public Denoiser {
 public:
  ParzenDenoiser(std::vector<Tensor> dataset, const NoiseSchedule& schedule);

  Tensor predict(const Tensor& x, int t, const Condition& y) const override;

 private:
  std::vector<Tensor> dataset_;
  const NoiseSchedule& schedule_;
};

/// Always predicts zero noise.
class ZeroDenoiser final : public Denoiser {
 public:
  Tensor predict(const Tensor& x, int, const Condition&) const override {
    return Tensor(x.dims());
  }
};

struct Probe {
  Tensor x;
  int t = 1;
  Condition y;
};

/// max over probes of ||predict(x, t, y)||, the empirical output bound C2.
double measure_c2(const Denoiser& denoiser, std::span<const Probe> probes);

/// Forwards to another denoiser and keeps every input it was called with.
/// Not thread-safe; use one recorder per run.
class ProbeRecorder final : public Denoiser {
 public:
  explicit ProbeRecorder(const Denoiser& inner) : inner_(inner) {}

  Tensor predict(const Tensor& x, int t, const Condition& y) const override {
    probes_.push_back({x, t, y});
    return inner_.predict(x, t, y);
  }

  const std::vector<Probe>& probes() const { return probes_; }

 private:
  const Denoiser& inner_;
  mutable std::vector<Probe> probes_;
};

}  // namespace mvg
