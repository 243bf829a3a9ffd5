#pragma once

// First-order Gauss-Markov processes for the VIO-like sensor noise model
// and wind force disturbances.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "pvcoat/dynamics.hpp"
#include "pvcoat/errors.hpp"

namespace pvcoat {

// Exponentially correlated scalar noise with stationary std dev `sigma`.
class GaussMarkov {
 public:
  GaussMarkov(double sigma, double correlation_time)
      : sigma_(sigma), tau_(correlation_time) {}

  void init_stationary(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    state_ = sigma_ * gauss(rng);
  }

  double step(double dt, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (tau_ <= 0.0) {
      state_ = sigma_ * gauss(rng);
    } else {
      const double a = std::exp(-dt / tau_);
      state_ = a * state_ + sigma_ * std::sqrt(1.0 - a * a) * gauss(rng);
    }
    return state_;
  }

  double value() const { return state_; }

 private:
  double sigma_;
  double tau_;
  double state_ = 0.0;
};

struct SensorNoiseModel {
  bool enabled = false;
  Eigen::Vector3d position_sigma{0.0, 0.0, 0.0};  // m, per axis
  double attitude_sigma = 0.0;      // rad, per rotation-vector axis
  double correlation_time = 0.25;   // s

  void validate() const {
    if (position_sigma.minCoeff() < 0.0 || attitude_sigma < 0.0 ||
        correlation_time < 0.0) {
      throw ConfigError("noise sigmas and correlation time must be >= 0");
    }
  }
};

// Produces the estimated state the controller consumes: true state plus
// correlated position noise and a small attitude perturbation. Velocity and
// body rates pass through (IMU-grade).
class SensorNoise {
 public:
  SensorNoise(const SensorNoiseModel& model, std::uint64_t seed)
      : model_(model),
        rng_(seed),
        pos_{GaussMarkov(model.position_sigma.x(), model.correlation_time),
             GaussMarkov(model.position_sigma.y(), model.correlation_time),
             GaussMarkov(model.position_sigma.z(), model.correlation_time)},
        att_{GaussMarkov(model.attitude_sigma, model.correlation_time),
             GaussMarkov(model.attitude_sigma, model.correlation_time),
             GaussMarkov(model.attitude_sigma, model.correlation_time)} {
    model_.validate();
    if (model_.enabled) {
      for (auto& g : pos_) g.init_stationary(rng_);
      for (auto& g : att_) g.init_stationary(rng_);
    }
  }

  RigidBodyState apply(const RigidBodyState& truth, double dt) {
    if (!model_.enabled) return truth;
    RigidBodyState est = truth;
    Eigen::Vector3d dp, rotvec;
    for (int i = 0; i < 3; ++i) dp[i] = pos_[i].step(dt, rng_);
    for (int i = 0; i < 3; ++i) rotvec[i] = att_[i].step(dt, rng_);
    est.position += dp;
    const double angle = rotvec.norm();
    if (angle > 0.0) {
      est.attitude =
          truth.attitude * Eigen::Quaterniond(Eigen::AngleAxisd(
                               angle, rotvec / angle));
      est.attitude.normalize();
    }
    return est;
  }

 private:
  SensorNoiseModel model_;
  std::mt19937_64 rng_;
  GaussMarkov pos_[3];
  GaussMarkov att_[3];
};

struct WindModel {
  bool enabled = false;
  Eigen::Vector3d mean_force{0.0, 0.0, 0.0};  // N, world
  double sigma_force = 0.0;                   // N, per axis
  double correlation_time = 1.0;              // s

  void validate() const {
    if (sigma_force < 0.0 || correlation_time < 0.0) {
      throw ConfigError("wind sigma and correlation time must be >= 0");
    }
  }
};

class WindDisturbance {
 public:
  WindDisturbance(const WindModel& model, std::uint64_t seed)
      : model_(model),
        rng_(seed),
        gust_{GaussMarkov(model.sigma_force, model.correlation_time),
              GaussMarkov(model.sigma_force, model.correlation_time),
              GaussMarkov(model.sigma_force, model.correlation_time)} {
    model_.validate();
    if (model_.enabled) {
      for (auto& g : gust_) g.init_stationary(rng_);
    }
  }

  Eigen::Vector3d step(double dt) {
    if (!model_.enabled) return Eigen::Vector3d::Zero();
    Eigen::Vector3d f = model_.mean_force;
    for (int i = 0; i < 3; ++i) f[i] += gust_[i].step(dt, rng_);
    return f;
  }

 private:
  WindModel model_;
  std::mt19937_64 rng_;
  GaussMarkov gust_[3];
};

}  // namespace pvcoat
