#include "sfc/formation.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace sfc {

FormationSpec FormationSpec::circle(int followers, double radius, double first_angle) {
  if (followers < 1) throw std::invalid_argument("formation needs at least one follower");
  FormationSpec spec;
  for (int i = 0; i < followers; ++i) {
    const double theta = first_angle + 2.0 * kPi * i / followers;
    spec.offsets.push_back(relative_displacement(radius, theta));
  }
  return spec;
}

FormationSpec FormationSpec::from_polar(const std::vector<double>& distances,
                                        const std::vector<double>& bearings) {
  if (distances.size() != bearings.size()) {
    throw std::invalid_argument("formation distances and bearings differ in length");
  }
  FormationSpec spec;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    spec.offsets.push_back(relative_displacement(distances[i], bearings[i]));
  }
  return spec;
}

void FormationSpec::validate() const {
  if (offsets.empty()) throw std::invalid_argument("formation has no followers");
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!std::isfinite(offsets[i].x) || !std::isfinite(offsets[i].y)) {
      throw std::invalid_argument("formation offset is not finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if ((offsets[i] - offsets[j]).norm() < 1e-9) {
        throw std::invalid_argument("formation offsets must be distinct");
      }
    }
  }
}

TrackingWeight::TrackingWeight(const Eigen::Matrix2d& q) : q_(q) {
  if (!q.allFinite() || q(0, 1) != q(1, 0)) {
    throw std::invalid_argument("Q_e must be finite and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(q);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("Q_e must be positive definite");
  }
}

Vec2 relative_displacement(double distance, double bearing) {
  return {distance * std::cos(bearing), distance * std::sin(bearing)};
}

double tracking_cost(const Vec2& error, const TrackingWeight& weight) {
  const Eigen::Vector2d e(error.x, error.y);
  return e.dot(weight.matrix() * e);
}

}  // namespace sfc
