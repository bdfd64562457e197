#include "cvsynth/constraint_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "cvsynth/error.hpp"

namespace cvsynth {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> as_key(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void push_unique(std::vector<Vector>& out, std::set<std::vector<double>>& seen, const Vector& v) {
  if (seen.insert(as_key(v)).second) out.push_back(v);
}

// Calls visit(indices) for every k-subset of {0..n-1}.
template <class Visit>
void for_each_subset(int n, int k, const Visit& visit) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k > n) return;
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

double superellipse_gauge(const ConstraintSet::Superellipse& s, const Vector& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += std::pow(std::abs((x[i] - s.center[i]) / s.semi_axes[i]), s.exponent);
  }
  return std::pow(sum, 1.0 / s.exponent);
}

Vector superellipse_gradient(const ConstraintSet::Superellipse& s, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double y = (x[i] - s.center[i]) / s.semi_axes[i];
    const double sign = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
    g[i] = s.exponent * sign * std::pow(std::abs(y), s.exponent - 1.0) / s.semi_axes[i];
  }
  return g;
}

}  // namespace

double ConeQuery::margin(const Vector& v) const {
  if (normals.empty()) return std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& n : normals) worst = std::max(worst, n.dot(v));
  return -worst;
}

std::vector<Vector> sphere_directions(Eigen::Index n, std::size_t count) {
  std::vector<Vector> dirs;
  if (n <= 0) return dirs;
  if (n == 1) {
    dirs.push_back(Vector::Constant(1, 1.0));
    dirs.push_back(Vector::Constant(1, -1.0));
    return dirs;
  }
  count = std::max<std::size_t>(count, 1);
  if (n == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      Vector d(2);
      d << std::cos(phi), std::sin(phi);
      dirs.push_back(d);
    }
    return dirs;
  }
  if (n == 3) {
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden_angle * static_cast<double>(k);
      Vector d(3);
      d << r * std::cos(phi), r * std::sin(phi), z;
      dirs.push_back(d);
    }
    return dirs;
  }
  // Normalized grid on the faces of [-1, 1]^n.
  const double per_face = static_cast<double>(count) / (2.0 * static_cast<double>(n));
  const int k = std::max(2, static_cast<int>(std::lround(std::pow(per_face, 1.0 / static_cast<double>(n - 1)))));
  std::set<std::vector<double>> seen;
  std::vector<int> counter(static_cast<std::size_t>(n - 1), 0);
  for (Eigen::Index axis = 0; axis < n; ++axis) {
    for (double side : {-1.0, 1.0}) {
      std::fill(counter.begin(), counter.end(), 0);
      while (true) {
        Vector p(n);
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (j == axis) {
            p[j] = side;
          } else {
            p[j] = -1.0 + 2.0 * counter[static_cast<std::size_t>(c++)] / (k - 1);
          }
        }
        push_unique(dirs, seen, Vector(p.normalized()));
        std::size_t pos = 0;
        while (pos < counter.size() && ++counter[pos] == k) counter[pos++] = 0;
        if (pos == counter.size()) break;
      }
    }
  }
  return dirs;
}

ConstraintSet ConstraintSet::ball(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorCode::InvalidValue, "ball radius must be positive and finite");
  if (center.size() == 0) fail(ErrorCode::DimensionMismatch, "ball center is empty");
  ConstraintSet set;
  set.shape_ = Ball{std::move(center), radius};
  set.finalize();
  return set;
}

ConstraintSet ConstraintSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) fail(ErrorCode::DimensionMismatch, "box bounds must have equal nonzero length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
      fail(ErrorCode::InvalidValue, "box needs finite lower < upper on every axis");
    }
  }
  ConstraintSet set;
  set.shape_ = Box{std::move(lower), std::move(upper)};
  set.finalize();
  return set;
}

ConstraintSet ConstraintSet::polytope(Matrix normals, Vector offsets) {
  if (normals.rows() != offsets.size() || normals.rows() == 0 || normals.cols() == 0) {
    fail(ErrorCode::DimensionMismatch, "polytope needs one offset per normal row");
  }
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    const double norm = normals.row(i).norm();
    if (!(norm > 0.0)) fail(ErrorCode::InvalidValue, "polytope normal row is zero");
    normals.row(i) /= norm;
    offsets[i] /= norm;
  }
  ConstraintSet set;
  set.shape_ = Polytope{std::move(normals), std::move(offsets)};
  set.finalize();
  return set;
}

ConstraintSet ConstraintSet::superellipse(Vector center, Vector semi_axes, double exponent) {
  if (center.size() != semi_axes.size() || center.size() == 0) fail(ErrorCode::DimensionMismatch, "superellipse center/axes mismatch");
  if (!(exponent >= 2.0)) fail(ErrorCode::InvalidValue, "superellipse exponent must be >= 2 for a smooth boundary");
  for (Eigen::Index i = 0; i < semi_axes.size(); ++i) {
    if (!(semi_axes[i] > 0.0)) fail(ErrorCode::InvalidValue, "superellipse semi-axes must be positive");
  }
  ConstraintSet set;
  set.shape_ = Superellipse{std::move(center), std::move(semi_axes), exponent};
  set.finalize();
  return set;
}

void ConstraintSet::finalize() {
  std::visit(
      Overloaded{
          [&](const Ball& b) {
            witness_ = b.center;
            radius_ = b.radius;
            box_lo_ = b.center.array() - b.radius;
            box_hi_ = b.center.array() + b.radius;
          },
          [&](const Box& b) {
            witness_ = 0.5 * (b.lower + b.upper);
            radius_ = 0.5 * (b.upper - b.lower).norm();
            box_lo_ = b.lower;
            box_hi_ = b.upper;
          },
          [&](const Superellipse& s) {
            witness_ = s.center;
            radius_ = s.semi_axes.norm();
            box_lo_ = s.center - s.semi_axes;
            box_hi_ = s.center + s.semi_axes;
          },
          [&](const Polytope& p) {
            const auto n = static_cast<int>(p.normals.cols());
            const auto m = static_cast<int>(p.normals.rows());
            double scale = 1.0;
            for (Eigen::Index i = 0; i < p.offsets.size(); ++i) scale = std::max(scale, std::abs(p.offsets[i]));
            std::set<std::vector<double>> seen;
            for_each_subset(m, n, [&](const std::vector<int>& rows) {
              Matrix a(n, n);
              Vector c(n);
              for (int r = 0; r < n; ++r) {
                a.row(r) = p.normals.row(rows[static_cast<std::size_t>(r)]);
                c[r] = p.offsets[rows[static_cast<std::size_t>(r)]];
              }
              Eigen::FullPivLU<Matrix> lu(a);
              if (lu.rank() < n) return;
              Vector v = lu.solve(c);
              if (((p.normals * v - p.offsets).array() <= 1e-9 * scale).all()) push_unique(vertices_, seen, v);
            });
            if (vertices_.empty()) fail(ErrorCode::InvalidValue, "polytope has no vertices (empty or unbounded)");
            // Bounded iff every probing ray from the interior hits a facet.
            auto probes = sphere_directions(n, 64);
            for (int j = 0; j < n; ++j) {
              probes.push_back(Vector::Unit(n, j));
              probes.push_back(-Vector::Unit(n, j));
            }
            for (const auto& d : probes) {
              if ((p.normals * d).maxCoeff() <= 1e-12) fail(ErrorCode::InvalidValue, "polytope is unbounded");
            }
            witness_ = Vector::Zero(n);
            for (const auto& v : vertices_) witness_ += v;
            witness_ /= static_cast<double>(vertices_.size());
            radius_ = 0.0;
            box_lo_ = vertices_.front();
            box_hi_ = vertices_.front();
            for (const auto& v : vertices_) {
              radius_ = std::max(radius_, (v - witness_).norm());
              box_lo_ = box_lo_.cwiseMin(v);
              box_hi_ = box_hi_.cwiseMax(v);
            }
          },
      },
      shape_);
  if (!(margin(witness_) > 1e-9 * std::max(radius_, 1e-300))) {
    fail(ErrorCode::InvalidValue, "constraint set has empty interior");
  }
}

std::string_view ConstraintSet::variant_name() const {
  return std::visit(Overloaded{[](const Ball&) { return std::string_view("ball"); },
                               [](const Box&) { return std::string_view("box"); },
                               [](const Polytope&) { return std::string_view("polytope"); },
                               [](const Superellipse&) { return std::string_view("superellipse"); }},
                    shape_);
}

double ConstraintSet::margin(const Vector& x) const {
  if (x.size() != witness_.size()) fail(ErrorCode::DimensionMismatch, "point dimension differs from constraint set");
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return b.radius - (x - b.center).norm(); },
          [&](const Box& b) {
            return std::min((x - b.lower).minCoeff(), (b.upper - x).minCoeff());
          },
          [&](const Polytope& p) { return (p.offsets - p.normals * x).minCoeff(); },
          [&](const Superellipse& s) {
            return (1.0 - superellipse_gauge(s, x)) * s.semi_axes.minCoeff();
          },
      },
      shape_);
}

ConeQuery ConstraintSet::cone_at(const Vector& x) const {
  ConeQuery q;
  q.point = x;
  const double tol = tol_active();
  std::visit(
      Overloaded{
          [&](const Ball& b) {
            if (margin(x) <= tol) {
              q.active.push_back(0);
              q.normals.push_back((x - b.center).normalized());
            }
          },
          [&](const Box& b) {
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              if (x[i] <= b.lower[i] + tol) {
                q.active.push_back(static_cast<int>(2 * i));
                q.normals.push_back(-Vector::Unit(x.size(), i));
              }
              if (x[i] >= b.upper[i] - tol) {
                q.active.push_back(static_cast<int>(2 * i + 1));
                q.normals.push_back(Vector::Unit(x.size(), i));
              }
            }
          },
          [&](const Polytope& p) {
            const Vector slack = p.offsets - p.normals * x;
            for (Eigen::Index i = 0; i < slack.size(); ++i) {
              if (slack[i] <= tol) {
                q.active.push_back(static_cast<int>(i));
                q.normals.push_back(p.normals.row(i).transpose());
              }
            }
          },
          [&](const Superellipse& s) {
            if (margin(x) <= tol) {
              q.active.push_back(0);
              q.normals.push_back(superellipse_gradient(s, x).normalized());
            }
          },
      },
      shape_);
  return q;
}

std::vector<ConeQuery> ConstraintSet::sample_boundary(std::size_t density) const {
  if (density == 0) fail(ErrorCode::InvalidValue, "sampling density must be positive");
  std::vector<Vector> points;
  std::set<std::vector<double>> seen;
  const Eigen::Index n = dim();
  std::visit(
      Overloaded{
          [&](const Ball& b) {
            for (const auto& d : sphere_directions(n, density)) push_unique(points, seen, Vector(b.center + b.radius * d));
          },
          [&](const Superellipse& s) {
            for (const auto& d : sphere_directions(n, density)) {
              double sum = 0.0;
              for (Eigen::Index i = 0; i < n; ++i) sum += std::pow(std::abs(d[i] / s.semi_axes[i]), s.exponent);
              push_unique(points, seen, Vector(s.center + std::pow(sum, -1.0 / s.exponent) * d));
            }
          },
          [&](const Box& b) {
            const std::size_t k = std::max<std::size_t>(2, density);
            std::vector<std::size_t> counter(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)), 0);
            for (Eigen::Index axis = 0; axis < n; ++axis) {
              for (int side = 0; side < 2; ++side) {
                std::fill(counter.begin(), counter.end(), 0);
                while (true) {
                  Vector p(n);
                  std::size_t c = 0;
                  for (Eigen::Index j = 0; j < n; ++j) {
                    if (j == axis) {
                      p[j] = side == 0 ? b.lower[j] : b.upper[j];
                    } else {
                      const std::size_t step = counter[c++];
                      // Endpoints exactly, interior by linear spacing.
                      p[j] = step == 0 ? b.lower[j]
                             : step == k - 1 ? b.upper[j]
                                             : b.lower[j] + (b.upper[j] - b.lower[j]) * static_cast<double>(step) / static_cast<double>(k - 1);
                    }
                  }
                  push_unique(points, seen, p);
                  std::size_t pos = 0;
                  while (pos < counter.size() && ++counter[pos] == k) counter[pos++] = 0;
                  if (pos == counter.size()) break;
                }
              }
            }
          },
          [&](const Polytope& p) {
            for (const auto& v : vertices_) push_unique(points, seen, v);
            if (n == 2) {
              const std::size_t k = std::max<std::size_t>(2, density);
              for (Eigen::Index f = 0; f < p.normals.rows(); ++f) {
                std::vector<Vector> ends;
                for (const auto& v : vertices_) {
                  if (p.offsets[f] - p.normals.row(f).dot(v) <= tol_active()) ends.push_back(v);
                }
                if (ends.size() != 2) continue;
                for (std::size_t i = 1; i + 1 < k; ++i) {
                  const double w = static_cast<double>(i) / static_cast<double>(k - 1);
                  push_unique(points, seen, Vector((1.0 - w) * ends[0] + w * ends[1]));
                }
              }
            } else {
              for (const auto& d : sphere_directions(n, density)) {
                const Vector rate = p.normals * d;
                const Vector room = p.offsets - p.normals * witness_;
                double t = std::numeric_limits<double>::infinity();
                for (Eigen::Index i = 0; i < rate.size(); ++i) {
                  if (rate[i] > 0.0) t = std::min(t, room[i] / rate[i]);
                }
                push_unique(points, seen, Vector(witness_ + t * d));
              }
            }
          },
      },
      shape_);
  std::vector<ConeQuery> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(cone_at(x));
  return out;
}

}  // namespace cvsynth
