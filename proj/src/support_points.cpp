#include "sbi/support_points.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sbi {

namespace {

void check_shapes(const SampleMatrix& x, const SampleMatrix& y) {
  if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("support points: empty sample");
  if (x.cols() != y.cols()) throw DimensionError("support points: dimension mismatch");
}

// Sum over rows r of |r - p|.
double distance_sum(const SampleMatrix& rows, const Eigen::Ref<const Eigen::RowVectorXd>& p) {
  return (rows.rowwise() - p).rowwise().norm().sum();
}

}  // namespace

double sp_objective(const SampleMatrix& x, const SampleMatrix& y) {
  check_shapes(x, y);
  const double n = static_cast<double>(x.rows());
  const double big_n = static_cast<double>(y.rows());
  double cross = 0.0;
  double self = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    cross += distance_sum(y, x.row(i));
    self += distance_sum(x, x.row(i));
  }
  return 2.0 / (n * big_n) * cross - self / (n * n);
}

SampleMatrix ccp_step(const SampleMatrix& x, const SampleMatrix& y, double eps) {
  check_shapes(x, y);
  const Eigen::Index n = x.rows();
  const double ratio = static_cast<double>(y.rows()) / static_cast<double>(n);
  SampleMatrix out(n, x.cols());
  Eigen::VectorXd dist_y(y.rows()), inv_y(y.rows()), inv_x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd xi = x.row(i);
    dist_y = (y.rowwise() - xi).rowwise().norm();
    inv_x = (x.rowwise() - xi).rowwise().norm().cwiseMax(eps).cwiseInverse();
    inv_x(i) = 0.0;
    // sum_j (x_i - x_j)/delta_ij = x_i * sum_j w_j - sum_j w_j x_j
    const Eigen::RowVectorXd repulsion = ratio * (xi * inv_x.sum() - inv_x.transpose() * x);

    // Reference points sitting on x_i are left out of the weights; otherwise
    // their 1/eps weight pins x_i in place.
    double coincident = 0.0;
    for (Eigen::Index m = 0; m < y.rows(); ++m) {
      if (dist_y(m) <= eps) {
        inv_y(m) = 0.0;
        coincident += 1.0;
      } else {
        inv_y(m) = 1.0 / dist_y(m);
      }
    }
    const double weight = inv_y.sum();
    if (weight == 0.0) {
      out.row(i) = xi;
      continue;
    }
    const Eigen::RowVectorXd target = (inv_y.transpose() * y + repulsion) / weight;
    if (coincident == 0.0) {
      out.row(i) = target;
      continue;
    }

    // Vardi-Zhang damping: x_i is optimal for its surrogate when the pull of
    // the other terms does not exceed the coincident mass.
    const double pull = weight * (target - xi).norm();
    double t = pull > coincident ? 1.0 - coincident / pull : 0.0;
    // per-point convex surrogate: sum_m |y_m - z| - <repulsion, z>
    const auto surrogate = [&](const Eigen::RowVectorXd& z) {
      return distance_sum(y, z) - repulsion.dot(z);
    };
    const double current = surrogate(xi);
    Eigen::RowVectorXd next = xi;
    for (int halvings = 0; t > 0.0 && halvings < 40; ++halvings, t *= 0.5) {
      const Eigen::RowVectorXd cand = xi + t * (target - xi);
      if (surrogate(cand) <= current) {
        next = cand;
        break;
      }
    }
    out.row(i) = next;
  }
  return out;
}

SampleMatrix random_subsample(const SampleMatrix& y, int n, std::uint64_t seed) {
  if (n < 1 || n > y.rows()) throw std::invalid_argument("subsample size must be in [1, N]");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(y.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // partial Fisher-Yates
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), idx.size() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
  }
  SampleMatrix out(n, y.cols());
  for (int i = 0; i < n; ++i) out.row(i) = y.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

SpResult support_points(const SampleMatrix& y, const SpConfig& cfg) {
  if (cfg.n < 1 || cfg.n > y.rows())
    throw std::invalid_argument("support points: need 1 <= n <= N, got n = " + std::to_string(cfg.n) +
                                ", N = " + std::to_string(y.rows()));
  if (cfg.max_iterations < 0) throw std::invalid_argument("support points: negative iteration cap");
  double tol = cfg.tolerance;
  if (tol <= 0.0) {
    const double range = (y.colwise().maxCoeff() - y.colwise().minCoeff()).maxCoeff();
    tol = 1e-6 * (range > 0.0 ? range : 1.0);
  }

  SpResult result;
  result.points = random_subsample(y, cfg.n, cfg.seed);
  if (cfg.record_objective) result.objective.push_back(sp_objective(result.points, y));
  for (int it = 0; it < cfg.max_iterations; ++it) {
    SampleMatrix next = ccp_step(result.points, y, cfg.eps);
    result.max_movement = (next - result.points).rowwise().norm().maxCoeff();
    result.points = std::move(next);
    result.iterations = it + 1;
    if (cfg.record_objective) result.objective.push_back(sp_objective(result.points, y));
    if (result.max_movement < tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace sbi
