#include "tshm/cp_als.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "tshm/error.hpp"
#include "tshm/kernels.hpp"

namespace tshm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<RowMatrix> as_eigen(FactorMatrix& f) {
  return {f.data.data(), static_cast<Eigen::Index>(f.rows), static_cast<Eigen::Index>(f.cols)};
}
Eigen::Map<const RowMatrix> as_eigen(const FactorMatrix& f) {
  return {f.data.data(), static_cast<Eigen::Index>(f.rows), static_cast<Eigen::Index>(f.cols)};
}

FactorMatrix gram(const FactorMatrix& a) {
  FactorMatrix g(a.cols, a.cols);
  as_eigen(g).noalias() = as_eigen(a).transpose() * as_eigen(a);
  return g;
}

// Symmetric pseudo-inverse; eigenvalues at or below tol * max are dropped.
RowMatrix pseudo_inverse(const FactorMatrix& g, double tol, bool& deficient) {
  Eigen::SelfAdjointEigenSolver<RowMatrix> eig(as_eigen(g));
  const auto& vals = eig.eigenvalues();
  const double cutoff = tol * std::max(0.0, vals.maxCoeff());
  Eigen::VectorXd inv(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] > cutoff && vals[i] > 0) {
      inv[i] = 1.0 / vals[i];
    } else {
      inv[i] = 0.0;
      deficient = true;
    }
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

// Column 2-norms move into weights. A zero column gets weight 0 and is
// replaced by a uniform unit vector so the unit-norm invariant holds.
void normalize_columns(FactorMatrix& a, std::vector<double>& weights) {
  for (std::size_t r = 0; r < a.cols; ++r) {
    double sq = 0;
    for (std::size_t i = 0; i < a.rows; ++i) sq += a(i, r) * a(i, r);
    const double norm = std::sqrt(sq);
    weights[r] = norm;
    if (norm > 0) {
      for (std::size_t i = 0; i < a.rows; ++i) a(i, r) /= norm;
    } else {
      const double u = 1.0 / std::sqrt(static_cast<double>(a.rows));
      for (std::size_t i = 0; i < a.rows; ++i) a(i, r) = u;
    }
  }
}

}  // namespace

FactorMatrix gram_hadamard(std::span<const FactorMatrix> factors, std::size_t skip) {
  const std::size_t rank = factors.front().cols;
  FactorMatrix h(rank, rank);
  std::fill(h.data.begin(), h.data.end(), 1.0);
  for (std::size_t q = 0; q < factors.size(); ++q) {
    if (q == skip) continue;
    const auto g = gram(factors[q]);
    for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] *= g.data[i];
  }
  return h;
}

CpAlsResult cp_als(std::span<const PartitionView> views, std::span<const Index> dims,
                   const CpAlsOptions& options) {
  if (options.rank < 1) throw Error(Errc::invalid_argument, "CP rank must be >= 1");
  if (options.iterations < 1) throw Error(Errc::invalid_argument, "iterations must be >= 1");
  if (dims.empty()) throw Error(Errc::invalid_argument, "tensor order must be >= 1");
  const std::size_t d = dims.size();
  const std::size_t rank = options.rank;

  CpAlsResult result;
  KruskalModel& model = result.model;
  model.dims.assign(dims.begin(), dims.end());
  model.rank = rank;
  model.weights.assign(rank, 1.0);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Index n : dims) {
    FactorMatrix f(n, rank);
    for (double& x : f.data) x = uniform(rng);
    model.factors.push_back(std::move(f));
  }
  kernels::check_mttkrp_shapes(views, model.factors, 0);

  double norm_x_sq = 0;
  for (const auto& v : views)
    for (std::size_t e = 0; e < v.count; ++e) norm_x_sq += v.values[e] * v.values[e];

  auto mttkrp = options.serial ? kernels::mttkrp_serial : kernels::mttkrp_parallel;
  FactorMatrix last_mttkrp;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    for (std::size_t m = 0; m < d; ++m) {
      FactorMatrix u = mttkrp(views, model.factors, m);
      const auto pinv = pseudo_inverse(gram_hadamard(model.factors, m),
                                       options.pinv_tolerance, result.rank_deficient);
      as_eigen(model.factors[m]).noalias() = as_eigen(u) * pinv;
      normalize_columns(model.factors[m], model.weights);
      if (m + 1 == d) last_mttkrp = std::move(u);
    }

    // <X, M> = sum_r w_r sum_i U(i,r) A_last(i,r); ||M||^2 = w^T (*_q G_q) w.
    const auto& a_last = model.factors[d - 1];
    double inner = 0;
    for (std::size_t r = 0; r < rank; ++r) {
      double col = 0;
      for (std::size_t i = 0; i < a_last.rows; ++i) col += last_mttkrp(i, r) * a_last(i, r);
      inner += model.weights[r] * col;
    }
    const auto h = gram_hadamard(model.factors, d);
    double norm_m_sq = 0;
    for (std::size_t r = 0; r < rank; ++r)
      for (std::size_t s = 0; s < rank; ++s)
        norm_m_sq += model.weights[r] * h(r, s) * model.weights[s];
    const double residual = std::sqrt(std::max(0.0, norm_x_sq + norm_m_sq - 2 * inner));
    const double fit = norm_x_sq > 0 ? 1.0 - residual / std::sqrt(norm_x_sq)
                                     : (residual == 0 ? 1.0 : 0.0);
    result.fit_history.push_back(fit);
  }
  result.fit = result.fit_history.back();
  return result;
}

}  // namespace tshm
