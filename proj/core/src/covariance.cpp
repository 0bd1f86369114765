#include "raresim/covariance.hpp"

#include <cmath>
#include <utility>

#include "raresim/errors.hpp"

namespace raresim {

namespace {

double cholesky_log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

StructuredCovariance StructuredCovariance::identity(Eigen::Index n) {
  if (n < 1) throw ConfigError("covariance dimension must be >= 1");
  StructuredCovariance c(Kind::Identity, n);
  c.form_ = IdentityForm{};
  return c;
}

StructuredCovariance StructuredCovariance::full(Eigen::MatrixXd sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1)
    throw ConfigError("full covariance must be square");
  if (!sigma.isApprox(sigma.transpose(), 1e-10))
    throw ConfigError("full covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw ConfigError("full covariance is not positive definite");
  StructuredCovariance c(Kind::Full, sigma.rows());
  const double ld = cholesky_log_det(llt);
  c.form_ = FullForm{std::move(sigma), std::move(llt), ld};
  return c;
}

StructuredCovariance StructuredCovariance::diagonal(Eigen::VectorXd variances) {
  if (variances.size() < 1) throw ConfigError("empty diagonal covariance");
  if ((variances.array() <= 0.0).any())
    throw ConfigError("diagonal covariance entries must be > 0");
  StructuredCovariance c(Kind::Diagonal, variances.size());
  c.form_ = DiagonalForm{std::move(variances)};
  return c;
}

StructuredCovariance StructuredCovariance::rank_one(Eigen::VectorXd direction,
                                                    double variance,
                                                    double epsilon) {
  if (direction.size() < 1) throw ConfigError("empty rank-one direction");
  if (std::abs(direction.norm() - 1.0) > 1e-12)
    throw ConfigError("rank-one direction must be unit length");
  if (!(variance >= 0.0)) throw ConfigError("rank-one variance must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("rank-one epsilon must be > 0");
  StructuredCovariance c(Kind::RankOne, direction.size());
  c.form_ = RankOneForm{std::move(direction), variance, epsilon};
  return c;
}

StructuredCovariance StructuredCovariance::north_west_block(
    Eigen::MatrixXd block, Eigen::Index n) {
  if (block.rows() != block.cols() || block.rows() < 1 || block.rows() > n)
    throw ConfigError("north-west block must be square with k <= n");
  if (!block.isApprox(block.transpose(), 1e-10))
    throw ConfigError("north-west block must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() != Eigen::Success)
    throw ConfigError("north-west block is not positive definite");
  StructuredCovariance c(Kind::NorthWestBlock, n);
  const double ld = cholesky_log_det(llt);
  c.form_ = NorthWestForm{std::move(block), std::move(llt), ld};
  return c;
}

double StructuredCovariance::log_det() const {
  switch (kind_) {
    case Kind::Identity:
      return 0.0;
    case Kind::Full:
      return std::get<FullForm>(form_).log_det;
    case Kind::Diagonal:
      return std::get<DiagonalForm>(form_).variances.array().log().sum();
    case Kind::RankOne: {
      const auto& f = std::get<RankOneForm>(form_);
      return (dim_ - 1) * std::log1p(f.epsilon) +
             std::log(f.variance + f.epsilon);
    }
    case Kind::NorthWestBlock:
      return std::get<NorthWestForm>(form_).log_det;
  }
  return 0.0;
}

Eigen::VectorXd StructuredCovariance::quad_form(
    const Eigen::MatrixXd& centered) const {
  if (centered.cols() != dim_)
    throw DimensionMismatchError("quad_form: column count != dimension");
  switch (kind_) {
    case Kind::Identity:
      return centered.rowwise().squaredNorm();
    case Kind::Full: {
      const auto& f = std::get<FullForm>(form_);
      const Eigen::MatrixXd solved = f.llt.solve(centered.transpose());
      return (centered.transpose().cwiseProduct(solved))
          .colwise()
          .sum()
          .transpose();
    }
    case Kind::Diagonal: {
      const auto& f = std::get<DiagonalForm>(form_);
      return (centered.array().square().rowwise() /
              f.variances.transpose().array())
          .rowwise()
          .sum();
    }
    case Kind::RankOne: {
      // Sherman-Morrison: Sigma^{-1} = (I - ((v-1)/(v+eps)) R R^T)/(1+eps)
      const auto& f = std::get<RankOneForm>(form_);
      const Eigen::VectorXd proj = centered * f.direction;
      const double coeff = (f.variance - 1.0) / (f.variance + f.epsilon);
      return (centered.rowwise().squaredNorm() -
              coeff * proj.array().square().matrix()) /
             (1.0 + f.epsilon);
    }
    case Kind::NorthWestBlock: {
      const auto& f = std::get<NorthWestForm>(form_);
      const Eigen::Index k = f.block.rows();
      const Eigen::MatrixXd head = centered.leftCols(k);
      const Eigen::MatrixXd solved = f.llt.solve(head.transpose());
      Eigen::VectorXd q = (head.transpose().cwiseProduct(solved))
                              .colwise()
                              .sum()
                              .transpose();
      q += centered.rightCols(dim_ - k).rowwise().squaredNorm();
      return q;
    }
  }
  return {};
}

Eigen::MatrixXd StructuredCovariance::apply_sqrt(
    const Eigen::MatrixXd& iid) const {
  if (iid.cols() != dim_)
    throw DimensionMismatchError("apply_sqrt: column count != dimension");
  switch (kind_) {
    case Kind::Identity:
      return iid;
    case Kind::Full: {
      const auto& f = std::get<FullForm>(form_);
      return iid * f.llt.matrixL().toDenseMatrix().transpose();
    }
    case Kind::Diagonal: {
      const auto& f = std::get<DiagonalForm>(form_);
      return iid.array().rowwise() * f.variances.transpose().array().sqrt();
    }
    case Kind::RankOne: {
      // sqrt(Sigma) = sqrt(1+eps) I + (sqrt(v+eps) - sqrt(1+eps)) R R^T
      const auto& f = std::get<RankOneForm>(form_);
      const double s_perp = std::sqrt(1.0 + f.epsilon);
      const double s_dir = std::sqrt(f.variance + f.epsilon);
      const Eigen::VectorXd proj = iid * f.direction;
      return s_perp * iid +
             (s_dir - s_perp) * (proj * f.direction.transpose());
    }
    case Kind::NorthWestBlock: {
      const auto& f = std::get<NorthWestForm>(form_);
      const Eigen::Index k = f.block.rows();
      Eigen::MatrixXd out = iid;
      out.leftCols(k) =
          iid.leftCols(k) * f.llt.matrixL().toDenseMatrix().transpose();
      return out;
    }
  }
  return {};
}

Eigen::MatrixXd StructuredCovariance::dense() const {
  switch (kind_) {
    case Kind::Identity:
      return Eigen::MatrixXd::Identity(dim_, dim_);
    case Kind::Full:
      return std::get<FullForm>(form_).sigma;
    case Kind::Diagonal:
      return std::get<DiagonalForm>(form_).variances.asDiagonal();
    case Kind::RankOne: {
      const auto& f = std::get<RankOneForm>(form_);
      return (f.variance - 1.0) * (f.direction * f.direction.transpose()) +
             (1.0 + f.epsilon) * Eigen::MatrixXd::Identity(dim_, dim_);
    }
    case Kind::NorthWestBlock: {
      const auto& f = std::get<NorthWestForm>(form_);
      Eigen::MatrixXd out = Eigen::MatrixXd::Identity(dim_, dim_);
      out.topLeftCorner(f.block.rows(), f.block.cols()) = f.block;
      return out;
    }
  }
  return {};
}

const Eigen::VectorXd& StructuredCovariance::direction() const {
  return std::get<RankOneForm>(form_).direction;
}

double StructuredCovariance::rank_one_variance() const {
  return std::get<RankOneForm>(form_).variance;
}

double StructuredCovariance::epsilon() const {
  return std::get<RankOneForm>(form_).epsilon;
}

const Eigen::VectorXd& StructuredCovariance::diagonal_entries() const {
  return std::get<DiagonalForm>(form_).variances;
}

}  // namespace raresim
