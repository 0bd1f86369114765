#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <variant>

namespace raresim {

/// Covariance matrix held in one of several structured forms so that
/// sampling, log-density evaluation and the determinant stay cheap:
///
///   Identity        I_n
///   Full            arbitrary SPD matrix (Cholesky cached)
///   Diagonal        positive diagonal
///   RankOne         (v - 1) R R^T + (1 + eps) I_n  with ||R|| = 1
///   NorthWestBlock  SPD k x k block in the leading corner, identity outside
///
/// The rank-one form keeps everything O(n): its inverse is available in
/// closed form (Sherman-Morrison) and its log-determinant is
/// (n-1) log(1+eps) + log(v+eps).
class StructuredCovariance {
 public:
  enum class Kind { Identity, Full, Diagonal, RankOne, NorthWestBlock };

  static StructuredCovariance identity(Eigen::Index n);
  /// Throws ConfigError if `sigma` is not symmetric positive definite.
  static StructuredCovariance full(Eigen::MatrixXd sigma);
  /// Throws ConfigError unless all entries are > 0.
  static StructuredCovariance diagonal(Eigen::VectorXd variances);
  /// `direction` must be unit length (tolerance 1e-12); variance >= 0,
  /// epsilon > 0.
  static StructuredCovariance rank_one(Eigen::VectorXd direction,
                                       double variance, double epsilon);
  /// SPD `block` of size k <= n in the leading corner, identity elsewhere.
  static StructuredCovariance north_west_block(Eigen::MatrixXd block,
                                               Eigen::Index n);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }

  double log_det() const;

  /// Quadratic forms c_i^T Sigma^{-1} c_i for each row c_i of `centered`.
  Eigen::VectorXd quad_form(const Eigen::MatrixXd& centered) const;

  /// Maps iid standard normal rows G to rows with covariance Sigma,
  /// using an exact square root of the structured form.
  Eigen::MatrixXd apply_sqrt(const Eigen::MatrixXd& iid) const;

  Eigen::MatrixXd dense() const;

  // Rank-one accessors (only valid for Kind::RankOne).
  const Eigen::VectorXd& direction() const;
  double rank_one_variance() const;
  double epsilon() const;

  // Diagonal accessor (only valid for Kind::Diagonal).
  const Eigen::VectorXd& diagonal_entries() const;

 private:
  struct IdentityForm {};
  struct FullForm {
    Eigen::MatrixXd sigma;
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_det;
  };
  struct DiagonalForm {
    Eigen::VectorXd variances;
  };
  struct RankOneForm {
    Eigen::VectorXd direction;
    double variance;
    double epsilon;
  };
  struct NorthWestForm {
    Eigen::MatrixXd block;
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_det;
  };

  StructuredCovariance(Kind kind, Eigen::Index dim)
      : kind_(kind), dim_(dim) {}

  Kind kind_;
  Eigen::Index dim_;
  std::variant<IdentityForm, FullForm, DiagonalForm, RankOneForm,
               NorthWestForm>
      form_{IdentityForm{}};
};

}  // namespace raresim
