#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "splyne/lrspace.hpp"
#include "splyne/thbspace.hpp"

namespace splyne {

enum class OperatorKind { mass, stiffness };

/// Dense symmetric Galerkin operator. Basis order is the space's natural one:
/// active_functions() for LR, the basis vector for THB. Stored fully; the
/// assembly guarantees exact symmetry by construction.
struct SymmetricOperator {
  OperatorKind kind = OperatorKind::mass;
  Eigen::MatrixXd matrix;
  std::string basis_tag;
};

/// Full spectrum, descending, plus the eigenvectors of the two extremes.
struct EigenSummary {
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd eigvec_min, eigvec_max;
};

enum class Extreme { min, max };

/// Per-element intensity in [0,1], aligned with the core elements of the
/// generating space's mesh.
struct Heatmap {
  std::vector<Element> elements;
  std::vector<double> intensity;
};

/// Gauss-Legendre rule on [-1,1]: n nodes, exact through degree 2n-1.
std::vector<std::pair<double, double>> gauss_legendre(int n);

/// Galerkin mass or stiffness matrix, integrated element by element with
/// p_k+1 Gauss points per direction (exact for the piecewise-polynomial
/// integrands). Ghost spaces integrate over the core domain only. The element
/// loop runs on up to SPLYNE_THREADS threads; contributions are reduced in
/// element order, so the result is bitwise reproducible.
SymmetricOperator assemble(const LRSpace& space, OperatorKind kind);
SymmetricOperator assemble(const THBSpace& space, OperatorKind kind);

/// Coefficients of the L2-projection of f (given in physical coordinates),
/// via Mc = b with the same quadrature. Throws numerical_error if the mass
/// matrix is singular, which signals a dependent basis.
Eigen::VectorXd l2_project(const LRSpace& space,
                           const std::function<double(double, double)>& f);
Eigen::VectorXd l2_project(const THBSpace& space,
                           const std::function<double(double, double)>& f);

/// Dense symmetric eigendecomposition (tridiagonalization + implicit shifts).
/// Throws numerical_error if the matrix is not symmetric to 1e-14 relative or
/// if an extreme eigenpair fails the 1e-9 residual check.
EigenSummary eigensolve(const SymmetricOperator& op);

/// Spectral condition estimate: |l1|/|lN| for mass, |l1|/|l_{N-1}| for
/// stiffness (whose smallest eigenvalue is the constant mode's zero).
double condition_estimate(const SymmetricOperator& op, const EigenSummary& summary);
double condition_estimate(const SymmetricOperator& op);

/// Element intensity = max |coefficient| over the basis functions supported
/// on the element, normalized to [0,1].
Heatmap eigvec_heatmap(const LRSpace& space, const EigenSummary& summary, Extreme which);
Heatmap eigvec_heatmap(const THBSpace& space, const EigenSummary& summary, Extreme which);

/// MatrixMarket coordinate text, symmetric: lower triangle, 1-based indices.
std::string write_matrix_market(const SymmetricOperator& op);

/// CSV `index,lambda`, eigenvalues descending, indices from 1.
std::string write_eigen_csv(const EigenSummary& summary);

}  // namespace splyne
