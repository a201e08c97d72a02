#include "speclab/eigensolve.h"

#include "speclab/errors.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace speclab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void checkPencil(const SymmetricForm& K, const SymmetricForm& M, int count) {
  if (K.dimension() != M.dimension() || K.matrix.cols() != K.matrix.rows() || M.matrix.cols() != M.matrix.rows()) {
    throw ConfigError("pencil dimension mismatch: " + std::to_string(K.dimension()) + " vs " +
                      std::to_string(M.dimension()));
  }
  if (count < 1 || count > K.dimension()) throw ConfigError("requested eigenpair count out of range");
}

VectorXd residuals(const SparseMatrix& A, const SparseMatrix& B, const MatrixXd& X, const VectorXd& lambda) {
  const MatrixXd AX = A * X;
  const MatrixXd BX = B * X;
  VectorXd res(X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    const double denom = BX.col(j).norm();
    res(j) = (AX.col(j) - lambda(j) * BX.col(j)).norm() / (denom > 0 ? denom : 1.0);
  }
  return res;
}

// B-orthonormal basis of span(S) via SVQB, dropping directions with relative weight below dropTol.
MatrixXd svqb(const SparseMatrix& B, const MatrixXd& S, double dropTol = 1e-12) {
  if (S.cols() == 0) return S;
  MatrixXd G = S.transpose() * (B * S);
  G = 0.5 * (G + G.transpose());
  VectorXd d = G.diagonal();
  for (int i = 0; i < d.size(); ++i) d(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  MatrixXd Gs = d.asDiagonal() * G * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Gs);
  const VectorXd& w = eig.eigenvalues();
  const double wmax = w.maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < w.size(); ++i)
    if (w(i) > dropTol * wmax) keep.push_back(i);
  MatrixXd C(S.cols(), keep.size());
  for (int k = 0; k < static_cast<int>(keep.size()); ++k)
    C.col(k) = d.asDiagonal() * eig.eigenvectors().col(keep[k]) / std::sqrt(w(keep[k]));
  return S * C;
}

void projectOut(const SparseMatrix& B, const MatrixXd& Y, MatrixXd& X) {
  if (Y.cols() == 0 || X.cols() == 0) return;
  X -= Y * (Y.transpose() * (B * X));
}

SpectrumResult finish(SpectrumResult result, double clusterTol) {
  std::vector<double> ev(result.eigenvalues.data(), result.eigenvalues.data() + result.eigenvalues.size());
  result.clusters = cluster(ev, clusterTol);
  return result;
}

} // namespace

SpectrumResult solveDense(const SymmetricForm& K, const SymmetricForm& M, int count, double clusterTol) {
  checkPencil(K, M, count);
  const MatrixXd A = MatrixXd(K.matrix);
  const MatrixXd B = MatrixXd(M.matrix);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(0.5 * (A + A.transpose()), 0.5 * (B + B.transpose()));
  if (eig.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed", {});
  SpectrumResult result;
  result.dense = true;
  result.eigenvalues = eig.eigenvalues().head(count);
  result.eigenvectors = eig.eigenvectors().leftCols(count);
  result.residualNorms = residuals(K.matrix, M.matrix, result.eigenvectors, result.eigenvalues);
  return finish(std::move(result), clusterTol);
}

SpectrumResult solveLowest(const SymmetricForm& K, const SymmetricForm& M, int count, const EigenOptions& options) {
  checkPencil(K, M, count);
  const int n = K.dimension();
  if (n <= options.denseLimit) return solveDense(K, M, count, options.clusterTol);
  if (2 * count >= n) throw ConfigError("iterative solve needs count < dimension / 2");

  const SparseMatrix& A = K.matrix;
  const SparseMatrix& B = M.matrix;

  // Known kernel: the constant vector, B-normalized.
  MatrixXd Y(n, 0);
  if (options.deflateConstant) {
    VectorXd one = VectorXd::Ones(n);
    Y = one / std::sqrt(one.dot(B * one));
  }
  const int deflated = static_cast<int>(Y.cols());
  const int wanted = count - deflated;

  int extra = options.extraVectors >= 0 ? options.extraVectors : std::max(4, wanted / 4);
  int blockSize = std::min(wanted + extra, (n - deflated) / 3);
  blockSize = std::max(blockSize, wanted);

  // Preconditioner T = (A + shift B)^{-1}; grow the shift until the factorization succeeds.
  Eigen::SimplicialLDLT<SparseMatrix> solver;
  double shift = options.shift;
  for (int attempt = 0;; ++attempt) {
    SparseMatrix shifted = A + shift * B;
    solver.compute(shifted);
    bool ok = solver.info() == Eigen::Success && (solver.vectorD().array() > 0).all();
    if (ok) break;
    if (attempt > 8) throw SolverError("preconditioner factorization failed for every shift tried", {});
    shift = shift * 10.0 + 1.0;
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd X(n, blockSize);
  for (int j = 0; j < blockSize; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = normal(rng);
  projectOut(B, Y, X);
  X = svqb(B, X);

  MatrixXd P(n, 0);
  VectorXd lambda;
  VectorXd res;
  std::vector<double> best(wanted, std::numeric_limits<double>::infinity());

  // Initial Rayleigh-Ritz on X.
  {
    MatrixXd H = X.transpose() * (A * X);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (H + H.transpose()));
    X = X * eig.eigenvectors();
    lambda = eig.eigenvalues();
  }

  int iter = 0;
  for (; iter < options.maxIterations; ++iter) {
    res = residuals(A, B, X, lambda);
    bool converged = true;
    for (int j = 0; j < wanted; ++j) {
      best[j] = std::min(best[j], res(j));
      if (!(res(j) < options.tol)) converged = false;
    }
    if (converged) break;

    std::vector<int> active;
    for (int j = 0; j < X.cols(); ++j)
      if (!(res(j) < 0.1 * options.tol)) active.push_back(j);

    MatrixXd R(n, active.size());
    {
      const MatrixXd AX = A * X;
      const MatrixXd BX = B * X;
      for (int k = 0; k < static_cast<int>(active.size()); ++k) {
        int j = active[k];
        R.col(k) = AX.col(j) - lambda(j) * BX.col(j);
      }
    }
    MatrixXd W(n, R.cols());
    for (int k = 0; k < R.cols(); ++k) W.col(k) = solver.solve(R.col(k));

    MatrixXd WP(n, W.cols() + P.cols());
    WP << W, P;
    projectOut(B, Y, WP);
    // Two passes of orthogonalization against X for stability.
    for (int pass = 0; pass < 2; ++pass) WP -= X * (X.transpose() * (B * WP));
    MatrixXd Q = svqb(B, WP, 1e-10);
    for (int pass = 0; pass < 1 && Q.cols() > 0; ++pass) {
      Q -= X * (X.transpose() * (B * Q));
      Q = svqb(B, Q, 1e-10);
    }

    MatrixXd S(n, X.cols() + Q.cols());
    S << X, Q;
    MatrixXd H = S.transpose() * (A * S);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (H + H.transpose()));
    const MatrixXd C = eig.eigenvectors().leftCols(blockSize);
    lambda = eig.eigenvalues().head(blockSize);
    X = S * C;
    P = Q * C.bottomRows(Q.cols());
  }

  if (iter == options.maxIterations) {
    throw SolverError("LOBPCG did not converge in " + std::to_string(options.maxIterations) + " iterations", best);
  }

  SpectrumResult result;
  result.iterations = iter;
  const int total = deflated + wanted;
  result.eigenvalues.resize(total);
  result.eigenvectors.resize(n, total);
  if (deflated) {
    result.eigenvalues(0) = Y.col(0).dot(A * Y.col(0));
    result.eigenvectors.col(0) = Y.col(0);
  }
  result.eigenvalues.tail(wanted) = lambda.head(wanted);
  result.eigenvectors.rightCols(wanted) = X.leftCols(wanted);
  result.residualNorms = residuals(A, B, result.eigenvectors, result.eigenvalues);
  return finish(std::move(result), options.clusterTol);
}

Partition cluster(std::span<const double> eigenvalues, double relTol, double absTol) {
  Partition parts;
  for (int i = 0; i < static_cast<int>(eigenvalues.size()); ++i) {
    if (!parts.empty()) {
      const double prev = eigenvalues[parts.back().back()];
      const double cur = eigenvalues[i];
      const bool prevZero = std::abs(prev) <= absTol;
      const bool curZero = std::abs(cur) <= absTol;
      bool join;
      if (prevZero || curZero) {
        join = prevZero && curZero;
      } else {
        const double scale = std::max(std::abs(prev), std::abs(cur));
        join = (cur - prev) < relTol * scale;
      }
      if (join) {
        parts.back().push_back(i);
        continue;
      }
    }
    parts.push_back({i});
  }
  return parts;
}

namespace {

std::pair<int, int> countWith(std::span<const double> ev, double threshold, double guard) {
  int below = 0, at = 0;
  for (double l : ev) {
    if (l < threshold - guard) ++below;
    else if (std::abs(l - threshold) <= guard) ++at;
  }
  return {below, at};
}

} // namespace

ThresholdCount countThreshold(std::span<const double> eigenvalues, double threshold, double guard) {
  if (eigenvalues.empty() || eigenvalues.back() <= threshold + 1.25 * guard) {
    throw InsufficientSpectrumError("spectrum ends below threshold + guard; increase count");
  }
  ThresholdCount tc;
  tc.guard = guard;
  std::tie(tc.below, tc.at) = countWith(eigenvalues, threshold, guard);
  for (double f : {0.75, 1.25}) {
    if (countWith(eigenvalues, threshold, f * guard) != std::make_pair(tc.below, tc.at)) tc.stable = false;
  }
  return tc;
}

ThresholdCount countThreshold(const SpectrumResult& spectrum, double threshold, double guard) {
  std::vector<double> ev(spectrum.eigenvalues.data(), spectrum.eigenvalues.data() + spectrum.eigenvalues.size());
  return countThreshold(ev, threshold, guard);
}

void writeSpectrumCsv(const SpectrumResult& spectrum, std::ostream& out) {
  std::vector<int> clusterId(spectrum.size(), -1);
  for (int c = 0; c < static_cast<int>(spectrum.clusters.size()); ++c)
    for (int i : spectrum.clusters[c]) clusterId[i] = c;
  out << "index,eigenvalue,residual,cluster_id\n";
  out.precision(15);
  for (int i = 0; i < spectrum.size(); ++i) {
    out << i << ',' << spectrum.eigenvalues(i) << ',' << spectrum.residualNorms(i) << ',' << clusterId[i] << '\n';
  }
}

} // namespace speclab
