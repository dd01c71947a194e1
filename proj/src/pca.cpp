#include <algorithm>
#include <numeric>

#include "eegmatch/error.hpp"
#include "eegmatch/features.hpp"

namespace eegmatch {

PcaModel pca_fit(const Eigen::MatrixXd& rows, std::size_t k) {
  const auto n = rows.rows();
  const auto width = rows.cols();
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "PCA needs k >= 1");
  if (static_cast<Eigen::Index>(k) > width) {
    throw Error(ErrorKind::RankDeficient, "k = " + std::to_string(k) + " exceeds input width " + std::to_string(width));
  }
  if (n <= static_cast<Eigen::Index>(k)) {
    throw Error(ErrorKind::InvalidArgument, "PCA needs more rows than components");
  }
  if (!rows.allFinite()) throw Error(ErrorKind::InvalidArgument, "PCA input contains non-finite values");

  PcaModel model;
  model.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centred = rows.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "covariance eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(width));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return solver.eigenvalues()(a) > solver.eigenvalues()(b); });

  const auto kk = static_cast<Eigen::Index>(k);
  model.components.resize(kk, width);
  model.explained_variance.resize(kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    Eigen::VectorXd v = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    // Sign convention: the largest-magnitude entry is positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    model.components.row(i) = v.transpose();
    model.explained_variance(i) = std::max(0.0, solver.eigenvalues()(order[static_cast<std::size_t>(i)]));
  }
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.input_width()) {
    throw Error(ErrorKind::WidthMismatch, "input width " + std::to_string(rows.cols()) + " does not match model width " +
                                              std::to_string(model.input_width()));
  }
  return (rows.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& codes) {
  if (static_cast<std::size_t>(codes.cols()) != model.output_width()) {
    throw Error(ErrorKind::WidthMismatch, "code width does not match model");
  }
  return (codes * model.components).rowwise() + model.mean.transpose();
}

Eigen::MatrixXd to_rows(const TimeSeries& ts) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(ts.samples()), static_cast<Eigen::Index>(ts.channels()));
  for (std::size_t c = 0; c < ts.channels(); ++c) {
    for (std::size_t t = 0; t < ts.samples(); ++t) rows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = ts(c, t);
  }
  return rows;
}

TimeSeries pca_transform(const PcaModel& model, const TimeSeries& ts) {
  const Eigen::MatrixXd codes = pca_transform(model, to_rows(ts));
  TimeSeries out(static_cast<std::size_t>(codes.cols()), ts.samples(), ts.sample_rate_hz());
  for (Eigen::Index c = 0; c < codes.cols(); ++c) {
    for (Eigen::Index t = 0; t < codes.rows(); ++t) out(static_cast<std::size_t>(c), static_cast<std::size_t>(t)) = codes(t, c);
  }
  return out;
}

}  // namespace eegmatch
