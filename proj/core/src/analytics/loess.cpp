#include "fieldlink/analytics/loess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "fieldlink/common/error.hpp"

namespace fieldlink::analytics {

namespace {

double tricube(double u) {
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

// Row i of the smoother matrix: fitted(x_i) = sum_j row[j] * y_j.
Eigen::VectorXd smoother_row(std::span<const double> x, std::size_t i, std::size_t k, int degree) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto dist = [&](std::size_t j) { return std::abs(x[j] - x[i]); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
  order.resize(k);
  const double dmax = dist(order.back());

  const int p = degree + 1;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(k), p);
  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < k; ++r) {
    const double dx = x[order[r]] - x[i];
    double term = 1.0;
    for (int c = 0; c < p; ++c) {
      design(static_cast<Eigen::Index>(r), c) = term;
      term *= dx;
    }
    w(static_cast<Eigen::Index>(r)) = dmax > 0 ? tricube(dist(order[r]) / dmax) : 1.0;
  }
  // Local polynomial centred on x_i, so the intercept is the fitted value.
  const Eigen::MatrixXd xtw = design.transpose() * w.asDiagonal();
  const Eigen::MatrixXd coeffs = (xtw * design).colPivHouseholderQr().solve(xtw);

  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < k; ++r) row(static_cast<Eigen::Index>(order[r])) = coeffs(0, static_cast<Eigen::Index>(r));
  return row;
}

}  // namespace

LoessFit loess_fit(std::span<const double> x, std::span<const double> y, double span, int degree) {
  if (degree != 1 && degree != 2) throw Error(Errc::invalid_argument, "degree must be 1 or 2");
  if (!(span > 0.0 && span <= 1.0)) throw Error(Errc::bad_span, "span must lie in (0, 1]", {{"span", span}});
  if (x.size() != y.size()) throw Error(Errc::invalid_argument, "x and y lengths differ");
  const std::size_t n = x.size();
  const std::size_t min_points = static_cast<std::size_t>(degree) + 2;
  if (n < min_points) {
    throw Error(Errc::too_few_points, "need at least " + std::to_string(min_points) + " points",
                {{"points", n}, {"degree", degree}});
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1])) throw Error(Errc::invalid_argument, "x must be strictly increasing");
  }

  // The farthest neighbour gets zero tricube weight, so degree + 2
  // neighbours leave degree + 1 weighted points for the local fit.
  const auto k = std::clamp(static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))), min_points, n);

  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd smoother(ni, ni);
  for (std::size_t i = 0; i < n; ++i) smoother.row(static_cast<Eigen::Index>(i)) = smoother_row(x, i, k, degree);

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), ni);
  const Eigen::VectorXd fitted = smoother * yv;
  const Eigen::VectorXd residual = yv - fitted;
  const Eigen::MatrixXd i_minus_l = Eigen::MatrixXd::Identity(ni, ni) - smoother;
  const double delta1 = (i_minus_l.transpose() * i_minus_l).trace();
  const double rss = residual.squaredNorm();
  const double sigma = delta1 > 1e-12 ? std::sqrt(rss / delta1) : 0.0;

  LoessFit fit{span, degree, sigma, {}};
  fit.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double se = sigma * smoother.row(ii).norm();
    fit.points.push_back({x[i], y[i], fitted(ii), fitted(ii) - kBandZ * se, fitted(ii) + kBandZ * se, se});
  }
  return fit;
}

LoessFit loess_fit(const TimeSeries& series, double span, int degree) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : series) {
    x.push_back(static_cast<double>((p.day - series.front().day).count()));
    y.push_back(static_cast<double>(p.count));
  }
  return loess_fit(x, y, span, degree);
}

nlohmann::json to_json(const LoessFit& fit) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : fit.points) {
    points.push_back({{"x", p.x}, {"y", p.y}, {"fitted", p.fitted}, {"lower", p.lower}, {"upper", p.upper}, {"se", p.se}});
  }
  return {{"span", fit.span}, {"degree", fit.degree}, {"sigma", fit.sigma}, {"points", std::move(points)}};
}

}  // namespace fieldlink::analytics
