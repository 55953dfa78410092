#include "osl/cocycle.hpp"

#include <cmath>
#include <limits>

#include "osl/errors.hpp"
#include "osl/parallel.hpp"

namespace osl {

Factor Factor::from_matrix(const Mat2& g) {
  if (!g.is_invertible()) throw Error(ErrorCode::NotInvertible, "factor must be invertible");
  Factor f;
  f.m = WideMat2::from_mat(g);
  const double scale = g.max_abs();
  const double d = g.scaled(1.0 / scale).det();
  f.log_abs_det = 2.0 * std::log(scale) + std::log(std::abs(d));
  f.det_sign = d < 0.0 ? -1 : 1;
  return f;
}

Factor Factor::triangular(int sign_a, double log_abs_a, int sign_b, double log_abs_b) {
  if (sign_a == 0 || !std::isfinite(log_abs_a)) {
    throw Error(ErrorCode::NotInvertible, "triangular factor needs a != 0");
  }
  Factor f;
  f.m = {Wide::from_log(sign_a, log_abs_a), Wide::from_log(sign_b, log_abs_b), Wide{},
         Wide::from_double(1.0)};
  f.log_abs_det = log_abs_a;
  f.det_sign = sign_a;
  return f;
}

double log_norm_max(const Factor& f) noexcept {
  const double log_s1 = f.m.log_scale() + std::log(singular_frame(f.m.shape()).s1);
  const double log_s2 = f.log_abs_det - log_s1;
  return std::max({log_s1, -log_s2, 0.0});
}

namespace {

std::pair<Wide, Wide> apply(const Factor& f, Vec2 v) noexcept {
  const Wide x = Wide::from_double(v.x);
  const Wide y = Wide::from_double(v.y);
  return {f.m.a11 * x + f.m.a12 * y, f.m.a21 * x + f.m.a22 * y};
}

}  // namespace

double log_image_norm(const Factor& f, Vec2 v) noexcept {
  const auto [c1, c2] = apply(f, v);
  if (c1.is_zero() && c2.is_zero()) return -INFINITY;
  const std::int64_t top = c1.is_zero() ? c2.e : c2.is_zero() ? c1.e : std::max(c1.e, c2.e);
  return std::log(std::hypot(c1.to_double_scaled(top), c2.to_double_scaled(top))) +
         static_cast<double>(top) * std::numbers::ln2;
}

ProjLine projective_action(const Factor& f, ProjLine x) noexcept {
  const auto [c1, c2] = apply(f, x.direction());
  const std::int64_t top = c1.is_zero() ? c2.e : c2.is_zero() ? c1.e : std::max(c1.e, c2.e);
  return ProjLine::spanned_by({c1.to_double_scaled(top), c2.to_double_scaled(top)});
}

AngleDrift angle_drift_gap(const Factor& f, ProjLine x1, ProjLine x2) {
  if (line_sine(x1, x2) == 0.0) {
    throw Error(ErrorCode::DegenerateSplitting, "angle_drift_gap with x1 = x2");
  }
  const double log_s1 = f.m.log_scale() + std::log(singular_frame(f.m.shape()).s1);
  const double lhs = std::abs(f.log_abs_det - log_image_norm(f, x1.direction()) - log_image_norm(f, x2.direction()));
  return {lhs, 2.0 * log_s1 - f.log_abs_det};
}

void ScaledProduct::push_left(const Factor& f) noexcept {
  m = f.m * m;
  log_abs_det += f.log_abs_det;
  det_sign *= f.det_sign;
}

ScaledProduct ScaledProduct::inverse() const {
  const Wide inv_det = Wide::from_log(det_sign, -log_abs_det);
  ScaledProduct out;
  out.m = {m.a22 * inv_det, -m.a12 * inv_det, -m.a21 * inv_det, m.a11 * inv_det};
  out.log_abs_det = -log_abs_det;
  out.det_sign = det_sign;
  return out;
}

double ScaledProduct::log_s1() const noexcept {
  return m.log_scale() + std::log(singular_frame(m.shape()).s1);
}

double ScaledProduct::log_s2() const noexcept { return log_abs_det - log_s1(); }

const Factor& OrbitWindow::at(std::int64_t index) const {
  if (!contains(index)) {
    throw Error(ErrorCode::WindowExhausted, "index " + std::to_string(index) + " outside [" +
                                                std::to_string(begin()) + ", " + std::to_string(end()) + ")");
  }
  return factors[static_cast<std::size_t>(index - offset)];
}

void OrbitWindow::validate() const {
  if (factors.empty()) throw Error(ErrorCode::BadSpec, "window must contain at least one matrix");
  if (!prescribed_f.empty() && prescribed_f.size() != factors.size()) {
    throw Error(ErrorCode::BadSpec, "prescribed_f length differs from matrices");
  }
  if (!labels.empty() && labels.size() != factors.size()) {
    throw Error(ErrorCode::BadSpec, "labels length differs from matrices");
  }
}

ScaledProduct cocycle_product_scaled(const OrbitWindow& w, std::int64_t from_index, std::int64_t n) {
  ScaledProduct p;
  if (n == 0) return p;
  const std::int64_t lo = n > 0 ? from_index : from_index + n;
  const std::int64_t len = n > 0 ? n : -n;
  if (lo < w.begin() || lo + len > w.end()) {
    throw Error(ErrorCode::WindowExhausted, "product range [" + std::to_string(lo) + ", " +
                                                std::to_string(lo + len) + ") leaves the window");
  }
  for (std::int64_t i = lo; i < lo + len; ++i) p.push_left(w.factors[static_cast<std::size_t>(i - w.offset)]);
  return n > 0 ? p : p.inverse();
}

Mat2 cocycle_product(const OrbitWindow& w, std::int64_t from_index, std::int64_t n) {
  return cocycle_product_scaled(w, from_index, n).value();
}

MatrixDistribution MatrixDistribution::atoms(std::vector<Mat2> matrices, std::vector<double> weights) {
  if (matrices.empty() || matrices.size() != weights.size()) {
    throw Error(ErrorCode::BadDistribution, "atoms need matching nonempty matrices and weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw Error(ErrorCode::BadDistribution, "negative atom weight");
    if (!matrices[i].is_invertible()) throw Error(ErrorCode::BadDistribution, "singular atom");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::BadDistribution, "atom weights must sum to 1");
  MatrixDistribution d;
  d.kind_ = Kind::Atoms;
  d.matrices_ = std::move(matrices);
  d.weights_ = std::move(weights);
  d.cdf_ = cumulative(d.weights_);
  return d;
}

MatrixDistribution MatrixDistribution::triangular(ScalarDist a, bool a_exp, ScalarDist b, bool b_exp) {
  if (!a_exp) {
    const bool charges_zero =
        a.kind() == ScalarDist::Kind::Atoms
            ? a.tail(0.0) > a.tail(std::nextafter(0.0, 1.0))
            : a.support_min() <= 0.0 && a.support_max() >= 0.0;
    if (charges_zero) throw Error(ErrorCode::BadDistribution, "law of a charges 0");
  }
  MatrixDistribution d;
  d.kind_ = Kind::Triangular;
  d.first_ = std::move(a);
  d.second_ = std::move(b);
  d.a_exp_ = a_exp;
  d.b_exp_ = b_exp;
  return d;
}

MatrixDistribution MatrixDistribution::rotgain(ScalarDist angle, ScalarDist gain) {
  MatrixDistribution d;
  d.kind_ = Kind::RotGain;
  d.first_ = std::move(angle);
  d.second_ = std::move(gain);
  return d;
}

Factor MatrixDistribution::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Atoms:
      return Factor::from_matrix(matrices_[index_from_cdf(cdf_, u01(rng))]);
    case Kind::Triangular: {
      const double a = first_->sample(rng);
      const double b = second_->sample(rng);
      const int sa = a_exp_ ? 1 : (a < 0.0 ? -1 : (a > 0.0 ? 1 : 0));
      const double la = a_exp_ ? a : std::log(std::abs(a));
      const int sb = b_exp_ ? 1 : (b < 0.0 ? -1 : (b > 0.0 ? 1 : 0));
      const double lb = b_exp_ ? b : std::log(std::abs(b));
      return Factor::triangular(sa, la, sb, lb);
    }
    case Kind::RotGain: {
      const double angle = first_->sample(rng);
      const double gain = second_->sample(rng);
      const Mat2 r = Mat2::rotation(angle);
      const Wide up = Wide::from_log(1, gain);
      const Wide down = Wide::from_log(1, -gain);
      Factor f;
      f.m = {Wide::from_double(r.a11) * up, Wide::from_double(r.a12) * down,
             Wide::from_double(r.a21) * up, Wide::from_double(r.a22) * down};
      f.log_abs_det = 0.0;
      f.det_sign = 1;
      return f;
    }
  }
  return {};
}

OrbitWindow sample_window(const MatrixDistribution& nu, std::int64_t begin, std::int64_t length,
                          std::uint64_t seed) {
  if (length < 1) throw Error(ErrorCode::BadSpec, "window length must be positive");
  OrbitWindow w;
  w.offset = begin;
  w.seed = seed;
  w.factors.reserve(static_cast<std::size_t>(length));
  Rng rng(seed);
  for (std::int64_t i = 0; i < length; ++i) w.factors.push_back(nu.sample(rng));
  return w;
}

OrbitWindow sample_onestep(const MatrixDistribution& nu, std::int64_t half_width, std::uint64_t seed) {
  if (half_width < 1) throw Error(ErrorCode::BadSpec, "half_width must be at least 1");
  return sample_window(nu, -half_width, 2 * half_width, seed);
}

MomentEstimate moment(const MatrixDistribution& nu, int order, std::size_t trials, std::uint64_t seed,
                      unsigned jobs) {
  if (order != 1 && order != 2) throw Error(ErrorCode::BadSpec, "moment order must be 1 or 2");
  if (trials < 1) throw Error(ErrorCode::BadSpec, "trials must be positive");
  MomentEstimate out;
  out.trials = trials;
  if (nu.kind() == MatrixDistribution::Kind::Atoms) {
    for (std::size_t i = 0; i < nu.matrices().size(); ++i) {
      const double v = log_norm_max(nu.matrices()[i]);
      out.value += nu.weights()[i] * (order == 1 ? v : v * v);
    }
    out.exact = true;
    return out;
  }
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<RunningStats> parts(chunks);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t n = std::min(kChunk, trials - c * kChunk);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = log_norm_max(nu.sample(rng));
      parts[c].add(order == 1 ? v : v * v);
    }
  });
  RunningStats total;
  for (const auto& p : parts) total.merge(p);
  out.value = total.mean();
  out.std_error = total.std_error();
  return out;
}

}  // namespace osl
