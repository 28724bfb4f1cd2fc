// SPDX-License-Identifier: Apache-2.0
#include "nekho/core.hpp"

#include "nekho/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nekho {

std::size_t IVecHash::operator()(const IVec& v) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL ^ static_cast<std::uint64_t>(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    h = splitmix64(h ^ static_cast<std::uint64_t>(v[i]));
  return static_cast<std::size_t>(h);
}

Vec to_real(const IVec& n) { return n.cast<double>(); }

std::string format_ivec(const IVec& k) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- Cone

Cone Cone::full_space() { return Cone{}; }

Cone Cone::half_planes(std::vector<Vec> inward_normals) {
  Cone c;
  c.kind_ = Kind::HalfPlanes;
  for (const auto& n : inward_normals)
    if (n.norm() == 0.0) throw Error(ErrorCode::InvalidArgument, "cone normal must be nonzero");
  c.normals_ = std::move(inward_normals);
  return c;
}

Cone Cone::anharmonic_2d() {
  // a1 >= 0 and a1 + a2 >= 0 is the same set as the two-branch definition.
  Cone c = half_planes({Vec::Unit(2, 0), (Vec(2) << 1.0, 1.0).finished()});
  c.kind_ = Kind::Anharmonic2d;
  return c;
}

Cone Cone::rotation_2d() {
  Cone c = half_planes({(Vec(2) << 1.0, 1.0).finished(), (Vec(2) << 1.0, -1.0).finished()});
  c.kind_ = Kind::Rotation2d;
  return c;
}

std::string Cone::name() const {
  switch (kind_) {
    case Kind::FullSpace: return "full";
    case Kind::HalfPlanes: return "halfplanes";
    case Kind::Anharmonic2d: return "anharmonic-2d";
    case Kind::Rotation2d: return "rotation-2d";
  }
  return "unknown";
}

bool Cone::contains(const Vec& x, double tol) const {
  const double scale = std::max(1.0, x.norm());
  for (const auto& n : normals_) {
    if (n.size() != x.size())
      throw Error(ErrorCode::InvalidArgument, "cone normal dimension mismatch");
    if (n.dot(x) < -tol * scale * n.norm()) return false;
  }
  return true;
}

std::pair<double, double> Cone::angular_range() const {
  using std::numbers::pi;
  switch (kind_) {
    case Kind::FullSpace: return {-pi, pi};
    case Kind::Anharmonic2d: return {-pi / 4.0, pi / 2.0};
    case Kind::Rotation2d: return {-pi / 4.0, pi / 4.0};
    case Kind::HalfPlanes: break;
  }
  // Scan for the admissible arc of a general 2-d cone.
  constexpr int kSteps = 7200;
  double lo = 0.0, hi = 0.0;
  bool found = false;
  for (int i = 0; i <= kSteps; ++i) {
    const double t = -pi + 2.0 * pi * i / kSteps;
    Vec u(2);
    u << std::cos(t), std::sin(t);
    if (contains(u)) {
      if (!found) lo = t;
      hi = t;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::InvalidArgument, "cone has empty interior");
  return {lo, hi};
}

// ---------------------------------------------------------------- Lattice

bool Lattice::admits(const Vec& a, const Cone& cone, double radius) {
  return a.squaredNorm() <= radius * radius * (1.0 + 1e-12) && cone.contains(a);
}

Lattice Lattice::build(int dim, const Vec& kappa, const Cone& cone, double radius,
                       std::size_t max_points) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "lattice dimension must be >= 1");
  if (kappa.size() != dim) throw Error(ErrorCode::InvalidArgument, "kappa has wrong dimension");
  if (!(radius >= 1.0)) throw Error(ErrorCode::InvalidArgument, "lattice radius N must be >= 1");
  for (const auto& n : cone.normals())
    if (n.size() != dim) throw Error(ErrorCode::InvalidArgument, "cone dimension mismatch");

  // Rough volume guard before enumerating anything.
  const double box = std::pow(2.0 * radius + 2.0, dim);
  if (box > 64.0 * static_cast<double>(max_points))
    throw Error(ErrorCode::Resource, "lattice bounding box too large for the point cap");

  Lattice lat;
  lat.dim_ = dim;
  lat.kappa_ = kappa;
  lat.cone_ = cone;
  lat.radius_ = radius;

  IVec lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = static_cast<std::int64_t>(std::ceil(-radius - kappa[i] - 1e-9));
    hi[i] = static_cast<std::int64_t>(std::floor(radius - kappa[i] + 1e-9));
  }
  IVec n = lo;
  Vec a(dim);
  while (true) {
    for (int i = 0; i < dim; ++i) a[i] = static_cast<double>(n[i]) + kappa[i];
    if (admits(a, cone, radius)) {
      if (lat.norms_.size() >= max_points)
        throw Error(ErrorCode::Resource, "lattice point count exceeds cap " +
                                             std::to_string(max_points));
      lat.index_.emplace(n, lat.norms_.size());
      lat.ints_.insert(lat.ints_.end(), n.data(), n.data() + dim);
      lat.norms_.push_back(a.norm());
    }
    int i = dim - 1;
    while (i >= 0 && n[i] == hi[i]) {
      n[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++n[i];
  }
  return lat;
}

IVec Lattice::integer(std::size_t id) const {
  return Eigen::Map<const IVec>(&ints_[id * dim_], dim_);
}

Vec Lattice::point(std::size_t id) const { return to_real(integer(id)) + kappa_; }

std::optional<std::size_t> Lattice::find(const IVec& n) const {
  auto it = index_.find(n);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Lattice::find_shifted(std::size_t id, const IVec& k) const {
  return find(integer(id) + k);
}

// ---------------------------------------------------------------- FrequencyModel

FrequencyModel::FrequencyModel(std::string name, int dim, double degree, ScalarFn h0,
                               VectorFn omega, MatrixFn hessian)
    : name_(std::move(name)),
      dim_(dim),
      degree_(degree),
      h0_(std::move(h0)),
      omega_(std::move(omega)),
      hessian_(std::move(hessian)) {
  if (!(degree_ > 1.0)) throw Error(ErrorCode::InvalidArgument, "h0 degree must exceed 1");
}

FrequencyModel FrequencyModel::quadratic(const Mat& G, std::string name) {
  if (G.rows() != G.cols()) throw Error(ErrorCode::InvalidArgument, "quadratic form not square");
  const Mat S = 0.5 * (G + G.transpose());
  return FrequencyModel(
      std::move(name), static_cast<int>(S.rows()), 2.0,
      [S](const Vec& a) { return a.dot(S * a); }, [S](const Vec& a) -> Vec { return 2.0 * S * a; },
      [S](const Vec&) -> Mat { return 2.0 * S; });
}

FrequencyModel FrequencyModel::torus(const Mat& metric) {
  Eigen::FullPivLU<Mat> lu(metric);
  if (!lu.isInvertible()) throw Error(ErrorCode::InvalidArgument, "torus metric is singular");
  return quadratic(lu.inverse(), "torus");
}

FrequencyModel FrequencyModel::lie(const Mat& weight_gram) { return quadratic(weight_gram, "lie"); }

FrequencyModel FrequencyModel::hyperbolic() {
  Mat G = Mat::Zero(2, 2);
  G(0, 0) = 1.0;
  G(1, 1) = -1.0;
  return quadratic(G, "hyperbolic");
}

FrequencyModel FrequencyModel::power(const Mat& G, double degree) {
  const Mat S = 0.5 * (G + G.transpose());
  const double m = degree;
  return FrequencyModel(
      "power", static_cast<int>(S.rows()), m,
      [S, m](const Vec& a) { return std::pow(a.dot(S * a), 0.5 * m); },
      [S, m](const Vec& a) -> Vec {
        const double q = a.dot(S * a);
        return m * std::pow(q, 0.5 * m - 1.0) * (S * a);
      },
      [S, m](const Vec& a) -> Mat {
        const double q = a.dot(S * a);
        const Vec g = S * a;
        return m * std::pow(q, 0.5 * m - 1.0) * S +
               m * (m - 2.0) * std::pow(q, 0.5 * m - 2.0) * (g * g.transpose());
      });
}

// ---------------------------------------------------------------- parameters

std::vector<double> NekhoroshevParams::gammas(double mom) const {
  const std::size_t d = C.size();
  std::vector<double> g(d, 0.0);
  if (d == 0) return g;
  g[0] = mom - delta;
  for (std::size_t s = 1; s < d; ++s) {
    const double alpha = s - 1 < alphas.size() ? alphas[s - 1] : 1.0;
    g[s] = (g[s - 1] - static_cast<double>(s) * mu) / alpha;
  }
  return g;
}

double NekhoroshevParams::D_max() const {
  return D.empty() ? 1.0 : *std::max_element(D.begin(), D.end());
}

NekhoroshevParams NekhoroshevParams::with_defaults(int d, double mu, double delta, double R,
                                                   double c2, double d2) {
  NekhoroshevParams p;
  p.mu = mu;
  p.delta = delta;
  p.R = R;
  p.alphas.assign(static_cast<std::size_t>(std::max(0, d - 1)), 1.0);
  for (int j = 1; j <= d; ++j) {
    p.C.push_back(j == 1 ? 1.0 : std::pow(c2, j - 1));
    p.D.push_back(j == 1 ? 1.0 : std::pow(d2, j - 1));
  }
  return p;
}

bool ValidationReport::ok() const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const ConstraintResult& c) { return c.passed; });
}

const ConstraintResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : constraints)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

bool strictly_increasing_from_one(const std::vector<double>& v) {
  if (v.empty() || v.front() != 1.0) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

}  // namespace

ValidationReport validate_params(const NekhoroshevParams& p, const FrequencyModel& fm) {
  ValidationReport rep;
  const double M = fm.mom();
  const int d = fm.dim();
  auto add = [&rep](std::string name, bool ok, std::string detail) {
    rep.constraints.push_back({std::move(name), ok, std::move(detail)});
  };

  const double lower = std::max(0.0, M - 1.0);
  if (!(p.delta < M)) {
    add("delta_range", false, "δ < M required (δ=" + std::to_string(p.delta) +
                                  ", M=" + std::to_string(M) + ")");
    return rep;
  }
  if (!(p.delta > lower)) {
    add("delta_range", false, "δ > max{0, M-1} required (δ=" + std::to_string(p.delta) + ")");
    return rep;
  }
  add("delta_range", true, "max{0,M-1} < δ < M");

  add("mu_range", p.mu > 0.0 && p.mu < 1.0, "0 < μ < 1");

  const bool alpha_count = static_cast<int>(p.alphas.size()) == d - 1;
  const bool alpha_ge1 =
      std::all_of(p.alphas.begin(), p.alphas.end(), [](double a) { return a >= 1.0; });
  add("alphas", alpha_count && alpha_ge1, "d-1 steepness indices, each >= 1");

  double alpha_prod = 1.0;
  for (double a : p.alphas) alpha_prod *= a;
  const double lhs = alpha_prod * d * (d - 1) * p.mu;
  add("steepness_link", lhs < M - p.delta,
      "α d(d-1) μ = " + std::to_string(lhs) + " < M - δ = " + std::to_string(M - p.delta));

  const bool sizes = static_cast<int>(p.C.size()) == d && static_cast<int>(p.D.size()) == d;
  rep.gammas = sizes ? p.gammas(M) : std::vector<double>{};
  bool gamma_ok = sizes && !rep.gammas.empty() && rep.gammas.back() > 0.0;
  for (std::size_t i = 1; gamma_ok && i < rep.gammas.size(); ++i)
    gamma_ok = rep.gammas[i] < rep.gammas[i - 1];
  add("gamma_chain", gamma_ok, "γ_1 > ... > γ_d > 0 with γ = [" + join(rep.gammas) + "]");

  add("C_chain", sizes && strictly_increasing_from_one(p.C), "1 = C_1 < C_2 < ... < C_d");
  add("D_chain", sizes && strictly_increasing_from_one(p.D), "1 = D_1 < D_2 < ... < D_d");
  add("R_positive", p.R > 0.0, "R > 0");
  const double vs = p.varsigma(M);
  add("varsigma", vs > 0.0 && vs <= 1.0, "ς = 1 - (M - δ) = " + std::to_string(vs));
  return rep;
}

// ---------------------------------------------------------------- states

StateVector::StateVector(const Lattice& lattice, Eigen::VectorXcd amplitudes)
    : lattice_(&lattice), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != lattice.size())
    throw Error(ErrorCode::InvalidArgument, "state size does not match lattice");
}

StateVector StateVector::zero(const Lattice& lattice) {
  return StateVector(lattice, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lattice.size())));
}

double sobolev_norm(const StateVector& psi, double s) {
  if (psi.size() == 0) return 0.0;
  double acc = 0.0;
  const auto& amp = psi.amplitudes();
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double w = std::pow(1.0 + psi.lattice().norm(i) * psi.lattice().norm(i), s);
    acc += w * std::norm(amp[static_cast<Eigen::Index>(i)]);
  }
  return std::sqrt(acc);
}

double sobolev_norm(const Eigen::VectorXcd& amps, const std::vector<double>& point_norms,
                    double s) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const double r = point_norms[static_cast<std::size_t>(i)];
    acc += std::pow(1.0 + r * r, s) * std::norm(amps[i]);
  }
  return std::sqrt(acc);
}

double omega_bound_constant(const FrequencyModel& fm, const Cone& cone, int samples,
                            std::uint64_t seed) {
  auto gen = stream(seed, "core.omega_bound", 0);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> logr(std::log(0.25), std::log(4.0));
  double worst = 1.0;
  int taken = 0, tries = 0;
  while (taken < samples && tries < 100 * samples) {
    ++tries;
    Vec u(fm.dim());
    for (int i = 0; i < fm.dim(); ++i) u[i] = gauss(gen);
    if (u.norm() == 0.0) continue;
    u.normalize();
    if (!cone.contains(u, -1e-6)) continue;  // strictly interior directions
    const Vec a = std::exp(logr(gen)) * u;
    const double ratio = fm.omega(a).norm() / std::pow(a.norm(), fm.mom());
    if (!(ratio > 0.0)) return std::numeric_limits<double>::infinity();
    worst = std::max({worst, ratio, 1.0 / ratio});
    ++taken;
  }
  return worst;
}

}  // namespace nekho
