// SPDX-License-Identifier: Apache-2.0
//
// Lattice geometry, frequency models and the global parameter set shared by
// every other module. Everything here is immutable after construction.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace nekho {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using cplx = std::complex<double>;

enum class ErrorCode {
  InvalidArgument = 1,
  Domain = 2,
  Resource = 3,
  Config = 4,
  Io = 5,
  Numerical = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct IVecHash {
  std::size_t operator()(const IVec& v) const noexcept;
};

/// Euclidean norm, used for every resonance test.
inline double norm(const Vec& a) { return a.norm(); }
/// Japanese bracket sqrt(1 + |a|^2), the Sobolev weight.
inline double bracket(const Vec& a) { return std::sqrt(1.0 + a.squaredNorm()); }
inline double bracket(double r) { return std::sqrt(1.0 + r * r); }

Vec to_real(const IVec& n);
std::string format_ivec(const IVec& k);

/// Convex closed cone given as an intersection of half spaces n.x >= 0.
/// The two-dimensional presets are stored with their equivalent normals.
class Cone {
 public:
  enum class Kind { FullSpace, HalfPlanes, Anharmonic2d, Rotation2d };

  static Cone full_space();
  static Cone half_planes(std::vector<Vec> inward_normals);
  /// {a1 >= 0 if a2 >= 0; a1 >= |a2| if a2 < 0}
  static Cone anharmonic_2d();
  /// {a1 >= |a2|}
  static Cone rotation_2d();

  Kind kind() const { return kind_; }
  const std::vector<Vec>& normals() const { return normals_; }
  std::string name() const;
  bool contains(const Vec& x, double tol = 1e-12) const;
  /// Angular interval [lo, hi] covered by a 2-d cone (full circle for full space).
  std::pair<double, double> angular_range() const;

 private:
  Kind kind_ = Kind::FullSpace;
  std::vector<Vec> normals_;
};

/// Truncated shifted lattice (Z^d + kappa) ∩ C ∩ {|a| <= N}, ordered
/// lexicographically in the integer part n.
class Lattice {
 public:
  static constexpr std::size_t kDefaultMaxPoints = 4'000'000;

  static Lattice build(int dim, const Vec& kappa, const Cone& cone, double radius,
                       std::size_t max_points = kDefaultMaxPoints);

  int dim() const { return dim_; }
  const Vec& kappa() const { return kappa_; }
  const Cone& cone() const { return cone_; }
  double radius() const { return radius_; }
  std::size_t size() const { return norms_.size(); }

  IVec integer(std::size_t id) const;
  Vec point(std::size_t id) const;
  double norm(std::size_t id) const { return norms_[id]; }
  const std::int64_t* integer_data(std::size_t id) const { return &ints_[id * dim_]; }

  std::optional<std::size_t> find(const IVec& n) const;
  /// Id of n(id) + k if that point is in the lattice.
  std::optional<std::size_t> find_shifted(std::size_t id, const IVec& k) const;

  /// Membership rule used by the enumeration (exposed for oracles).
  static bool admits(const Vec& a, const Cone& cone, double radius);

 private:
  int dim_ = 0;
  Vec kappa_;
  Cone cone_;
  double radius_ = 0.0;
  std::vector<std::int64_t> ints_;
  std::vector<double> norms_;
  std::unordered_map<IVec, std::size_t, IVecHash> index_;
};

/// Integrable Hamiltonian h0 with its gradient (frequency map) and Hessian.
class FrequencyModel {
 public:
  using ScalarFn = std::function<double(const Vec&)>;
  using VectorFn = std::function<Vec(const Vec&)>;
  using MatrixFn = std::function<Mat(const Vec&)>;

  FrequencyModel(std::string name, int dim, double degree, ScalarFn h0, VectorFn omega,
                 MatrixFn hessian);

  /// h0(a) = a^T G a.
  static FrequencyModel quadratic(const Mat& G, std::string name = "quadratic");
  /// Flat torus with metric g_jk: h0 = sum g^{kl} a_k a_l.
  static FrequencyModel torus(const Mat& metric);
  /// Weight-lattice form sum a_i a_j f_i.f_j from the Gram matrix of fundamental weights.
  static FrequencyModel lie(const Mat& weight_gram);
  /// a1^2 - a2^2 in d = 2; not steep.
  static FrequencyModel hyperbolic();
  /// (a^T G a)^(degree/2).
  static FrequencyModel power(const Mat& G, double degree);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double degree() const { return degree_; }
  /// Homogeneity degree of omega, degree - 1.
  double mom() const { return degree_ - 1.0; }

  double h0(const Vec& a) const { return h0_(a); }
  Vec omega(const Vec& a) const { return omega_(a); }
  Mat hessian(const Vec& a) const { return hessian_(a); }

 private:
  std::string name_;
  int dim_;
  double degree_;
  ScalarFn h0_;
  VectorFn omega_;
  MatrixFn hessian_;
};

/// Parameters of the resonance construction. Gammas are derived from the
/// recurrence gamma_1 = M - delta, gamma_{s+1} = (gamma_s - s mu) / alpha_s.
struct NekhoroshevParams {
  double mu = 0.1;
  double delta = 0.5;
  std::vector<double> alphas;  // d - 1 steepness indices
  std::vector<double> C;       // C_1..C_d
  std::vector<double> D;       // D_1..D_d
  double R = 10.0;
  double tb = 0.0;
  std::optional<double> rho;  // defaults to 2 varsigma - 1

  std::vector<double> gammas(double mom) const;
  double varsigma(double mom) const { return 1.0 - (mom - delta); }
  double rho_value(double mom) const { return rho ? *rho : 2.0 * varsigma(mom) - 1.0; }
  double C_at(int j) const { return C.at(static_cast<std::size_t>(j - 1)); }
  double D_at(int j) const { return D.at(static_cast<std::size_t>(j - 1)); }
  double D_max() const;

  /// 1 = C_1 < ... < C_d with C, D doubling; alphas all 1.
  static NekhoroshevParams with_defaults(int d, double mu, double delta, double R, double c2 = 2.0,
                                         double d2 = 2.0);
};

struct ConstraintResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConstraintResult> constraints;
  std::vector<double> gammas;
  bool ok() const;
  const ConstraintResult* find(const std::string& name) const;
};

ValidationReport validate_params(const NekhoroshevParams& p, const FrequencyModel& fm);

/// Complex amplitudes indexed by lattice point id.
class StateVector {
 public:
  StateVector() = default;
  StateVector(const Lattice& lattice, Eigen::VectorXcd amplitudes);
  static StateVector zero(const Lattice& lattice);

  const Lattice& lattice() const { return *lattice_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }
  std::size_t size() const { return static_cast<std::size_t>(amps_.size()); }

 private:
  const Lattice* lattice_ = nullptr;
  Eigen::VectorXcd amps_;
};

/// (sum_a <a>^{2s} |psi_a|^2)^{1/2}. Negative s gives the dual norm.
double sobolev_norm(const StateVector& psi, double s);
/// Same weights for amplitudes on arbitrary points given their norms |a|.
double sobolev_norm(const Eigen::VectorXcd& amps, const std::vector<double>& point_norms, double s);

/// Two-sided constant C with C^-1 |a|^M <= |omega(a)| <= C |a|^M over sampled
/// cone points with |a| in [1/4, 4].
double omega_bound_constant(const FrequencyModel& fm, const Cone& cone, int samples,
                            std::uint64_t seed);

}  // namespace nekho
