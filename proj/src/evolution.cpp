// SPDX-License-Identifier: Apache-2.0
#include "nekho/evolution.hpp"

#include "nekho/rng.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace nekho {

namespace {

using Triplet = Eigen::Triplet<cplx>;
constexpr double kTwoPi = 2.0 * boost::math::constants::pi<double>();
const cplx kI(0.0, 1.0);

std::vector<std::vector<std::size_t>> group_blocks(const std::vector<std::size_t>& blocks) {
  std::map<std::size_t, std::vector<std::size_t>> g;
  for (std::size_t i = 0; i < blocks.size(); ++i) g[blocks[i]].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(g.size());
  for (auto& [id, members] : g) out.push_back(std::move(members));
  return out;
}

std::vector<double> point_brackets(const Lattice& lat) {
  std::vector<double> w(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) w[i] = bracket(lat.norm(i));
  return w;
}

void record_norms(EvolutionRun& run, const Eigen::VectorXcd& psi, const std::vector<double>& br,
                  double l2_0) {
  for (std::size_t i = 0; i < run.s_values.size(); ++i) {
    const double s = run.s_values[i];
    double acc = 0.0;
    for (Eigen::Index a = 0; a < psi.size(); ++a)
      acc += std::pow(br[static_cast<std::size_t>(a)], 2.0 * s) * std::norm(psi[a]);
    run.norms[i].push_back(std::sqrt(acc));
  }
  run.max_l2_drift = std::max(run.max_l2_drift, std::abs(psi.norm() - l2_0));
}

// Dense H0 + f Z restricted to a block.
Eigen::MatrixXcd block_matrix(const std::vector<std::size_t>& members, const std::vector<double>& h0,
                              const LatticeOperator& Z, double f,
                              const std::unordered_map<std::size_t, std::size_t>& local) {
  const auto n = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto b = members[static_cast<std::size_t>(i)];
    H(i, i) += h0[b];
    if (f == 0.0) continue;
    for (SpMat::InnerIterator it(Z.m, static_cast<Eigen::Index>(b)); it; ++it) {
      auto j = local.find(static_cast<std::size_t>(it.col()));
      if (j != local.end()) H(i, static_cast<Eigen::Index>(j->second)) += f * it.value();
    }
  }
  return H;
}

struct BlockEigen {
  std::vector<std::size_t> members;
  Eigen::MatrixXcd V;
  Eigen::VectorXd lambda;
};

std::vector<BlockEigen> diagonalize(const std::vector<std::vector<std::size_t>>& groups,
                                    const std::vector<double>& h0, const LatticeOperator& Z, double f,
                                    std::size_t cap, const std::vector<char>* needed) {
  std::vector<BlockEigen> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (needed && !(*needed)[g]) continue;
    const auto& members = groups[g];
    if (members.size() > cap)
      throw Error(ErrorCode::Resource, "block of size " + std::to_string(members.size()) +
                                           " exceeds the dense cap; use a larger R");
    BlockEigen be;
    be.members = members;
    std::unordered_map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = i;
    const Eigen::MatrixXcd H = block_matrix(members, h0, Z, f, local);
    if (members.size() == 1) {
      be.V = Eigen::MatrixXcd::Identity(1, 1);
      be.lambda = Eigen::VectorXd::Constant(1, H(0, 0).real());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
      if (es.info() != Eigen::Success) throw Error(ErrorCode::Numerical, "block eigensolve failed");
      be.V = es.eigenvectors();
      be.lambda = es.eigenvalues();
    }
    out.push_back(std::move(be));
  }
  return out;
}

void apply_block_exp(const BlockEigen& be, double t, Eigen::VectorXcd& psi) {
  const auto n = static_cast<Eigen::Index>(be.members.size());
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = psi[static_cast<Eigen::Index>(be.members[static_cast<std::size_t>(i)])];
  Eigen::VectorXcd c = be.V.adjoint() * x;
  for (Eigen::Index i = 0; i < n; ++i) c[i] *= std::exp(-kI * be.lambda[i] * t);
  x = be.V * c;
  for (Eigen::Index i = 0; i < n; ++i) psi[static_cast<Eigen::Index>(be.members[static_cast<std::size_t>(i)])] = x[i];
}

std::vector<double> h0_values(const Lattice& lat, const FrequencyModel& fm) {
  std::vector<double> h(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) h[i] = fm.h0(lat.point(i));
  return h;
}

}  // namespace

LatticeOperator generate_normal_form(const RandomNormalFormSpec& spec, const ResonanceAnalysis& an) {
  const Lattice& lat = an.lattice();
  const auto& par = an.params();
  const auto& fm = an.tester().model();
  // Boundary cases |t| = 1 are resonant but outside the support of the cutoffs.
  auto strict = [&](std::size_t p, const IVec& k, double kn) {
    const double pn = lat.norm(p);
    return pn > 0.5 * par.R && kn < std::pow(pn, par.mu) &&
           std::abs(fm.omega(lat.point(p)).dot(to_real(k))) < std::pow(pn, par.delta) * kn;
  };
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t p = 0; p < lat.size(); ++p)
    for (const auto& rv : an.resonances(p)) {
      if (!rv.at_order(1) || !strict(p, rv.k, rv.knorm)) continue;
      for (int side = 0; side < 2; ++side) {
        auto q = lat.find_shifted(p, side == 0 ? IVec(rv.k) : IVec(-rv.k));
        if (!q || !an.interior_safe(p) || !an.interior_safe(*q)) continue;
        pairs.emplace(std::min(p, *q), std::max(p, *q));
      }
    }
  std::vector<Triplet> t;
  if (spec.amplitude != 0.0)
    for (const auto& [a, b] : pairs) {
      const double env = spec.amplitude * std::pow(std::max(lat.norm(a), lat.norm(b)), spec.tb) /
                         std::pow(bracket((lat.point(b) - lat.point(a)).norm()), spec.decay);
      const double mag = 0.5 + 0.5 * hash_uniform(spec.seed, a, b, 11);
      const cplx v = env * mag * std::exp(kI * kTwoPi * hash_uniform(spec.seed, a, b, 12));
      t.emplace_back(static_cast<int>(b), static_cast<int>(a), v);
      t.emplace_back(static_cast<int>(a), static_cast<int>(b), std::conj(v));
    }
  return LatticeOperator::from_triplets(lat, t, true);
}

double modulation(const RandomNormalFormSpec& spec, double t) {
  if (spec.frequencies.empty()) return 1.0;
  double s = 0.0;
  for (double nu : spec.frequencies) s += std::cos(nu * t);
  return 1.0 + s / (2.0 * static_cast<double>(spec.frequencies.size()));
}

std::vector<std::size_t> block_ids(const BlockPartition& part) {
  const std::size_t n = part.lattice().size();
  const std::size_t base = part.e_blocks().size();
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = part.e_labels(i);
    ids[i] = l.size() == 1 ? l[0] : base + i;
  }
  return ids;
}

double off_block_norm(const LatticeOperator& X, const std::vector<std::size_t>& blocks) {
  double worst = 0.0;
  for (Eigen::Index b = 0; b < X.m.outerSize(); ++b)
    for (SpMat::InnerIterator it(X.m, b); it; ++it)
      if (blocks[static_cast<std::size_t>(b)] != blocks[static_cast<std::size_t>(it.col())])
        worst = std::max(worst, std::abs(it.value()));
  return worst;
}

EvolutionRun evolve_block_exact(const Lattice& lat, const FrequencyModel& fm, const LatticeOperator& Z,
                                const std::vector<std::size_t>& blocks, const Eigen::VectorXcd& psi0,
                                const std::vector<double>& times, const std::vector<double>& s_values,
                                const BlockExactOptions& opt, const std::function<double(double)>& f) {
  if (static_cast<std::size_t>(psi0.size()) != lat.size() || blocks.size() != lat.size())
    throw Error(ErrorCode::InvalidArgument, "state/block size mismatch");
  if (off_block_norm(Z, blocks) > 0.0)
    throw Error(ErrorCode::InvalidArgument, "generator is not block diagonal for the partition");
  EvolutionRun run;
  run.method = f ? "block-exact-midpoint" : "block-exact";
  run.times = times;
  run.s_values = s_values;
  run.norms.assign(s_values.size(), {});
  const auto h0 = h0_values(lat, fm);
  const auto br = point_brackets(lat);
  const auto groups = group_blocks(blocks);
  std::vector<char> needed(groups.size(), 0);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (auto i : groups[g])
      if (psi0[static_cast<Eigen::Index>(i)] != cplx(0.0, 0.0)) needed[g] = 1;
  const double l2_0 = psi0.norm();
  Eigen::VectorXcd psi = psi0;
  if (!f) {
    const auto eig = diagonalize(groups, h0, Z, 1.0, opt.max_block, &needed);
    for (double t : times) {
      psi = psi0;
      for (const auto& be : eig) apply_block_exp(be, t, psi);
      record_norms(run, psi, br, l2_0);
    }
  } else {
    double tcur = 0.0;
    for (double t : times) {
      const int steps = std::max(1, static_cast<int>(std::ceil((t - tcur) / opt.dt - 1e-9)));
      const double h = (t - tcur) / steps;
      for (int k = 0; k < steps && h > 0.0; ++k) {
        const double fm_mid = f(tcur + (k + 0.5) * h);
        const auto eig = diagonalize(groups, h0, Z, fm_mid, opt.max_block, &needed);
        for (const auto& be : eig) apply_block_exp(be, h, psi);
      }
      tcur = t;
      record_norms(run, psi, br, l2_0);
    }
  }
  run.final_state = psi;
  return run;
}

LatticeOperator random_remainder(const Lattice& lat, double order, double kmax, double amplitude,
                                 std::uint64_t seed) {
  const auto ks = integer_ball(lat.dim(), kmax);
  std::vector<Triplet> t;
  for (std::size_t a = 0; a < lat.size(); ++a)
    for (const auto& k : ks) {
      auto b = lat.find_shifted(a, k);
      if (!b || *b < a) continue;
      const double env = amplitude * std::pow(std::max(bracket(lat.norm(a)), bracket(lat.norm(*b))), order);
      const cplx v = env * std::exp(kI * kTwoPi * hash_uniform(seed, a, *b, 21));
      t.emplace_back(static_cast<int>(*b), static_cast<int>(a), v);
      t.emplace_back(static_cast<int>(a), static_cast<int>(*b), std::conj(v));
    }
  return LatticeOperator::from_triplets(lat, t, true);
}

EvolutionRun evolve_with_remainder(const Lattice& lat, const FrequencyModel& fm,
                                   const LatticeOperator& Z, const LatticeOperator& R_op,
                                   const std::vector<std::size_t>& blocks,
                                   const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                                   const std::vector<double>& s_values, const RemainderOptions& opt) {
  EvolutionRun run;
  run.method = opt.integrator == Integrator::Rk4 ? "rk4" : "split-step";
  run.times = times;
  run.s_values = s_values;
  run.norms.assign(s_values.size(), {});
  const auto h0 = h0_values(lat, fm);
  const auto br = point_brackets(lat);
  const double l2_0 = psi0.norm();
  Eigen::VectorXcd psi = psi0;
  double tcur = 0.0;

  auto drift_check = [&]() {
    const double drift = std::abs(psi.norm() - l2_0);
    if (drift > opt.drift_tol)
      throw Error(ErrorCode::Numerical, "step-size rejection: L2 drift " + std::to_string(drift) +
                                            " exceeds tolerance; reduce dt");
  };

  if (opt.integrator == Integrator::Rk4) {
    SpMat H = Z.m + R_op.m;
    for (std::size_t i = 0; i < lat.size(); ++i)
      H.coeffRef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += h0[i];
    auto rhs = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return -kI * (H * x); };
    for (double t : times) {
      const int steps = std::max(1, static_cast<int>(std::ceil((t - tcur) / opt.dt - 1e-9)));
      const double h = (t - tcur) / steps;
      for (int k = 0; k < steps && h > 0.0; ++k) {
        const Eigen::VectorXcd k1 = rhs(psi);
        const Eigen::VectorXcd k2 = rhs(psi + 0.5 * h * k1);
        const Eigen::VectorXcd k3 = rhs(psi + 0.5 * h * k2);
        const Eigen::VectorXcd k4 = rhs(psi + h * k3);
        psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      tcur = t;
      drift_check();
      record_norms(run, psi, br, l2_0);
    }
  } else {
    if (off_block_norm(Z, blocks) > 0.0)
      throw Error(ErrorCode::InvalidArgument, "Z is not block diagonal for the partition");
    const auto eig = diagonalize(group_blocks(blocks), h0, Z, 1.0, opt.max_block, nullptr);
    auto apply_remainder = [&](double h) {
      Eigen::VectorXcd term = psi, sum = psi;
      for (int j = 1; j < 60; ++j) {
        term = (-kI * h / static_cast<double>(j)) * (R_op.m * term);
        sum += term;
        if (term.norm() < 1e-17 * std::max(1.0, sum.norm())) break;
      }
      psi = sum;
    };
    for (double t : times) {
      const int steps = std::max(1, static_cast<int>(std::ceil((t - tcur) / opt.dt - 1e-9)));
      const double h = (t - tcur) / steps;
      for (int k = 0; k < steps && h > 0.0; ++k) {
        for (const auto& be : eig) apply_block_exp(be, 0.5 * h, psi);
        apply_remainder(h);
        for (const auto& be : eig) apply_block_exp(be, 0.5 * h, psi);
      }
      tcur = t;
      drift_check();
      record_norms(run, psi, br, l2_0);
    }
  }
  run.final_state = psi;
  return run;
}

Eigen::VectorXcd resonant_initial_data(const BlockPartition& part, std::size_t count) {
  const auto& eb = part.e_blocks();
  std::vector<std::size_t> order(eb.size());
  for (std::size_t i = 0; i < eb.size(); ++i) order[i] = i;
  auto by_size = [&](std::size_t x, std::size_t y) {
    if (eb[x].members.size() != eb[y].members.size()) return eb[x].members.size() > eb[y].members.size();
    return x < y;
  };
  std::vector<std::size_t> pick;
  std::vector<std::size_t> resonant;
  for (auto i : order)
    if (eb[i].s >= 1) resonant.push_back(i);
  auto& pool = resonant.empty() ? order : resonant;
  std::stable_sort(pool.begin(), pool.end(), by_size);
  for (std::size_t i = 0; i < pool.size() && pick.size() < count; ++i) pick.push_back(pool[i]);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(part.lattice().size()));
  if (pick.empty()) return psi;
  const double amp = 1.0 / std::sqrt(static_cast<double>(pick.size()));
  for (auto i : pick) {
    std::size_t best = eb[i].members.front();
    for (auto id : eb[i].members)
      if (part.lattice().norm(id) < part.lattice().norm(best)) best = id;
    psi[static_cast<Eigen::Index>(best)] = amp;
  }
  return psi;
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need >= 2 points to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "power fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, c = sxy - sx * sy / n;
  PowerFit f;
  f.slope = vx > 0 ? c / vx : 0.0;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 1e-300 ? c * c / (vx * vy) : 1.0;
  return f;
}

// ---------------------------------------------------------------- counterexample

std::vector<IVec> CounterexampleState::points() const {
  std::vector<IVec> out;
  for (int mm : m) {
    IVec a(2);
    a << -mm, n + mm;
    out.push_back(a);
  }
  return out;
}

std::vector<double> CounterexampleState::point_norms() const {
  std::vector<double> out;
  for (int mm : m) out.push_back(std::sqrt(double(mm) * mm + double(n + mm) * (n + mm)));
  return out;
}

double CounterexampleState::sobolev(double s) const { return sobolev_norm(amplitudes, point_norms(), s); }

int counterexample_truncation(double eps, double t) {
  const double x = std::abs(eps * t);
  return static_cast<int>(std::ceil(x + 10.0 * std::cbrt(x) + 20.0));
}

namespace {

double bessel_j(int m, double x) {
  const int am = std::abs(m);
  const double v = x == 0.0 ? (am == 0 ? 1.0 : 0.0) : std::cyl_bessel_j(static_cast<double>(am), x);
  return (m < 0 && (am % 2)) ? -v : v;
}

}  // namespace

CounterexampleState counterexample_exact(double eps, int n, double t, int K) {
  if (!(eps > 0.0) || n == 0) throw Error(ErrorCode::InvalidArgument, "need eps > 0 and n != 0");
  const double x = eps * t;
  if (K < x || std::abs(bessel_j(K, x)) >= 1e-12)
    throw Error(ErrorCode::Resource, "truncation K = " + std::to_string(K) + " too small: |J_K(eps t)| = " +
                                         std::to_string(std::abs(bessel_j(K, x))) + ", recommended K >= " +
                                         std::to_string(counterexample_truncation(eps, t)));
  CounterexampleState st;
  st.n = n;
  st.amplitudes.resize(2 * K + 1);
  for (int m = -K; m <= K; ++m) {
    st.m.push_back(m);
    const double phase = (2.0 * m * n + double(n) * n) * t;
    st.amplitudes[m + K] = bessel_j(m, x) * std::exp(kI * phase);
  }
  return st;
}

CounterexampleRun counterexample_evolve(double eps, int n, const std::vector<double>& times, int K,
                                        double dt, const std::vector<double>& s_values) {
  if (n == 0 || eps < 0.0) throw Error(ErrorCode::InvalidArgument, "need eps >= 0 and n != 0");
  const int size = 2 * K + 1;
  Eigen::VectorXd E(size);
  for (int m = -K; m <= K; ++m) E[m + K] = -2.0 * n * m - double(n) * n;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(size);
  c[K] = 1.0;
  const cplx coup = eps / (2.0 * kI);
  // i c'_m = E_m c_m + coup e^{-2int} c_{m+1} − coup e^{2int} c_{m−1}
  auto rhs = [&](double t, const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y(size);
    const cplx up = coup * std::exp(-2.0 * kI * double(n) * t);
    const cplx dn = -coup * std::exp(2.0 * kI * double(n) * t);
    for (int i = 0; i < size; ++i) {
      cplx v = E[i] * x[i];
      if (i + 1 < size) v += up * x[i + 1];
      if (i > 0) v += dn * x[i - 1];
      y[i] = -kI * v;
    }
    return y;
  };
  CounterexampleRun out;
  out.run.method = "rk4";
  out.run.times = times;
  out.run.s_values = s_values;
  out.run.norms.assign(s_values.size(), {});
  double t = 0.0;
  for (double target : times) {
    const int steps = std::max(1, static_cast<int>(std::ceil((target - t) / dt - 1e-9)));
    const double h = (target - t) / steps;
    for (int k = 0; k < steps && h > 0.0; ++k) {
      const Eigen::VectorXcd k1 = rhs(t, c);
      const Eigen::VectorXcd k2 = rhs(t + 0.5 * h, c + 0.5 * h * k1);
      const Eigen::VectorXcd k3 = rhs(t + 0.5 * h, c + 0.5 * h * k2);
      const Eigen::VectorXcd k4 = rhs(t + h, c + h * k3);
      c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
    }
    t = target;
    CounterexampleState st;
    st.n = n;
    for (int m = -K; m <= K; ++m) st.m.push_back(m);
    st.amplitudes = c;
    for (std::size_t i = 0; i < s_values.size(); ++i) out.run.norms[i].push_back(st.sobolev(s_values[i]));
    out.run.max_l2_drift = std::max(out.run.max_l2_drift, std::abs(c.norm() - 1.0));
    if (eps > 0.0) {
      const auto ex = counterexample_exact(eps, n, t, K);
      out.rel_l2_error.push_back((c - ex.amplitudes).norm() / ex.amplitudes.norm());
    } else {
      Eigen::VectorXcd ex = Eigen::VectorXcd::Zero(size);
      ex[K] = std::exp(kI * (double(n) * n * t));
      out.rel_l2_error.push_back((c - ex).norm());
    }
    out.states.push_back(std::move(st));
  }
  out.run.final_state = c;
  return out;
}

}  // namespace nekho
