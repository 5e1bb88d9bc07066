#include "fibered/jko.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fibered/functionals.hpp"
#include "fibered/io.hpp"
#include "fibered/quantile.hpp"
#include "fibered/transport.hpp"

namespace fibered {

void validate(const JkoConfig& cfg, const ModelParams& p) {
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("jko.tau: must be positive");
  if (!(cfg.tau < p.tau_limit())) {
    throw std::invalid_argument("jko.tau: must satisfy tau < 1/lambda^- = " + format_real(p.tau_limit()) +
                                " (lambda = " + format_real(p.lambda()) + ")");
  }
  if (cfg.max_sweeps < 1 || cfg.max_newton < 1) throw std::invalid_argument("jko: iteration limits must be >= 1");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) throw std::invalid_argument("jko.shrink: must lie in (0, 1)");
}

namespace {

constexpr double kMassFloor = 1e-300;
// A sweep in which every fiber starts this close to optimal ends the step.
constexpr double kSweepFactor = 100.0;

double lerp_at(const QuantileSegment& s, double u) {
  const double len = s.u1 - s.u0;
  if (len <= 0.0) return s.q0;
  return s.q0 + (s.q1 - s.q0) * ((u - s.u0) / len);
}

// int_a^b f g for linear f, g given by endpoint values.
double linear_product(double len, double fa, double fb, double ga, double gb) {
  return len / 6.0 * (2.0 * fa * ga + fa * gb + fb * ga + 2.0 * fb * gb);
}

// Fiber subproblem in cell masses m_0..m_{n-1}. Newton steps are taken in the
// cumulative coordinates c_j = m_0 + ... + m_{j-1}, j = 1..n-1, where the
// Hessian is tridiagonal.
class FiberProblem {
 public:
  FiberProblem(const ThetaGrid& tg, const std::vector<double>& psi, const QuantileFunction& prev, double tau,
               double dx, double j0)
      : tg_(tg), psi_(psi), prev_(prev), tau_(tau), dx_(dx), j0_(j0), h_(tg.dtheta()) {}

  // Coupling to the other fibers: g = dx sum_{k != i} J_ik M_k.
  void set_field(double g) { field_ = g; }

  double mean(const std::vector<double>& m) const {
    double s = 0.0;
    for (int l = 0; l < tg_.n_theta; ++l) s += tg_.center(l) * m[static_cast<std::size_t>(l)];
    return s;
  }

  double objective(const std::vector<double>& m) const {
    double ent = 0.0, pot = 0.0;
    for (std::size_t l = 0; l < m.size(); ++l) {
      ent += m[l] * std::log(m[l] / h_);
      pot += psi_[l] * m[l];
    }
    const double w2 = w2_squared(prev_, quantile(m));
    const double mm = mean(m);
    return ent + pot + w2 / (2.0 * tau_) - mm * field_ - 0.5 * dx_ * j0_ * mm * mm;
  }

  // Gradient g_j and tridiagonal Hessian (diag, off) in c_1..c_{n-1}.
  void derivatives(const std::vector<double>& m, std::vector<double>& g, std::vector<double>& diag,
                   std::vector<double>& off) const {
    const int n = tg_.n_theta;
    g.assign(static_cast<std::size_t>(n + 1), 0.0);
    diag.assign(static_cast<std::size_t>(n + 1), 0.0);
    off.assign(static_cast<std::size_t>(n + 1), 0.0);  // off[j] couples j and j+1
    const double mm = mean(m);
    const double coupling = h_ * (field_ + dx_ * j0_ * mm);
    for (int j = 1; j < n; ++j) {
      const auto a = static_cast<std::size_t>(j - 1), b = static_cast<std::size_t>(j);
      g[b] = std::log(m[a] / m[b]) + psi_[a] - psi_[b] + coupling;
      diag[b] = 1.0 / m[a] + 1.0 / m[b];
      if (j + 1 < n) off[b] = -1.0 / m[b];
    }
    // Transport part: T = Q_prev o F_nu on merged pieces.
    const auto qn = quantile(m);
    auto sa = prev_.segments();
    auto sb = qn.segments();
    std::size_t ia = 0, ib = 0;
    double u = 0.0;
    const double inv_tau = 1.0 / tau_;
    while (ia < sa.size() && ib < sb.size()) {
      const double end = std::min(sa[ia].u1, sb[ib].u1);
      if (end > u) {
        const int l = static_cast<int>(ib);
        const double ta = lerp_at(sb[ib], u), tb = lerp_at(sb[ib], end);
        const double len = tb - ta;
        if (len > 0.0) {
          const double va = lerp_at(sa[ia], u), vb = lerp_at(sa[ia], end);
          const double dens = (sa[ia].u1 - sa[ia].u0) / (sa[ia].q1 - sa[ia].q0);
          const double ra = (ta - tg_.edge(l)) / h_, rb = (tb - tg_.edge(l)) / h_;
          const double fa = va - ta, fb = vb - tb;
          // Falling hat belongs to edge l, rising hat to edge l + 1.
          const auto lo = static_cast<std::size_t>(l), hi = static_cast<std::size_t>(l + 1);
          if (l >= 1) {
            g[lo] += inv_tau * linear_product(len, fa, fb, 1.0 - ra, 1.0 - rb);
            diag[lo] += inv_tau / dens * linear_product(len, 1.0 - ra, 1.0 - rb, 1.0 - ra, 1.0 - rb);
          }
          if (l + 1 <= n - 1) {
            g[hi] += inv_tau * linear_product(len, fa, fb, ra, rb);
            diag[hi] += inv_tau / dens * linear_product(len, ra, rb, ra, rb);
          }
          if (l >= 1 && l + 1 <= n - 1) {
            off[lo] += inv_tau / dens * linear_product(len, 1.0 - ra, 1.0 - rb, ra, rb);
          }
        }
      }
      u = std::max(u, end);
      if (sa[ia].u1 <= end) ++ia;
      if (ib < sb.size() && sb[ib].u1 <= end) ++ib;
    }
  }

  QuantileFunction quantile(const std::vector<double>& m) const {
    std::vector<QuantileSegment> segs;
    segs.reserve(m.size());
    double total = 0.0;
    for (double v : m) total += v;
    double cum = 0.0;
    for (int l = 0; l < tg_.n_theta; ++l) {
      const double next = cum + m[static_cast<std::size_t>(l)];
      segs.push_back({cum / total, next / total, tg_.edge(l), tg_.edge(l + 1)});
      cum = next;
    }
    segs.back().u1 = 1.0;
    return QuantileFunction(std::move(segs));
  }

  const ThetaGrid& grid() const { return tg_; }

 private:
  ThetaGrid tg_;
  const std::vector<double>& psi_;
  const QuantileFunction& prev_;
  double tau_, dx_, j0_, h_;
  double field_ = 0.0;
};

// Solves the symmetric tridiagonal system on indices 1..n-1.
std::vector<double> thomas(const std::vector<double>& diag, const std::vector<double>& off,
                           const std::vector<double>& rhs, int n) {
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0), d(static_cast<std::size_t>(n + 1), 0.0);
  for (int j = 1; j < n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double sub = j > 1 ? off[k - 1] : 0.0;
    const double denom = diag[k] - (j > 1 ? sub * c[k - 1] : 0.0);
    if (!(denom > 0.0) || !std::isfinite(denom)) throw JkoFailure("jko_step: Hessian lost positive definiteness");
    c[k] = off[k] / denom;
    d[k] = (rhs[k] - (j > 1 ? sub * d[k - 1] : 0.0)) / denom;
  }
  std::vector<double> x(static_cast<std::size_t>(n + 1), 0.0);
  for (int j = n - 1; j >= 1; --j) {
    const auto k = static_cast<std::size_t>(j);
    x[k] = d[k] - (j + 1 < n ? c[k] * x[k + 1] : 0.0);
  }
  return x;
}

struct NewtonOutcome {
  int iterations = 0;
  double first_decrement = 0.0;
};

NewtonOutcome newton_solve(const FiberProblem& fp, std::vector<double>& m, const JkoConfig& cfg, int fiber) {
  const int n = fp.grid().n_theta;
  std::vector<double> g, diag, off, trial(m.size()), dm(m.size());
  NewtonOutcome out;
  double phi = fp.objective(m);
  bool stalled = false;
  for (int it = 0; it < cfg.max_newton; ++it) {
    fp.derivatives(m, g, diag, off);
    std::vector<double> rhs(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) rhs[k] = -g[k];
    const auto dc = thomas(diag, off, rhs, n);
    double dec = 0.0;
    for (int j = 1; j < n; ++j) dec -= g[static_cast<std::size_t>(j)] * dc[static_cast<std::size_t>(j)];
    if (it == 0) out.first_decrement = dec;
    if (dec < cfg.tolerance * std::max(1.0, std::abs(phi)) || stalled) return out;
    // m_l = c_{l+1} - c_l with c_0 = 0, c_n = 1 fixed. Shrinking cells move
    // multiplicatively so tails can drop by many decades in one step.
    for (int l = 0; l < n; ++l) {
      const auto k = static_cast<std::size_t>(l);
      dm[k] = (l + 1 < n ? dc[k + 1] : 0.0) - (l > 0 ? dc[k] : 0.0);
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      double total = 0.0;
      for (std::size_t k = 0; k < m.size(); ++k) {
        trial[k] = dm[k] >= 0.0 ? m[k] + alpha * dm[k] : std::max(m[k] * std::exp(alpha * dm[k] / m[k]), kMassFloor);
        total += trial[k];
      }
      for (double& v : trial) v /= total;
      const double val = fp.objective(trial);
      if (std::isfinite(val) && val <= phi - 1e-4 * alpha * dec) {
        if (val == phi) stalled = true;
        m.swap(trial);
        phi = val;
        accepted = true;
        break;
      }
      alpha *= cfg.shrink;
    }
    ++out.iterations;
    if (!accepted) {
      // The decrement sits at the round-off floor of the objective.
      if (dec < 1e-11 * (1.0 + std::abs(phi))) return out;
      throw JkoFailure("jko_step: line search stagnated in fiber " + std::to_string(fiber) +
                       " (Newton decrement " + format_real(dec) + ")");
    }
  }
  fp.derivatives(m, g, diag, off);
  throw JkoFailure("jko_step: Newton iteration limit reached in fiber " + std::to_string(fiber));
}

}  // namespace

JkoStepResult jko_step(const GridMeasure& mu_prev, const ModelParams& p, const JkoConfig& cfg) {
  validate(cfg, p);
  const auto& grid = mu_prev.grid();
  const auto& tg = grid.theta;
  const int nx = grid.n_x(), nt = grid.n_theta();
  const double h = tg.dtheta(), dx = grid.torus.dx();
  std::vector<double> psi(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j) psi[static_cast<std::size_t>(j)] = p.psi()(tg.center(j));
  const auto table = p.kernel().circulant_table(nx);

  std::vector<QuantileFunction> prev;
  std::vector<std::vector<double>> mass(static_cast<std::size_t>(nx));
  std::vector<double> means(static_cast<std::size_t>(nx));
  for (int i = 0; i < nx; ++i) {
    const auto fiber = mu_prev.fiber(i);
    if (*std::max_element(fiber.weights().begin(), fiber.weights().end()) <= kAcThreshold) {
      throw std::invalid_argument("jko_step: fiber " + std::to_string(i) + " is not absolutely continuous");
    }
    prev.push_back(QuantileFunction::of(fiber));
    auto& m = mass[static_cast<std::size_t>(i)];
    m.resize(static_cast<std::size_t>(nt));
    for (int j = 0; j < nt; ++j) m[static_cast<std::size_t>(j)] = std::max(fiber.cell_mass(j), kMassFloor);
    means[static_cast<std::size_t>(i)] = fiber.mean();
  }

  JkoStepReport rep;
  rep.objective_start = free_energy(mu_prev, p);
  bool converged = false;
  for (int sweep = 0; sweep < cfg.max_sweeps && !converged; ++sweep) {
    converged = true;
    ++rep.sweeps;
    for (int i = 0; i < nx; ++i) {
      double field = 0.0;
      for (int k = 0; k < nx; ++k) {
        if (k != i) field += table[static_cast<std::size_t>(((i - k) % nx + nx) % nx)] * means[static_cast<std::size_t>(k)];
      }
      FiberProblem fp(tg, psi, prev[static_cast<std::size_t>(i)], cfg.tau, dx, table[0]);
      fp.set_field(field * dx);
      auto& m = mass[static_cast<std::size_t>(i)];
      const auto outcome = newton_solve(fp, m, cfg, i);
      rep.inner_iters += outcome.iterations;
      if (outcome.first_decrement > kSweepFactor * cfg.tolerance) converged = false;
      means[static_cast<std::size_t>(i)] = fp.mean(m);
    }
  }
  if (!converged) {
    throw JkoFailure("jko_step: no Gauss-Seidel convergence after " + std::to_string(cfg.max_sweeps) + " sweeps");
  }

  std::vector<double> rho;
  rho.reserve(grid.size());
  double grad2 = 0.0;
  for (int i = 0; i < nx; ++i) {
    double field = 0.0;
    for (int k = 0; k < nx; ++k) {
      if (k != i) field += table[static_cast<std::size_t>(((i - k) % nx + nx) % nx)] * means[static_cast<std::size_t>(k)];
    }
    FiberProblem fp(tg, psi, prev[static_cast<std::size_t>(i)], cfg.tau, dx, table[0]);
    fp.set_field(field * dx);
    const auto& m = mass[static_cast<std::size_t>(i)];
    std::vector<double> g, diag, off;
    fp.derivatives(m, g, diag, off);
    const auto dc = thomas(diag, off, g, nt);
    for (int j = 1; j < nt; ++j) grad2 += dx * g[static_cast<std::size_t>(j)] * dc[static_cast<std::size_t>(j)];
    double total = 0.0;
    for (double v : m) total += v;
    for (double v : m) rho.push_back(v / (total * h));
  }
  GridMeasure nu(grid, std::move(rho), kDynamicsTolerance);
  const double w = wl_distance(mu_prev, nu);
  rep.objective = free_energy(nu, p) + w * w / (2.0 * cfg.tau);
  rep.decrease = rep.objective_start - rep.objective;
  rep.grad_norm = std::sqrt(std::max(0.0, grad2));
  return {std::move(nu), rep};
}

JkoResult solve_jko(const GridMeasure& mu0, const ModelParams& p, const JkoConfig& cfg, double horizon) {
  validate(cfg, p);
  if (!(horizon > 0.0)) throw std::invalid_argument("solve_jko: horizon must be positive");
  const long steps = static_cast<long>(std::ceil(horizon / cfg.tau - 1e-9));
  JkoResult out;
  out.curve.push_back(0.0, mu0);
  out.observables.push_back(observe(0.0, mu0, p));
  GridMeasure current = mu0;
  for (long n = 1; n <= steps; ++n) {
    auto r = jko_step(current, p, cfg);
    const double t = static_cast<double>(n) * cfg.tau;
    out.diagnostics.push_back(r.report);
    out.observables.push_back(observe(t, r.state, p));
    out.curve.push_back(t, r.state);
    current = std::move(r.state);
  }
  attach_metric_derivatives(out.curve, out.observables);
  return out;
}

void write_jko_diagnostics(const std::filesystem::path& path, const std::vector<JkoStepReport>& diag) {
  CsvWriter w(path, {"n", "objective", "decrease", "grad_norm", "inner_iters"});
  for (std::size_t k = 0; k < diag.size(); ++k) {
    w.cell(static_cast<long long>(k + 1)).cell(diag[k].objective).cell(diag[k].decrease);
    w.cell(diag[k].grad_norm).cell(diag[k].inner_iters);
    w.end_row();
  }
}

std::vector<double> isotonic_projection(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("isotonic_projection: size mismatch");
  struct Block {
    double value, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(weights[k] > 0.0)) throw std::invalid_argument("isotonic_projection: weights must be positive");
    blocks.push_back({values[k], weights[k], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block b = blocks.back();
      blocks.pop_back();
      auto& a = blocks.back();
      const double w = a.weight + b.weight;
      a.value = (a.value * a.weight + b.value * b.weight) / w;
      a.weight = w;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.value);
  return out;
}

}  // namespace fibered
