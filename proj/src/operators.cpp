#include "eulerspec/operators.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

#include <unsupported/Eigen/MatrixFunctions>

#include "detail/fft_grid.hpp"

namespace eulerspec::operators {

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::A: return "A";
    case OperatorKind::K: return "K";
    case OperatorKind::L: return "L";
    case OperatorKind::Lvel: return "Lvel";
  }
  return "?";
}

namespace {

// Fourier support of u: velocity and vorticity coefficients at each q.
struct SupportMode {
  ModeIndex q;
  std::array<Complex, 2> vel;
  Complex vort;
};

std::vector<SupportMode> support_of(const TrigVelocityField& u) {
  std::vector<SupportMode> out;
  if (!u.mean_velocity().isZero(0.0)) out.push_back({{0, 0}, u.velocity_coeff({0, 0}), Complex{}});
  for (const auto& [q, psi] : u.stream()) out.push_back({q, u.velocity_coeff(q), u.vorticity_coeff(q)});
  return out;
}

void check_box(int M) {
  if (M < 1) throw Error(ErrorKind::InvalidInput, "mode box must be at least 1");
  if (M > kDenseCeiling)
    throw Error(ErrorKind::InvalidInput, "dense assembly is limited to M <= " + std::to_string(kDenseCeiling));
}

GalerkinOperator make(int M, OperatorKind kind, std::size_t blocks) {
  GalerkinOperator op;
  op.box = ModeBox(M);
  op.kind = kind;
  const auto n = Eigen::Index(op.box.size() * blocks);
  op.matrix = Eigen::MatrixXcd::Zero(n, n);
  return op;
}

const Complex I{0.0, 1.0};

}  // namespace

GalerkinOperator assemble_A(const TrigVelocityField& u, int M) {
  check_box(M);
  auto op = make(M, OperatorKind::A, 1);
  const auto sup = support_of(u);
  const long n = long(op.box.size());
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n; ++c) {
    ModeIndex kp = op.box.mode(std::size_t(c));
    for (const auto& s : sup) {
      ModeIndex k = kp + s.q;
      if (!op.box.contains(k)) continue;
      op.matrix(Eigen::Index(op.box.index(k)), c) += I * (s.vel[0] * double(kp.k1) + s.vel[1] * double(kp.k2));
    }
  }
  return op;
}

GalerkinOperator assemble_K(const TrigVelocityField& u, int M) {
  check_box(M);
  auto op = make(M, OperatorKind::K, 1);
  const auto sup = support_of(u);
  const long n = long(op.box.size());
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n; ++c) {
    ModeIndex kp = op.box.mode(std::size_t(c));
    for (const auto& s : sup) {
      if (s.q.is_zero()) continue;
      ModeIndex k = kp + s.q;
      if (!op.box.contains(k)) continue;
      double dir = double(kp.k2) * s.q.k1 - double(kp.k1) * s.q.k2;
      op.matrix(Eigen::Index(op.box.index(k)), c) += dir / double(kp.norm2()) * s.vort;
    }
  }
  return op;
}

GalerkinOperator combine_L(const GalerkinOperator& A, const GalerkinOperator& K) {
  if (!(A.box == K.box) || A.kind != OperatorKind::A || K.kind != OperatorKind::K)
    throw Error(ErrorKind::InvalidInput, "L needs A and K on the same box");
  GalerkinOperator L;
  L.box = A.box;
  L.kind = OperatorKind::L;
  L.m = A.m;
  L.matrix = K.matrix - A.matrix;
  return L;
}

GalerkinOperator assemble_L(const TrigVelocityField& u, int M) {
  return combine_L(assemble_A(u, M), assemble_K(u, M));
}

GalerkinOperator assemble_Lvel(const TrigVelocityField& u, int M) {
  check_box(M);
  auto op = make(M, OperatorKind::Lvel, 2);
  const auto sup = support_of(u);
  const long n = long(op.box.size());
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n; ++c) {
    ModeIndex kp = op.box.mode(std::size_t(c));
    for (const auto& s : sup) {
      ModeIndex k = kp + s.q;
      if (!op.box.contains(k)) continue;
      // T(i, j): <u, grad> v + <v, grad> u for the pair of modes.
      const Complex adv = I * (s.vel[0] * double(kp.k1) + s.vel[1] * double(kp.k2));
      const double q[2] = {double(s.q.k1), double(s.q.k2)};
      Eigen::Matrix2cd T;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) T(i, j) = (i == j ? adv : Complex{}) + I * q[j] * s.vel[std::size_t(i)];
      const double kk[2] = {double(k.k1), double(k.k2)};
      Eigen::Matrix2d P;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) P(i, j) = (i == j ? 1.0 : 0.0) - kk[i] * kk[j] / double(k.norm2());
      Eigen::Matrix2cd B = -(P.cast<Complex>() * T);
      const auto r = Eigen::Index(op.box.index(k));
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) op.matrix(i * n + r, j * n + c) += B(i, j);
    }
  }
  return op;
}

SimilarityCheck check_similarity(const TrigVelocityField& u, int M) {
  auto Lv = assemble_Lvel(u, M);
  auto L = assemble_L(u, M);
  const ModeBox& box = L.box;
  const auto n = Eigen::Index(box.size());
  // curl: (v1, v2) -> -i k2 v1 + i k1 v2; curl^-1: w -> i (k2, -k1) / |k|^2 w.
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, 2 * n), Ci = Eigen::MatrixXcd::Zero(2 * n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ModeIndex k = box.mode(std::size_t(i));
    C(i, i) = -I * double(k.k2);
    C(i, n + i) = I * double(k.k1);
    Ci(i, i) = I * double(k.k2) / double(k.norm2());
    Ci(n + i, i) = -I * double(k.k1) / double(k.norm2());
  }
  Eigen::MatrixXcd D = C * Lv.matrix * Ci - L.matrix;
  const int inner = M - u.support_radius();
  SimilarityCheck out;
  for (Eigen::Index i = 0; i < n; ++i) {
    ModeIndex k = box.mode(std::size_t(i));
    if (std::abs(k.k1) > inner || std::abs(k.k2) > inner) continue;
    ++out.interior_modes;
    out.discrepancy = std::max(out.discrepancy, D.row(i).cwiseAbs().maxCoeff());
  }
  return out;
}

double sobolev_norm(const FourierScalarField& w, int m) { return w.sobolev_norm(m); }

Eigen::VectorXcd to_vector(const FourierScalarField& w) {
  auto d = w.data();
  return Eigen::Map<const Eigen::VectorXcd>(d.data(), Eigen::Index(d.size()));
}

FourierScalarField from_vector(const ModeBox& box, const Eigen::VectorXcd& v) {
  if (std::size_t(v.size()) != box.size()) throw Error(ErrorKind::InvalidInput, "vector length does not match the box");
  return FourierScalarField(box, std::vector<Complex>(v.data(), v.data() + v.size()));
}

void sort_eigenvalues(std::vector<Complex>& values, double tol) {
  auto lt = [](const Complex& a, const Complex& b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  };
  std::sort(values.begin(), values.end(), lt);
  // Real parts within tol form one group ordered by imaginary part.
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i + 1;
    while (j < values.size() && values[j].real() - values[j - 1].real() <= tol) ++j;
    std::sort(values.begin() + long(i), values.begin() + long(j),
              [](const Complex& a, const Complex& b) { return a.imag() < b.imag(); });
    i = j;
  }
}

namespace {

std::vector<Complex> eigenvalues_of(const Eigen::MatrixXcd& A) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
  if (es.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const auto& sv = svd.singularValues();
    double smin = sv(sv.size() - 1);
    throw Error(ErrorKind::EigenSolver,
                "eigensolver did not converge (n = " + std::to_string(A.rows()) +
                    ", ||A||_2 = " + std::to_string(sv(0)) + ", condition = " +
                    (smin > 0.0 ? std::to_string(sv(0) / smin) : std::string("inf")) + ")");
  }
  const auto& ev = es.eigenvalues();
  return std::vector<Complex>(ev.data(), ev.data() + ev.size());
}

Eigen::MatrixXcd weighted(const GalerkinOperator& op, int m) {
  if (op.kind == OperatorKind::Lvel || m == 0) return op.matrix;
  const auto n = Eigen::Index(op.box.size());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = std::pow(op.box.mode(std::size_t(i)).norm(), double(m));
  return w.asDiagonal() * op.matrix * w.cwiseInverse().asDiagonal();
}

}  // namespace

std::vector<Complex> spectrum(const GalerkinOperator& op, int m) {
  if (op.box.max_index() > kDenseCeiling)
    throw Error(ErrorKind::InvalidInput, "spectra are limited to M <= " + std::to_string(kDenseCeiling));
  auto ev = eigenvalues_of(weighted(op, m));
  sort_eigenvalues(ev);
  return ev;
}

double spectral_inclusion_error(const GalerkinOperator& op, double t) {
  Eigen::MatrixXcd E = (t * op.matrix).exp();
  auto lhs = eigenvalues_of(E);
  auto base = eigenvalues_of(op.matrix);
  std::vector<bool> used(lhs.size(), false);
  double worst = 0.0;
  for (const auto& z : base) {
    Complex target = std::exp(t * z);
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lhs.size(); ++j)
      if (!used[j] && std::abs(lhs[j] - target) < bd) bd = std::abs(lhs[j] - target), best = j;
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

int padded_grid(int M, int R) {
  int G = 2 * (M + R + 1);
  return G + (G % 2);
}

FourierScalarField apply_parts(const TrigVelocityField& u, const FourierScalarField& w, bool with_a,
                               bool with_k) {
  const int M = w.max_index();
  const int R = std::max(u.support_radius(), 1);
  detail::FftGrid grid(padded_grid(M, R));
  std::vector<Complex> acc(std::size_t(grid.size()) * std::size_t(grid.size()));
  if (with_a) {
    auto u1 = grid.synthesize(R, u.mean_velocity().x(), [&](ModeIndex q) { return u.velocity_coeff(q)[0]; });
    auto u2 = grid.synthesize(R, u.mean_velocity().y(), [&](ModeIndex q) { return u.velocity_coeff(q)[1]; });
    auto w1 = grid.synthesize(M, {}, [&](ModeIndex k) { return I * double(k.k1) * w.coeff(k); });
    auto w2 = grid.synthesize(M, {}, [&](ModeIndex k) { return I * double(k.k2) * w.coeff(k); });
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= u1[i] * w1[i] + u2[i] * w2[i];
  }
  if (with_k) {
    auto o1 = grid.synthesize(R, {}, [&](ModeIndex q) { return I * double(q.k1) * u.vorticity_coeff(q); });
    auto o2 = grid.synthesize(R, {}, [&](ModeIndex q) { return I * double(q.k2) * u.vorticity_coeff(q); });
    auto v1 = grid.synthesize(M, {}, [&](ModeIndex k) { return I * double(k.k2) / double(k.norm2()) * w.coeff(k); });
    auto v2 = grid.synthesize(M, {}, [&](ModeIndex k) { return -I * double(k.k1) / double(k.norm2()) * w.coeff(k); });
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= v1[i] * o1[i] + v2[i] * o2[i];
  }
  grid.analyze(acc);
  FourierScalarField out(w.box());
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = grid.coeff(w.box().mode(i));
  return out;
}

}  // namespace

FourierScalarField apply_A(const TrigVelocityField& u, const FourierScalarField& w) {
  auto r = apply_parts(u, w, true, false);
  r *= -1.0;
  return r;
}

FourierScalarField apply_K(const TrigVelocityField& u, const FourierScalarField& w) {
  return apply_parts(u, w, false, true);
}

FourierScalarField apply_L(const TrigVelocityField& u, const FourierScalarField& w) {
  return apply_parts(u, w, true, true);
}

// ---------------------------------------------------------------------------

namespace {

void check_series(const std::vector<double>& times) {
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) || times.front() < 0.0)
    throw Error(ErrorKind::InvalidInput, "times must be non-negative and ascending");
}

}  // namespace

std::vector<Pushforward> pushforward_series(const FourierScalarField& w, const TrigVelocityField& u,
                                            const std::vector<double>& times,
                                            const PushforwardOptions& opt) {
  check_series(times);
  if (opt.grid < 8 || opt.grid % 2) throw Error(ErrorKind::InvalidInput, "grid must be even and at least 8");
  detail::FftGrid grid(opt.grid);
  const std::size_t n = std::size_t(opt.grid) * std::size_t(opt.grid);
  std::vector<Vec2> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = grid.node(i);
  const int Mout = opt.grid / 2 - 1;
  const double cutoff = double(opt.grid) / 3.0;
  std::vector<Pushforward> out;
  double t = 0.0;
  for (double target : times) {
    if (target > t) {
      pos = kernels::advect(u, pos, target - t, opt.step, opt.exec);
      t = target;
    }
    grid.analyze(kernels::evaluate(w, pos, opt.exec));
    Pushforward p;
    p.time = target;
    p.field = FourierScalarField(ModeBox(Mout));
    auto d = p.field.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = grid.coeff(p.field.box().mode(i));
    p.tail = p.field.tail_fraction(opt.tail_index, cutoff);
    p.aliasing_warning = p.tail > opt.alias_threshold;
    out.push_back(std::move(p));
  }
  return out;
}

Pushforward pushforward(const FourierScalarField& w, const TrigVelocityField& u, double t,
                        const PushforwardOptions& opt) {
  if (t < 0.0) throw Error(ErrorKind::InvalidInput, "pushforward time must be non-negative");
  return pushforward_series(w, u, {t}, opt).front();
}

std::vector<double> lagrangian_norms(const FourierScalarField& w, const TrigVelocityField& u, int m,
                                     const std::vector<double>& times, int grid,
                                     const flow::StepControl& sc, kernels::Exec exec) {
  check_series(times);
  if (m != 0 && m != 1) throw Error(ErrorKind::InvalidInput, "Lagrangian norms support m = 0 and m = 1");
  if (grid < 8) throw Error(ErrorKind::InvalidInput, "grid must be at least 8");
  const std::size_t n = std::size_t(grid) * std::size_t(grid);
  const double h = kTwoPi / grid;
  // Gradient of w at the nodes (time independent).
  auto dw = [&](int comp) {
    auto f = w;
    auto d = f.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      ModeIndex k = f.box().mode(i);
      d[i] *= I * double(comp == 0 ? k.k1 : k.k2);
    }
    return f;
  };
  std::vector<Vec2> nodes(n);
  // Cell centres: the presets have separatrices on the lines x_i = 0, where a
  // node would see the saddle stretching with full weight.
  for (std::size_t i = 0; i < n; ++i)
    nodes[i] = {(double(i / std::size_t(grid)) + 0.5) * h, (double(i % std::size_t(grid)) + 0.5) * h};
  std::vector<Complex> val, g1, g2;
  if (m == 0) {
    val = kernels::evaluate(w, nodes, exec);
  } else {
    g1 = kernels::evaluate(dw(0), nodes, exec);
    g2 = kernels::evaluate(dw(1), nodes, exec);
  }
  // sums[i][k]: integrand at node i and time k.
  std::vector<double> part(n * times.size());
  auto run = [&](std::size_t i) {
    flow::CocycleState s;
    s.position = nodes[i];
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (m == 0) {
        part[i * times.size() + k] = std::norm(val[i]);
        continue;
      }
      if (times[k] > s.time) {
        double now = s.time;
        s = flow::continue_tangent(u, s, -(times[k] - now), sc);
        s.time = times[k];
      }
      Mat2 J = unimodular_inverse_transpose(s.M);
      Complex a = J(0, 0) * g1[i] + J(0, 1) * g2[i];
      Complex b = J(1, 0) * g1[i] + J(1, 1) * g2[i];
      part[i * times.size() + k] = std::norm(a) + std::norm(b);
    }
  };
  const long nn = long(n);
  if (exec == kernels::Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < nn; ++i) run(std::size_t(i));
  } else {
    for (long i = 0; i < nn; ++i) run(std::size_t(i));
  }
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < times.size(); ++k) out[k] += part[i * times.size() + k];
  for (auto& v : out) v = std::sqrt(v / double(n));
  return out;
}

namespace {

std::vector<double> growth_times(double T, int samples) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidInput, "horizon must be positive");
  if (samples < 2) throw Error(ErrorKind::InvalidInput, "need at least two sample times");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) t[std::size_t(i)] = 0.5 * T + 0.5 * T * double(i) / double(samples - 1);
  return t;
}

double slope_of(const std::vector<std::pair<double, double>>& trace) {
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : trace) mx += x, my += y;
  mx /= double(trace.size());
  my /= double(trace.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : trace) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return sxy / sxx;
}

}  // namespace

SemigroupGrowth semigroup_growth(const TrigVelocityField& u, int m, const FourierScalarField& seed,
                                 double T, const GrowthOptions& opt) {
  auto times = growth_times(T, opt.samples);
  auto push = opt.push;
  push.tail_index = m;
  auto series = pushforward_series(seed, u, times, push);
  SemigroupGrowth g;
  g.m = m;
  g.route = "pushforward";
  for (const auto& p : series) {
    g.trace.push_back({p.time, std::log(p.field.sobolev_norm(m))});
    g.max_tail = std::max(g.max_tail, p.tail);
    g.aliasing_warning = g.aliasing_warning || p.aliasing_warning;
  }
  if (g.max_tail > opt.failure_tail)
    throw Error(ErrorKind::Aliasing, "pushforward tail fraction " + std::to_string(g.max_tail) +
                                         " exceeds " + std::to_string(opt.failure_tail) +
                                         "; refine the grid or shorten the horizon");
  g.value = slope_of(g.trace);
  return g;
}

SemigroupGrowth semigroup_growth_lagrangian(const TrigVelocityField& u, int m,
                                            const FourierScalarField& seed, double T, int grid,
                                            const GrowthOptions& opt) {
  auto times = growth_times(T, opt.samples);
  auto norms = lagrangian_norms(seed, u, m, times, grid, opt.push.step, opt.push.exec);
  SemigroupGrowth g;
  g.m = m;
  g.route = "lagrangian";
  for (std::size_t k = 0; k < times.size(); ++k) g.trace.push_back({times[k], std::log(norms[k])});
  g.value = slope_of(g.trace);
  return g;
}

FourierScalarField gaussian_bump(const Vec2& c, double sigma, int M) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidInput, "bump width must be positive");
  if (M <= 0) M = int(std::ceil(std::sqrt(2.0 * std::log(1e16)) / sigma));
  FourierScalarField f{ModeBox(M)};
  auto d = f.data();
  const double amp = sigma * sigma / kTwoPi;
  for (std::size_t i = 0; i < d.size(); ++i) {
    ModeIndex k = f.box().mode(i);
    d[i] = amp * std::exp(-0.5 * sigma * sigma * k.norm2()) * std::polar(1.0, -(k.k1 * c.x() + k.k2 * c.y()));
  }
  return f;
}

void write_spectrum_csv(std::ostream& os, const std::vector<Complex>& values) {
  os << "re,im\n" << std::setprecision(17);
  for (const auto& z : values) os << z.real() << ',' << z.imag() << '\n';
}

void write_triplets(std::ostream& os, const GalerkinOperator& op, double threshold) {
  if (op.kind == OperatorKind::Lvel) throw Error(ErrorKind::InvalidInput, "triplet dump covers scalar operators");
  os << "k1,k2,k1p,k2p,re,im\n" << std::setprecision(17);
  for (Eigen::Index c = 0; c < op.matrix.cols(); ++c)
    for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
      Complex v = op.matrix(r, c);
      if (std::abs(v) <= threshold) continue;
      ModeIndex k = op.box.mode(std::size_t(r)), kp = op.box.mode(std::size_t(c));
      os << k.k1 << ',' << k.k2 << ',' << kp.k1 << ',' << kp.k2 << ',' << v.real() << ',' << v.imag() << '\n';
    }
}

}  // namespace eulerspec::operators
