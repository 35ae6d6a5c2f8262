#include "eulerspec/kernels.hpp"

#include <algorithm>

#include "detail/norm_tracker.hpp"

namespace eulerspec::kernels {

namespace {

void log_norm_one(const fields::TrigVelocityField& u, const Vec2& x, const std::vector<double>& times,
                  double reorth, const flow::StepControl& sc, double* out) {
  detail::NormTracker tr(x);
  for (std::size_t k = 0; k < times.size(); ++k) {
    while (tr.time() < times[k] - 1e-12) tr.advance(u, std::min(reorth, times[k] - tr.time()), sc);
    out[k] = tr.log_norm();
  }
}

void check_times(const std::vector<double>& times) {
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) || !(times.front() > 0.0))
    throw Error(ErrorKind::InvalidInput, "sample times must be positive and ascending");
}

void log_second_one(const fields::TrigVelocityField& u, const Vec2& x,
                    const std::vector<double>& times, const flow::StepControl& sc, double* out) {
  flow::CocycleState s;
  s.position = x;
  s.has_second = true;
  for (std::size_t k = 0; k < times.size(); ++k) {
    double t0 = s.time;
    s = flow::continue_second(u, s, times[k] - t0, sc);
    s.time = times[k];
    double n = bilinear_norm(s.M2);
    out[k] = n > 0.0 ? std::log(n) : -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

std::vector<double> log_norm_at(const fields::TrigVelocityField& u, const std::vector<Vec2>& points,
                                const std::vector<double>& times, double reorth,
                                const flow::StepControl& sc, Exec exec) {
  check_times(times);
  if (!(reorth > 0.0)) throw Error(ErrorKind::InvalidInput, "reorthonormalization interval must be positive");
  std::vector<double> out(points.size() * times.size());
  const long n = long(points.size());
  const std::size_t nt = times.size();
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) log_norm_one(u, points[std::size_t(i)], times, reorth, sc, &out[std::size_t(i) * nt]);
  } else {
    for (long i = 0; i < n; ++i) log_norm_one(u, points[std::size_t(i)], times, reorth, sc, &out[std::size_t(i) * nt]);
  }
  return out;
}

std::vector<double> log_second_norm_at(const fields::TrigVelocityField& u,
                                       const std::vector<Vec2>& points,
                                       const std::vector<double>& times,
                                       const flow::StepControl& sc, Exec exec) {
  check_times(times);
  std::vector<double> out(points.size() * times.size());
  const long n = long(points.size());
  const std::size_t nt = times.size();
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) log_second_one(u, points[std::size_t(i)], times, sc, &out[std::size_t(i) * nt]);
  } else {
    for (long i = 0; i < n; ++i) log_second_one(u, points[std::size_t(i)], times, sc, &out[std::size_t(i) * nt]);
  }
  return out;
}

std::vector<Vec2> advect(const fields::TrigVelocityField& u, const std::vector<Vec2>& points,
                         double t, const flow::StepControl& sc, Exec exec) {
  std::vector<Vec2> out(points.size());
  const long n = long(points.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[std::size_t(i)] = flow::flow_map(u, points[std::size_t(i)], t, sc);
  } else {
    for (long i = 0; i < n; ++i) out[std::size_t(i)] = flow::flow_map(u, points[std::size_t(i)], t, sc);
  }
  return out;
}

namespace {

/// e^{i k theta} for k = -M..M.
void phase_table(double theta, int M, Complex* out) {
  Complex step = std::polar(1.0, theta);
  Complex cur = std::polar(1.0, -double(M) * theta);
  for (int k = 0; k <= 2 * M; ++k) {
    out[k] = cur;
    cur *= step;
  }
}

Complex evaluate_one(const fields::FourierScalarField& f, const Vec2& x, std::vector<Complex>& e1,
                     std::vector<Complex>& e2) {
  const int M = f.max_index();
  const int K = 2 * M + 1;
  phase_table(x.x(), M, e1.data());
  phase_table(x.y(), M, e2.data());
  const auto& data = f.data();
  Complex acc{};
  std::size_t idx = 0;
  for (int a = 0; a < K; ++a) {
    Complex row{};
    for (int b = 0; b < K; ++b) {
      if (a == M && b == M) continue;
      row += data[idx++] * e2[std::size_t(b)];
    }
    acc += e1[std::size_t(a)] * row;
  }
  return acc;
}

}  // namespace

std::vector<Complex> evaluate(const fields::FourierScalarField& f, const std::vector<Vec2>& points,
                              Exec exec) {
  std::vector<Complex> out(points.size());
  const std::size_t K = std::size_t(2 * f.max_index() + 1);
  const long n = long(points.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      std::vector<Complex> e1(K), e2(K);
#pragma omp for schedule(static)
      for (long i = 0; i < n; ++i) out[std::size_t(i)] = evaluate_one(f, points[std::size_t(i)], e1, e2);
    }
  } else {
    std::vector<Complex> e1(K), e2(K);
    for (long i = 0; i < n; ++i) out[std::size_t(i)] = evaluate_one(f, points[std::size_t(i)], e1, e2);
  }
  return out;
}

std::vector<Complex> nudft(const std::vector<Vec2>& points, const std::vector<Complex>& weights,
                           int M, Exec exec) {
  if (points.size() != weights.size()) throw Error(ErrorKind::InvalidInput, "points/weights size mismatch");
  if (M < 1) throw Error(ErrorKind::InvalidInput, "mode box must be at least 1");
  const Eigen::Index K = 2 * M + 1;
  const std::size_t S = points.size();
  const std::size_t chunk = 4096;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(K, K);
  Eigen::MatrixXcd E1(K, Eigen::Index(chunk)), E2(Eigen::Index(chunk), K);
  std::vector<Complex> tab(static_cast<std::size_t>(K));
  for (std::size_t s0 = 0; s0 < S; s0 += chunk) {
    const Eigen::Index len = Eigen::Index(std::min(chunk, S - s0));
    auto fill = [&](Eigen::Index s, std::vector<Complex>& t) {
      const Vec2& h = points[s0 + std::size_t(s)];
      phase_table(-h.x(), M, t.data());
      for (Eigen::Index a = 0; a < K; ++a) E1(a, s) = weights[s0 + std::size_t(s)] * t[std::size_t(a)];
      phase_table(-h.y(), M, t.data());
      for (Eigen::Index b = 0; b < K; ++b) E2(s, b) = t[std::size_t(b)];
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel
      {
        std::vector<Complex> t(static_cast<std::size_t>(K));
#pragma omp for schedule(static)
        for (Eigen::Index s = 0; s < len; ++s) fill(s, t);
      }
      const Eigen::Index block = 8;
      const Eigen::Index nblocks = (K + block - 1) / block;
#pragma omp parallel for schedule(static)
      for (Eigen::Index bi = 0; bi < nblocks; ++bi) {
        Eigen::Index r0 = bi * block, rn = std::min(block, K - r0);
        C.middleRows(r0, rn).noalias() += E1.block(r0, 0, rn, len) * E2.topRows(len);
      }
    } else {
      for (Eigen::Index s = 0; s < len; ++s) fill(s, tab);
      C.noalias() += E1.leftCols(len) * E2.topRows(len);
    }
  }
  std::vector<Complex> out;
  out.reserve(std::size_t(K * K - 1));
  for (Eigen::Index a = 0; a < K; ++a)
    for (Eigen::Index b = 0; b < K; ++b)
      if (!(a == M && b == M)) out.push_back(C(a, b));
  return out;
}

std::vector<Complex> nudft_direct(const std::vector<Vec2>& points,
                                  const std::vector<Complex>& weights, int M) {
  fields::ModeBox box(M);
  std::vector<Complex> out(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    fields::ModeIndex k = box.mode(i);
    Complex acc{};
    for (std::size_t s = 0; s < points.size(); ++s)
      acc += weights[s] * std::polar(1.0, -(k.k1 * points[s].x() + k.k2 * points[s].y()));
    out[i] = acc;
  }
  return out;
}

}  // namespace eulerspec::kernels
