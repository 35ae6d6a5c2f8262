#include "eulerspec/fields.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace eulerspec::fields {

ModeBox::ModeBox(int max_index) : m_(max_index) {
  if (max_index < 0) throw Error(ErrorKind::InvalidInput, "mode box index must be >= 0");
  std::size_t w = std::size_t(2 * m_ + 1);
  size_ = w * w - 1;
  center_ = std::size_t(m_) * w + std::size_t(m_);
}

FourierScalarField::FourierScalarField(ModeBox box) : box_(box), data_(box.size()) {}

FourierScalarField::FourierScalarField(ModeBox box, std::vector<Complex> coefficients)
    : box_(box), data_(std::move(coefficients)) {
  if (data_.size() != box_.size())
    throw Error(ErrorKind::InvalidInput, "coefficient vector does not match mode box");
}

FourierScalarField FourierScalarField::from_coefficients(
    int max_index, std::span<const std::pair<ModeIndex, Complex>> coefficients) {
  FourierScalarField f{ModeBox(max_index)};
  for (const auto& [k, c] : coefficients) f.add(k, c);
  return f;
}

void FourierScalarField::set(const ModeIndex& k, Complex value) {
  if (k.is_zero()) throw Error(ErrorKind::InvalidInput, "mean-zero field has no (0,0) mode");
  if (!box_.contains(k))
    throw Error(ErrorKind::InvalidInput, "mode (" + std::to_string(k.k1) + "," +
                                             std::to_string(k.k2) + ") outside the box");
  data_[box_.index(k)] = value;
}

void FourierScalarField::add(const ModeIndex& k, Complex value) {
  if (k.is_zero()) throw Error(ErrorKind::InvalidInput, "mean-zero field has no (0,0) mode");
  if (!box_.contains(k))
    throw Error(ErrorKind::InvalidInput, "mode (" + std::to_string(k.k1) + "," +
                                             std::to_string(k.k2) + ") outside the box");
  data_[box_.index(k)] += value;
}

double FourierScalarField::l2_norm() const { return sobolev_norm(0); }

double FourierScalarField::sobolev_norm(int m) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] == Complex{}) continue;
    double w = std::pow(double(box_.mode(i).norm2()), double(m));
    acc += w * std::norm(data_[i]);
  }
  return std::sqrt(acc);
}

double FourierScalarField::tail_fraction(int m, double cutoff) const {
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    ModeIndex k = box_.mode(i);
    double e = std::pow(double(k.norm2()), double(m)) * std::norm(data_[i]);
    total += e;
    if (std::max(std::abs(k.k1), std::abs(k.k2)) > cutoff) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

bool FourierScalarField::is_real(double tol) const {
  double scale = std::max(1.0, l2_norm());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    ModeIndex k = box_.mode(i);
    if (std::abs(data_[i] - std::conj(data_[box_.index(-k)])) > tol * scale) return false;
  }
  return true;
}

Complex FourierScalarField::evaluate(const Vec2& x) const {
  Complex acc{};
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] == Complex{}) continue;
    ModeIndex k = box_.mode(i);
    double th = k.k1 * x.x() + k.k2 * x.y();
    acc += data_[i] * Complex(std::cos(th), std::sin(th));
  }
  return acc;
}

FourierScalarField FourierScalarField::resized(int max_index) const {
  FourierScalarField out{ModeBox(max_index)};
  for (std::size_t i = 0; i < data_.size(); ++i) {
    ModeIndex k = box_.mode(i);
    if (out.box_.contains(k)) out.data_[out.box_.index(k)] = data_[i];
  }
  return out;
}

FourierScalarField& FourierScalarField::operator+=(const FourierScalarField& o) {
  if (!(box_ == o.box_)) throw Error(ErrorKind::InvalidInput, "mode box mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

FourierScalarField& FourierScalarField::operator-=(const FourierScalarField& o) {
  if (!(box_ == o.box_)) throw Error(ErrorKind::InvalidInput, "mode box mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

FourierScalarField& FourierScalarField::operator*=(Complex c) {
  for (auto& v : data_) v *= c;
  return *this;
}

FourierScalarField operator-(FourierScalarField a, const FourierScalarField& b) { return a -= b; }
FourierScalarField operator+(FourierScalarField a, const FourierScalarField& b) { return a += b; }
FourierScalarField operator*(Complex c, FourierScalarField a) { return a *= c; }

std::vector<Complex> FourierVectorField::divergence() const {
  const ModeBox& b = box();
  std::vector<Complex> d(b.size());
  const Complex I(0.0, 1.0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    ModeIndex k = b.mode(i);
    d[i] = I * (double(k.k1) * c1.data()[i] + double(k.k2) * c2.data()[i]);
  }
  return d;
}

FourierScalarField curl(const FourierVectorField& v) {
  if (!(v.c1.box() == v.c2.box())) throw Error(ErrorKind::InvalidInput, "component box mismatch");
  const ModeBox& b = v.box();
  FourierScalarField w{b};
  const Complex I(0.0, 1.0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    ModeIndex k = b.mode(i);
    w.data()[i] = -I * double(k.k2) * v.c1.data()[i] + I * double(k.k1) * v.c2.data()[i];
  }
  return w;
}

FourierVectorField curl_inverse(const FourierScalarField& w) {
  const ModeBox& b = w.box();
  FourierVectorField v{FourierScalarField{b}, FourierScalarField{b}};
  const Complex I(0.0, 1.0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    ModeIndex k = b.mode(i);
    Complex s = I * w.data()[i] / double(k.norm2());
    v.c1.data()[i] = double(k.k2) * s;
    v.c2.data()[i] = -double(k.k1) * s;
  }
  return v;
}

// ---------------------------------------------------------------------------

namespace {

bool positive_half(const ModeIndex& k) { return k.k1 > 0 || (k.k1 == 0 && k.k2 > 0); }

}  // namespace

TrigVelocityField::TrigVelocityField(Vec2 mean_velocity,
                                     std::vector<std::pair<ModeIndex, Complex>> stream)
    : mean_(std::move(mean_velocity)) {
  std::map<ModeIndex, Complex> merged;
  for (const auto& [k, c] : stream) {
    if (k.is_zero()) continue;  // constants do not change the velocity
    merged[k] += c;
  }
  double scale = 0.0;
  for (const auto& [k, c] : merged) scale = std::max(scale, std::abs(c));
  for (const auto& [k, c] : merged) {
    auto it = merged.find(-k);
    Complex partner = it == merged.end() ? Complex{} : it->second;
    if (std::abs(c - std::conj(partner)) > 1e-12 * std::max(1.0, scale))
      throw Error(ErrorKind::InvalidInput, "stream function is not real (w_{-k} != conj w_k)");
  }
  for (const auto& [k, c] : merged) {
    if (c == Complex{}) continue;
    stream_.emplace_back(k, c);
    radius_ = std::max({radius_, std::abs(k.k1), std::abs(k.k2)});
    if (positive_half(k)) halves_.push_back({double(k.k1), double(k.k2), 2.0 * c.real(), -2.0 * c.imag()});
  }
  max_speed_ = 0.0;
  const int n = 128;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      max_speed_ = std::max(max_speed_, velocity(Vec2(kTwoPi * i / n, kTwoPi * j / n)).norm());
}

Vec2 TrigVelocityField::velocity(const Vec2& x) const {
  double d1 = 0.0, d2 = 0.0;
  for (const auto& h : halves_) {
    double th = h.k1 * x.x() + h.k2 * x.y();
    double g1 = -h.a * std::sin(th) + h.b * std::cos(th);
    d1 += h.k1 * g1;
    d2 += h.k2 * g1;
  }
  return {mean_.x() - d2, mean_.y() + d1};
}

void TrigVelocityField::jet1(const Vec2& x, Vec2& value, Mat2& jacobian) const {
  double d1 = 0.0, d2 = 0.0, d11 = 0.0, d12 = 0.0, d22 = 0.0;
  for (const auto& h : halves_) {
    double th = h.k1 * x.x() + h.k2 * x.y();
    double c = std::cos(th), s = std::sin(th);
    double g1 = -h.a * s + h.b * c;
    double g2 = -(h.a * c + h.b * s);
    d1 += h.k1 * g1;
    d2 += h.k2 * g1;
    d11 += h.k1 * h.k1 * g2;
    d12 += h.k1 * h.k2 * g2;
    d22 += h.k2 * h.k2 * g2;
  }
  value = {mean_.x() - d2, mean_.y() + d1};
  jacobian << -d12, -d22, d11, d12;
}

VelocityJet TrigVelocityField::eval(const Vec2& x, int order) const {
  if (order < 0 || order > 2) throw Error(ErrorKind::InvalidInput, "derivative order must be 0, 1 or 2");
  VelocityJet j;
  if (order == 0) {
    j.value = velocity(x);
    return j;
  }
  jet1(x, j.value, j.jacobian);
  if (order < 2) return j;
  // Third derivatives of psi, indexed by the number of x2 derivatives.
  double t[4] = {0.0, 0.0, 0.0, 0.0};
  for (const auto& h : halves_) {
    double th = h.k1 * x.x() + h.k2 * x.y();
    double g3 = h.a * std::sin(th) - h.b * std::cos(th);
    t[0] += h.k1 * h.k1 * h.k1 * g3;
    t[1] += h.k1 * h.k1 * h.k2 * g3;
    t[2] += h.k1 * h.k2 * h.k2 * g3;
    t[3] += h.k2 * h.k2 * h.k2 * g3;
  }
  // u1 = -d2 psi, u2 = d1 psi.
  j.hessian[0] << -t[1], -t[2], -t[2], -t[3];
  j.hessian[1] << t[0], t[1], t[1], t[2];
  return j;
}

std::array<Complex, 2> TrigVelocityField::velocity_coeff(const ModeIndex& k) const {
  if (k.is_zero()) return {Complex(mean_.x()), Complex(mean_.y())};
  const Complex I(0.0, 1.0);
  for (const auto& [q, c] : stream_)
    if (q == k) return {-I * double(k.k2) * c, I * double(k.k1) * c};
  return {Complex{}, Complex{}};
}

Complex TrigVelocityField::vorticity_coeff(const ModeIndex& k) const {
  for (const auto& [q, c] : stream_)
    if (q == k) return -double(k.norm2()) * c;
  return {};
}

FourierScalarField TrigVelocityField::vorticity() const {
  FourierScalarField w{ModeBox(std::max(radius_, 1))};
  for (const auto& [k, c] : stream_) w.set(k, -double(k.norm2()) * c);
  return w;
}

double TrigVelocityField::max_speed() const { return max_speed_; }

TrigVelocityField velocity_from_stream(const FourierScalarField& psi) {
  if (!psi.is_real(1e-12))
    throw Error(ErrorKind::InvalidInput, "stream function is not real (w_{-k} != conj w_k)");
  return TrigVelocityField(Vec2::Zero(), nonzero_coefficients(psi));
}

TrigVelocityField preset(const std::string& name) {
  if (name == "rigid") return TrigVelocityField(Vec2(1.0, 0.0), {});
  if (name == "shear") return TrigVelocityField(Vec2::Zero(), {{{0, 1}, 0.5}, {{0, -1}, 0.5}});
  if (name == "cellular")
    return TrigVelocityField(Vec2::Zero(), {{{1, 1}, -0.25}, {{-1, -1}, -0.25},
                                            {{1, -1}, 0.25}, {{-1, 1}, 0.25}});
  throw Error(ErrorKind::InvalidInput, "unknown flow preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"rigid", "shear", "cellular"}; }

// ---------------------------------------------------------------------------

const char* to_string(StagnationKind kind) {
  switch (kind) {
    case StagnationKind::Hyperbolic: return "hyperbolic";
    case StagnationKind::Center: return "center";
    case StagnationKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

std::size_t StagnationAnalysis::count(StagnationKind kind) const {
  return std::size_t(std::count_if(points.begin(), points.end(),
                                   [&](const StagnationPoint& p) { return p.kind == kind; }));
}

namespace {

double snap_coordinate(double x) {
  double r = wrap_angle(x);
  if (kTwoPi - r < 1e-11) r = 0.0;
  return r;
}

std::optional<Vec2> newton_zero(const TrigVelocityField& u, Vec2 x, double tol) {
  Vec2 v;
  Mat2 J;
  for (int it = 0; it < 60; ++it) {
    u.jet1(x, v, J);
    if (v.norm() <= tol) return x;
    Vec2 step = J.completeOrthogonalDecomposition().solve(v);
    // Damp long steps so Newton stays local to the seed cell.
    double len = step.norm();
    if (len > 0.5) step *= 0.5 / len;
    x -= step;
  }
  u.jet1(x, v, J);
  if (v.norm() <= tol) return x;
  return std::nullopt;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

StagnationAnalysis find_stagnation_points(const TrigVelocityField& u, int seed_grid, double tol) {
  if (seed_grid < 4) throw Error(ErrorKind::InvalidInput, "seed grid must be at least 4");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidInput, "Newton tolerance must be positive");
  StagnationAnalysis out;
  if (u.is_zero()) throw Error(ErrorKind::InvalidInput, "velocity field is identically zero");

  const int n = seed_grid;
  const double h = kTwoPi / n;
  std::vector<Vec2> node(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) node[std::size_t(i) * n + j] = u.velocity(Vec2(i * h, j * h));
  auto at = [&](int i, int j) -> const Vec2& {
    return node[std::size_t((i + n) % n) * n + std::size_t((j + n) % n)];
  };

  // Newton tolerance is absolute on |u| but cannot be tighter than rounding.
  const double ntol = std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, u.max_speed()));
  const double det_tol = 1e-8 * std::max(1.0, u.max_speed() * u.max_speed());

  std::vector<StagnationPoint> roots;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2* c[4] = {&at(i, j), &at(i + 1, j), &at(i, j + 1), &at(i + 1, j + 1)};
      bool change = true;
      for (int comp = 0; comp < 2; ++comp) {
        double lo = 1e300, hi = -1e300;
        for (auto* p : c) lo = std::min(lo, (*p)(comp)), hi = std::max(hi, (*p)(comp));
        if (lo > 0.0 || hi < 0.0) change = false;
      }
      if (!change) continue;
      Vec2 seeds[5] = {{(i + 0.5) * h, (j + 0.5) * h}, {i * h, j * h}, {(i + 1) * h, j * h},
                       {i * h, (j + 1) * h}, {(i + 1) * h, (j + 1) * h}};
      bool found = false;
      for (const auto& s : seeds) {
        auto r = newton_zero(u, s, ntol);
        if (!r) continue;
        // Only accept roots belonging to this cell's neighbourhood.
        if (torus_distance(*r, seeds[0]) > 1.5 * h) continue;
        StagnationPoint p;
        p.location = TorusPoint(snap_coordinate(r->x()), snap_coordinate(r->y()));
        Vec2 val;
        u.jet1(p.location.vec(), val, p.jacobian);
        p.residual = val.norm();
        double det = p.jacobian.determinant();
        if (det < -det_tol) {
          p.kind = StagnationKind::Hyperbolic;
          p.exponent = std::sqrt(-det);
        } else if (det > det_tol) {
          p.kind = StagnationKind::Center;
        } else {
          p.kind = StagnationKind::Degenerate;
        }
        roots.push_back(p);
        found = true;
        break;
      }
      if (!found) {
        double ms = 1e300;
        for (auto* p : c) ms = std::min(ms, p->norm());
        out.unresolved.push_back({TorusPoint((i + 0.5) * h, (j + 0.5) * h), ms});
      }
    }
  }

  // Isolated points: deduplicate.
  std::vector<StagnationPoint> degenerate;
  for (const auto& p : roots) {
    if (p.kind == StagnationKind::Degenerate) {
      degenerate.push_back(p);
      continue;
    }
    bool dup = false;
    for (const auto& q : out.points)
      if (torus_distance(p.location, q.location) < 1e-7) dup = true;
    if (!dup) out.points.push_back(p);
  }

  // Degenerate roots: connect neighbours into lines, one representative each.
  DisjointSet ds(degenerate.size());
  for (std::size_t a = 0; a < degenerate.size(); ++a)
    for (std::size_t b = a + 1; b < degenerate.size(); ++b)
      if (torus_distance(degenerate[a].location, degenerate[b].location) < 2.5 * h) ds.unite(a, b);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < degenerate.size(); ++a) groups[ds.find(a)].push_back(a);
  for (const auto& [root, members] : groups) {
    std::size_t rep = members.front();
    for (auto m : members) {
      const auto& l = degenerate[m].location;
      const auto& r = degenerate[rep].location;
      if (std::tie(l.x1, l.x2) < std::tie(r.x1, r.x2)) rep = m;
    }
    DegenerateLine line;
    line.representative = degenerate[rep].location;
    line.cells = members.size();
    // Direction of the line: kernel of the (nilpotent) Jacobian when nonzero.
    const Mat2& J = degenerate[rep].jacobian;
    if (J.norm() > 1e-12) {
      Eigen::JacobiSVD<Mat2> svd(J, Eigen::ComputeFullV);
      line.direction = svd.matrixV().col(1);
      if (line.direction.x() < 0 || (line.direction.x() == 0 && line.direction.y() < 0))
        line.direction = -line.direction;
    }
    out.degenerate_lines.push_back(line);
    out.points.push_back(degenerate[rep]);
  }

  std::sort(out.points.begin(), out.points.end(), [](const StagnationPoint& a, const StagnationPoint& b) {
    return std::tie(a.location.x1, a.location.x2) < std::tie(b.location.x1, b.location.x2);
  });
  return out;
}

// ---------------------------------------------------------------------------

void write_mode_coefficients(std::ostream& os,
                             std::span<const std::pair<ModeIndex, Complex>> coefficients) {
  os << "mode-coefficients v1\n";
  auto old = os.precision(17);
  for (const auto& [k, c] : coefficients)
    os << k.k1 << ',' << k.k2 << ',' << c.real() << ',' << c.imag() << '\n';
  os.precision(old);
}

std::vector<std::pair<ModeIndex, Complex>> read_mode_coefficients(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "mode-coefficients v1")
    throw Error(ErrorKind::InvalidInput, "missing 'mode-coefficients v1' header");
  std::vector<std::pair<ModeIndex, Complex>> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int k1, k2;
    double re, im;
    std::string rest;
    if (!(ss >> k1 >> k2 >> re >> im) || (ss >> rest))
      throw Error(ErrorKind::InvalidInput, "malformed coefficient record on line " + std::to_string(lineno));
    if (k1 == 0 && k2 == 0)
      throw Error(ErrorKind::InvalidInput, "(0,0) coefficient on line " + std::to_string(lineno));
    out.push_back({{k1, k2}, {re, im}});
  }
  return out;
}

std::vector<std::pair<ModeIndex, Complex>> nonzero_coefficients(const FourierScalarField& f,
                                                                 double threshold) {
  std::vector<std::pair<ModeIndex, Complex>> out;
  for (std::size_t i = 0; i < f.box().size(); ++i)
    if (std::abs(f.data()[i]) > threshold) out.push_back({f.box().mode(i), f.data()[i]});
  return out;
}

}  // namespace eulerspec::fields
