#pragma once
// Pseudo-group elements and their product/discretized actions.
//
// Three transformation groups act on (x, y, u):
//   G1: X = f(x),  Y = y,     U = u / f'(x)
//   G2: X = f(x),  Y = g(y),  U = u / (f'(x) g'(y))
//   G3: X = f(x),  Y = y f'(x) + g(x),  U = u + (y f''(x) + g'(x)) / f'(x)
// with f (and g for G2) an orientation-preserving diffeomorphism of the line.
// The discretized actions replace derivatives of the group parameters by
// forward difference quotients of their samples on the mesh columns/rows, so
// they map mesh functions to mesh functions and compose exactly.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "invfd/common.hpp"
#include "invfd/grid.hpp"

namespace invfd {

// f(x) = alpha x + beta + gamma sin(omega x), constrained so f' > 0, plus a
// closure tree for compositions (chain rule supplies the derivatives).
class Diffeo1D {
 public:
  Diffeo1D(double alpha, double beta, double gamma, double omega)
      : alpha_(alpha), beta_(beta), gamma_(gamma), omega_(omega) {
    if (!(alpha > 0.0))
      throw std::invalid_argument("Diffeo1D: alpha must be positive");
    if (!(std::abs(gamma * omega) < alpha))
      throw std::invalid_argument("Diffeo1D: need |gamma*omega| < alpha");
  }

  static Diffeo1D identity() { return Diffeo1D(1.0, 0.0, 0.0, 1.0); }

  static Diffeo1D compose(const Diffeo1D& outer, const Diffeo1D& inner) {
    Diffeo1D d = identity();
    d.pair_ = std::make_shared<std::pair<Diffeo1D, Diffeo1D>>(outer, inner);
    return d;
  }

  double operator()(double x) const {
    if (pair_) return pair_->first(pair_->second(x));
    return alpha_ * x + beta_ + gamma_ * std::sin(omega_ * x);
  }

  double deriv(double x) const {
    if (pair_) return pair_->first.deriv(pair_->second(x)) * pair_->second.deriv(x);
    return alpha_ + gamma_ * omega_ * std::cos(omega_ * x);
  }

  double deriv2(double x) const {
    if (pair_) {
      const double gx = pair_->second(x);
      const double gp = pair_->second.deriv(x);
      return pair_->first.deriv2(gx) * gp * gp +
             pair_->first.deriv(gx) * pair_->second.deriv2(x);
    }
    return -gamma_ * omega_ * omega_ * std::sin(omega_ * x);
  }

  bool is_primitive() const { return pair_ == nullptr; }
  double alpha() const { return require_primitive(), alpha_; }
  double beta() const { return require_primitive(), beta_; }
  double gamma() const { return require_primitive(), gamma_; }
  double omega() const { return require_primitive(), omega_; }

 private:
  void require_primitive() const {
    if (pair_) throw std::logic_error("Diffeo1D: composed element has no parameters");
  }

  double alpha_, beta_, gamma_, omega_;
  std::shared_ptr<std::pair<Diffeo1D, Diffeo1D>> pair_;
};

// Cubic polynomial plus one sine term; the shift part of a G3 element.
class SmoothFn {
 public:
  SmoothFn(double p0, double p1, double p2, double p3, double amp = 0.0,
           double freq = 1.0)
      : p0_(p0), p1_(p1), p2_(p2), p3_(p3), amp_(amp), freq_(freq) {}

  double operator()(double x) const {
    return p0_ + x * (p1_ + x * (p2_ + x * p3_)) + amp_ * std::sin(freq_ * x);
  }
  double deriv(double x) const {
    return p1_ + x * (2.0 * p2_ + 3.0 * p3_ * x) + amp_ * freq_ * std::cos(freq_ * x);
  }

  double p0() const { return p0_; }
  double p1() const { return p1_; }
  double p2() const { return p2_; }
  double p3() const { return p3_; }
  double amp() const { return amp_; }
  double freq() const { return freq_; }

 private:
  double p0_, p1_, p2_, p3_, amp_, freq_;
};

enum class GroupKind { G1, G2, G3 };

struct GroupElementG1 {
  Diffeo1D f;
  std::uint64_t seed = 0;
};

struct GroupElementG2 {
  Diffeo1D f;
  Diffeo1D g;
  std::uint64_t seed = 0;
};

inline GroupElementG1 compose_g1(const GroupElementG1& second,
                                 const GroupElementG1& first) {
  return {Diffeo1D::compose(second.f, first.f), 0};
}

inline GroupElementG2 compose_g2(const GroupElementG2& second,
                                 const GroupElementG2& first) {
  return {Diffeo1D::compose(second.f, first.f),
          Diffeo1D::compose(second.g, first.g), 0};
}

// A G3 element.  Compositions are kept as a tree because the discretized
// shift part of a product depends on the mesh: on columns x_m,
//   g_c(x_m) = (Delta(f2 o f1)_m / Delta f1_m) g1(x_m) + g2(f1(x_m)),
// which needs x_{m+1} and therefore cannot be reduced to a plain SmoothFn.
class GroupElementG3 {
 public:
  GroupElementG3(Diffeo1D f, SmoothFn g, std::uint64_t seed = 0)
      : node_(std::make_shared<Node>(Node{std::move(f), std::move(g), nullptr,
                                          nullptr})),
        seed_(seed) {}

  static GroupElementG3 compose(const GroupElementG3& second,
                                const GroupElementG3& first) {
    GroupElementG3 el(Diffeo1D::identity(), SmoothFn(0, 0, 0, 0));
    el.node_ = std::make_shared<Node>(
        Node{Diffeo1D::identity(), SmoothFn(0, 0, 0, 0), second.node_, first.node_});
    return el;
  }

  double f_eval(double x) const { return f_eval(*node_, x); }

  // Sample of the discretized shift part on column m of xs; needs x_{m+1}.
  double g_sample(const std::vector<double>& xs, std::size_t m) const {
    if (m + 1 >= xs.size())
      throw std::invalid_argument("GroupElementG3::g_sample: needs column m+1");
    return g_sample(*node_, xs, m);
  }

  bool is_primitive() const { return node_->second == nullptr; }
  const Diffeo1D& f() const {
    if (!is_primitive())
      throw std::logic_error("GroupElementG3: composed element has no f part");
    return node_->f;
  }
  const SmoothFn& g() const {
    if (!is_primitive())
      throw std::logic_error("GroupElementG3: composed element has no g part");
    return node_->g;
  }
  std::uint64_t seed() const { return seed_; }

 private:
  struct Node {
    Diffeo1D f;
    SmoothFn g;
    std::shared_ptr<Node> second, first;  // both set iff composed
  };

  static double f_eval(const Node& node, double x) {
    if (node.second) return f_eval(*node.second, f_eval(*node.first, x));
    return node.f(x);
  }

  static double g_sample(const Node& node, const std::vector<double>& xs,
                         std::size_t m) {
    if (!node.second) return node.g(xs[m]);
    std::vector<double> mid(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) mid[i] = f_eval(*node.first, xs[i]);
    const double quot = (f_eval(*node.second, mid[m + 1]) - f_eval(*node.second, mid[m])) /
                        (mid[m + 1] - mid[m]);
    return quot * g_sample(*node.first, xs, m) + g_sample(*node.second, mid, m);
  }

  std::shared_ptr<Node> node_;
  std::uint64_t seed_ = 0;
};

struct TransformedRect {
  RectMesh mesh;
  ScalarField field;
};

struct TransformedGeneral {
  GeneralMesh mesh;
  ScalarField field;
};

struct ProductPoint {
  double x, y, u;
};

// Product (continuous) G1 action on a single point, using the analytic f'.
inline ProductPoint act_product_g1(const GroupElementG1& el, const ProductPoint& p) {
  return {el.f(p.x), p.y, p.u / el.f.deriv(p.x)};
}

// Product action on a whole rectangular mesh function.
inline TransformedRect act_product_g1(const GroupElementG1& el, const RectMesh& mesh,
                                      const ScalarField& u) {
  if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
    throw std::invalid_argument("act_product_g1: field/mesh size mismatch");
  std::vector<double> xs(mesh.nx());
  for (std::size_t m = 0; m < mesh.nx(); ++m) xs[m] = el.f(mesh.x(m));
  ScalarField v(u.nx(), u.ny());
  for (std::size_t m = 0; m < u.nx(); ++m) {
    const double fp = el.f.deriv(mesh.x(m));
    for (std::size_t n = 0; n < u.ny(); ++n) v.at(m, n) = u.at(m, n) / fp;
  }
  return {RectMesh(std::move(xs), mesh.ys()), std::move(v)};
}

// Discretized G1 action: f' is replaced by the forward quotient of the
// f samples, so the last column of the output would need x_{M}; the
// transformed grid loses one column.
inline TransformedRect act_discrete_g1(const GroupElementG1& el, const RectMesh& mesh,
                                       const ScalarField& u) {
  if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
    throw std::invalid_argument("act_discrete_g1: field/mesh size mismatch");
  if (mesh.nx() < 3)
    throw std::invalid_argument("act_discrete_g1: need at least three columns");
  const std::size_t M = mesh.nx();
  std::vector<double> fx(M);
  for (std::size_t m = 0; m < M; ++m) fx[m] = el.f(mesh.x(m));
  std::vector<double> xs(fx.begin(), fx.end() - 1);
  ScalarField v(M - 1, u.ny());
  for (std::size_t m = 0; m + 1 < M; ++m) {
    const double quot = (fx[m + 1] - fx[m]) / mesh.dx(m);
    for (std::size_t n = 0; n < u.ny(); ++n) v.at(m, n) = u.at(m, n) / quot;
  }
  return {RectMesh(std::move(xs), mesh.ys()), std::move(v)};
}

// Discretized G2 action; loses one column and one row.
inline TransformedRect act_discrete_g2(const GroupElementG2& el, const RectMesh& mesh,
                                       const ScalarField& u) {
  if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
    throw std::invalid_argument("act_discrete_g2: field/mesh size mismatch");
  if (mesh.nx() < 3 || mesh.ny() < 3)
    throw std::invalid_argument("act_discrete_g2: need at least three columns/rows");
  const std::size_t M = mesh.nx(), N = mesh.ny();
  std::vector<double> fx(M), gy(N);
  for (std::size_t m = 0; m < M; ++m) fx[m] = el.f(mesh.x(m));
  for (std::size_t n = 0; n < N; ++n) gy[n] = el.g(mesh.y(n));
  ScalarField v(M - 1, N - 1);
  for (std::size_t m = 0; m + 1 < M; ++m) {
    const double fq = (fx[m + 1] - fx[m]) / mesh.dx(m);
    for (std::size_t n = 0; n + 1 < N; ++n) {
      const double gq = (gy[n + 1] - gy[n]) / mesh.dy(n);
      v.at(m, n) = u.at(m, n) / (fq * gq);
    }
  }
  std::vector<double> xs(fx.begin(), fx.end() - 1);
  std::vector<double> ys(gy.begin(), gy.end() - 1);
  return {RectMesh(std::move(xs), std::move(ys)), std::move(v)};
}

// Discretized G3 action.  With F_m = Delta f_m / Delta x_m and
// e_{m,n} = y_{m,n} F_m + g_m, the image is
//   X_m = f(x_m),  Y_{m,n} = y_{m,n} F_m + g_m,
//   U_{m,n} = u_{m,n} + Delta e_{m,n}/Delta f_m - Delta y_{m,n}/Delta x_m.
// Delta e needs F_{m+1}, so the output loses two columns.
inline TransformedGeneral act_discrete_g3(const GroupElementG3& el,
                                          const GeneralMesh& mesh,
                                          const ScalarField& u) {
  if (u.nx() != mesh.nx())
    throw std::invalid_argument("act_discrete_g3: field/mesh size mismatch");
  if (mesh.nx() < 4)
    throw std::invalid_argument("act_discrete_g3: need at least four columns");
  const std::size_t M = mesh.nx(), N = u.ny();
  std::vector<double> fs(M), gs(M - 1), F(M - 1);
  for (std::size_t m = 0; m < M; ++m) fs[m] = el.f_eval(mesh.x(m));
  for (std::size_t m = 0; m + 1 < M; ++m) {
    gs[m] = el.g_sample(mesh.xs(), m);
    F[m] = (fs[m + 1] - fs[m]) / mesh.dx(m);
  }
  std::vector<double> xs(M - 2), slope(M - 2), offset(M - 2);
  for (std::size_t m = 0; m + 2 < M; ++m) {
    xs[m] = fs[m];
    slope[m] = mesh.slope(m) * F[m];
    offset[m] = mesh.offset(m) * F[m] + gs[m];
  }
  ScalarField v(M - 2, N);
  for (std::size_t m = 0; m + 2 < M; ++m) {
    for (std::size_t n = 0; n < N; ++n) {
      const double e0 = mesh.y(m, n) * F[m] + gs[m];
      const double e1 = mesh.y(m + 1, n) * F[m + 1] + gs[m + 1];
      const double dy = mesh.y(m + 1, n) - mesh.y(m, n);
      // Group the increment so it cancels exactly when F = 1 and g = 0: the
      // identity element then acts bitwise trivially on any field.
      v.at(m, n) =
          u.at(m, n) + ((e1 - e0) / (fs[m + 1] - fs[m]) - dy / mesh.dx(m));
    }
  }
  return {GeneralMesh(std::move(xs), std::move(slope), std::move(offset)),
          std::move(v)};
}

// Scaling u -> lambda u; x and y are untouched.  Used as the control action
// that the product (non-discretized) G1 action cannot distinguish.
inline ScalarField act_dilation(double lambda, const ScalarField& u) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("act_dilation: lambda must be positive");
  ScalarField v = u;
  for (std::size_t m = 0; m < u.nx(); ++m)
    for (std::size_t n = 0; n < u.ny(); ++n) v.at(m, n) = lambda * u.at(m, n);
  return v;
}

namespace detail {

inline Diffeo1D random_diffeo(Rng& rng) {
  const double alpha = rng.uniform(0.5, 2.0);
  const double beta = rng.uniform(-1.0, 1.0);
  const double omega = rng.uniform(0.5, 3.0);
  const double gamma = (0.5 * alpha / omega) * rng.uniform(-1.0, 1.0);
  Diffeo1D f(alpha, beta, gamma, omega);
  // |gamma*omega| <= alpha/2 already forces f' >= alpha/2 everywhere; probe a
  // wide interval anyway so the sampling contract is checked, not assumed.
  for (int i = 0; i < 1000; ++i) {
    const double x = -10.0 + 20.0 * static_cast<double>(i) / 999.0;
    if (!(f.deriv(x) > 0.0))
      throw std::logic_error("random_diffeo: sampled f is not increasing");
  }
  return f;
}

inline SmoothFn random_shift(Rng& rng) {
  const double p0 = rng.uniform(-0.5, 0.5);
  const double p1 = rng.uniform(-0.5, 0.5);
  const double p2 = rng.uniform(-0.3, 0.3);
  const double p3 = rng.uniform(-0.1, 0.1);
  const double amp = rng.uniform(-0.4, 0.4);
  const double freq = rng.uniform(0.5, 2.5);
  return SmoothFn(p0, p1, p2, p3, amp, freq);
}

}  // namespace detail

inline GroupElementG1 random_element_g1(std::uint64_t seed) {
  Rng rng(seed);
  return {detail::random_diffeo(rng), seed};
}

inline GroupElementG2 random_element_g2(std::uint64_t seed) {
  Rng rng(seed);
  Diffeo1D f = detail::random_diffeo(rng);
  Diffeo1D g = detail::random_diffeo(rng);
  return {std::move(f), std::move(g), seed};
}

inline GroupElementG3 random_element_g3(std::uint64_t seed) {
  Rng rng(seed);
  Diffeo1D f = detail::random_diffeo(rng);
  SmoothFn g = detail::random_shift(rng);
  return GroupElementG3(std::move(f), std::move(g), seed);
}

// --- plain-text records -----------------------------------------------------
//
// One "key = value" pair per line; doubles are printed with 17 significant
// digits so records round-trip exactly.  Only primitive elements serialize.

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void append_diffeo(std::string& out, const std::string& prefix,
                          const Diffeo1D& f) {
  out += prefix + ".alpha = " + format_double(f.alpha()) + "\n";
  out += prefix + ".beta = " + format_double(f.beta()) + "\n";
  out += prefix + ".gamma = " + format_double(f.gamma()) + "\n";
  out += prefix + ".omega = " + format_double(f.omega()) + "\n";
}

inline Result<std::map<std::string, std::string>> parse_record_lines(
    const std::string& text) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    const auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (strip(line).empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      return Result<std::map<std::string, std::string>>::fail(
          "record line without '=': " + line);
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return Result<std::map<std::string, std::string>>::ok(std::move(kv));
}

inline Result<double> record_double(const std::map<std::string, std::string>& kv,
                                    const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) return Result<double>::fail("record missing key: " + key);
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str())
    return Result<double>::fail("record value not a number for key: " + key);
  return Result<double>::ok(v);
}

inline Result<Diffeo1D> record_diffeo(const std::map<std::string, std::string>& kv,
                                      const std::string& prefix) {
  const auto a = record_double(kv, prefix + ".alpha");
  const auto b = record_double(kv, prefix + ".beta");
  const auto c = record_double(kv, prefix + ".gamma");
  const auto w = record_double(kv, prefix + ".omega");
  for (const auto* r : {&a, &b, &c, &w})
    if (!*r) return Result<Diffeo1D>::fail(r->error());
  try {
    return Result<Diffeo1D>::ok(Diffeo1D(a.value(), b.value(), c.value(), w.value()));
  } catch (const std::invalid_argument& e) {
    return Result<Diffeo1D>::fail(e.what());
  }
}

inline Result<std::uint64_t> record_seed(const std::map<std::string, std::string>& kv) {
  const auto it = kv.find("seed");
  if (it == kv.end()) return Result<std::uint64_t>::fail("record missing key: seed");
  std::uint64_t seed = 0;
  if (std::sscanf(it->second.c_str(), "%" SCNu64, &seed) != 1)
    return Result<std::uint64_t>::fail("record value not an integer for key: seed");
  return Result<std::uint64_t>::ok(seed);
}

}  // namespace detail

inline std::string to_record(const GroupElementG1& el) {
  std::string out = "kind = g1\nseed = " + std::to_string(el.seed) + "\n";
  detail::append_diffeo(out, "f", el.f);
  return out;
}

inline std::string to_record(const GroupElementG2& el) {
  std::string out = "kind = g2\nseed = " + std::to_string(el.seed) + "\n";
  detail::append_diffeo(out, "f", el.f);
  detail::append_diffeo(out, "g", el.g);
  return out;
}

inline std::string to_record(const GroupElementG3& el) {
  std::string out = "kind = g3\nseed = " + std::to_string(el.seed()) + "\n";
  detail::append_diffeo(out, "f", el.f());
  const SmoothFn& g = el.g();
  out += "g.p0 = " + detail::format_double(g.p0()) + "\n";
  out += "g.p1 = " + detail::format_double(g.p1()) + "\n";
  out += "g.p2 = " + detail::format_double(g.p2()) + "\n";
  out += "g.p3 = " + detail::format_double(g.p3()) + "\n";
  out += "g.amp = " + detail::format_double(g.amp()) + "\n";
  out += "g.freq = " + detail::format_double(g.freq()) + "\n";
  return out;
}

inline Result<GroupElementG1> parse_g1(const std::string& text) {
  const auto kv = detail::parse_record_lines(text);
  if (!kv) return Result<GroupElementG1>::fail(kv.error());
  if (kv.value().count("kind") == 0 || kv.value().at("kind") != "g1")
    return Result<GroupElementG1>::fail("record kind is not g1");
  const auto f = detail::record_diffeo(kv.value(), "f");
  if (!f) return Result<GroupElementG1>::fail(f.error());
  const auto seed = detail::record_seed(kv.value());
  if (!seed) return Result<GroupElementG1>::fail(seed.error());
  return Result<GroupElementG1>::ok({f.value(), seed.value()});
}

inline Result<GroupElementG2> parse_g2(const std::string& text) {
  const auto kv = detail::parse_record_lines(text);
  if (!kv) return Result<GroupElementG2>::fail(kv.error());
  if (kv.value().count("kind") == 0 || kv.value().at("kind") != "g2")
    return Result<GroupElementG2>::fail("record kind is not g2");
  const auto f = detail::record_diffeo(kv.value(), "f");
  if (!f) return Result<GroupElementG2>::fail(f.error());
  const auto g = detail::record_diffeo(kv.value(), "g");
  if (!g) return Result<GroupElementG2>::fail(g.error());
  const auto seed = detail::record_seed(kv.value());
  if (!seed) return Result<GroupElementG2>::fail(seed.error());
  return Result<GroupElementG2>::ok({f.value(), g.value(), seed.value()});
}

inline Result<GroupElementG3> parse_g3(const std::string& text) {
  const auto kv = detail::parse_record_lines(text);
  if (!kv) return Result<GroupElementG3>::fail(kv.error());
  if (kv.value().count("kind") == 0 || kv.value().at("kind") != "g3")
    return Result<GroupElementG3>::fail("record kind is not g3");
  const auto f = detail::record_diffeo(kv.value(), "f");
  if (!f) return Result<GroupElementG3>::fail(f.error());
  double p[6];
  const char* keys[6] = {"g.p0", "g.p1", "g.p2", "g.p3", "g.amp", "g.freq"};
  for (int i = 0; i < 6; ++i) {
    const auto r = detail::record_double(kv.value(), keys[i]);
    if (!r) return Result<GroupElementG3>::fail(r.error());
    p[i] = r.value();
  }
  const auto seed = detail::record_seed(kv.value());
  if (!seed) return Result<GroupElementG3>::fail(seed.error());
  return Result<GroupElementG3>::ok(GroupElementG3(
      f.value(), SmoothFn(p[0], p[1], p[2], p[3], p[4], p[5]), seed.value()));
}

}  // namespace invfd
