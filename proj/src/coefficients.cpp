#include "tsig/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace tsig {

namespace {
constexpr double kTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

PiecewiseField PiecewiseField::constant(double length, double value) {
  return {{{0.0, length, value, value}}};
}

double PiecewiseField::eval(double s) const {
  if (pieces.empty()) throw std::domain_error("eval on empty field");
  if (s < pieces.front().s0 - kTol || s > pieces.back().s1 + kTol)
    throw std::domain_error("arc parameter outside field domain");
  // left-limit convention: s belongs to the piece (s0, s1]; the very first
  // point of the domain belongs to the first piece.
  const Piece* active = &pieces.front();
  for (const auto& p : pieces)
    if (s > p.s0 + kTol) active = &p;
  const double w = active->s1 > active->s0
                       ? std::clamp((s - active->s0) / (active->s1 - active->s0), 0.0, 1.0)
                       : 0.0;
  return (1.0 - w) * active->v0 + w * active->v1;
}

double PiecewiseField::min_value() const {
  double m = kInf;
  for (const auto& p : pieces) m = std::min({m, p.v0, p.v1});
  return m;
}

double PiecewiseField::max_value() const {
  double m = -kInf;
  for (const auto& p : pieces) m = std::max({m, p.v0, p.v1});
  return m;
}

double PiecewiseField::min_abs() const {
  double m = kInf;
  for (const auto& p : pieces) {
    if (p.v0 * p.v1 < 0) return 0.0;  // linear piece crosses zero
    m = std::min({m, std::abs(p.v0), std::abs(p.v1)});
  }
  return m;
}

void PiecewiseField::check_cover(double length, const char* name) const {
  if (pieces.empty()) throw admissibility_error(std::string(name) + ": no pieces");
  double s = 0.0;
  for (const auto& p : pieces) {
    if (std::abs(p.s0 - s) > kTol)
      throw admissibility_error(std::string(name) + ": gap or overlap at s = " + std::to_string(p.s0));
    if (p.s1 <= p.s0 + kTol)
      throw admissibility_error(std::string(name) + ": empty piece");
    s = p.s1;
  }
  if (std::abs(s - length) > 1e-8)
    throw admissibility_error(std::string(name) + ": pieces do not cover the screen");
}

PiecewiseField PiecewiseField::patched(double s0, double s1, double factor) const {
  PiecewiseField out;
  for (const auto& p : pieces) {
    auto at = [&](double s) { return p.v0 + (p.v1 - p.v0) * (p.s1 > p.s0 ? (s - p.s0) / (p.s1 - p.s0) : 0.0); };
    const double a = std::max(p.s0, s0), b = std::min(p.s1, s1);
    if (a >= b - kTol) {  // piece entirely outside the patch
      out.pieces.push_back(p);
      continue;
    }
    if (a > p.s0 + kTol) out.pieces.push_back({p.s0, a, p.v0, at(a)});
    out.pieces.push_back({a, b, factor * at(a), factor * at(b)});
    if (b < p.s1 - kTol) out.pieces.push_back({b, p.s1, at(b), p.v1});
  }
  return out;
}

SurfaceCoefficients SurfaceCoefficients::constant(double length, double a, double m, double b_re,
                                                  double b_im) {
  SurfaceCoefficients c;
  c.alpha = PiecewiseField::constant(length, a);
  c.mu = PiecewiseField::constant(length, m);
  c.beta_re = PiecewiseField::constant(length, b_re);
  c.beta_im = PiecewiseField::constant(length, b_im);
  return c;
}

SurfaceCoefficients SurfaceCoefficients::no_screen() {
  SurfaceCoefficients c;
  c.absent = true;
  return c;
}

AdmissibilityReport SurfaceCoefficients::validate(double gamma_length) const {
  AdmissibilityReport r;
  if (absent) {
    r.screen_absent = true;
    return r;
  }
  alpha.check_cover(gamma_length, "alpha");
  mu.check_cover(gamma_length, "mu");
  beta_re.check_cover(gamma_length, "beta_re");
  beta_im.check_cover(gamma_length, "beta_im");
  r.inf_abs_alpha = alpha.min_abs();
  r.inf_mu = mu.min_value();
  r.sup_beta_im = beta_im.max_value();
  if (!(r.inf_abs_alpha > 0)) throw admissibility_error("inf |alpha| = 0");
  if (!(r.inf_mu > 0)) throw admissibility_error("inf mu = " + std::to_string(r.inf_mu));
  if (r.sup_beta_im > kTol)
    throw admissibility_error("Im beta > 0 (sup beta_im = " + std::to_string(r.sup_beta_im) + ")");
  return r;
}

CoeffValues SurfaceCoefficients::eval(double s, double k) const {
  if (absent) return {0.0, 0.0, cplx(0.0, 0.0)};
  CoeffValues v;
  v.alpha = alpha.eval(s);
  v.mu = mu.eval(s);
  v.beta = cplx(beta_re.eval(s), beta_im.eval(s) / k);
  return v;
}

namespace {

nlohmann::json value_json(double v0, double v1) {
  auto one = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  if (v0 == v1) return one(v0);
  return nlohmann::json::array({one(v0), one(v1)});
}

double value_from(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw config_error("coefficient value string must be \"inf\"");
  }
  return j.get<double>();
}

nlohmann::json field_json(const PiecewiseField& f) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : f.pieces)
    arr.push_back({{"s0", p.s0}, {"s1", p.s1}, {"value", value_json(p.v0, p.v1)}});
  return arr;
}

PiecewiseField field_from(const nlohmann::json& arr) {
  PiecewiseField f;
  for (const auto& pj : arr) {
    PiecewiseField::Piece p;
    p.s0 = pj.at("s0").get<double>();
    p.s1 = pj.at("s1").get<double>();
    const auto& v = pj.at("value");
    if (v.is_array()) {
      p.v0 = value_from(v.at(0));
      p.v1 = value_from(v.at(1));
    } else {
      p.v0 = p.v1 = value_from(v);
    }
    f.pieces.push_back(p);
  }
  std::sort(f.pieces.begin(), f.pieces.end(),
            [](const auto& a, const auto& b) { return a.s0 < b.s0; });
  return f;
}

}  // namespace

std::string SurfaceCoefficients::to_json() const {
  nlohmann::json j;
  if (absent) {
    j["absent"] = true;
    return j.dump();
  }
  j["alpha"] = field_json(alpha);
  j["mu"] = field_json(mu);
  j["beta_re"] = field_json(beta_re);
  j["beta_im"] = field_json(beta_im);
  return j.dump();
}

SurfaceCoefficients SurfaceCoefficients::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SurfaceCoefficients c;
  if (j.value("absent", false)) {
    c.absent = true;
    return c;
  }
  c.alpha = field_from(j.at("alpha"));
  c.mu = field_from(j.at("mu"));
  c.beta_re = field_from(j.at("beta_re"));
  c.beta_im = field_from(j.at("beta_im"));
  return c;
}

}  // namespace tsig
