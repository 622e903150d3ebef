#include "gvm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "gvm/error.hpp"

namespace gvm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kInf = std::numeric_limits<double>::infinity();

double rect(double x) {
  const double ax = std::abs(x);
  if (ax < 0.5) return 1.0;
  if (ax == 0.5) return 0.5;
  return 0.0;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

double prototype_psd(Prototype p, double x) {
  switch (p) {
    case Prototype::Gaussian:
      return std::exp(-x * x);
    case Prototype::Rect:
      return rect(x);
    case Prototype::Dirac:
      break;
  }
  return 0.0;
}

// Standard normal quantile and density, used by the Gaussian prototype.
double std_normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double std_normal_pdf(double z) {
  if (!std::isfinite(z)) return 0.0;
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

double z_times_pdf(double z) {
  if (!std::isfinite(z)) return 0.0;
  return z * std_normal_pdf(z);
}

void check_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("probability outside [0, 1]: " + std::to_string(p));
  }
}

double cell_width(std::span<const double> freqs, std::size_t j) {
  const std::size_t n = freqs.size();
  if (n < 2) return 1.0;
  if (j == 0) return freqs[1] - freqs[0];
  if (j + 1 == n) return freqs[n - 1] - freqs[n - 2];
  return 0.5 * (freqs[j + 1] - freqs[j - 1]);
}

// Adds an atom of the given mass at `where` to the nearest supplied frequency.
void deposit_atom(std::span<const double> freqs, double where, double mass, std::vector<double>& out) {
  if (freqs.empty() || mass == 0.0) return;
  std::size_t best = 0;
  for (std::size_t j = 1; j < freqs.size(); ++j) {
    if (std::abs(freqs[j] - where) < std::abs(freqs[best] - where)) best = j;
  }
  const double w = cell_width(freqs, best);
  if (!(w > 0.0) || std::abs(freqs[best] - where) > 0.5 * w) return;
  out[best] += mass / w;
}

void validate(const KernelFamily& family, const std::vector<Component>& comps, double noise) {
  if (family.component_count < 1) throw ParameterDomainError("component_count must be >= 1");
  if (!is_mixture(family.id) && family.component_count != 1) {
    throw ParameterDomainError(std::string(to_string(family.id)) + " has exactly one component");
  }
  if (comps.size() != family.component_count) {
    throw ParameterDomainError("component list does not match component_count");
  }
  if (!(std::isfinite(noise) && noise >= 0.0)) throw ParameterDomainError("noise_variance must be >= 0");
  for (const auto& c : comps) {
    if (!std::isfinite(c.magnitude) || !std::isfinite(c.location) || !std::isfinite(c.scale)) {
      throw ParameterDomainError("non-finite kernel parameter");
    }
    if (c.magnitude < 0.0) throw ParameterDomainError("magnitude must be >= 0");
    if (c.location < 0.0) throw ParameterDomainError("location must be >= 0");
    if (family.id != FamilyId::Cosine && !(c.scale > 0.0)) {
      throw ParameterDomainError("scale must be > 0");
    }
  }
}

}  // namespace

std::string_view to_string(FamilyId id) {
  switch (id) {
    case FamilyId::ExpCos: return "ExpCos";
    case FamilyId::Sinc: return "Sinc";
    case FamilyId::Cosine: return "Cosine";
    case FamilyId::SpectralMixtureSE: return "SpectralMixtureSE";
    case FamilyId::SpectralMixtureRect: return "SpectralMixtureRect";
    case FamilyId::IsotropicSE: return "IsotropicSE";
  }
  return "?";
}

FamilyId parse_family(std::string_view name) {
  for (auto id : {FamilyId::ExpCos, FamilyId::Sinc, FamilyId::Cosine, FamilyId::SpectralMixtureSE,
                  FamilyId::SpectralMixtureRect, FamilyId::IsotropicSE}) {
    if (name == to_string(id)) return id;
  }
  throw SchemaError("unknown kernel family '" + std::string(name) + "'");
}

std::string_view to_string(Prototype p) {
  switch (p) {
    case Prototype::Gaussian: return "Gaussian";
    case Prototype::Rect: return "Rect";
    case Prototype::Dirac: return "Dirac";
  }
  return "?";
}

Prototype prototype_of(FamilyId id) {
  switch (id) {
    case FamilyId::ExpCos:
    case FamilyId::SpectralMixtureSE:
    case FamilyId::IsotropicSE:
      return Prototype::Gaussian;
    case FamilyId::Sinc:
    case FamilyId::SpectralMixtureRect:
      return Prototype::Rect;
    case FamilyId::Cosine:
      return Prototype::Dirac;
  }
  return Prototype::Gaussian;
}

bool is_location_scale(FamilyId id) { return id == FamilyId::ExpCos || id == FamilyId::Sinc; }

bool is_mixture(FamilyId id) {
  return id == FamilyId::SpectralMixtureSE || id == FamilyId::SpectralMixtureRect;
}

std::size_t params_per_component(FamilyId id) {
  return (id == FamilyId::Cosine || id == FamilyId::IsotropicSE) ? 2 : 3;
}

KernelModel::KernelModel(KernelFamily family, std::vector<Component> components, double noise_variance)
    : family_(family), components_(std::move(components)), noise_variance_(noise_variance) {
  validate(family_, components_, noise_variance_);
  for (auto& c : components_) {
    if (family_.id == FamilyId::IsotropicSE) c.location = 0.0;
    if (family_.id == FamilyId::Cosine) c.scale = 1.0;
  }
}

KernelModel KernelModel::from_theta(FamilyId id, std::span<const double> theta, double noise_variance) {
  const std::size_t per = params_per_component(id);
  if (theta.empty() || theta.size() % per != 0) {
    throw ParameterDomainError("theta length " + std::to_string(theta.size()) + " does not fit family " +
                               std::string(to_string(id)));
  }
  std::vector<Component> comps(theta.size() / per);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double* t = theta.data() + i * per;
    switch (id) {
      case FamilyId::Cosine:
        comps[i] = {t[0], t[1], 1.0};
        break;
      case FamilyId::IsotropicSE:
        comps[i] = {t[0], 0.0, t[1]};
        break;
      default:
        comps[i] = {t[0], t[1], t[2]};
    }
  }
  return KernelModel(KernelFamily{id, comps.size()}, comps, noise_variance);
}

std::vector<double> KernelModel::theta() const {
  std::vector<double> out;
  out.reserve(components_.size() * params_per_component(family_.id));
  for (const auto& c : components_) {
    switch (family_.id) {
      case FamilyId::Cosine:
        out.insert(out.end(), {c.magnitude, c.location});
        break;
      case FamilyId::IsotropicSE:
        out.insert(out.end(), {c.magnitude, c.scale});
        break;
      default:
        out.insert(out.end(), {c.magnitude, c.location, c.scale});
    }
  }
  return out;
}

double KernelModel::power() const {
  double p = 0.0;
  for (const auto& c : components_) p += component_power(family_.id, c);
  return p;
}

KernelModel KernelModel::with_noise(double noise_variance) const {
  return KernelModel(family_, components_, noise_variance);
}

double component_power(FamilyId id, const Component& c) {
  switch (prototype_of(id)) {
    case Prototype::Gaussian:
      return id == FamilyId::IsotropicSE ? c.magnitude : c.magnitude * kSqrtPi * c.scale;
    case Prototype::Rect:
      return c.magnitude * c.scale;
    case Prototype::Dirac:
      return c.magnitude;
  }
  return 0.0;
}

double magnitude_for_power(FamilyId id, double power, double scale) {
  Component unit{1.0, 0.0, scale};
  const double per_unit = component_power(id, unit);
  return per_unit > 0.0 ? power / per_unit : 0.0;
}

double eval_kernel(const KernelModel& model, double lag) {
  const FamilyId id = model.family().id;
  double k = 0.0;
  for (const auto& c : model.components()) {
    switch (id) {
      case FamilyId::ExpCos:
      case FamilyId::SpectralMixtureSE: {
        const double st = c.scale * lag;
        k += c.magnitude * c.scale * kSqrtPi * std::exp(-kPi * kPi * st * st) *
             std::cos(2.0 * kPi * c.location * lag);
        break;
      }
      case FamilyId::Sinc:
      case FamilyId::SpectralMixtureRect:
        k += c.magnitude * c.scale * sinc(c.scale * lag) * std::cos(2.0 * kPi * c.location * lag);
        break;
      case FamilyId::Cosine:
        k += c.magnitude * std::cos(2.0 * kPi * c.location * lag);
        break;
      case FamilyId::IsotropicSE:
        k += c.magnitude * std::exp(-0.5 * lag * lag / (c.scale * c.scale));
        break;
    }
  }
  if (lag == 0.0) k += model.noise_variance();
  return k;
}

std::vector<double> eval_kernel(const KernelModel& model, std::span<const double> lags) {
  std::vector<double> out(lags.size());
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!std::isfinite(lags[i])) throw DomainError("non-finite lag");
    out[i] = eval_kernel(model, lags[i]);
  }
  return out;
}

namespace {

// Table-form bump a * p((xi - mu) / sigma); for IsotropicSE the even Fourier
// transform of its 1-D kernel.
double bump(FamilyId id, const Component& c, double xi) {
  if (id == FamilyId::IsotropicSE) {
    const double l = c.scale;
    return c.magnitude * l * std::sqrt(2.0 * kPi) * std::exp(-2.0 * kPi * kPi * l * l * xi * xi);
  }
  return c.magnitude * prototype_psd(prototype_of(id), (xi - c.location) / c.scale);
}

void check_freqs(std::span<const double> freqs) {
  for (double f : freqs) {
    if (!std::isfinite(f)) throw DomainError("non-finite frequency");
  }
}

}  // namespace

std::vector<double> eval_psd(const KernelModel& model, std::span<const double> freqs) {
  check_freqs(freqs);
  const FamilyId id = model.family().id;
  std::vector<double> out(freqs.size(), 0.0);
  if (id == FamilyId::Cosine) {
    for (const auto& c : model.components()) deposit_atom(freqs, c.location, c.magnitude, out);
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      if (freqs[j] < 0.0) out[j] = 0.0;
    }
    return out;
  }
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    const double xi = freqs[j];
    if (xi < 0.0) continue;
    double s = 0.0;
    for (const auto& c : model.components()) {
      s += bump(id, c, xi) + bump(id, c, -xi);
    }
    out[j] = s;
  }
  return out;
}

std::vector<double> eval_psd_two_sided(const KernelModel& model, std::span<const double> freqs) {
  check_freqs(freqs);
  const FamilyId id = model.family().id;
  std::vector<double> out(freqs.size(), 0.0);
  if (id == FamilyId::Cosine) {
    for (const auto& c : model.components()) {
      deposit_atom(freqs, c.location, 0.5 * c.magnitude, out);
      deposit_atom(freqs, -c.location, 0.5 * c.magnitude, out);
    }
    return out;
  }
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    double s = 0.0;
    for (const auto& c : model.components()) {
      s += 0.5 * (bump(id, c, freqs[j]) + bump(id, c, -freqs[j]));
    }
    out[j] = s;
  }
  return out;
}

double quantile_of_prototype(Prototype proto, double p) {
  check_prob(p);
  switch (proto) {
    case Prototype::Gaussian:
      // exp(-x^2) normalised is N(0, 1/2).
      return std_normal_quantile(p) / std::numbers::sqrt2;
    case Prototype::Rect:
      return p - 0.5;
    case Prototype::Dirac:
      return 0.0;
  }
  return 0.0;
}

std::vector<double> quantile_of_prototype(Prototype proto, std::span<const double> probs) {
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = quantile_of_prototype(proto, probs[i]);
  return out;
}

double prototype_quantile_integral(Prototype proto, double a, double b) {
  check_prob(a);
  check_prob(b);
  switch (proto) {
    case Prototype::Gaussian: {
      const double za = std_normal_quantile(a);
      const double zb = std_normal_quantile(b);
      return -(std_normal_pdf(zb) - std_normal_pdf(za)) / std::numbers::sqrt2;
    }
    case Prototype::Rect: {
      const double ua = a - 0.5;
      const double ub = b - 0.5;
      return 0.5 * (ub * ub - ua * ua);
    }
    case Prototype::Dirac:
      return 0.0;
  }
  return 0.0;
}

double prototype_quantile_sq_integral(Prototype proto, double a, double b) {
  check_prob(a);
  check_prob(b);
  switch (proto) {
    case Prototype::Gaussian: {
      const double za = std_normal_quantile(a);
      const double zb = std_normal_quantile(b);
      return 0.5 * ((b - a) - (z_times_pdf(zb) - z_times_pdf(za)));
    }
    case Prototype::Rect: {
      const double ua = a - 0.5;
      const double ub = b - 0.5;
      return (ub * ub * ub - ua * ua * ua) / 3.0;
    }
    case Prototype::Dirac:
      return 0.0;
  }
  return 0.0;
}

double prototype_second_moment(Prototype proto) {
  switch (proto) {
    case Prototype::Gaussian: return 0.5;
    case Prototype::Rect: return 1.0 / 12.0;
    case Prototype::Dirac: return 0.0;
  }
  return 0.0;
}

TimeDomainModel params_freq_to_time(const KernelModel& model) {
  TimeDomainModel out{model.family(), {}, model.noise_variance()};
  const FamilyId id = model.family().id;
  for (const auto& c : model.components()) {
    TimeDomainComponent t;
    t.variance = component_power(id, c);
    t.frequency = c.location;
    switch (prototype_of(id)) {
      case Prototype::Gaussian:
        t.lengthscale = id == FamilyId::IsotropicSE ? c.scale : 1.0 / (std::numbers::sqrt2 * kPi * c.scale);
        break;
      case Prototype::Rect:
        t.lengthscale = 1.0 / c.scale;
        break;
      case Prototype::Dirac:
        t.lengthscale = 0.0;
        break;
    }
    out.components.push_back(t);
  }
  return out;
}

KernelModel params_time_to_freq(const TimeDomainModel& model) {
  const FamilyId id = model.family.id;
  std::vector<Component> comps;
  for (const auto& t : model.components) {
    Component c;
    c.location = t.frequency;
    switch (prototype_of(id)) {
      case Prototype::Gaussian:
        if (id == FamilyId::IsotropicSE) {
          c.scale = t.lengthscale;
          c.location = 0.0;
        } else {
          if (!(t.lengthscale > 0.0)) throw ParameterDomainError("lengthscale must be > 0");
          c.scale = 1.0 / (std::numbers::sqrt2 * kPi * t.lengthscale);
        }
        break;
      case Prototype::Rect:
        if (!(t.lengthscale > 0.0)) throw ParameterDomainError("lengthscale must be > 0");
        c.scale = 1.0 / t.lengthscale;
        break;
      case Prototype::Dirac:
        c.scale = 1.0;
        break;
    }
    c.magnitude = magnitude_for_power(id, t.variance, c.scale);
    comps.push_back(c);
  }
  return KernelModel(model.family, std::move(comps), model.noise_variance);
}

}  // namespace gvm
