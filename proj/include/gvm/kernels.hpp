#pragma once

// Stationary kernel / PSD families.
//
// Every location-scale component is written in its un-normalised frequency form
//
//     S(xi) = a * p((xi - mu) / sigma)
//
// with prototype p(x) = exp(-x^2) (square-exponential PSD, Exp-cos kernel) or
// p(x) = rect(x) (rectangular PSD, Sinc kernel). Its Fourier partner is
//
//     K(tau) = a * sigma * k01(sigma * tau) * cos(2 pi mu tau),
//
// k01(t) = sqrt(pi) exp(-pi^2 t^2) or sinc(t). The power K(0) therefore equals
// a * sigma * sqrt(pi) (Gaussian) or a * sigma (rect).
//
// PSDs are reported one-sided: eval_psd(xi) = S(xi) + S(-xi) for xi >= 0 and 0 for
// xi < 0, so that its integral over the real line equals K(0). The even two-sided
// density, the exact Fourier pair of eval_kernel, is eval_psd_two_sided.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gvm {

enum class FamilyId { ExpCos, Sinc, Cosine, SpectralMixtureSE, SpectralMixtureRect, IsotropicSE };

enum class Prototype { Gaussian, Rect, Dirac };

std::string_view to_string(FamilyId id);
FamilyId parse_family(std::string_view name);  // throws SchemaError
std::string_view to_string(Prototype p);

/// Prototype of the frequency-domain shape of a family.
Prototype prototype_of(FamilyId id);
/// ExpCos and Sinc: single-bump PSDs of location-scale type.
bool is_location_scale(FamilyId id);
bool is_mixture(FamilyId id);
/// Number of free entries per component in the theta vector.
std::size_t params_per_component(FamilyId id);

struct KernelFamily {
  FamilyId id = FamilyId::ExpCos;
  std::size_t component_count = 1;

  Prototype prototype() const { return prototype_of(id); }
  bool operator==(const KernelFamily&) const = default;
};

/// One spectral component. For IsotropicSE, `scale` is the lengthscale l of
/// a * exp(-r^2 / (2 l^2)) and `location` is unused (0). For Cosine, `scale` is unused.
struct Component {
  double magnitude = 1.0;
  double location = 0.0;
  double scale = 1.0;

  bool operator==(const Component&) const = default;
};

/// Immutable parametric kernel. Construction validates every parameter.
///
/// Theta layout, concatenated over components:
///   ExpCos, Sinc, SpectralMixtureSE, SpectralMixtureRect: [magnitude, location, scale]
///   Cosine:                                               [magnitude, location]
///   IsotropicSE:                                          [magnitude, lengthscale]
/// The noise variance is kept outside theta.
class KernelModel {
 public:
  KernelModel(KernelFamily family, std::vector<Component> components, double noise_variance = 0.0);

  static KernelModel from_theta(FamilyId id, std::span<const double> theta, double noise_variance = 0.0);

  const KernelFamily& family() const { return family_; }
  const std::vector<Component>& components() const { return components_; }
  double noise_variance() const { return noise_variance_; }

  std::vector<double> theta() const;
  /// K(0) without the noise term.
  double power() const;
  KernelModel with_noise(double noise_variance) const;

  bool operator==(const KernelModel&) const = default;

 private:
  KernelFamily family_;
  std::vector<Component> components_;
  double noise_variance_ = 0.0;
};

/// Power K(0) contributed by one component of the given family.
double component_power(FamilyId id, const Component& c);
/// Magnitude that gives a component the requested power at its current scale.
double magnitude_for_power(FamilyId id, double power, double scale);

/// K(tau) per lag; the noise variance is added where tau == 0 exactly.
std::vector<double> eval_kernel(const KernelModel& model, std::span<const double> lags);
double eval_kernel(const KernelModel& model, double lag);

/// One-sided PSD on the supplied frequencies (noise floor excluded). Dirac (Cosine)
/// components are deposited as mass / cell-width at the nearest supplied frequency.
std::vector<double> eval_psd(const KernelModel& model, std::span<const double> freqs);
/// Even two-sided PSD, the Fourier transform of eval_kernel (without noise).
std::vector<double> eval_psd_two_sided(const KernelModel& model, std::span<const double> freqs);

/// Quantile function of the unit-mass prototype. Gaussian tails map to +-infinity.
std::vector<double> quantile_of_prototype(Prototype proto, std::span<const double> probs);
double quantile_of_prototype(Prototype proto, double p);

/// Exact integral of the prototype quantile over [a, b] within [0, 1].
double prototype_quantile_integral(Prototype proto, double a, double b);
/// Exact integral of the squared prototype quantile over [a, b].
double prototype_quantile_sq_integral(Prototype proto, double a, double b);
/// Integral of Q01^2 over [0, 1]: 1/2 (Gaussian), 1/12 (rect), 0 (Dirac).
double prototype_second_moment(Prototype proto);

/// Kernel-domain view of a model. For ExpCos-type components
///   K(tau) = variance * exp(-tau^2 / (2 lengthscale^2)) * cos(2 pi frequency tau);
/// for Sinc-type components
///   K(tau) = variance * sinc(tau / lengthscale) * cos(2 pi frequency tau);
/// for Cosine, lengthscale is 0; for IsotropicSE the kernel is unchanged.
struct TimeDomainComponent {
  double variance = 1.0;
  double frequency = 0.0;
  double lengthscale = 1.0;

  bool operator==(const TimeDomainComponent&) const = default;
};

struct TimeDomainModel {
  KernelFamily family;
  std::vector<TimeDomainComponent> components;
  double noise_variance = 0.0;

  bool operator==(const TimeDomainModel&) const = default;
};

TimeDomainModel params_freq_to_time(const KernelModel& model);
KernelModel params_time_to_freq(const TimeDomainModel& model);

}  // namespace gvm
