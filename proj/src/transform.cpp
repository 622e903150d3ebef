#include "transform.hpp"

#include <algorithm>
#include <cmath>

#include "gvm/error.hpp"

namespace gvm::detail {

namespace {

bool has_location(FamilyId id) { return id != FamilyId::IsotropicSE; }
bool has_scale(FamilyId id) { return id != FamilyId::Cosine; }

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

}  // namespace

std::size_t Layout::dimension() const {
  std::size_t per = (free_magnitude ? 1 : 0) + (has_location(id) ? 1 : 0) + (has_scale(id) ? 1 : 0);
  return per * components + (free_noise ? 1 : 0);
}

Layout make_layout(const KernelModel& init, bool free_magnitude, bool free_noise, double fixed_power,
                   double location_floor) {
  Layout l;
  l.id = init.family().id;
  l.components = init.components().size();
  l.free_magnitude = free_magnitude;
  l.free_noise = free_noise;
  l.fixed_power = fixed_power;
  l.fixed_noise = init.noise_variance();
  for (const auto& c : init.components()) l.location_ref.push_back(std::max(c.location, location_floor));
  return l;
}

std::vector<double> encode(const KernelModel& model, const Layout& layout) {
  std::vector<double> x;
  x.reserve(layout.dimension());
  const auto& comps = model.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (layout.free_magnitude) x.push_back(safe_log(comps[i].magnitude));
    if (has_location(layout.id)) x.push_back(comps[i].location / layout.location_ref[i]);
    if (has_scale(layout.id)) x.push_back(safe_log(comps[i].scale));
  }
  if (layout.free_noise) x.push_back(safe_log(model.noise_variance()));
  return x;
}

KernelModel decode(std::span<const double> x, const Layout& layout) {
  if (x.size() != layout.dimension()) throw ParameterDomainError("parameter vector has the wrong length");
  for (double v : x) {
    if (!std::isfinite(v)) throw ParameterDomainError("non-finite parameter");
  }
  std::vector<Component> comps(layout.components);
  std::size_t k = 0;
  for (std::size_t i = 0; i < layout.components; ++i) {
    Component c;
    const bool mag_free = layout.free_magnitude;
    double log_mag = mag_free ? x[k++] : 0.0;
    if (has_location(layout.id)) c.location = std::abs(x[k++]) * layout.location_ref[i];
    if (has_scale(layout.id)) c.scale = std::exp(x[k++]);
    if (mag_free) {
      c.magnitude = std::exp(log_mag);
    } else {
      c.magnitude = magnitude_for_power(layout.id, layout.fixed_power / static_cast<double>(layout.components), c.scale);
    }
    comps[i] = c;
  }
  const double noise = layout.free_noise ? std::exp(x[k]) : layout.fixed_noise;
  return KernelModel(KernelFamily{layout.id, layout.components}, std::move(comps), noise);
}

}  // namespace gvm::detail
