#pragma once

// Unconstrained parameterization used by the iterative fits. Magnitudes, scales and the
// noise variance travel as logs; locations as |u| * reference so that unit simplex
// steps are relative moves.

#include <span>
#include <vector>

#include "gvm/kernels.hpp"

namespace gvm::detail {

struct Layout {
  FamilyId id = FamilyId::ExpCos;
  std::size_t components = 1;
  bool free_magnitude = true;
  bool free_noise = false;
  /// Power assigned to a single component when its magnitude is not free.
  double fixed_power = 1.0;
  /// Fixed noise variance when free_noise is false.
  double fixed_noise = 0.0;
  std::vector<double> location_ref;

  std::size_t dimension() const;
};

Layout make_layout(const KernelModel& init, bool free_magnitude, bool free_noise, double fixed_power,
                   double location_floor);

std::vector<double> encode(const KernelModel& model, const Layout& layout);
/// Throws ParameterDomainError when the decoded parameters are not admissible.
KernelModel decode(std::span<const double> x, const Layout& layout);

}  // namespace gvm::detail
