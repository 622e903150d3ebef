#pragma once

// JSON forms of models, fit configurations and fit results. Readers reject unknown
// keys and wrong types with SchemaError.

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gvm/kernels.hpp"
#include "gvm/solvers.hpp"

namespace gvm {

using Json = nlohmann::ordered_json;

/// Throws SchemaError if `j` is not an object or carries a key outside `allowed`.
void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view context);

/// {family, components: [{magnitude, location, scale}], noise_variance}
Json to_json(const KernelModel& m);
KernelModel kernel_model_from_json(const Json& j);

Json to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const Json& j);

/// Wall-clock time is placed under "timing" so that outputs can be compared without it.
Json to_json(const FitResult& r);
Json to_json(const Diagnostics& d);

}  // namespace gvm
