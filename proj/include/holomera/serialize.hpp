#pragma once

#include <json.hpp>

#include "holomera/correlator.hpp"
#include "holomera/entropy.hpp"
#include "holomera/holography.hpp"
#include "holomera/mera.hpp"
#include "holomera/mps.hpp"
#include "holomera/optimizer.hpp"
#include "holomera/superoperator.hpp"

namespace holomera {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.3.0";

/// {"shape": [...], "complex": bool, "values": [...]} with row-major values written as decimal
/// strings of 17 significant digits; complex entries are interleaved as re, im.
Json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// 17 significant digits.
std::string format_double(double x);

Json layer_to_json(const Layer& layer);
Layer layer_from_json(const Json& j);

/// {"chi", "b", "w_star", "cap", "layers": [{"u", "w"}...]}; w_star is null for a scale-invariant
/// network, whose repeated layer is stored after its transitional layers.
Json network_to_json(const ScaleInvariantMera& net);
Json network_to_json(const FiniteRangeMera& net);
ScaleInvariantMera scale_invariant_from_json(const Json& j);
FiniteRangeMera finite_range_from_json(const Json& j);

Json to_json(const ScalingOperatorSet& s, std::size_t max_rows = 0);
Json to_json(const Mps& m);
Json to_json(const TransferSpectrum& t);
Json to_json(const OptimizationReport& r);
Json to_json(const LineFit& f);
Json to_json(const CrossoverFit& f);
Json to_json(const EntropyFit& f);
Json to_json(const CutReport& c);
Json to_json(const GeodesicFormFit& f);

}  // namespace holomera
