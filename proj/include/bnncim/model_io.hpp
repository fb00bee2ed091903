#ifndef BNNCIM_MODEL_IO_HPP
#define BNNCIM_MODEL_IO_HPP

#include <string>

#include "bnncim/bnn.hpp"
#include "bnncim/calibration.hpp"

namespace bnncim::io {

/// Versioned plain-text model artifact ("bnncim-model v1"): architecture,
/// float parameters, quantization scales, and integer weight images. Doubles
/// are written in shortest-round-trip form, so parse(serialize(m)) == m bit
/// for bit. Throws schema_error on malformed or wrong-version input.
std::string serialize_model(const bnn::TrainedModel& model);
bnn::TrainedModel parse_model(const std::string& text);

void save_model(const bnn::TrainedModel& model, const std::string& path);
bnn::TrainedModel load_model(const std::string& path);

/// Versioned calibration artifact ("bnncim-offsets v1"): the measured
/// per-word offsets plus the tile-state fingerprint they belong to.
std::string serialize_offsets(const cal::OffsetMap& map);
cal::OffsetMap parse_offsets(const std::string& text);

void save_offsets(const cal::OffsetMap& map, const std::string& path);
cal::OffsetMap load_offsets(const std::string& path);

} // namespace bnncim::io

#endif
