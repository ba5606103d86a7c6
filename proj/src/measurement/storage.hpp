#pragma once

#include "common/keyvalue.hpp"
#include "measurement/forward.hpp"

#include <filesystem>

namespace ptych {

// Directory layout: manifest.txt (key = value) plus y_NNN.ptyf and
// mask_NNN.ptyf per camera. `extra` entries (source image, master seed)
// are copied into the manifest verbatim.
void save_measurements(const std::filesystem::path& dir, const MeasurementSet& m,
                       const KeyValue& extra = {});

MeasurementSet load_measurements(const std::filesystem::path& dir);

KeyValue load_manifest(const std::filesystem::path& dir);

std::string camera_file(const char* prefix, std::size_t camera);

} // namespace ptych
