#include "measurement/storage.hpp"

#include "common/error.hpp"
#include "field/io.hpp"

#include <cstdio>

namespace ptych {

namespace {
constexpr const char* kFormat = "ptych-measurements-1";
}

std::string camera_file(const char* prefix, std::size_t camera)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu.ptyf", prefix, camera);
    return buf;
}

void save_measurements(const std::filesystem::path& dir, const MeasurementSet& m,
                       const KeyValue& extra)
{
    validate(m);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());

    for (std::size_t l = 0; l < m.camera_count(); ++l) {
        write_ptyf(dir / camera_file("y", l), m.y[l]);
        RealImage mask(m.height(), m.width());
        for (std::size_t i = 0; i < mask.size(); ++i)
            mask[i] = m.masks.per_camera[l][i];
        write_ptyf(dir / camera_file("mask", l), mask);
    }

    KeyValue manifest = extra;
    manifest.set("format", std::string(kFormat));
    manifest.set("height", m.height());
    manifest.set("width", m.width());
    manifest.set("grid_size", m.array.geometry().grid_size);
    manifest.set("radius", m.array.geometry().radius);
    manifest.set("spacing", m.array.geometry().spacing);
    manifest.set("cameras", m.camera_count());
    manifest.set("ratio_pct", m.masks.ratio);
    manifest.set("mask_seed", m.masks.seed);
    manifest.set("noise_pct", m.noise.level);
    manifest.set("noise_seed", m.noise.seed);
    manifest.set("clip_negative", m.noise.clip_negative);
    write_text_atomic(dir / "manifest.txt", manifest.serialize());
}

KeyValue load_manifest(const std::filesystem::path& dir)
{
    KeyValue manifest = KeyValue::load(dir / "manifest.txt");
    if (manifest.get_string("format", "") != kFormat)
        throw IoError(dir.string() + ": unsupported measurement format");
    return manifest;
}

MeasurementSet load_measurements(const std::filesystem::path& dir)
{
    const KeyValue manifest = load_manifest(dir);
    const std::size_t h = manifest.get_u64("height");
    const std::size_t w = manifest.get_u64("width");
    CameraGeometry geometry{manifest.get_u64("grid_size"), manifest.get_double("radius"),
                            manifest.get_double("spacing")};
    CameraArray array = make_camera_array(h, w, geometry);
    if (array.camera_count() != manifest.get_u64("cameras"))
        throw IoError(dir.string() + ": camera count does not match geometry");

    MeasurementSet m;
    m.array = std::move(array);
    m.masks.ratio = manifest.get_double("ratio_pct");
    m.masks.seed = manifest.get_u64("mask_seed");
    m.noise.level = manifest.get_double("noise_pct");
    m.noise.seed = manifest.get_u64("noise_seed");
    m.noise.clip_negative = manifest.get_bool("clip_negative", false);
    for (std::size_t l = 0; l < m.array.camera_count(); ++l) {
        RealImage y = read_ptyf_real(dir / camera_file("y", l));
        RealImage mask_values = read_ptyf_real(dir / camera_file("mask", l));
        require_same_dims(y.height(), y.width(), h, w, "load_measurements");
        require_same_dims(mask_values.height(), mask_values.width(), h, w, "load_measurements");
        BinaryMask mask(h, w);
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask_values[i] != 0.0 && mask_values[i] != 1.0)
                throw IoError(dir.string() + ": mask values must be 0 or 1");
            mask[i] = mask_values[i] != 0.0 ? 1 : 0;
        }
        m.y.push_back(std::move(y));
        m.masks.per_camera.push_back(std::move(mask));
    }
    validate(m);
    return m;
}

} // namespace ptych
