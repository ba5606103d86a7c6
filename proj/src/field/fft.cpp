#include "field/fft.hpp"

#include "common/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace ptych {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (h, w, sign) and kept for the
// process lifetime. FFTW_UNALIGNED keeps results independent of buffer
// alignment.
fftw_plan plan_for(std::size_t height, std::size_t width, int sign)
{
    static std::mutex mutex;
    static std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans;

    std::lock_guard lock(mutex);
    auto key = std::make_tuple(height, width, sign);
    if (auto it = plans.find(key); it != plans.end())
        return it->second;

    fftw_complex* scratch = fftw_alloc_complex(height * width);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width), scratch,
                                      scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr)
        throw Error("fftw: failed to create plan");
    plans.emplace(key, plan);
    return plan;
}

void execute(ComplexField& data, int sign)
{
    fftw_plan plan = plan_for(data.height(), data.width(), sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.storage().data());
    fftw_execute_dft(plan, ptr, ptr);
}

// Circular shift by (h/2, w/2). For power-of-two dims fftshift == ifftshift.
ComplexField shift_half(const ComplexField& in)
{
    const std::size_t h = in.height();
    const std::size_t w = in.width();
    const std::size_t hh = h / 2;
    const std::size_t hw = w / 2;
    ComplexField out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        const std::size_t rr = (r + hh) % h;
        for (std::size_t c = 0; c < w; ++c)
            out(rr, (c + hw) % w) = in(r, c);
    }
    return out;
}

} // namespace

void require_fft_dims(std::size_t height, std::size_t width)
{
    if (!is_power_of_two(height) || !is_power_of_two(width))
        throw ConfigError("fft: dimensions must be powers of two, got " + std::to_string(height) +
                          "x" + std::to_string(width));
}

ComplexField fft2(const ComplexField& field)
{
    require_fft_dims(field.height(), field.width());
    ComplexField out = field;
    execute(out, FFTW_FORWARD);
    const double scale = 1.0 / std::sqrt(static_cast<double>(out.size()));
    for (Complex& v : out.values())
        v *= scale;
    return shift_half(out);
}

ComplexField ifft2(const ComplexField& spectrum)
{
    require_fft_dims(spectrum.height(), spectrum.width());
    ComplexField out = shift_half(spectrum);
    execute(out, FFTW_BACKWARD);
    const double scale = 1.0 / std::sqrt(static_cast<double>(out.size()));
    for (Complex& v : out.values())
        v *= scale;
    return out;
}

} // namespace ptych
