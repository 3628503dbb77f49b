#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bubbleforge {

// Power-law fit c * x^p in log-log coordinates. `constant` carries the common
// sign of the samples; the fit itself runs on magnitudes.
struct ScalingFit {
    std::vector<std::array<double, 2>> samples;  // (abscissa, value)
    double exponent = 0.0;
    double constant = 0.0;
    double maxRelDev = 0.0;
    std::array<double, 2> window{0.0, 0.0};
    int sign = 1;
};

inline ScalingFit fit_power_law(const std::vector<std::array<double, 2>>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("fit_power_law: need >= 2 samples");
    int sign = samples[0][1] > 0.0 ? 1 : (samples[0][1] < 0.0 ? -1 : 0);
    if (sign == 0) throw std::invalid_argument("fit_power_law: zero values not fittable");
    double prev = -1.0;
    for (const auto& s : samples) {
        if (!(s[0] > 0.0)) throw std::invalid_argument("fit_power_law: abscissae must be positive");
        if (!(s[0] > prev)) throw std::invalid_argument("fit_power_law: abscissae must be strictly increasing");
        prev = s[0];
        const int sg = s[1] > 0.0 ? 1 : (s[1] < 0.0 ? -1 : 0);
        if (sg != sign)
            throw std::invalid_argument("fit_power_law: mixed-sign values rejected; split or take magnitudes knowingly");
    }
    const size_t m = samples.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        const double lx = std::log(s[0]), ly = std::log(std::abs(s[1]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    ScalingFit fit;
    fit.samples = samples;
    fit.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.constant = sign * std::exp((sy - fit.exponent * sx) / m);
    fit.sign = sign;
    fit.window = {samples.front()[0], samples.back()[0]};
    for (const auto& s : samples) {
        const double model = fit.constant * std::pow(s[0], fit.exponent);
        fit.maxRelDev = std::max(fit.maxRelDev, std::abs(s[1] - model) / std::abs(model));
    }
    return fit;
}

}  // namespace bubbleforge
