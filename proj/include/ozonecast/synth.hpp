#pragma once

#include <cstdint>
#include <filesystem>

#include "ozonecast/dataset.hpp"

namespace ozonecast {

// Synthetic ozone-season generator. Weather follows a slowly varying
// "episode" driver; the peak is a nonlinear function of the weather plus
// the noon value, so a nonlinear regressor can beat persistence. A fixed
// number of exceedance episodes is planted in the validation span by
// forcing episode conditions on well-spaced days.
struct SynthConfig {
    std::size_t train_days = 600;
    std::size_t validation_days = 105;
    std::uint64_t seed = 1;
    std::size_t planted_validation_exceedances = 7;
    double noise_sd = 9.0;
    double threshold = 180.0;
};

// The schema shared by the generator and the default pipeline configuration.
CsvSchema synth_schema();

struct SynthResult {
    std::size_t train_exceedances = 0;
    std::size_t validation_exceedances = 0;
};

SynthResult write_synthetic_season(const std::filesystem::path& train_csv,
                                   const std::filesystem::path& validation_csv,
                                   const SynthConfig& cfg);

}  // namespace ozonecast
