#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ozonecast/baselines.hpp"
#include "ozonecast/dataset.hpp"
#include "ozonecast/mlp.hpp"
#include "ozonecast/uncertainty.hpp"

namespace ozonecast {

// One on-disk model format with kind tags. Weight order for networks:
// hidden biases, hidden input weights row-major, output bias, output
// weights. Doubles serialize with shortest round-trip decimals, so
// save -> load -> save is byte-identical.
struct ModelFile {
    std::string kind;  // "mlp" | "linear" | "logistic"
    std::optional<Network> net;
    std::optional<LinearModel> linear;
    std::optional<LogisticModel> logistic;
    std::vector<std::string> columns;
    Scaling scaling;
    std::optional<IntervalContext> interval;
    // training metadata
    std::uint64_t seed = 0;
    double final_cost = 0.0;
    double final_bic = 0.0;
    int selected_hidden = 0;
    double threshold = 0.0;
};

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

// Serialized bytes (used for content-hash versioning).
std::string model_to_string(const ModelFile& model);

// FNV-1a hash of a file's bytes, hex encoded; used to version retrained
// model files.
std::string content_hash(const std::filesystem::path& path);

}  // namespace ozonecast
