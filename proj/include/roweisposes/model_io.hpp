#pragma once

#include <filesystem>

#include "roweisposes/hmm.hpp"
#include "roweisposes/rda.hpp"

namespace roweisposes {

// Versioned JSON documents for fitted models. All stored reals round-trip
// bit-exactly (shortest round-trip decimal encoding), so save -> load ->
// save reproduces the file byte for byte.

void save_rda_model(const RdaModel& model, const std::filesystem::path& path);
RdaModel load_rda_model(const std::filesystem::path& path);

void save_model_bank(const ActionModelBank& bank,
                     const std::filesystem::path& path);
ActionModelBank load_model_bank(const std::filesystem::path& path);

}  // namespace roweisposes
