#pragma once

#include <filesystem>
#include <string>

#include "eegmatch/config.hpp"
#include "eegmatch/dataset.hpp"

namespace fixtures {

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// 4 subjects hearing 4 distinct 40 s stimuli; 4 EEG and 2 feature channels.
eegmatch::DatasetManifest tiny_dataset(const std::filesystem::path& dir, std::uint64_t seed = 1,
                                       double noise_sigma = 0.1);

// Small encoder and batch sized for tiny_dataset, validating on subjects 3-4.
eegmatch::RunConfig tiny_run_config();

}  // namespace fixtures
