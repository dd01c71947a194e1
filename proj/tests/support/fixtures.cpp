#include "fixtures.hpp"

namespace fixtures {

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("eegmatch_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

eegmatch::DatasetManifest tiny_dataset(const std::filesystem::path& dir, std::uint64_t seed, double noise_sigma) {
  eegmatch::SynthSpec spec;
  spec.n_subjects = 4;
  spec.n_stimuli = 4;
  spec.duration_s = 40.0;
  spec.eeg_channels = 4;
  spec.feature_channels = 2;
  spec.seed = seed;
  spec.noise_sigma = noise_sigma;
  return eegmatch::generate_synthetic(spec, dir);
}

eegmatch::RunConfig tiny_run_config() {
  eegmatch::RunConfig cfg;
  cfg.model.eeg.d_hidden = 4;
  cfg.model.eeg.d_latent = 3;
  cfg.model.eeg.n_blocks = 2;
  cfg.model.features = {eegmatch::kSynthFeature};
  cfg.train.batch_size = 4;
  cfg.train.n_negatives = 3;
  cfg.train.eval_every_steps = 5;
  cfg.train.max_steps = 20;
  cfg.train.lr = 1e-3;
  cfg.folds = {"3-4"};
  return cfg;
}

}  // namespace fixtures
