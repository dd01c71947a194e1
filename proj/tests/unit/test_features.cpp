#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "eegmatch/error.hpp"
#include "eegmatch/features.hpp"
#include "oracles.hpp"

using namespace eegmatch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("eegmatch_features_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TimeSeries tone(double hz, double seconds, double fs, double am_hz = 0.0) {
  const auto n = static_cast<std::size_t>(seconds * fs);
  TimeSeries ts(1, n, fs);
  for (std::size_t t = 0; t < n; ++t) {
    const double time = static_cast<double>(t) / fs;
    const double gain = am_hz > 0.0 ? 1.0 + 0.8 * std::sin(2 * std::numbers::pi * am_hz * time) : 1.0;
    ts(0, t) = gain * std::sin(2 * std::numbers::pi * hz * time);
  }
  return ts;
}

WordToken word(double on, double off, std::vector<double> e) { return {"w", on, off, std::move(e)}; }

}  // namespace

TEST(Envelope, TracksAmplitudeModulation) {
  const auto audio = tone(440.0, 10.0, 8000.0, 3.0);
  const auto env = envelope(audio);
  EXPECT_DOUBLE_EQ(env.sample_rate_hz(), 64.0);
  EXPECT_EQ(env.samples(), 640u);
  for (double v : env.data()) EXPECT_GE(v, 0.0);
  // Brute-force spectrum: the modulation frequency dominates 1..20 Hz.
  const auto x = env.channel(0).subspan(64, 512);
  std::vector<double> centred(x.begin(), x.end());
  double mean = 0;
  for (double v : centred) mean += v;
  mean /= static_cast<double>(centred.size());
  for (double& v : centred) v -= mean;
  const double at_mod = oracle::dft_magnitude(centred, 3.0 / 64.0);
  for (double hz = 1.0; hz <= 20.0; hz += 0.5) {
    if (std::abs(hz - 3.0) < 0.6) continue;
    EXPECT_LT(oracle::dft_magnitude(centred, hz / 64.0), 0.2 * at_mod) << hz;
  }
}

TEST(Envelope, SilenceIsZero) {
  TimeSeries quiet(1, 8000, 8000.0);
  const auto env = envelope(quiet);
  for (double v : env.data()) EXPECT_EQ(v, 0.0);
  TimeSeries stereo(2, 8000, 8000.0);
  EXPECT_THROW(envelope(stereo), Error);
}

TEST(Mel, HtkScale) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(hz_to_mel(1000.0), 999.985, 1e-3);
  for (double hz : {0.0, 55.0, 1234.5, 7999.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(Mel, ToneEnergyLandsInMatchingBand) {
  const double fs = 16000.0;
  const auto spec = mel_spectrogram(tone(1000.0, 2.0, fs));
  ASSERT_EQ(spec.channels(), 28u);
  EXPECT_EQ(spec.samples(), 128u);
  EXPECT_DOUBLE_EQ(spec.sample_rate_hz(), 64.0);
  // Band b spans mel points b..b+2 of 30 evenly spaced points over [0, fs/2].
  const double top = hz_to_mel(fs / 2);
  std::size_t expected = 0;
  double best = 1e9;
  for (std::size_t b = 0; b < 28; ++b) {
    const double centre_hz = mel_to_hz(top * static_cast<double>(b + 1) / 29.0);
    if (std::abs(centre_hz - 1000.0) < best) {
      best = std::abs(centre_hz - 1000.0);
      expected = b;
    }
  }
  const std::size_t frame = 64;
  std::size_t arg = 0;
  for (std::size_t b = 1; b < 28; ++b)
    if (spec(b, frame) > spec(arg, frame)) arg = b;
  EXPECT_EQ(arg, expected);
}

TEST(Mel, SilenceHitsLogFloor) {
  TimeSeries quiet(1, 16000, 16000.0);
  const auto spec = mel_spectrogram(quiet);
  for (double v : spec.data()) EXPECT_NEAR(v, std::log(1e-10), 1e-12);
}

TEST(WordEmbedding, FillsIntervalsAtSampleRate) {
  const std::vector<WordToken> words{word(0.5, 1.0, {1, 2}), word(1.0, 1.25, {3, 4})};
  const auto ts = continuous_word_embedding(words, 2.0, 2);
  ASSERT_EQ(ts.samples(), 128u);
  for (std::size_t t = 0; t < 128; ++t) {
    const double expect0 = (t >= 32 && t < 64) ? 1.0 : (t >= 64 && t < 80) ? 3.0 : 0.0;
    ASSERT_EQ(ts(0, t), expect0) << t;
  }
}

TEST(WordEmbedding, LaterWordOverwritesOverlap) {
  const std::vector<WordToken> words{word(0.0, 1.0, {1}), word(0.5, 0.75, {2})};
  const auto ts = continuous_word_embedding(words, 1.0, 1);
  EXPECT_EQ(ts(0, 10), 1.0);
  EXPECT_EQ(ts(0, 40), 2.0);
  EXPECT_EQ(ts(0, 50), 1.0);
  EXPECT_EQ(ts(0, 63), 1.0);
}

TEST(WordEmbedding, Errors) {
  const std::vector<WordToken> unsorted{word(1.0, 1.5, {1}), word(0.5, 0.7, {1})};
  try {
    continuous_word_embedding(unsorted, 2.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsortedWords);
  }
  const std::vector<WordToken> wide{word(0.0, 0.5, {1, 2, 3})};
  try {
    continuous_word_embedding(wide, 2.0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WidthMismatch);
  }
  const std::vector<WordToken> late{word(0.0, 5.0, {1})};
  EXPECT_THROW(continuous_word_embedding(late, 2.0, 1), Error);
  EXPECT_EQ(continuous_word_embedding({}, 1.0, 3).channels(), 3u);
}

TEST(Pca, MatchesJacobiOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> width_dist(2, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = width_dist(rng), n = 40 + static_cast<std::size_t>(trial);
    std::vector<std::vector<double>> rows(n, std::vector<double>(w));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w));
    const auto mix = oracle::gaussian(w * w, rng);
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = oracle::gaussian(w, rng);
      for (std::size_t j = 0; j < w; ++j) {
        double v = 0;
        for (std::size_t k = 0; k < w; ++k) v += mix[j * w + k] * z[k] * static_cast<double>(k + 1);
        rows[i][j] = v + 3.0;
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    const std::size_t k = std::max<std::size_t>(1, w / 2);
    const auto model = pca_fit(m, k);
    const auto ref = oracle::jacobi_eigen(oracle::covariance(rows));
    for (std::size_t c = 0; c < k; ++c) {
      double dot = 0;
      for (std::size_t j = 0; j < w; ++j) dot += model.components(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) * ref.vectors[c][j];
      EXPECT_GT(std::abs(dot), 1.0 - 1e-6);
      EXPECT_NEAR(model.explained_variance(static_cast<Eigen::Index>(c)), ref.values[c], 1e-6 * std::abs(ref.values[c]));
    }
  }
}

TEST(Pca, FullRankReconstructsAndSignIsCanonical) {
  std::mt19937_64 rng(12);
  Eigen::MatrixXd m(30, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = oracle::gaussian(1, rng)[0];
  const auto model = pca_fit(m, 4);
  const auto back = pca_reconstruct(model, pca_transform(model, m));
  EXPECT_LT((back - m).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index c = 0; c < 4; ++c) {
    Eigen::Index arg;
    model.components.row(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(model.components(c, arg), 0.0);
  }
  // Codes of the training rows are uncorrelated and centred.
  const auto codes = pca_transform(model, m);
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_NEAR(codes.col(c).mean(), 0.0, 1e-10);
}

TEST(Pca, Errors) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(10, 3);
  try {
    pca_fit(m, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
  EXPECT_THROW(pca_fit(m, 0), Error);
  const auto model = pca_fit(m, 2);
  EXPECT_THROW(pca_transform(model, Eigen::MatrixXd::Random(5, 4)), Error);
}

TEST(Pca, TimeSeriesTransformIsSampleWise) {
  std::mt19937_64 rng(13);
  TimeSeries ts(5, 64.0, oracle::gaussian(5 * 200, rng));
  const auto model = pca_fit(to_rows(ts), 2);
  const auto out = pca_transform(model, ts);
  ASSERT_EQ(out.channels(), 2u);
  ASSERT_EQ(out.samples(), 200u);
  const auto codes = pca_transform(model, to_rows(ts));
  for (std::size_t t = 0; t < 200; ++t)
    for (std::size_t c = 0; c < 2; ++c) ASSERT_EQ(out(c, t), codes(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)));
}

TEST(Fuse, ConcatenatesInOrder) {
  FeatureSet set;
  set.emplace("env", TimeSeries(1, 64.0, {1, 2, 3}));
  set.emplace("mel", TimeSeries(2, 64.0, {4, 5, 6, 7, 8, 9}));
  const std::vector<std::string> names{"mel", "env"};
  const auto f = fuse_features(set, names);
  ASSERT_EQ(f.channels(), 3u);
  EXPECT_EQ(f(0, 0), 4.0);
  EXPECT_EQ(f(2, 2), 3.0);
  const std::vector<std::string> missing{"gpt"};
  try {
    fuse_features(set, missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingFeature);
  }
  set.emplace("short", TimeSeries(1, 64.0, {1, 2}));
  const std::vector<std::string> uneven{"env", "short"};
  try {
    fuse_features(set, uneven);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(WordsFile, RoundTrip) {
  const auto dir = temp_dir("words");
  const std::vector<WordToken> words{{"een", 0.1, 0.4, {1.5, -2.0, 0.25}}, {"twee", 0.4, 0.9, {0.5, 0.0, 3.0}}};
  write_words(dir / "w.json", words);
  EXPECT_TRUE(fs::exists(words_matrix_path(dir / "w.json")));
  EXPECT_EQ(words_matrix_path(dir / "w.json").filename(), "w.mmts");
  const auto back = read_words(dir / "w.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].text, "twee");
  EXPECT_DOUBLE_EQ(back[1].onset_s, 0.4);
  EXPECT_EQ(back[0].embedding, words[0].embedding);
}

TEST(Wav, Pcm16AndFloatRoundTrip) {
  const auto dir = temp_dir("wav");
  auto audio = tone(220.0, 0.5, 16000.0);
  for (double& v : audio.data()) v *= 0.5;
  write_wav(dir / "f.wav", audio, true);
  const auto f = read_wav(dir / "f.wav");
  ASSERT_EQ(f.samples(), audio.samples());
  EXPECT_DOUBLE_EQ(f.sample_rate_hz(), 16000.0);
  for (std::size_t t = 0; t < audio.samples(); ++t) ASSERT_EQ(f(0, t), static_cast<double>(static_cast<float>(audio(0, t))));
  write_wav(dir / "i.wav", audio, false);
  const auto i = read_wav(dir / "i.wav");
  for (std::size_t t = 0; t < audio.samples(); ++t) ASSERT_NEAR(i(0, t), audio(0, t), 1.0 / 32767.0);
}
