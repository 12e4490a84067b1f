#include "pcicorr/synthgen.hpp"

#include "pcicorr/csvio.hpp"
#include "pcicorr/eval.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

namespace {

pcicorr::SynthSpec small_spec() {
  pcicorr::SynthSpec spec;
  spec.modalities = 2;
  spec.raw_dim = 3;
  spec.feature_dim = 3;
  spec.samples = 50;
  spec.subsets = pcicorr::parse_subsets("0,1:1:1");
  spec.private_noise = 0.5;
  spec.classes = 2;
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST_CASE("recipe validation rejects inconsistent specs") {
  auto spec = small_spec();
  CHECK_NOTHROW(spec.validate());

  auto bad = spec;
  bad.modalities = 1;
  CHECK_THROWS_WITH_AS(bad.validate(),
                       doctest::Contains("at least two modalities"),
                       std::invalid_argument);
  bad = spec;
  bad.subsets[0].members = {1, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.subsets[0].members = {0, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.subsets[0].members = {0, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.subsets[0].members = {0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.subsets[0].latent_dim = 4;  // exceeds raw_dim 3
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.subsets.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.subsets[0].signal = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.classes = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.samples = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("latent layout helpers agree with the worked example") {
  pcicorr::SynthSpec spec;
  spec.modalities = 4;
  spec.raw_dim = 16;
  spec.subsets = pcicorr::parse_subsets("0,1:2:0.8; 2,3:2:0.8; 0,1,2,3:4:0.65");
  spec.validate();

  CHECK(spec.total_latent_dim() == 8);
  CHECK(spec.subset_offsets() == std::vector<int>{0, 2, 4});

  const auto runs = spec.modality_runs();
  REQUIRE(runs.size() == 4);
  REQUIRE(runs[0].size() == 2);
  CHECK(runs[0][0].subset == 0);
  CHECK(runs[0][0].start == 0);
  CHECK(runs[0][1].subset == 2);
  CHECK(runs[0][1].start == 2);
  REQUIRE(runs[2].size() == 2);
  CHECK(runs[2][0].subset == 1);
  CHECK(runs[2][0].start == 0);
  CHECK(runs[2][1].subset == 2);
  CHECK(runs[2][1].start == 2);

  CHECK(spec.planted_latent_dims(0, 1) == std::vector<int>{0, 1, 4, 5, 6, 7});
  CHECK(spec.planted_latent_dims(0, 2) == std::vector<int>{4, 5, 6, 7});
  CHECK(spec.planted_latent_dims(2, 3) == std::vector<int>{2, 3, 4, 5, 6, 7});
}

TEST_CASE("generation is deterministic in the recipe seed") {
  const auto spec = small_spec();
  const auto a = pcicorr::generate(spec);
  const auto b = pcicorr::generate(spec);
  for (int i = 0; i < spec.modalities; ++i)
    CHECK((a.observations[i] - b.observations[i]).cwiseAbs().maxCoeff() ==
          0.0);
  CHECK((a.labels - b.labels).cwiseAbs().maxCoeff() == 0);

  auto reseeded = spec;
  reseeded.seed = 12;
  const auto c = pcicorr::generate(reseeded);
  CHECK((a.observations[0] - c.observations[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("appending a subset leaves untouched modalities bit-identical") {
  pcicorr::SynthSpec base;
  base.modalities = 3;
  base.raw_dim = 4;
  base.feature_dim = 4;
  base.samples = 60;
  base.subsets = pcicorr::parse_subsets("0,1:1:1; 1,2:1:1");
  base.classes = 2;
  base.seed = 5;

  auto extended = base;
  extended.subsets.push_back({{0, 1}, 1, 0.5});

  const auto a = pcicorr::generate(base);
  const auto b = pcicorr::generate(extended);
  // Modality 2 is not a member of the new subset: its noise, latent, and
  // rotation streams are all named, so nothing it depends on moved.
  CHECK((a.observations[2] - b.observations[2]).cwiseAbs().maxCoeff() == 0.0);
  // Modality 0 gained a block.
  CHECK((a.observations[0] - b.observations[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("rotations are orthonormal and labels are in range") {
  const auto data = pcicorr::generate(small_spec());
  for (const auto& q : data.truth.rotations) {
    const Eigen::MatrixXd gram = q.transpose() * q;
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <=
          1e-12);
  }
  CHECK(data.labels.minCoeff() >= 0);
  CHECK(data.labels.maxCoeff() < 2);
}

TEST_CASE("shared coordinates correlate as signal and noise dictate") {
  pcicorr::SynthSpec spec;
  spec.modalities = 2;
  spec.raw_dim = 2;
  spec.feature_dim = 2;
  spec.samples = 10000;
  spec.subsets = {{{0, 1}, 1, 1.0}};
  spec.private_noise = 1.0;
  spec.classes = 2;
  spec.seed = 101;
  const auto data = pcicorr::generate(spec);

  // Undo the private rotations to reach the raw coordinates.
  const Eigen::MatrixXd raw0 =
      data.observations[0] * data.truth.rotations[0];
  const Eigen::MatrixXd raw1 =
      data.observations[1] * data.truth.rotations[1];
  // Shared coordinate: corr = s^2 / (s^2 + nu^2) = 0.5 at equal scales.
  CHECK(std::abs(pcicorr::pearson(raw0.col(0), raw1.col(0)) - 0.5) <= 0.05);
  // Private coordinate: independent noise.
  CHECK(std::abs(pcicorr::pearson(raw0.col(1), raw1.col(1))) <= 0.05);
}

TEST_CASE("labels are balanced when the class map is orthonormal") {
  pcicorr::SynthSpec spec;
  spec.modalities = 2;
  spec.raw_dim = 4;
  spec.feature_dim = 4;
  spec.samples = 4096;
  spec.subsets = {{{0, 1}, 4, 1.0}};
  spec.classes = 4;
  spec.seed = 19;
  const auto data = pcicorr::generate(spec);
  Eigen::Vector4d counts = Eigen::Vector4d::Zero();
  for (long s = 0; s < spec.samples; ++s) counts(data.labels(s)) += 1.0;
  counts /= static_cast<double>(spec.samples);
  CHECK(counts.minCoeff() >= 0.2);
  CHECK(counts.maxCoeff() <= 0.3);
}

TEST_CASE("more classes than latents still yields well-defined labels") {
  auto spec = small_spec();
  spec.classes = 3;  // one latent coordinate only
  const auto data = pcicorr::generate(spec);
  CHECK(data.labels.minCoeff() >= 0);
  CHECK(data.labels.maxCoeff() < 3);
}

TEST_CASE("the subset syntax parses, normalizes, and round-trips") {
  const auto subsets =
      pcicorr::parse_subsets("0,1:2:0.8; 2,3:2:0.8; 0,1,2,3:4:0.65");
  REQUIRE(subsets.size() == 3);
  CHECK(subsets[0].members == std::vector<int>{0, 1});
  CHECK(subsets[0].latent_dim == 2);
  CHECK(subsets[0].signal == 0.8);
  CHECK(subsets[2].members == std::vector<int>{0, 1, 2, 3});
  CHECK(subsets[2].latent_dim == 4);
  CHECK(subsets[2].signal == 0.65);
  CHECK(pcicorr::format_subsets(subsets) ==
        "0,1:2:0.8; 2,3:2:0.8; 0,1,2,3:4:0.65");

  // Members are normalized to sorted order.
  CHECK(pcicorr::parse_subsets("1,0:2:0.5")[0].members ==
        std::vector<int>{0, 1});
  CHECK(pcicorr::parse_subsets("").empty());
  CHECK_THROWS_AS(pcicorr::parse_subsets("0,1:2"), std::invalid_argument);
}

TEST_CASE("ground truth files round-trip exactly") {
  const auto data = pcicorr::generate(small_spec());
  const auto dir = std::filesystem::temp_directory_path() / "pcicorr_truth";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "ground_truth.txt").string();
  pcicorr::save_ground_truth(data.truth, path);

  const std::string text = pcicorr::read_file(path);
  CHECK(text.find("planted_0_1 = 0") != std::string::npos);
  CHECK(text.find("subsets = 0,1:1:1") != std::string::npos);

  const auto loaded = pcicorr::load_ground_truth(path);
  CHECK(loaded.spec.modalities == data.truth.spec.modalities);
  CHECK(loaded.spec.raw_dim == data.truth.spec.raw_dim);
  CHECK(loaded.spec.samples == data.truth.spec.samples);
  CHECK(loaded.spec.seed == data.truth.spec.seed);
  CHECK(loaded.spec.private_noise == data.truth.spec.private_noise);
  CHECK(pcicorr::format_subsets(loaded.spec.subsets) ==
        pcicorr::format_subsets(data.truth.spec.subsets));
  REQUIRE(loaded.rotations.size() == data.truth.rotations.size());
  for (std::size_t i = 0; i < loaded.rotations.size(); ++i)
    CHECK((loaded.rotations[i] - data.truth.rotations[i])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset directories round-trip exactly and check shapes") {
  const auto data = pcicorr::generate(small_spec());
  const auto dir = std::filesystem::temp_directory_path() / "pcicorr_dataset";
  std::filesystem::remove_all(dir);
  pcicorr::save_dataset(data, dir.string());

  const auto loaded = pcicorr::load_dataset(dir.string());
  for (int i = 0; i < 2; ++i)
    CHECK((loaded.observations[i] - data.observations[i])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  CHECK((loaded.labels - data.labels).cwiseAbs().maxCoeff() == 0);

  // A modality file with the wrong shape is rejected on load.
  pcicorr::save_matrix_csv(Eigen::MatrixXd::Zero(10, 3),
                           (dir / "modality_0.csv").string(), "dim");
  CHECK_THROWS_AS(pcicorr::load_dataset(dir.string()), std::runtime_error);
  std::filesystem::remove_all(dir);
}
