#include "pcicorr/synthgen.hpp"

#include "pcicorr/csvio.hpp"
#include "pcicorr/rng.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pcicorr {

void SynthSpec::validate() const {
  if (modalities < 2)
    throw std::invalid_argument(
        "synthetic recipe needs at least two modalities (shared subsets of "
        "size >= 2 are impossible otherwise)");
  if (raw_dim < 1) throw std::invalid_argument("raw_dim must be positive");
  if (feature_dim < 1)
    throw std::invalid_argument("feature_dim must be positive");
  if (samples < 2) throw std::invalid_argument("samples must be at least 2");
  if (classes < 2) throw std::invalid_argument("classes must be at least 2");
  if (!(private_noise >= 0.0))
    throw std::invalid_argument("private_noise must be non-negative");
  if (subsets.empty())
    throw std::invalid_argument("at least one shared subset is required");
  for (const auto& s : subsets) {
    if (s.members.size() < 2)
      throw std::invalid_argument("every shared subset needs size >= 2");
    if (!std::is_sorted(s.members.begin(), s.members.end()) ||
        std::adjacent_find(s.members.begin(), s.members.end()) !=
            s.members.end())
      throw std::invalid_argument("subset members must be sorted and unique");
    if (s.members.front() < 0 || s.members.back() >= modalities)
      throw std::invalid_argument("subset member out of modality range");
    if (s.latent_dim < 1)
      throw std::invalid_argument("latent_dim must be positive");
    if (!(s.signal > 0.0))
      throw std::invalid_argument("subset signal must be positive");
  }
  for (int i = 0; i < modalities; ++i) {
    int used = 0;
    for (const auto& s : subsets)
      if (std::binary_search(s.members.begin(), s.members.end(), i))
        used += s.latent_dim;
    if (used > raw_dim)
      throw std::invalid_argument(
          "latent blocks of one modality exceed raw_dim; leave room for "
          "private coordinates");
  }
}

int SynthSpec::total_latent_dim() const {
  int t = 0;
  for (const auto& s : subsets) t += s.latent_dim;
  return t;
}

std::vector<int> SynthSpec::subset_offsets() const {
  std::vector<int> offsets(subsets.size());
  int t = 0;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    offsets[s] = t;
    t += subsets[s].latent_dim;
  }
  return offsets;
}

std::vector<std::vector<SynthSpec::Run>> SynthSpec::modality_runs() const {
  std::vector<std::vector<Run>> runs(modalities);
  for (int i = 0; i < modalities; ++i) {
    int col = 0;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      if (!std::binary_search(subsets[s].members.begin(),
                              subsets[s].members.end(), i))
        continue;
      runs[i].push_back(Run{static_cast<int>(s), col});
      col += subsets[s].latent_dim;
    }
  }
  return runs;
}

std::vector<int> SynthSpec::planted_latent_dims(int i, int j) const {
  const auto offsets = subset_offsets();
  std::vector<int> dims;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    const auto& members = subsets[s].members;
    if (std::binary_search(members.begin(), members.end(), i) &&
        std::binary_search(members.begin(), members.end(), j)) {
      for (int d = 0; d < subsets[s].latent_dim; ++d)
        dims.push_back(offsets[s] + d);
    }
  }
  return dims;
}

Dataset generate(const SynthSpec& spec) {
  spec.validate();
  const long n = spec.samples;
  const int d = spec.raw_dim;
  const int t = spec.total_latent_dim();

  // Latent blocks, one stream per subset so the draw is stable under
  // recipe extension.
  std::vector<Eigen::MatrixXd> latents(spec.subsets.size());
  for (std::size_t s = 0; s < spec.subsets.size(); ++s) {
    Rng rng(derive_seed(spec.seed, "latents:" + std::to_string(s)));
    latents[s] = rng.gaussian_matrix(n, spec.subsets[s].latent_dim);
  }

  Dataset dataset;
  dataset.truth.spec = spec;
  dataset.truth.rotations.resize(spec.modalities);
  dataset.observations.resize(spec.modalities);
  const auto runs = spec.modality_runs();
  for (int i = 0; i < spec.modalities; ++i) {
    Eigen::MatrixXd raw;
    {
      Rng noise(derive_seed(spec.seed, "noise:" + std::to_string(i)));
      raw = spec.private_noise * noise.gaussian_matrix(n, d);
    }
    for (const auto& run : runs[i]) {
      const auto& subset = spec.subsets[run.subset];
      raw.middleCols(run.start, subset.latent_dim) +=
          subset.signal * latents[run.subset];
    }
    Rng rot(derive_seed(spec.seed, "rotation:" + std::to_string(i)));
    dataset.truth.rotations[i] = rot.orthonormal_matrix(d);
    dataset.observations[i].noalias() =
        raw * dataset.truth.rotations[i].transpose();
  }

  // Labels: argmax of a fixed linear map applied to the concatenated
  // latent vector. With orthonormal rows the logits are i.i.d. standard
  // normals, so classes come out balanced.
  Eigen::MatrixXd z(n, t);
  const auto offsets = spec.subset_offsets();
  for (std::size_t s = 0; s < spec.subsets.size(); ++s)
    z.middleCols(offsets[s], spec.subsets[s].latent_dim) = latents[s];
  Rng label_rng(derive_seed(spec.seed, "labelmap"));
  Eigen::MatrixXd map(spec.classes, t);
  if (spec.classes <= t) {
    map = label_rng.orthonormal_matrix(t).topRows(spec.classes);
  } else {
    // Too few latents for orthonormal rows; unit-norm Gaussian rows keep
    // the construction well defined (balance is then approximate).
    map = label_rng.gaussian_matrix(spec.classes, t);
    for (int r = 0; r < spec.classes; ++r) map.row(r).normalize();
  }
  const Eigen::MatrixXd logits = z * map.transpose();
  dataset.labels.resize(n);
  for (long s = 0; s < n; ++s) {
    Eigen::Index best = 0;
    logits.row(s).maxCoeff(&best);
    dataset.labels(s) = static_cast<int>(best);
  }
  return dataset;
}

std::vector<SubsetSpec> parse_subsets(const std::string& text) {
  std::vector<SubsetSpec> subsets;
  std::istringstream blocks(text);
  std::string block;
  while (std::getline(blocks, block, ';')) {
    const auto first = block.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    block = block.substr(first, block.find_last_not_of(" \t") - first + 1);
    const auto colon1 = block.find(':');
    const auto colon2 = block.find(':', colon1 + 1);
    if (colon1 == std::string::npos || colon2 == std::string::npos)
      throw std::invalid_argument(
          "subset syntax is members:latent_dim:signal, e.g. 0,1:2:0.8");
    SubsetSpec s;
    std::istringstream members(block.substr(0, colon1));
    std::string member;
    while (std::getline(members, member, ','))
      s.members.push_back(std::stoi(member));
    std::sort(s.members.begin(), s.members.end());
    s.latent_dim = std::stoi(block.substr(colon1 + 1, colon2 - colon1 - 1));
    s.signal = std::stod(block.substr(colon2 + 1));
    subsets.push_back(std::move(s));
  }
  return subsets;
}

std::string format_subsets(const std::vector<SubsetSpec>& subsets) {
  std::ostringstream out;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    if (s) out << "; ";
    for (std::size_t i = 0; i < subsets[s].members.size(); ++i) {
      if (i) out << ',';
      out << subsets[s].members[i];
    }
    out << ':' << subsets[s].latent_dim << ':'
        << format_double(subsets[s].signal);
  }
  return out.str();
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
  const SynthSpec& spec = truth.spec;
  std::ostringstream out;
  out << "modalities = " << spec.modalities << '\n'
      << "raw_dim = " << spec.raw_dim << '\n'
      << "feature_dim = " << spec.feature_dim << '\n'
      << "samples = " << spec.samples << '\n'
      << "seed = " << spec.seed << '\n'
      << "private_noise = " << format_double(spec.private_noise) << '\n'
      << "classes = " << spec.classes << '\n'
      << "subsets = " << format_subsets(spec.subsets) << '\n';
  for (int i = 0; i < spec.modalities; ++i) {
    for (int j = i + 1; j < spec.modalities; ++j) {
      out << "planted_" << i << '_' << j << " =";
      for (int dim : spec.planted_latent_dims(i, j)) out << ' ' << dim;
      out << '\n';
    }
  }
  for (int i = 0; i < spec.modalities; ++i) {
    out << "rotation_" << i << " =";
    const Eigen::MatrixXd& q = truth.rotations[i];
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      for (Eigen::Index c = 0; c < q.cols(); ++c)
        out << ' ' << format_double(q(r, c));
    out << '\n';
  }
  write_file(path, out.str());
}

namespace {

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) {
        s.clear();
        return;
      }
      s = s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    };
    trim(key);
    trim(value);
    kv[key] = value;
  }
  return kv;
}

}  // namespace

GroundTruth load_ground_truth(const std::string& path) {
  const auto kv = parse_key_values(read_file(path));
  const auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error(path + ": missing ground-truth key '" + key +
                               "'");
    return it->second;
  };
  GroundTruth truth;
  SynthSpec& spec = truth.spec;
  spec.modalities = std::stoi(need("modalities"));
  spec.raw_dim = std::stoi(need("raw_dim"));
  spec.feature_dim = std::stoi(need("feature_dim"));
  spec.samples = std::stol(need("samples"));
  spec.seed = std::stoull(need("seed"));
  spec.private_noise = std::stod(need("private_noise"));
  spec.classes = std::stoi(need("classes"));
  spec.subsets = parse_subsets(need("subsets"));
  spec.validate();
  truth.rotations.resize(spec.modalities);
  for (int i = 0; i < spec.modalities; ++i) {
    std::istringstream values(need("rotation_" + std::to_string(i)));
    Eigen::MatrixXd q(spec.raw_dim, spec.raw_dim);
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      for (Eigen::Index c = 0; c < q.cols(); ++c)
        if (!(values >> q(r, c)))
          throw std::runtime_error(path + ": truncated rotation matrix");
    truth.rotations[i] = std::move(q);
  }
  return truth;
}

void save_dataset(const Dataset& dataset, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < dataset.observations.size(); ++i)
    save_matrix_csv(dataset.observations[i],
                    dir + "/modality_" + std::to_string(i) + ".csv", "dim");
  save_labels_csv(dataset.labels, dir + "/labels.csv");
  save_ground_truth(dataset.truth, dir + "/ground_truth.txt");
}

Dataset load_dataset(const std::string& dir) {
  Dataset dataset;
  dataset.truth = load_ground_truth(dir + "/ground_truth.txt");
  dataset.labels = load_labels_csv(dir + "/labels.csv");
  dataset.observations.resize(dataset.truth.spec.modalities);
  for (int i = 0; i < dataset.truth.spec.modalities; ++i) {
    dataset.observations[i] =
        load_matrix_csv(dir + "/modality_" + std::to_string(i) + ".csv");
    if (dataset.observations[i].rows() != dataset.labels.size() ||
        dataset.observations[i].cols() != dataset.truth.spec.raw_dim)
      throw std::runtime_error(dir + ": modality file shape mismatch");
  }
  return dataset;
}

}  // namespace pcicorr
