#include "pcicorr/config.hpp"

#include "pcicorr/csvio.hpp"

#include <sstream>
#include <stdexcept>

namespace pcicorr {

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.modalities = 4;
  spec.raw_dim = 16;
  spec.feature_dim = 16;
  spec.samples = 4096;
  spec.subsets = parse_subsets("0,1:2:0.8; 2,3:2:0.8; 0,1,2,3:4:0.65");
  spec.private_noise = 0.25;
  spec.classes = 4;
  spec.seed = 7;
  return spec;
}

PgdConfig RunConfig::pgd(int dims) const {
  PgdConfig cfg;
  cfg.step_size = alpha;
  cfg.sum_threshold = c ? *c : static_cast<double>(dims) / 4.0;
  cfg.tolerable_error = e ? *e : 0.01 * cfg.sum_threshold;
  cfg.bisect_lo = b1;
  cfg.bisect_hi = b2;
  cfg.max_iterations = max_iterations;
  cfg.stop_tolerance = stop_tolerance;
  cfg.validate();
  return cfg;
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  out << "synth.modalities = " << synth.modalities << '\n'
      << "synth.raw_dim = " << synth.raw_dim << '\n'
      << "synth.feature_dim = " << synth.feature_dim << '\n'
      << "synth.samples = " << synth.samples << '\n'
      << "synth.subsets = " << format_subsets(synth.subsets) << '\n'
      << "synth.private_noise = " << format_double(synth.private_noise) << '\n'
      << "synth.classes = " << synth.classes << '\n'
      << "synth.seed = " << synth.seed << '\n'
      << "pgd.alpha = " << format_double(alpha) << '\n'
      << "pgd.c = " << (c ? format_double(*c) : "auto (feature_dim / 4)")
      << '\n'
      << "pgd.e = " << (e ? format_double(*e) : "auto (c / 100)") << '\n'
      << "pgd.b1 = " << format_double(b1) << '\n'
      << "pgd.b2 = " << (b2 ? format_double(*b2) : "auto (max weight)")
      << '\n'
      << "pgd.max_iterations = " << max_iterations << '\n'
      << "pgd.stop_tolerance = " << format_double(stop_tolerance) << '\n'
      << "train.theta = " << format_double(train.theta) << '\n'
      << "train.learning_rate = " << format_double(train.learning_rate)
      << '\n'
      << "train.batch_size = " << train.batch_size << '\n'
      << "train.epochs = " << train.epochs << '\n'
      << "train.mask_update_cadence = " << train.mask_update_cadence << '\n'
      << "train.seed = " << train.seed << '\n'
      << "io.out_dir = " << out_dir << '\n'
      << "io.dataset_dir = " << dataset_dir << '\n';
  return out.str();
}

RunConfig parse_run_config(const std::string& text,
                           const std::string& origin) {
  RunConfig cfg;
  cfg.synth = default_synth_spec();
  cfg.train.epochs = 50;

  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);

    const auto fail = [&](const std::string& why) {
      std::ostringstream msg;
      msg << origin << ':' << line_no << ": " << why;
      throw std::invalid_argument(msg.str());
    };

    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "synth" && section != "pgd" && section != "train" &&
          section != "io")
        fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    const auto vfirst = value.find_first_not_of(" \t");
    value = vfirst == std::string::npos ? "" : value.substr(vfirst);
    if (section.empty()) fail("key outside any section");
    if (value.empty()) fail("empty value for key '" + key + "'");

    const auto to_long = [&](const std::string& v) -> long {
      try {
        std::size_t pos = 0;
        const long r = std::stol(v, &pos);
        if (pos == v.size()) return r;
      } catch (const std::exception&) {
      }
      fail("bad integer '" + v + "' for key '" + key + "'");
      return 0;  // unreachable
    };
    const auto to_double = [&](const std::string& v) -> double {
      try {
        std::size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos == v.size()) return r;
      } catch (const std::exception&) {
      }
      fail("bad number '" + v + "' for key '" + key + "'");
      return 0.0;  // unreachable
    };

    if (section == "synth") {
      if (key == "k") cfg.synth.modalities = static_cast<int>(to_long(value));
      else if (key == "d_raw") cfg.synth.raw_dim = static_cast<int>(to_long(value));
      else if (key == "m") cfg.synth.feature_dim = static_cast<int>(to_long(value));
      else if (key == "n") cfg.synth.samples = to_long(value);
      else if (key == "subsets") cfg.synth.subsets = parse_subsets(value);
      else if (key == "private_noise") cfg.synth.private_noise = to_double(value);
      else if (key == "classes") cfg.synth.classes = static_cast<int>(to_long(value));
      else if (key == "seed") cfg.synth.seed = static_cast<std::uint64_t>(to_long(value));
      else fail("unknown key '" + key + "' in [synth]");
    } else if (section == "pgd") {
      if (key == "alpha") cfg.alpha = to_double(value);
      else if (key == "c") cfg.c = to_double(value);
      else if (key == "e") cfg.e = to_double(value);
      else if (key == "b1") cfg.b1 = to_double(value);
      else if (key == "b2") cfg.b2 = to_double(value);
      else if (key == "max_iterations") cfg.max_iterations = static_cast<int>(to_long(value));
      else if (key == "stop_tolerance") cfg.stop_tolerance = to_double(value);
      else fail("unknown key '" + key + "' in [pgd]");
    } else if (section == "train") {
      if (key == "theta") cfg.train.theta = to_double(value);
      else if (key == "learning_rate") cfg.train.learning_rate = to_double(value);
      else if (key == "batch_size") cfg.train.batch_size = static_cast<int>(to_long(value));
      else if (key == "epochs") cfg.train.epochs = static_cast<int>(to_long(value));
      else if (key == "mask_update_cadence") cfg.train.mask_update_cadence = static_cast<int>(to_long(value));
      else if (key == "seed") cfg.train.seed = static_cast<std::uint64_t>(to_long(value));
      else fail("unknown key '" + key + "' in [train]");
    } else {  // io
      if (key == "out_dir") cfg.out_dir = value;
      else if (key == "dataset_dir") cfg.dataset_dir = value;
      else fail("unknown key '" + key + "' in [io]");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path), path);
}

}  // namespace pcicorr
