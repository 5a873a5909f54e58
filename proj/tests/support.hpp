#pragma once

#include "qdm/sequence.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

namespace qdm::test {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

inline ProtocolParams make_params(double t_init_ls, double t_init_conf, double t_ro, double t_mw, double t_d,
                                  double t1) {
  ProtocolParams p;
  p.t_init_ls = t_init_ls;
  p.t_init_conf = t_init_conf;
  p.t_ro_conf = t_ro;
  p.t_mw = t_mw;
  p.t_d = t_d;
  p.t1 = t1;
  return p;
}

/// The worked example used across modules: t_init = 20, t_ro = 5, t_mw = 100,
/// t_d = 0.1, t1 = 5000.
inline ProtocolParams reference_params() { return make_params(20, 20, 5, 100, 0.1, 5000); }

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

/// Replaces the whole `key = ...` line of a config text.
inline std::string with_line(std::string text, const std::string& key, const std::string& line) {
  const auto pos = text.find("\n" + key + " =");
  if (pos == std::string::npos) throw std::invalid_argument("no key " + key);
  const auto end = text.find('\n', pos + 1);
  text.replace(pos + 1, end - pos - 1, line);
  return text;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qdm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace qdm::test
