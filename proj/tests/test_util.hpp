#pragma once

#include "tfmlab/config.hpp"
#include "tfmlab/engine.hpp"

#include <filesystem>
#include <string>

namespace testutil {

inline std::filesystem::path SourceDir()
{
  return TFMLAB_SOURCE_DIR;
}

inline std::filesystem::path Scenario(std::string const &rel)
{
  return SourceDir() / "scenarios" / rel;
}

inline tfmlab::Game UniformGame(tfmlab::MechanismKind kind, std::size_t n, double price = 0.0, std::size_t k = 1)
{
  tfmlab::MechanismConfig m;
  m.kind   = kind;
  m.k      = k;
  m.price  = price;
  m.crypto = tfmlab::DefaultCrypto(kind);
  return {m, tfmlab::ValueDistribution::Uniform(0.0, 1.0), n};
}

// fresh, empty directory under the system temp dir
inline std::filesystem::path TempDir(std::string const &name)
{
  auto const dir = std::filesystem::temp_directory_path() / ("tfmlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// |x - target| within z standard errors
inline bool Within(double x, double target, double se, double z = 3.0)
{
  return std::abs(x - target) <= z * se;
}

}  // namespace testutil
