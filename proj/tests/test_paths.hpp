#pragma once

#include <filesystem>

namespace test_paths {

inline std::filesystem::path fixtures() { return MORTMIX_FIXTURE_DIR; }
inline std::filesystem::path deaths_fixture() { return fixtures() / "synthetic_deaths.txt"; }
inline std::filesystem::path exposures_fixture() { return fixtures() / "synthetic_exposures.txt"; }

}  // namespace test_paths
