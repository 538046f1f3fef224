#pragma once

#include <vector>

#include "fairlens/bias_taxonomy.hpp"

namespace fairlens::detail {

std::vector<BiasEntry> build_registry();

}  // namespace fairlens::detail
