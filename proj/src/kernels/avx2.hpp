#pragma once

#include "topicnav/kernels.hpp"

namespace topicnav::kernels {

// Defined only when the AVX2 translation unit is compiled in.
const KernelTable& avx2_table();

}  // namespace topicnav::kernels
