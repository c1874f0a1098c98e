#pragma once

#include <vector>

#include "ctax/system.hpp"

namespace ctax::ucct::detail {

// Generator data as the builder sees them: under the TCED relaxation g_min,
// c_min and e_min are zeroed and the former g_min range becomes a leading free
// block.
std::vector<Generator> modelled_units(const SystemData& sys,
                                      const ModelFlags& flags);

// [generator][hour] availability, zero rows for thermal units.
std::vector<std::vector<double>> renewable_matrix(const SystemData& sys,
                                                  int day);

// Block loading of a renewable unit producing `output`.
std::vector<double> renewable_blocks(const Generator& g, double output);

std::vector<int> line_from(const SystemData& sys);
std::vector<int> line_to(const SystemData& sys);

}  // namespace ctax::ucct::detail
