#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nnl/network.hpp"
#include "nnl/optim.hpp"

namespace nnl {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  double h = 1e-6;
  std::size_t batch = 3;
  std::size_t steps = 5;           // unrolled steps for recurrent cells
  std::size_t max_per_tensor = 0;  // 0 probes every entry
  bool corrupt = false;            // flip the sign of the first analytic tensor
};

struct GradcheckCase {
  std::string name;
  std::string architecture;
  GradCheckReport report;
};

/// Finite differences against backprop for one network on a random batch.
/// Parameters start from Xavier plus Gaussian noise so biases, batch-norm
/// matrices and tau are all generic. The loss is a random linear functional
/// of the output (softmax_nll with random labels for a softmax head), and the
/// input batch is checked as the extra entry "input". Dropout reuses one
/// seeded mask for every evaluation.
GradcheckCase gradcheck_network(const NetworkSpec& spec, const GradcheckOptions& options);

/// Small networks covering every layer family; see gradcheck_suite_specs.
std::vector<std::pair<std::string, std::string>> gradcheck_suite_specs();
std::vector<GradcheckCase> gradcheck_suite(const GradcheckOptions& options);

}  // namespace nnl
