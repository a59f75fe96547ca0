#pragma once

#include "krlab/config.hpp"
#include "krlab/record.hpp"

namespace krlab {

ExperimentRecord transport_selftest(const RunConfig& config);
ExperimentRecord e1_example(const RunConfig& config);
ExperimentRecord oscillatory_example(const RunConfig& config);
ExperimentRecord prop1_sweep(const RunConfig& config);
ExperimentRecord lemma4_suite(const RunConfig& config);
ExperimentRecord uniqueness_experiment(const RunConfig& config);
ExperimentRecord stability_experiment(const RunConfig& config);
ExperimentRecord pde_convergence(const RunConfig& config);

/// Dispatches on config.experiment after validation.
ExperimentRecord run_experiment(const RunConfig& config);

/// psi_1(delta) / |log delta| at 1e-8 over the same ratio at 1e-2, for the
/// default modulus.
double psi_one_decay_ratio();

}  // namespace krlab
