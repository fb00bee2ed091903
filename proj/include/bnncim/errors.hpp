#ifndef BNNCIM_ERRORS_HPP
#define BNNCIM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bnncim {

/// Degenerate data fed to a statistic (zero variance, empty sample, ...).
struct degenerate_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A model evaluation hit a true singularity (zero current, zero t_unit, ...).
struct singularity_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Calibration data no longer matches the tile it is applied to.
struct staleness_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Optimizer diverged; carries the step at which the loss went non-finite.
struct training_failure : std::runtime_error {
    std::size_t step;
    training_failure(const std::string& what, std::size_t step_)
        : std::runtime_error(what), step(step_) {}
};

/// File could not be read/written.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Serialized artifact has an unknown or incompatible schema version.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bnncim

#endif
