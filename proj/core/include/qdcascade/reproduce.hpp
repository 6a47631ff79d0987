#pragma once

// Named end-to-end scenarios with pass/fail checks against reference values.

#include "qdcascade/field_models.hpp"
#include "qdcascade/stark.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qdcascade {

struct Check {
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

Check check_close(std::string name, double measured, double expected, double tolerance);
Check check_below(std::string name, double measured, double limit);
Check check_at_least(std::string name, double measured, double limit);

struct Report {
    std::string scenario;
    std::vector<Check> checks;
    double seconds = 0.0;

    [[nodiscard]] bool pass() const;
};

struct ReproduceOptions {
    std::uint64_t seed = 20240611;
    std::uint64_t pulses = 2'000'000;
    unsigned threads = 1;
};

/// visibility-curve, hom-pattern, replica-collapse, trion-correction, stark-table.
std::vector<std::string> const &reproduce_scenarios();

/// Runs one scenario. Throws ContractError for unknown identifiers.
Report reproduce(std::string const &scenario, ReproduceOptions const &options = {});

std::string report_to_json(Report const &report);

/// Stark parameters of the XX and X lines of the four replicas (0 to 3)
/// of the reference dot, with quoted errors.
struct ReplicaStarkRow {
    int replica = 0;
    StarkParams xx;
    StarkParams x;
    StarkParams state;  ///< tabulated biexciton-state values
};
std::vector<ReplicaStarkRow> const &replica_stark_table();

/// Replica-collapse round trip: energies generated from `master` at the
/// total field of replica n under `truth`, re-expressed in field with
/// `assumed`, and fitted by one quadratic.
struct CollapseResult {
    StarkParams fit;
    double max_residual_uev = 0.0;
    double rms_residual_uev = 0.0;
    std::size_t points = 0;
};
CollapseResult replica_collapse(StarkParams const &master, DiodeGeometry const &geom,
                                TrapFieldModel const &truth,
                                TrapFieldModel const &assumed);

} // namespace qdcascade
