#pragma once

// End-to-end measurement chains: emission -> optics -> detection ->
// correlation -> peak analysis.

#include "qdcascade/correlator.hpp"
#include "qdcascade/emitter.hpp"
#include "qdcascade/interferometer.hpp"
#include "qdcascade/measured.hpp"

#include <cstdint>

namespace qdcascade {

struct PipelineOptions {
    Picoseconds bin_width = 4;
    /// Covers peaks up to |k| = 6 at 12.5 ns.
    Picoseconds window = 87'500;
    /// Peak half-width; 0 selects a quarter of the laser period.
    Picoseconds half_width = 0;
    /// Dark counts per detector, Hz.
    double dark_rate = 0.0;
    unsigned threads = 1;
};

struct TwoDetectorRun {
    TagStream out1;
    TagStream out2;
    CoincidenceHistogram histogram;
    PeakAreas peaks;
};

/// HOM: hom_route, then detection on channels 1 and 2 and correlation of
/// out2 against out1.
TwoDetectorRun run_hom(PhotonStream const &photons, HomBench const &bench,
                       DetectorModel const &detector, std::uint64_t seed,
                       PipelineOptions const &options = {});

/// HBT: 50:50 split, detection on channels 1 and 2, correlation.
TwoDetectorRun run_hbt(PhotonStream const &photons, DetectorModel const &detector,
                       std::uint64_t seed, PipelineOptions const &options = {});

struct HomVisibilityRun {
    TwoDetectorRun co;
    TwoDetectorRun cross;
    Measured a_co;
    Measured a_cross;
    Measured v_raw;
};

/// Co- and cross-polarized HOM runs of one emission line from a shared
/// cascade emission, and the raw visibility 1 - a_co / a_cross.
HomVisibilityRun simulate_hom_visibility(EmitterModel const &emitter,
                                         LaserClock const &clock,
                                         DetectorModel const &detector,
                                         HomBench bench, EmissionLine line,
                                         std::uint64_t n_pulses, std::uint64_t seed,
                                         PipelineOptions const &options = {});

/// HBT g2(0) of one cascade line.
Measured simulate_cascade_g2(EmitterModel const &emitter, LaserClock const &clock,
                             DetectorModel const &detector, EmissionLine line,
                             std::uint64_t n_pulses, std::uint64_t seed,
                             PipelineOptions const &options = {});

/// HBT g2(0) of pulsed coherent light with `mean_photons` per pulse.
Measured simulate_coherent_g2(LaserClock const &clock, double mean_photons,
                              DetectorModel const &detector, std::uint64_t n_pulses,
                              std::uint64_t seed, PipelineOptions const &options = {});

} // namespace qdcascade
