#include "qdcascade/pipeline.hpp"

#include "qdcascade/hom_analysis.hpp"

namespace qdcascade {

namespace {

// Detector stream ids for the two outputs of a splitter.
constexpr std::uint64_t out1_stream = 101;
constexpr std::uint64_t out2_stream = 102;

TwoDetectorRun detect_and_correlate(std::pair<PhotonStream, PhotonStream> const &outs,
                                    DetectorModel const &detector, std::uint64_t seed,
                                    PipelineOptions const &options) {
    SimulationOptions sim;
    sim.threads = options.threads;
    TwoDetectorRun run;
    run.out1 = detect(outs.first, detector, options.dark_rate, 1, seed, out1_stream, sim);
    run.out2 = detect(outs.second, detector, options.dark_rate, 2, seed, out2_stream, sim);
    CorrelationRequest const request{options.bin_width, options.window, 1, 2};
    CorrelateOptions copt;
    copt.threads = options.threads;
    run.histogram = correlate(run.out1, run.out2, request, copt);
    auto const period = outs.first.period;
    run.peaks = integrate_peaks(run.histogram, period,
                                options.half_width > 0 ? options.half_width : period / 4);
    return run;
}

} // namespace

TwoDetectorRun run_hom(PhotonStream const &photons, HomBench const &bench,
                       DetectorModel const &detector, std::uint64_t seed,
                       PipelineOptions const &options) {
    auto const outs = hom_route(photons, bench, seed);
    return detect_and_correlate(outs, detector, seed, options);
}

TwoDetectorRun run_hbt(PhotonStream const &photons, DetectorModel const &detector,
                       std::uint64_t seed, PipelineOptions const &options) {
    auto const outs = hbt_route(photons, seed);
    return detect_and_correlate(outs, detector, seed, options);
}

HomVisibilityRun simulate_hom_visibility(EmitterModel const &emitter,
                                         LaserClock const &clock,
                                         DetectorModel const &detector,
                                         HomBench bench, EmissionLine line,
                                         std::uint64_t n_pulses, std::uint64_t seed,
                                         PipelineOptions const &options) {
    SimulationOptions sim;
    sim.threads = options.threads;
    auto emission = emit_cascade(emitter, clock, n_pulses, seed, sim);
    auto const &photons = line == EmissionLine::xx ? emission.xx : emission.x;

    HomVisibilityRun out;
    bench.polarization = Polarization::co;
    out.co = run_hom(photons, bench, detector, seed + 1, options);
    bench.polarization = Polarization::cross;
    out.cross = run_hom(photons, bench, detector, seed + 2, options);
    out.a_co = normalize_center(out.co.peaks);
    out.a_cross = normalize_center(out.cross.peaks);
    out.v_raw = hom_visibility(out.a_co, out.a_cross);
    return out;
}

Measured simulate_cascade_g2(EmitterModel const &emitter, LaserClock const &clock,
                             DetectorModel const &detector, EmissionLine line,
                             std::uint64_t n_pulses, std::uint64_t seed,
                             PipelineOptions const &options) {
    SimulationOptions sim;
    sim.threads = options.threads;
    auto emission = emit_cascade(emitter, clock, n_pulses, seed, sim);
    auto const &photons = line == EmissionLine::xx ? emission.xx : emission.x;
    auto const run = run_hbt(photons, detector, seed + 1, options);
    return g2_from_peaks(run.peaks);
}

Measured simulate_coherent_g2(LaserClock const &clock, double mean_photons,
                              DetectorModel const &detector, std::uint64_t n_pulses,
                              std::uint64_t seed, PipelineOptions const &options) {
    SimulationOptions sim;
    sim.threads = options.threads;
    auto const photons = emit_coherent(clock, mean_photons, 100.0, n_pulses, seed, sim);
    auto const run = run_hbt(photons, detector, seed + 1, options);
    return g2_from_peaks(run.peaks);
}

} // namespace qdcascade
