#ifndef BLOCH_FRAMES_HPP
#define BLOCH_FRAMES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bloch/homotopy.hpp"
#include "bloch/transport.hpp"

namespace bloch {

enum class FrameMethod { log, columns, log_forced };

FrameMethod frame_method_from_string(const std::string& s);
std::string to_string(FrameMethod m);

struct FrameResult {
    GaugeFrame frame;
    // Obstruction of the last transported axis: a loop for d=2, a surface
    // for d=3, a single unitary (1-point field) for d=1.
    UnitaryField obstruction;
    std::vector<int> obstruction_windings; // det windings checked before contraction
    double periodicity_residual = 0.0;     // worst wrapped mismatch over all axes
    double min_sigma = 1.0;                // transport conditioning
    double homotopy_max_step = 0.0;
    bool branch_retry = false;             // log branch shifted while rectifying
    std::vector<double> reference_margins;
    std::vector<std::string> warnings;
};

// d=1: transport along the line, absorb the obstruction logarithm evenly.
FrameResult frame_1d(const OverlapProvider& provider, const Tolerances& tol = {});

// The d=2 obstruction loop on its own: frame_1d on the k2=0 edge, transport
// of every column along k2, closure per k1. Useful for winding diagnostics
// without committing to a contraction method.
UnitaryField obstruction_loop_2d(const OverlapProvider& provider, const Tolerances& tol = {});

// d=2: frame_1d on the edge k2=0, transport each column along k2, contract
// the obstruction loop with the chosen method and apply it with t = k2.
FrameResult frame_2d(const OverlapProvider& provider, FrameMethod method, std::uint64_t seed,
                     const Tolerances& tol = {});

// d=3: frame_2d on the face k3=0, transport along k3, contract the
// obstruction surface (columns only) and apply it with t = k3.
FrameResult frame_3d(const OverlapProvider& provider, FrameMethod method, std::uint64_t seed,
                     const Tolerances& tol = {});

} // namespace bloch

#endif
