#pragma once

#include <cmath>

#include "superres/errors.hpp"

namespace superres {

/// Source parameter vector theta = (s0, s, q): geometric centroid, separation
/// and relative brightness of the two point sources. The sources sit at
/// s0 +/- s/2 with weights q and 1-q.
struct SourceParams {
    /// Coincident balanced sources; a valid placeholder state.
    SourceParams() : s0(0.0), s(0.0), q(0.5) {}

    SourceParams(double s0, double s, double q) : s0(s0), s(s), q(q) {
        if (!std::isfinite(s0) || !std::isfinite(s) || !std::isfinite(q))
            throw DomainError("params: theta must be finite");
        if (s < 0.0) throw DomainError("params: separation must be non-negative");
        if (!(q > 0.0 && q < 1.0))
            throw DomainError("params: relative brightness must lie strictly inside (0, 1)");
    }

    double s0;
    double s;
    double q;

    /// 4 q (1 - q), the intensity imbalance factor.
    double q_factor() const { return 4.0 * q * (1.0 - q); }
};

}  // namespace superres
