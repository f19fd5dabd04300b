#pragma once

#include <json.hpp>

#include "superres/basis.hpp"
#include "superres/fisher.hpp"
#include "superres/params.hpp"
#include "superres/psf.hpp"
#include "superres/simulate.hpp"

namespace superres {

/// Ordered JSON keeps key order deterministic so identical runs produce
/// byte-identical files.
using Json = nlohmann::ordered_json;

Json to_json(const SourceParams& theta);
SourceParams params_from_json(const Json& j);

/// PSF descriptor; tabulated models embed their (normalized) table.
Json to_json(const PsfModel& model);
PsfModel psf_from_json(const Json& j);

/// Fisher matrix document: parameter order, entries, kind, theta and the PSF
/// descriptor it was computed for.
Json to_json(const FisherMatrix& fisher, const SourceParams& theta, const PsfModel& model);

/// Basis cache document (x0, dimension, overlap matrix, PSF descriptor).
Json to_json(const OrthonormalBasis& basis);

/// Rebuilds the basis from the cached descriptor and verifies the stored
/// overlap matrix against the rebuilt one (AccuracyError on mismatch).
OrthonormalBasis basis_from_json(const Json& j);

Json to_json(const CrlbSummary& summary);

Json to_json(const AdaptiveResult& result, const AdaptiveSchedule& schedule,
             const SourceParams& theta_true, std::uint64_t seed);

}  // namespace superres
