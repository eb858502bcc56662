// End-to-end quantization / dequantization driver with full re-verification
// of every constructed object, plus the canonical normalizer (filtered
// isomorphism search) used to compare outputs up to gauge.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ranq/rh.hpp"

namespace ranq {

struct StageLog {
    std::string name;
    bool ok = false;
    std::string detail;
    long wall_ms = 0;
};

struct RunReport {
    std::vector<StageLog> stages;
    bool ok = false;
    bool has_obstruction = false;
    Obstruction obstruction;
    std::string iso_note;

    void stage(const std::string& name, bool okflag, const std::string& detail = "",
               long ms = 0);
    // Deterministic byte-for-byte given identical inputs; timings are only
    // emitted when explicitly requested.
    std::string to_json(bool with_timings = false) const;
};

Bialgebra truncate_bialg(const Bialgebra& a, int k);
LieBialgebra truncate_lie(const LieBialgebra& g, int k);

// Filtered isomorphism search (the canonical normalizer).  The returned map
// sends source coordinates to target coordinates and is fully verified.
struct IsoResult {
    bool found = false;
    MatrixQ map;
};
IsoResult find_bialg_iso(const Bialgebra& src, const Bialgebra& dst);
IsoResult find_lie_iso(const LieBialgebra& src, const LieBialgebra& dst);

bool bialg_equal(const Bialgebra& a, const Bialgebra& b);
bool lie_equal(const LieBialgebra& a, const LieBialgebra& b);

struct QuantizeResult {
    Bialgebra out;
    RunReport report;
};
QuantizeResult quantize(const LieBialgebra& g, int order, const RhConfig& cfg = RhConfig());

struct DequantizeResult {
    LieBialgebra out;
    RunReport report;
};
DequantizeResult dequantize(const Bialgebra& a, int order, const RhConfig& cfg = RhConfig());

struct RoundtripReport {
    bool ok = false;
    bool exact = false;
    bool iso_found = false;
    RunReport forward;
    RunReport backward;
    std::string note;
};
RoundtripReport roundtrip(const LieBialgebra& g, int order, const RhConfig& cfg = RhConfig());
RoundtripReport roundtrip(const Bialgebra& a, int order, const RhConfig& cfg = RhConfig());

struct SemiclassicalReport {
    bool ok = false;
    bool bracket_side_zero = false;
    bool cobracket_side_zero = false;
    Scalar c_bracket;    // frozen at 4t
    Scalar c_cobracket;  // frozen at 2
    std::string detail;
};
// Requires qg = quantize(g, order >= 2).out (the standard gauge layout).
SemiclassicalReport semiclassical_check(const LieBialgebra& g, const Bialgebra& qg);

// |I| cap used by the CLI; RANQ_MAX_POINTS overrides, clamped to [1, 6].
int effective_max_points();

}  // namespace ranq
