#include "ck/error.hpp"

namespace ck {

const char* errc_name(errc code) {
  switch (code) {
    case errc::invalid_config: return "InvalidConfig";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::rank_deficient: return "RankDeficient";
    case errc::separation: return "Separation";
    case errc::non_convergence: return "NonConvergence";
    case errc::empty_subpopulation: return "EmptySubpopulation";
    case errc::unsupported_world: return "UnsupportedWorld";
    case errc::illegal_world: return "IllegalWorld";
    case errc::missing_column: return "MissingColumn";
    case errc::positivity_violation: return "PositivityViolation";
    case errc::empty_arm_in_stratum: return "EmptyArmInStratum";
    case errc::zero_variance: return "ZeroVariance";
    case errc::unmatched_units: return "UnmatchedUnits";
    case errc::weak_or_null_first_stage: return "WeakOrNullFirstStage";
    case errc::too_many_failed_replicates: return "TooManyFailedReplicates";
    case errc::io_failure: return "IoFailure";
    case errc::empty_input: return "EmptyInput";
    case errc::unknown_method: return "UnknownMethod";
  }
  return "UnknownError";
}

}  // namespace ck
