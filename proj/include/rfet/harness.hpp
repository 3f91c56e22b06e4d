#pragma once

// Scheme comparison. Every scheme is evaluated on the same Monte Carlo type
// draws (common random numbers), and also exactly over all compositions
// when the composition count is small enough.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rfet/model.hpp"
#include "rfet/scenario.hpp"

namespace rfet {

enum class Scheme { kContract, kStackelbergComplete, kStackelbergAsym, kCentralized };

inline constexpr std::uint64_t kExactExpectationLimit = 100'000;

const char* scheme_name(Scheme s);
/// Accepts the CLI spellings; throws ConfigError otherwise.
Scheme parse_scheme(const std::string& name);
std::vector<Scheme> all_schemes();

enum class RowStatus { kOk, kConfigError, kSolverError, kFeasibilityError };
const char* status_name(RowStatus s);
/// 0, 2, 3 or 4.
int exit_code(RowStatus s);

struct ComparisonRow {
  Scheme scheme = Scheme::kCentralized;
  std::string param;  // "gamma" or "n_eaps"
  double param_value = 0.0;
  RowStatus status = RowStatus::kOk;
  std::string error;

  double welfare_mc = 0.0;
  double welfare_mc_se = 0.0;
  std::optional<double> welfare_exact;
  /// Divided by the centralized welfare, exact when available, else MC.
  double normalized_welfare = 0.0;
  double dap_utility_mc = 0.0;
  std::optional<double> dap_utility_exact;
  /// Stackelberg-asym: the posted price. Stackelberg-complete: the mean
  /// realized price over the draws.
  std::optional<double> lambda;
  /// Menu schemes: "q:pi" pairs separated by '|'.
  std::string menu_digest;
  std::optional<double> runtime_ms;
};

struct RunOptions {
  bool exact = true;
  /// Measure wall time per scheme; breaks byte-identical output.
  bool timing = false;
  /// 0 picks the hardware concurrency. Results do not depend on it.
  unsigned workers = 0;
};

/// Type index (0-based) of EAP `eap` in Monte Carlo draw `draw`, uniform on
/// K types. Depends on the seed, eap and draw only, so draws are shared
/// across schemes, gamma values and EAP counts.
int draw_type(std::uint64_t seed, int eap, std::int64_t draw, int n_types);

std::vector<ComparisonRow> run_comparison(const ScenarioConfig& cfg,
                                          const std::vector<Scheme>& schemes,
                                          const RunOptions& opts = {});

/// Same, on an already generated market.
std::vector<ComparisonRow> run_comparison(const Market& market, const ScenarioConfig& cfg,
                                          const std::vector<Scheme>& schemes,
                                          const RunOptions& opts = {});

enum class SweepParam { kGamma, kEapCount };
SweepParam parse_sweep_param(const std::string& name);

/// One run_comparison per value on the same type set and seed. A value that
/// cannot be run yields rows with a config error status; the sweep goes on.
std::vector<ComparisonRow> sweep(const ScenarioConfig& cfg, SweepParam param,
                                 const std::vector<double>& values,
                                 const std::vector<Scheme>& schemes,
                                 const RunOptions& opts = {});

struct IcProfileRow {
  int probe = 0;  // 1-based type index
  int item = 0;   // 1-based item index
  double theta = 0.0;
  double utility = 0.0;
  bool own = false;
};

struct IcProfile {
  std::vector<IcProfileRow> rows;
  /// Probes whose profile does not peak at their own item, or whose own
  /// utility is negative.
  std::vector<int> violations;
};

/// Solves the contract for cfg and tabulates each probe type's utility for
/// every item. Probe indices are 1-based.
IcProfile emit_ic_profile(const ScenarioConfig& cfg, const std::vector<int>& probes);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
void write_ic_profile_csv(std::ostream& out, const IcProfile& profile);

/// printf("%.12g"); "nan" and "inf" spelled out.
std::string format_number(double x);

}  // namespace rfet
