#include "rfet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <thread>

#include "rfet/combinatorics.hpp"
#include "rfet/contract.hpp"
#include "rfet/errors.hpp"
#include "rfet/stackelberg.hpp"

namespace rfet {
namespace {

constexpr std::uint64_t kDrawStream = 0x647261770000ULL;  // "draw" + eap index
constexpr std::int64_t kBlockDraws = 1024;

// Welford accumulator with Chan's merge; blocks are merged in a fixed order
// so the result does not depend on the number of workers.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }
  double standard_error() const {
    return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  }
};

struct Realized {
  double welfare = 0.0;
  double dap = 0.0;
  double lambda = 0.0;
};

// Per-scheme state after solving: how to score one realization, plus
// whatever the scheme knows in closed form.
struct Evaluated {
  Scheme scheme = Scheme::kCentralized;
  RowStatus status = RowStatus::kOk;
  std::string error;
  std::function<Realized(std::span<const int>)> realize;
  std::optional<double> lambda;
  std::string menu_digest;
  std::optional<double> runtime_ms;
  Moments welfare, dap, price;
};

std::string digest(const ContractMenu& menu) {
  std::string out;
  for (std::size_t k = 0; k < menu.size(); ++k) {
    if (k > 0) out += '|';
    out += format_number(menu[k].q) + ':' + format_number(menu[k].pi);
  }
  return out;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

template <class Fn>
void record_errors(Evaluated& ev, Fn&& fn) {
  try {
    fn();
  } catch (const FeasibilityError& e) {
    ev.status = RowStatus::kFeasibilityError;
    ev.error = e.what();
  } catch (const SolverError& e) {
    ev.status = RowStatus::kSolverError;
    ev.error = e.what();
  } catch (const std::exception& e) {
    // Domain, enumeration-limit and config problems are all input issues.
    ev.status = RowStatus::kConfigError;
    ev.error = e.what();
  }
}

void run_monte_carlo(std::vector<Evaluated>& schemes, const Market& market,
                     std::uint64_t seed, std::int64_t draws, unsigned workers) {
  const int n_eaps = market.n_eaps();
  const int n_types = static_cast<int>(market.num_types());
  const std::int64_t n_blocks = (draws + kBlockDraws - 1) / kBlockDraws;

  struct BlockResult {
    std::vector<Moments> welfare, dap, price;
  };
  std::vector<BlockResult> blocks(static_cast<std::size_t>(n_blocks));
  std::vector<Evaluated*> active;
  for (auto& ev : schemes) {
    if (ev.status == RowStatus::kOk) active.push_back(&ev);
  }
  if (active.empty()) return;

  auto run_block = [&](std::int64_t b) {
    BlockResult& out = blocks[static_cast<std::size_t>(b)];
    out.welfare.assign(active.size(), {});
    out.dap.assign(active.size(), {});
    out.price.assign(active.size(), {});
    std::vector<int> counts(static_cast<std::size_t>(n_types));
    const std::int64_t end = std::min(draws, (b + 1) * kBlockDraws);
    for (std::int64_t d = b * kBlockDraws; d < end; ++d) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < n_eaps; ++i) ++counts[draw_type(seed, i, d, n_types)];
      for (std::size_t s = 0; s < active.size(); ++s) {
        const Realized r = active[s]->realize(counts);
        out.welfare[s].add(r.welfare);
        out.dap[s].add(r.dap);
        out.price[s].add(r.lambda);
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, n_blocks));
  if (workers <= 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t b; (b = next.fetch_add(1)) < n_blocks;) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const BlockResult& blk : blocks) {
    for (std::size_t s = 0; s < active.size(); ++s) {
      active[s]->welfare.merge(blk.welfare[s]);
      active[s]->dap.merge(blk.dap[s]);
      active[s]->price.merge(blk.price[s]);
    }
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kContract: return "contract";
    case Scheme::kStackelbergComplete: return "stackelberg-complete";
    case Scheme::kStackelbergAsym: return "stackelberg-asym";
    case Scheme::kCentralized: return "centralized";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : all_schemes()) {
    if (name == scheme_name(s)) return s;
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

std::vector<Scheme> all_schemes() {
  return {Scheme::kCentralized, Scheme::kContract, Scheme::kStackelbergComplete,
          Scheme::kStackelbergAsym};
}

const char* status_name(RowStatus s) {
  switch (s) {
    case RowStatus::kOk: return "ok";
    case RowStatus::kConfigError: return "config_error";
    case RowStatus::kSolverError: return "solver_error";
    case RowStatus::kFeasibilityError: return "feasibility_error";
  }
  return "?";
}

int exit_code(RowStatus s) {
  switch (s) {
    case RowStatus::kOk: return 0;
    case RowStatus::kConfigError: return 2;
    case RowStatus::kSolverError: return 3;
    case RowStatus::kFeasibilityError: return 4;
  }
  return 1;
}

int draw_type(std::uint64_t seed, int eap, std::int64_t draw, int n_types) {
  const double u = counter_uniform(seed, kDrawStream + static_cast<std::uint64_t>(eap),
                                   static_cast<std::uint64_t>(draw));
  return std::min(n_types - 1, static_cast<int>(u * n_types));
}

std::vector<ComparisonRow> run_comparison(const ScenarioConfig& cfg,
                                          const std::vector<Scheme>& schemes,
                                          const RunOptions& opts) {
  return run_comparison(generate_market(cfg), cfg, schemes, opts);
}

std::vector<ComparisonRow> run_comparison(const Market& market, const ScenarioConfig& cfg,
                                          const std::vector<Scheme>& schemes,
                                          const RunOptions& opts) {
  if (schemes.empty()) throw ConfigError("no schemes requested");
  cfg.validate();
  const int n_eaps = market.n_eaps();
  const int n_types = static_cast<int>(market.num_types());

  std::unique_ptr<CompositionTable> table;
  std::string table_error;
  try {
    table = std::make_unique<CompositionTable>(n_eaps, n_types);
  } catch (const std::exception& e) {
    table_error = e.what();
  }
  const bool exact = opts.exact && table &&
                     composition_count(n_eaps, n_types) <= kExactExpectationLimit;

  // Centralized always runs first: every other scheme is normalized by it.
  std::vector<Scheme> order{Scheme::kCentralized};
  for (Scheme s : schemes) {
    if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
  }

  std::vector<Evaluated> evals;
  for (Scheme s : order) {
    Evaluated ev;
    ev.scheme = s;
    const auto start = std::chrono::steady_clock::now();
    record_errors(ev, [&] {
      if (s != Scheme::kStackelbergComplete && !table) throw ConfigError(table_error);
      switch (s) {
        case Scheme::kContract:
        case Scheme::kCentralized: {
          const ContractSolution sol = s == Scheme::kContract
                                           ? solve_contract(market, *table)
                                           : solve_centralized(market, *table);
          ev.menu_digest = digest(sol.menu);
          auto q = std::make_shared<const std::vector<double>>(sol.menu.powers());
          auto menu = std::make_shared<const ContractMenu>(sol.menu);
          ev.realize = [q, menu, &market](std::span<const int> n) {
            return Realized{social_welfare(n, *q, market),
                            dap_utility_contract(n, *menu, market), 0.0};
          };
          break;
        }
        case Scheme::kStackelbergComplete:
          ev.realize = [&market](std::span<const int> n) {
            const StackelbergOutcome o = solve_complete_counts(n, market);
            return Realized{o.welfare, o.dap_utility, o.lambda_star};
          };
          break;
        case Scheme::kStackelbergAsym: {
          auto outcome = std::make_shared<const StackelbergOutcome>(
              solve_asymmetric(market, *table));
          ev.lambda = outcome->lambda_star;
          ev.realize = [outcome, &market](std::span<const int> n) {
            const RealizedOutcome r = evaluate_realization(*outcome, n, market);
            return Realized{r.welfare, r.dap_utility, outcome->lambda_star};
          };
          break;
        }
      }
    });
    if (opts.timing) ev.runtime_ms = elapsed_ms(start);
    evals.push_back(std::move(ev));
  }

  run_monte_carlo(evals, market, cfg.seed, cfg.mc_draws, opts.workers);

  std::vector<ComparisonRow> rows;
  std::optional<double> central_exact;
  double central_mc = std::nan("");
  for (Evaluated& ev : evals) {
    ComparisonRow row;
    row.scheme = ev.scheme;
    row.param = "gamma";
    row.param_value = market.gamma();
    row.status = ev.status;
    row.error = ev.error;
    row.menu_digest = ev.menu_digest;
    row.runtime_ms = ev.runtime_ms;
    if (ev.status == RowStatus::kOk) {
      row.welfare_mc = ev.welfare.mean;
      row.welfare_mc_se = ev.welfare.standard_error();
      row.dap_utility_mc = ev.dap.mean;
      row.lambda = ev.scheme == Scheme::kStackelbergComplete
                       ? std::optional<double>(ev.price.mean)
                       : ev.lambda;
      if (exact) {
        row.welfare_exact = table->expect([&](std::span<const int> n) {
          return ev.realize(n).welfare;
        });
        row.dap_utility_exact = table->expect([&](std::span<const int> n) {
          return ev.realize(n).dap;
        });
      }
    } else {
      row.welfare_mc = row.welfare_mc_se = row.dap_utility_mc = std::nan("");
    }
    if (ev.scheme == Scheme::kCentralized && ev.status == RowStatus::kOk) {
      central_exact = row.welfare_exact;
      central_mc = row.welfare_mc;
    }
    rows.push_back(std::move(row));
  }

  for (ComparisonRow& row : rows) {
    if (row.status != RowStatus::kOk) {
      row.normalized_welfare = std::nan("");
    } else if (row.welfare_exact && central_exact) {
      row.normalized_welfare = *row.welfare_exact / *central_exact;
    } else {
      row.normalized_welfare = row.welfare_mc / central_mc;
    }
  }

  // Report in the requested order; the centralized row is dropped when it
  // only served as the normalizer.
  std::vector<ComparisonRow> out;
  for (Scheme s : schemes) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [s](const ComparisonRow& r) { return r.scheme == s; });
    if (std::none_of(out.begin(), out.end(),
                     [s](const ComparisonRow& r) { return r.scheme == s; })) {
      out.push_back(*it);
    }
  }
  return out;
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "gamma") return SweepParam::kGamma;
  if (name == "n" || name == "n_eaps") return SweepParam::kEapCount;
  throw ConfigError("unknown sweep parameter '" + name + "'");
}

std::vector<ComparisonRow> sweep(const ScenarioConfig& cfg, SweepParam param,
                                 const std::vector<double>& values,
                                 const std::vector<Scheme>& schemes,
                                 const RunOptions& opts) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const char* param_name = param == SweepParam::kGamma ? "gamma" : "n_eaps";
  std::vector<ComparisonRow> rows;
  for (double v : values) {
    std::vector<ComparisonRow> group;
    try {
      ScenarioConfig point = cfg;
      if (param == SweepParam::kGamma) {
        point.gamma = v;
        point.physical.reset();
      } else {
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) {
          throw ConfigError("n_eaps must be a positive integer, got " + format_number(v));
        }
        point.n_eaps = static_cast<int>(v);
      }
      point.validate();
      group = run_comparison(point, schemes, opts);
    } catch (const std::exception& e) {
      for (Scheme s : schemes) {
        ComparisonRow row;
        row.scheme = s;
        row.status = RowStatus::kConfigError;
        row.error = e.what();
        row.welfare_mc = row.welfare_mc_se = row.dap_utility_mc =
            row.normalized_welfare = std::nan("");
        group.push_back(std::move(row));
      }
    }
    for (ComparisonRow& row : group) {
      row.param = param_name;
      row.param_value = v;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

IcProfile emit_ic_profile(const ScenarioConfig& cfg, const std::vector<int>& probes) {
  const Market market = generate_market(cfg);
  const int k_types = static_cast<int>(market.num_types());
  for (int p : probes) {
    if (p < 1 || p > k_types) {
      throw ConfigError("probe " + std::to_string(p) + " outside 1.." +
                        std::to_string(k_types));
    }
  }
  const ContractSolution sol = solve_contract(market);

  IcProfile out;
  for (int p : probes) {
    const double theta = market.theta(static_cast<std::size_t>(p - 1));
    const std::vector<double> utility = ic_profile(sol.menu, EapType(theta));
    for (int j = 0; j < k_types; ++j) {
      out.rows.push_back({p, j + 1, theta, utility[static_cast<std::size_t>(j)], j + 1 == p});
    }
    const auto own = static_cast<std::size_t>(p - 1);
    if (!peaks_at(utility, own) || utility[own] < 0.0) out.violations.push_back(p);
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : ""; };
  out << "scheme,param,value,status,welfare_exact,welfare_mc,welfare_mc_se,"
         "normalized_welfare,dap_utility_exact,dap_utility_mc,lambda,menu,runtime_ms,error\n";
  for (const ComparisonRow& r : rows) {
    out << scheme_name(r.scheme) << ',' << r.param << ',' << format_number(r.param_value)
        << ',' << status_name(r.status) << ',' << opt(r.welfare_exact) << ','
        << format_number(r.welfare_mc) << ',' << format_number(r.welfare_mc_se) << ','
        << format_number(r.normalized_welfare) << ',' << opt(r.dap_utility_exact) << ','
        << format_number(r.dap_utility_mc) << ',' << opt(r.lambda) << ','
        << r.menu_digest << ',' << opt(r.runtime_ms) << ',' << sanitize(r.error) << '\n';
  }
}

void write_ic_profile_csv(std::ostream& out, const IcProfile& profile) {
  out << "probe,item,theta,utility,own\n";
  for (const IcProfileRow& r : profile.rows) {
    out << r.probe << ',' << r.item << ',' << format_number(r.theta) << ','
        << format_number(r.utility) << ',' << (r.own ? 1 : 0) << '\n';
  }
}

}  // namespace rfet
