#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace inctab {

/// 64-bit LCG (Knuth's MMIX constants) with an xorshift-multiply output
/// stage. Streams derived from one seed are independent sequences.
class Prng {
public:
    explicit Prng(std::uint64_t seed, std::uint64_t stream = 0);
    std::uint64_t next();
    /// Uniform in [0, n) by modulo reduction (n is small next to 2^64).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

/// G(N/M): M directed edges over nodes 1..N, sampled with replacement;
/// self loops allowed.
struct GraphSpec {
    std::uint64_t nodes = 0;
    std::uint64_t edges = 0;
    std::uint64_t seed = 1;
};

std::vector<std::pair<std::int64_t, std::int64_t>> gen_graph(const GraphSpec& spec);
/// One "pred(i,j)." line per edge.
std::string graph_facts(const GraphSpec& spec, const std::string& pred);

/// Program text shipped with the library (p_inc, wfs_example, reach, ...).
const std::string& bundled_program(const std::string& name);
std::vector<std::string> bundled_program_names();

inline constexpr const char* kBenchSchema = "inctab.bench/1";

struct BenchOptions {
    std::string name;
    std::map<std::string, std::string> scale;
    std::uint64_t seed = 1;
    std::optional<double> timeout;
    bool oracle = true;
};

struct BenchSummary {
    std::size_t records = 0;
    std::size_t oracle_failures = 0;
    std::size_t timeouts = 0;
};

/// Runs a bundled benchmark (reach, ureach, social, social_specialized),
/// passing one record per phase to `sink`.
BenchSummary run_benchmark(const BenchOptions& opts, const std::function<void(const nlohmann::json&)>& sink);

} // namespace inctab
