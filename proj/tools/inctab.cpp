#include <unistd.h>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "inctab/bench.hpp"
#include "inctab/engine.hpp"
#include "inctab/stack.hpp"

using namespace inctab;

namespace {

constexpr std::size_t kStackBytes = std::size_t{1} << 30;

enum Exit { kOk = 0, kUsage = 1, kLoad = 2, kEval = 3, kTimeout = 4 };

int exit_code(const Error& e, bool loading) {
    if (e.kind() == ErrorKind::Timeout) return kTimeout;
    return loading ? kLoad : kEval;
}

std::string strip_dot(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

void print_answers(const std::vector<QueryAnswer>& answers, std::ostream& os) {
    if (answers.empty()) {
        os << "no\n";
        return;
    }
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const QueryAnswer& a = answers[i];
        std::string line;
        for (const auto& [name, value] : a.bindings) {
            if (!line.empty()) line += ", ";
            line += name + " = " + to_string(value);
        }
        if (line.empty()) line = a.truth == TruthValue::Undefined ? "undefined" : "yes";
        else if (a.truth == TruthValue::Undefined) line += " (undefined)";
        os << line << (i + 1 < answers.size() ? " ;" : "") << "\n";
    }
}

void print_tables(const Engine& e, std::ostream& os) {
    for (const TableInfo& t : e.tables()) {
        os << to_string(t.subgoal) << "  " << status_name(t.status) << "  answers=" << t.answers
           << " conditional=" << t.conditional;
        if (t.incremental) os << " falsecount=" << t.falsecount;
        if (t.occp) os << " occp=" << t.occp;
        os << "\n";
    }
}

void print_idg(const Engine& e, std::ostream& os) {
    IdgStats s = e.idg().stats();
    os << "table nodes: " << s.table_nodes << ", leaf nodes: " << s.leaf_nodes << ", edges: " << s.edges
       << ", invalid: " << s.invalid_nodes << "\n";
    for (const std::string& line : e.idg_edges()) os << "  " << line << "\n";
}

void print_stats(const Engine& e, std::ostream& os) {
    const EngineStats& s = e.stats();
    os << "steps " << s.steps << "\nanswers_derived " << s.answers_derived << "\ntables_created " << s.tables_created
       << "\nlazy_calls " << s.lazy_calls << "\nreevaluations " << s.reevaluations << " (changed "
       << s.reevals_changed << ", unchanged " << s.reevals_unchanged << ")\nsimplification_runs "
       << s.simplification_runs << "\nsimplified_answers " << s.simplified_answers << "\npreserved_views "
       << s.preserved_views << "\nupdates " << s.updates << "\ninvalidated_nodes " << s.invalidated_nodes
       << "\nstore_bytes " << e.store_bytes() << "\n";
}

// Returns false on :quit.
bool repl_command(Engine& e, const std::string& raw, std::ostream& os) {
    std::string line = raw;
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) return true;
    line = line.substr(first);
    if (line[0] == '%') return true;
    try {
        if (line[0] == ':') {
            auto sp = line.find_first_of(" \t");
            std::string cmd = line.substr(0, sp);
            std::string arg = sp == std::string::npos ? "" : strip_dot(line.substr(sp + 1));
            if (cmd == ":quit" || cmd == ":q") return false;
            if (cmd == ":assert") {
                UpdateResult r = e.assert_text(arg);
                os << "asserted; invalidated " << r.invalidated.size() << " table(s)\n";
            } else if (cmd == ":retract") {
                UpdateResult r = e.retract_text(arg);
                os << (r.applied ? "retracted" : "no matching clause") << "; invalidated " << r.invalidated.size()
                   << " table(s)\n";
            } else if (cmd == ":tables") {
                print_tables(e, os);
            } else if (cmd == ":idg") {
                print_idg(e, os);
            } else if (cmd == ":abolish") {
                if (arg.empty()) e.abolish_all_tables();
                else e.abolish_table(parse_term(arg).term);
                os << "ok\n";
            } else if (cmd == ":stats") {
                print_stats(e, os);
            } else if (cmd == ":consult") {
                e.consult_file(arg);
                os << "consulted " << arg << "\n";
            } else {
                os << "unknown command " << cmd << "\n";
            }
            return true;
        }
        if (line.rfind("?-", 0) == 0) line = line.substr(2);
        print_answers(e.query(strip_dot(line)), os);
    } catch (const Error& err) {
        os << err.what() << "\n";
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabled logic engine with incremental tabling under the well-founded semantics"};
    std::vector<std::string> consults;
    std::vector<std::string> queries;
    std::string bench;
    std::vector<std::string> scales;
    std::uint64_t seed = 1;
    std::optional<double> timeout;
    std::string report;
    bool no_oracle = false;
    std::string gen_graph_spec;
    std::string pred = "edge";
    std::string out;
    app.add_option("--consult", consults, "Program file to load (repeatable)");
    app.add_option("--query", queries, "Goal to run after loading (repeatable)");
    app.add_option("--bench", bench, "Run a bundled benchmark: reach, ureach, social, social_specialized");
    app.add_option("--scale", scales, "Benchmark scale parameter K=V (repeatable)");
    app.add_option("--seed", seed, "Random seed for generated data");
    app.add_option("--timeout", timeout, "Per-phase evaluation time limit in seconds");
    app.add_option("--report", report, "Write benchmark records to this file (JSON lines)");
    app.add_flag("--no-oracle", no_oracle, "Skip from-scratch oracle checks in benchmarks");
    app.add_option("--gen-graph", gen_graph_spec, "Write a random graph N:M as facts");
    app.add_option("--pred", pred, "Predicate name for --gen-graph");
    app.add_option("--out", out, "Output file for --gen-graph (default stdout)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    int rc = kOk;
    run_with_stack(kStackBytes, [&] {
        if (!gen_graph_spec.empty()) {
            auto colon = gen_graph_spec.find(':');
            if (colon == std::string::npos) {
                std::cerr << "--gen-graph expects N:M\n";
                rc = kUsage;
                return;
            }
            GraphSpec g;
            try {
                g.nodes = std::stoull(gen_graph_spec.substr(0, colon));
                g.edges = std::stoull(gen_graph_spec.substr(colon + 1));
            } catch (const std::exception&) {
                std::cerr << "--gen-graph expects N:M\n";
                rc = kUsage;
                return;
            }
            if (g.nodes == 0 || g.edges == 0) {
                std::cerr << "--gen-graph needs N, M > 0\n";
                rc = kUsage;
                return;
            }
            g.seed = seed;
            std::string text = graph_facts(g, pred);
            if (out.empty()) {
                std::cout << text;
            } else {
                std::ofstream f(out);
                if (!f) {
                    std::cerr << "cannot write " << out << "\n";
                    rc = kUsage;
                    return;
                }
                f << text;
            }
            return;
        }

        if (!bench.empty()) {
            BenchOptions o;
            o.name = bench;
            o.seed = seed;
            o.timeout = timeout;
            o.oracle = !no_oracle;
            for (const std::string& kv : scales) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    std::cerr << "--scale expects K=V, got " << kv << "\n";
                    rc = kUsage;
                    return;
                }
                o.scale[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            std::ofstream file;
            if (!report.empty()) {
                file.open(report);
                if (!file) {
                    std::cerr << "cannot write " << report << "\n";
                    rc = kUsage;
                    return;
                }
            }
            try {
                BenchSummary s = run_benchmark(o, [&](const nlohmann::json& rec) {
                    std::string line = rec.dump();
                    std::cout << line << std::endl;
                    if (file) file << line << "\n";
                });
                if (s.oracle_failures > 0) rc = kEval;
                else if (s.timeouts > 0) rc = kTimeout;
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                rc = e.kind() == ErrorKind::Existence ? kUsage : exit_code(e, false);
            }
            return;
        }

        Engine engine;
        engine.set_timeout(timeout);
        for (const std::string& path : consults) {
            try {
                engine.consult_file(path);
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                rc = e.kind() == ErrorKind::Timeout ? kTimeout : kLoad;
                return;
            }
        }
        if (!queries.empty()) {
            for (const std::string& q : queries) {
                try {
                    print_answers(engine.query(strip_dot(q)), std::cout);
                } catch (const Error& e) {
                    std::cerr << e.what() << "\n";
                    rc = exit_code(e, false);
                    return;
                }
            }
            return;
        }
        std::string line;
        bool tty = isatty(0);
        if (tty) std::cout << "?- " << std::flush;
        while (std::getline(std::cin, line)) {
            if (!repl_command(engine, line, std::cout)) break;
            if (tty) std::cout << "?- " << std::flush;
        }
    });
    return rc;
}
