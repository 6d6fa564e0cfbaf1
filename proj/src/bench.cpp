#include "inctab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "inctab/engine.hpp"

namespace inctab {

const std::map<std::string, std::string>& program_sources();

// ---------------------------------------------------------------------------
// PRNG and graphs

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

Prng::Prng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed ^ mix64(stream + 0x9e3779b97f4a7c15ULL))), inc_((mix64(stream) << 1) | 1) {}

std::uint64_t Prng::next() {
    state_ = state_ * 6364136223846793005ULL + inc_;
    std::uint64_t x = state_;
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return x;
}

std::vector<std::pair<std::int64_t, std::int64_t>> gen_graph(const GraphSpec& spec) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    out.reserve(spec.edges);
    Prng rng(spec.seed);
    for (std::uint64_t i = 0; i < spec.edges; ++i) {
        auto a = static_cast<std::int64_t>(rng.below(spec.nodes) + 1);
        auto b = static_cast<std::int64_t>(rng.below(spec.nodes) + 1);
        out.emplace_back(a, b);
    }
    return out;
}

std::string graph_facts(const GraphSpec& spec, const std::string& pred) {
    std::string s;
    for (auto [a, b] : gen_graph(spec)) s += pred + "(" + std::to_string(a) + "," + std::to_string(b) + ").\n";
    return s;
}

const std::string& bundled_program(const std::string& name) {
    const auto& m = program_sources();
    auto it = m.find(name);
    if (it == m.end()) raise(ErrorKind::Existence, "no bundled program " + name);
    return it->second;
}

std::vector<std::string> bundled_program_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : program_sources()) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark harness

namespace {

using Json = nlohmann::json;
using Edge = std::pair<std::int64_t, std::int64_t>;

struct Timer {
    std::chrono::steady_clock::time_point wall = std::chrono::steady_clock::now();
    std::clock_t cpu = std::clock();

    double wall_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
    }
    double cpu_s() const { return double(std::clock() - cpu) / CLOCKS_PER_SEC; }
};

std::uint64_t scale_int(const BenchOptions& o, const std::string& key, std::uint64_t def) {
    auto it = o.scale.find(key);
    if (it == o.scale.end()) return def;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        raise(ErrorKind::Type, "scale " + key + " expects an integer, got " + it->second);
    }
}

std::vector<std::string> scale_list(const BenchOptions& o, const std::string& key, const std::string& def) {
    auto it = o.scale.find(key);
    std::string s = it == o.scale.end() ? def : it->second;
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

Term fact(const std::string& pred, std::vector<Term> args) { return Term::compound(pred, std::move(args)); }

Term int_edge(const std::string& pred, Edge e) {
    return fact(pred, {Term::integer(e.first), Term::integer(e.second)});
}

struct Counts {
    std::size_t answers = 0;
    std::size_t undefined = 0;
};

Counts count_answers(Engine& e, const Term& goal) {
    Counts c;
    Cursor cur = e.open(goal);
    while (auto a = cur.next()) {
        ++c.answers;
        if (a->truth == TruthValue::Undefined) ++c.undefined;
    }
    return c;
}

class Reporter {
public:
    Reporter(const BenchOptions& o, const std::function<void(const Json&)>& sink, BenchSummary& s)
        : opts_(o), sink_(sink), summary_(s) {}

    Json base(const std::string& program, const std::string& config, const std::string& phase) const {
        Json j;
        j["schema"] = kBenchSchema;
        j["program"] = program;
        j["config"] = config;
        j["phase"] = phase;
        j["seed"] = opts_.seed;
        return j;
    }

    void engine_fields(Json& j, const Engine& e) const {
        IdgStats s = e.idg().stats();
        std::size_t tables = 0;
        for (const TableInfo& t : e.tables())
            if (t.status == TableStatus::Completed) ++tables;
        j["tables"] = tables;
        j["idg_nodes"] = s.table_nodes + s.leaf_nodes;
        j["idg_leaves"] = s.leaf_nodes;
        j["idg_edges"] = s.edges;
        j["store_bytes"] = e.store_bytes();
        j["steps"] = e.steps();
    }

    void timing(Json& j, const Timer& t) const {
        j["wall_s"] = t.wall_s();
        j["cpu_s"] = t.cpu_s();
    }

    void emit(Json j) {
        j["status"] = j.value("status", "ok");
        if (j["status"] == "timeout") ++summary_.timeouts;
        if (j.contains("oracle") && j["oracle"] == "mismatch") ++summary_.oracle_failures;
        ++summary_.records;
        sink_(j);
    }

    void timeout(const std::string& program, const std::string& config, const std::string& phase, const Timer& t,
                 const std::string& msg) {
        Json j = base(program, config, phase);
        timing(j, t);
        j["status"] = "timeout";
        j["message"] = msg;
        emit(j);
    }

private:
    const BenchOptions& opts_;
    const std::function<void(const Json&)>& sink_;
    BenchSummary& summary_;
};

// Transitive closure size (paths of length >= 1).
std::size_t closure_size(const std::vector<Edge>& edges) {
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> succ;
    for (auto [a, b] : edges) succ[a].push_back(b);
    std::size_t total = 0;
    for (const auto& [src, out] : succ) {
        std::unordered_set<std::int64_t> seen;
        std::vector<std::int64_t> stack(out.begin(), out.end());
        while (!stack.empty()) {
            std::int64_t x = stack.back();
            stack.pop_back();
            if (!seen.insert(x).second) continue;
            auto it = succ.find(x);
            if (it != succ.end())
                for (std::int64_t y : it->second) stack.push_back(y);
        }
        total += seen.size();
    }
    return total;
}

std::vector<Edge> random_edges(Prng& rng, std::uint64_t nodes, std::uint64_t n) {
    std::vector<Edge> out;
    for (std::uint64_t i = 0; i < n; ++i) {
        auto a = static_cast<std::int64_t>(rng.below(nodes) + 1);
        auto b = static_cast<std::int64_t>(rng.below(nodes) + 1);
        out.emplace_back(a, b);
    }
    return out;
}

void bench_reach(const BenchOptions& o, Reporter& rep) {
    const std::uint64_t n = scale_int(o, "N", 10000);
    const std::uint64_t m = scale_int(o, "M", std::max<std::uint64_t>(1, n / 2));
    const std::uint64_t oracle_max = scale_int(o, "oracle_max", 20000);
    std::vector<std::uint64_t> batches;
    for (const std::string& b : scale_list(o, "batches", "10,100,1000")) batches.push_back(std::stoull(b));
    const std::vector<std::string> configs = scale_list(o, "configs", "plain,incremental,abstract");
    const Term goal = parse_term("reach(X,Y)").term;

    for (const std::string& config : configs) {
        std::string program = config == "plain" ? "reach_plain" : config == "abstract" ? "reach_abs" : "reach";
        if (config != "plain" && config != "incremental" && config != "abstract")
            raise(ErrorKind::Existence, "unknown reach config " + config);
        Engine e;
        e.set_timeout(o.timeout);
        e.consult_text(bundled_program(program), program);
        std::vector<Edge> edges = gen_graph({n, m, o.seed});
        for (const Edge& x : edges) e.assert_clause(int_edge("edge", x));

        Timer t;
        try {
            Counts c = count_answers(e, goal);
            Json j = rep.base("reach", config, "initial_query");
            rep.timing(j, t);
            j["nodes"] = n;
            j["edges"] = m;
            j["answers"] = c.answers;
            rep.engine_fields(j, e);
            if (o.oracle && n <= oracle_max) j["oracle"] = closure_size(edges) == c.answers ? "ok" : "mismatch";
            rep.emit(j);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::Timeout) throw;
            rep.timeout("reach", config, "initial_query", t, err.what());
            continue;
        }

        Prng rng(o.seed, 1);
        for (std::uint64_t b : batches) {
            std::vector<Edge> extra = random_edges(rng, n, b);
            Timer tu;
            for (const Edge& x : extra) e.assert_clause(int_edge("edge", x));
            if (config == "plain") e.abolish_all_tables();
            edges.insert(edges.end(), extra.begin(), extra.end());
            Json ju = rep.base("reach", config, "update_invalidate");
            rep.timing(ju, tu);
            ju["batch"] = b;
            ju["invalid_nodes"] = e.idg().stats().invalid_nodes;
            ju["steps"] = e.steps();
            rep.emit(ju);

            Timer tq;
            try {
                Counts c = count_answers(e, goal);
                Json j = rep.base("reach", config, "requery");
                rep.timing(j, tq);
                j["batch"] = b;
                j["answers"] = c.answers;
                rep.engine_fields(j, e);
                if (o.oracle && n <= oracle_max) j["oracle"] = closure_size(edges) == c.answers ? "ok" : "mismatch";
                rep.emit(j);
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::Timeout) throw;
                rep.timeout("reach", config, "requery", tq, err.what());
                break;
            }
        }
    }
}

// ureach truth by construction: true iff some edge_1 step followed by
// edge* reaches Y; undefined iff only an edge first step does.
std::map<Edge, TruthValue> ureach_oracle(const std::vector<Edge>& edges, const std::vector<Edge>& edges1) {
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> succ;
    for (auto [a, b] : edges) succ[a].push_back(b);
    auto reach_from = [&](std::int64_t z) {
        std::unordered_set<std::int64_t> seen{z};
        std::vector<std::int64_t> stack{z};
        while (!stack.empty()) {
            std::int64_t x = stack.back();
            stack.pop_back();
            auto it = succ.find(x);
            if (it == succ.end()) continue;
            for (std::int64_t y : it->second)
                if (seen.insert(y).second) stack.push_back(y);
        }
        return seen;
    };
    std::map<Edge, TruthValue> out;
    for (auto [x, z] : edges1)
        for (std::int64_t y : reach_from(z)) out[{x, y}] = TruthValue::True;
    for (auto [x, z] : edges)
        for (std::int64_t y : reach_from(z)) out.emplace(Edge{x, y}, TruthValue::Undefined);
    return out;
}

std::map<Edge, TruthValue> ureach_engine(Engine& e) {
    std::map<Edge, TruthValue> out;
    Cursor cur = e.open(parse_term("ureach(X,Y)").term);
    while (auto a = cur.next()) out[{a->tuple[0].int_value(), a->tuple[1].int_value()}] = a->truth;
    return out;
}

void bench_ureach(const BenchOptions& o, Reporter& rep) {
    const std::uint64_t n = scale_int(o, "N", 2000);
    const std::uint64_t m = scale_int(o, "M", std::max<std::uint64_t>(1, n / 2));
    const std::uint64_t oracle_max = scale_int(o, "oracle_max", 20000);
    std::vector<std::uint64_t> batches;
    for (const std::string& b : scale_list(o, "batches", "50,100")) batches.push_back(std::stoull(b));

    Engine e;
    e.set_timeout(o.timeout);
    e.consult_text(bundled_program("ureach"), "ureach");
    std::vector<Edge> edges = gen_graph({n, m, o.seed});
    std::vector<Edge> edges1;
    for (const Edge& x : edges) e.assert_clause(int_edge("edge", x));

    auto record = [&](const std::string& phase, const Timer& t, std::uint64_t batch) {
        auto got = ureach_engine(e);
        Json j = rep.base("ureach", "incremental", phase);
        rep.timing(j, t);
        if (batch) j["batch"] = batch;
        std::size_t undef = 0;
        for (const auto& [k, v] : got)
            if (v == TruthValue::Undefined) ++undef;
        j["answers"] = got.size();
        j["undefined"] = undef;
        j["true"] = got.size() - undef;
        rep.engine_fields(j, e);
        if (o.oracle && n <= oracle_max) j["oracle"] = ureach_oracle(edges, edges1) == got ? "ok" : "mismatch";
        rep.emit(j);
    };

    Timer t;
    try {
        record("initial_query", t, 0);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::Timeout) throw;
        rep.timeout("ureach", "incremental", "initial_query", t, err.what());
        return;
    }
    Prng rng(o.seed, 2);
    for (std::uint64_t b : batches) {
        std::vector<Edge> extra;
        // edge_1 facts over existing edges so known answers can strengthen.
        for (std::uint64_t i = 0; i < b; ++i) extra.push_back(edges[rng.below(edges.size())]);
        Timer tu;
        for (const Edge& x : extra) e.assert_clause(int_edge("edge_1", x));
        edges1.insert(edges1.end(), extra.begin(), extra.end());
        Json ju = rep.base("ureach", "incremental", "update_invalidate");
        rep.timing(ju, tu);
        ju["batch"] = b;
        ju["invalid_nodes"] = e.idg().stats().invalid_nodes;
        rep.emit(ju);
        Timer tq;
        try {
            record("requery", tq, b);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::Timeout) throw;
            rep.timeout("ureach", "incremental", "requery", tq, err.what());
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Social network

struct SocialPred {
    const char* name;
    int arity;
};

const SocialPred kSocialPreds[] = {
    {"friend", 2},        {"returned_needle", 3}, {"obtained_needle", 3},       {"share_needle_report", 3},
    {"sexual_partner_report", 3}, {"has_disease", 1}, {"works_for", 2}, {"may_have_unprotected_sex", 2},
    {"pastor", 2},        {"parent_of_edb", 2},   {"lives_at", 2},              {"attends_church", 2},
};

class SocialData {
public:
    SocialData(std::uint64_t people, std::uint64_t seed) : people_(people), rng_(seed, 3) {}

    Term person() { return Term::atom("p" + std::to_string(rng_.below(people_) + 1)); }
    Term person(std::uint64_t i) { return Term::atom("p" + std::to_string(i)); }
    Term place(const char* prefix, std::uint64_t n) {
        return Term::atom(std::string(prefix) + std::to_string(rng_.below(std::max<std::uint64_t>(1, n)) + 1));
    }

    Term make(const std::string& pred) {
        std::uint64_t needles = people_ / 8, locs = people_ / 10, churches = people_ / 25;
        if (pred == "friend") return fact(pred, {person(), person()});
        if (pred == "returned_needle" || pred == "obtained_needle")
            return fact(pred, {person(), place("n", needles), place("l", locs)});
        if (pred == "share_needle_report" || pred == "sexual_partner_report")
            return fact(pred, {person(), person(), person()});
        if (pred == "has_disease") return fact(pred, {person()});
        if (pred == "works_for" || pred == "may_have_unprotected_sex") return fact(pred, {person(), person()});
        if (pred == "pastor") return fact(pred, {place("c", churches), person()});
        if (pred == "parent_of_edb") {
            // Parents have larger numbers than children, so parent chains are finite.
            std::uint64_t child = rng_.below(people_ - 1) + 1;
            std::uint64_t parent = child + 1 + rng_.below(people_ - child);
            return fact(pred, {person(child), person(parent)});
        }
        if (pred == "lives_at") return fact(pred, {person(), place("l", locs)});
        if (pred == "attends_church") return fact(pred, {person(), place("c", churches)});
        raise(ErrorKind::Existence, "unknown EDB predicate " + pred);
    }

    // `n` facts not already in `have`.
    std::vector<Term> fresh(const std::string& pred, std::size_t n, const std::set<std::string>& have) {
        std::vector<Term> out;
        std::set<std::string> mine;
        for (std::size_t tries = 0; out.size() < n && tries < n * 50; ++tries) {
            Term f = make(pred);
            std::string key = to_string(f);
            if (have.count(key) || !mine.insert(key).second) continue;
            out.push_back(f);
        }
        return out;
    }

    std::uint64_t people() const { return people_; }

private:
    std::uint64_t people_;
    Prng rng_;
};

using AnswerSet = std::vector<std::string>;

AnswerSet social_answers(Engine& e, const std::vector<std::string>& queries) {
    AnswerSet out;
    for (const std::string& q : queries)
        for (const QueryAnswer& a : e.query(q)) {
            std::string s = q + " ->";
            for (const auto& [name, v] : a.bindings) s += " " + name + "=" + to_string(v);
            s += a.truth == TruthValue::Undefined ? " undefined" : " true";
            out.push_back(s);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void bench_social(const BenchOptions& o, Reporter& rep, const std::string& program) {
    const std::uint64_t edb = scale_int(o, "edb", 2000);
    const std::uint64_t people = scale_int(o, "people", std::max<std::uint64_t>(50, edb / 5));
    const std::uint64_t nqueries = scale_int(o, "queries", 20);
    std::vector<std::uint64_t> batches;
    for (const std::string& b : scale_list(o, "batches", "25,125")) batches.push_back(std::stoull(b));
    std::vector<std::string> preds = scale_list(o, "preds", "");
    if (preds.empty())
        for (const SocialPred& p : kSocialPreds) preds.push_back(p.name);

    SocialData data(people, o.seed);
    std::set<std::string> have;
    std::vector<Term> facts;
    const std::size_t per_pred = edb / std::size(kSocialPreds);
    for (const SocialPred& p : kSocialPreds)
        for (const Term& f : data.fresh(p.name, per_pred, have)) {
            have.insert(to_string(f));
            facts.push_back(f);
        }

    std::vector<std::string> queries;
    {
        Prng qr(o.seed, 4);
        std::set<std::uint64_t> chosen;
        while (chosen.size() < std::min<std::uint64_t>(nqueries, people)) chosen.insert(qr.below(people) + 1);
        for (std::uint64_t i : chosen) queries.push_back("good_influence(p" + std::to_string(i) + ",Y)");
    }

    const std::string& text = bundled_program(program);
    Engine e;
    e.set_timeout(o.timeout);
    e.consult_text(text, program);
    for (const Term& f : facts) e.assert_clause(f);

    auto oracle = [&](const AnswerSet& got) -> std::string {
        if (!o.oracle) return "skipped";
        Engine fresh;
        fresh.set_timeout(o.timeout);
        fresh.consult_text(text, program);
        for (const std::string& k : have) fresh.assert_clause(parse_term(k).term);
        return social_answers(fresh, queries) == got ? "ok" : "mismatch";
    };

    Timer t;
    double initial = 0;
    try {
        AnswerSet got = social_answers(e, queries);
        initial = t.wall_s();
        Json j = rep.base(program, "incremental", "initial_query");
        rep.timing(j, t);
        j["edb_facts"] = have.size();
        j["people"] = people;
        j["queries"] = queries.size();
        j["answers"] = got.size();
        rep.engine_fields(j, e);
        rep.emit(j);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::Timeout) throw;
        rep.timeout(program, "incremental", "initial_query", t, err.what());
        return;
    }

    for (const std::string& pred : preds) {
        for (std::uint64_t b : batches) {
            std::vector<Term> batch = data.fresh(pred, b, have);
            for (int pass = 0; pass < 2; ++pass) {
                const bool adding = pass == 0;
                Timer tu;
                for (const Term& f : batch) {
                    if (adding) {
                        e.assert_clause(f);
                        have.insert(to_string(f));
                    } else {
                        e.retract_clause(f);
                        have.erase(to_string(f));
                    }
                }
                Json ju = rep.base(program, "incremental", "update_invalidate");
                rep.timing(ju, tu);
                ju["pred"] = pred;
                ju["batch"] = batch.size();
                ju["op"] = adding ? "assert" : "retract";
                ju["invalid_nodes"] = e.idg().stats().invalid_nodes;
                rep.emit(ju);

                Timer tq;
                try {
                    AnswerSet got = social_answers(e, queries);
                    double wall = tq.wall_s();
                    Json j = rep.base(program, "incremental", "requery");
                    rep.timing(j, tq);
                    j["pred"] = pred;
                    j["batch"] = batch.size();
                    j["op"] = adding ? "assert" : "retract";
                    j["answers"] = got.size();
                    j["initial_wall_s"] = initial;
                    j["requery_le_initial"] = wall <= initial;
                    rep.engine_fields(j, e);
                    j["oracle"] = oracle(got);
                    rep.emit(j);
                } catch (const Error& err) {
                    if (err.kind() != ErrorKind::Timeout) throw;
                    rep.timeout(program, "incremental", "requery", tq, err.what());
                    // The tables involved were abolished; later phases recompute them.
                }
            }
        }
    }
}

} // namespace

BenchSummary run_benchmark(const BenchOptions& o, const std::function<void(const Json&)>& sink) {
    BenchSummary summary;
    Reporter rep(o, sink, summary);
    if (o.name == "reach") bench_reach(o, rep);
    else if (o.name == "ureach") bench_ureach(o, rep);
    else if (o.name == "social" || o.name == "social_specialized") bench_social(o, rep, o.name);
    else raise(ErrorKind::Existence, "unknown benchmark " + o.name);
    return summary;
}

} // namespace inctab
