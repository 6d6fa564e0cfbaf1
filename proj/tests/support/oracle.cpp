#include "oracle.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace oracle {

using inctab::Prng;

// ---------------------------------------------------------------------------
// Ground programs

namespace {

// Least model of the reduct of p by `assumed`.
std::vector<char> gamma(const GroundProgram& p, const std::vector<char>& assumed) {
    std::vector<char> m(p.atoms, 0);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const GroundRule& r : p.rules) {
            if (m[r.head]) continue;
            bool ok = true;
            for (int a : r.neg)
                if (assumed[a]) ok = false;
            for (int a : r.pos)
                if (!m[a]) ok = false;
            if (ok) {
                m[r.head] = 1;
                grew = true;
            }
        }
    }
    return m;
}

} // namespace

std::vector<TruthValue> well_founded_model(const GroundProgram& p) {
    std::vector<char> t(p.atoms, 0);
    for (;;) {
        std::vector<char> next = gamma(p, gamma(p, t));
        if (next == t) break;
        t = next;
    }
    std::vector<char> u = gamma(p, t);
    std::vector<TruthValue> out(p.atoms);
    for (int a = 0; a < p.atoms; ++a)
        out[a] = t[a] ? TruthValue::True : u[a] ? TruthValue::Undefined : TruthValue::False;
    return out;
}

GroundProgram random_ground_program(Prng& rng, int atoms, int max_rules) {
    GroundProgram p;
    p.atoms = atoms;
    int n = 1 + static_cast<int>(rng.below(max_rules));
    for (int i = 0; i < n; ++i) {
        GroundRule r;
        r.head = static_cast<int>(rng.below(atoms));
        int npos = static_cast<int>(rng.below(4));
        int nneg = static_cast<int>(rng.below(3));
        for (int j = 0; j < npos; ++j) r.pos.push_back(static_cast<int>(rng.below(atoms)));
        for (int j = 0; j < nneg; ++j) r.neg.push_back(static_cast<int>(rng.below(atoms)));
        p.rules.push_back(std::move(r));
    }
    return p;
}

std::string ground_source(const GroundProgram& p, bool incremental) {
    std::string s = incremental ? ":- table p/1 as incremental.\n" : ":- table p/1.\n";
    for (const GroundRule& r : p.rules) {
        s += "p(" + std::to_string(r.head) + ")";
        std::vector<std::string> body;
        for (int a : r.pos) body.push_back("p(" + std::to_string(a) + ")");
        for (int a : r.neg) body.push_back("tnot(p(" + std::to_string(a) + "))");
        for (std::size_t i = 0; i < body.size(); ++i) s += (i == 0 ? " :- " : ", ") + body[i];
        s += ".\n";
    }
    return s;
}

// ---------------------------------------------------------------------------
// Datalog

namespace {

const char* const kVars[] = {"X", "Y", "Z"};

bool is_var(const std::string& a) { return !a.empty() && a[0] >= 'A' && a[0] <= 'Z'; }

std::string lit_text(const Lit& l) {
    if (l.undefined) return "undefined";
    std::string s = l.pred;
    if (!l.args.empty()) {
        s += "(";
        for (std::size_t i = 0; i < l.args.size(); ++i) s += (i ? "," : "") + l.args[i];
        s += ")";
    }
    return l.neg ? "tnot(" + s + ")" : s;
}

std::string atom_text(const std::string& pred, const std::vector<int>& args) {
    std::string s = pred;
    if (!args.empty()) {
        s += "(";
        for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + std::to_string(args[i]);
        s += ")";
    }
    return s;
}

} // namespace

DatalogProgram random_datalog(Prng& rng) {
    DatalogProgram p;
    p.edb = {{"e", 2}, {"f", 1}};
    p.idb = {{"p", 1}, {"q", 2}, {"r", 1}};
    p.domain = 3;
    auto random_arg = [&](const std::vector<std::string>& bound, bool fresh_ok) -> std::string {
        if (rng.below(5) == 0 || (bound.empty() && !fresh_ok)) return std::to_string(rng.below(p.domain) + 1);
        if (fresh_ok) return kVars[rng.below(3)];
        return bound[rng.below(bound.size())];
    };
    int nrules = 3 + static_cast<int>(rng.below(5));
    for (int i = 0; i < nrules; ++i) {
        Rule r;
        std::vector<std::string> bound;
        int npos = 1 + static_cast<int>(rng.below(3));
        for (int j = 0; j < npos; ++j) {
            const PredSig& s = rng.below(2) ? p.edb[rng.below(p.edb.size())] : p.idb[rng.below(p.idb.size())];
            Lit l;
            l.pred = s.name;
            for (int a = 0; a < s.arity; ++a) {
                std::string arg = random_arg(bound, true);
                if (is_var(arg) && std::find(bound.begin(), bound.end(), arg) == bound.end()) bound.push_back(arg);
                l.args.push_back(arg);
            }
            r.body.push_back(l);
        }
        if (rng.below(5) < 2) {
            const PredSig& s = p.idb[rng.below(p.idb.size())];
            Lit l;
            l.pred = s.name;
            l.neg = true;
            for (int a = 0; a < s.arity; ++a) l.args.push_back(random_arg(bound, false));
            r.body.push_back(l);
        }
        if (rng.below(10) == 0) {
            Lit u;
            u.undefined = true;
            r.body.push_back(u);
        }
        const PredSig& h = p.idb[rng.below(p.idb.size())];
        r.head.pred = h.name;
        for (int a = 0; a < h.arity; ++a) r.head.args.push_back(random_arg(bound, false));
        p.rules.push_back(std::move(r));
    }
    return p;
}

std::string datalog_source(const DatalogProgram& p) {
    auto sigs = [](const std::vector<PredSig>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].name + "/" + std::to_string(v[i].arity);
        return s;
    };
    std::string s = ":- table " + sigs(p.idb) + " as incremental.\n";
    s += ":- dynamic " + sigs(p.edb) + " as incremental.\n";
    for (const Rule& r : p.rules) {
        s += lit_text(r.head);
        for (std::size_t i = 0; i < r.body.size(); ++i) s += (i == 0 ? " :- " : ", ") + lit_text(r.body[i]);
        s += ".\n";
    }
    return s;
}

std::string fact_text(const Fact& f) { return atom_text(f.first, f.second); }

Fact random_fact(Prng& rng, const DatalogProgram& p) {
    const PredSig& s = p.edb[rng.below(p.edb.size())];
    Fact f{s.name, {}};
    for (int a = 0; a < s.arity; ++a) f.second.push_back(static_cast<int>(rng.below(p.domain) + 1));
    return f;
}

Model datalog_model(const DatalogProgram& p, const FactSet& facts) {
    std::unordered_set<std::string> edb_names;
    for (const PredSig& s : p.edb) edb_names.insert(s.name);
    std::unordered_map<std::string, int> ids;
    std::vector<std::string> names;
    auto id = [&](const std::string& a) {
        auto [it, fresh] = ids.emplace(a, static_cast<int>(names.size()));
        if (fresh) names.push_back(a);
        return it->second;
    };
    GroundProgram g;
    const int undef = id("$undefined");
    g.rules.push_back({undef, {}, {undef}});

    for (const Rule& r : p.rules) {
        std::vector<std::string> vars;
        auto note = [&](const Lit& l) {
            for (const std::string& a : l.args)
                if (is_var(a) && std::find(vars.begin(), vars.end(), a) == vars.end()) vars.push_back(a);
        };
        note(r.head);
        for (const Lit& l : r.body) note(l);
        std::vector<int> val(vars.size(), 1);
        auto ground = [&](const Lit& l) {
            std::vector<int> args;
            for (const std::string& a : l.args) {
                if (is_var(a)) args.push_back(val[std::find(vars.begin(), vars.end(), a) - vars.begin()]);
                else args.push_back(std::stoi(a));
            }
            return args;
        };
        for (;;) {
            GroundRule gr;
            bool live = true;
            for (const Lit& l : r.body) {
                if (l.undefined) {
                    gr.pos.push_back(undef);
                    continue;
                }
                std::vector<int> args = ground(l);
                if (edb_names.count(l.pred)) {
                    bool holds = facts.count({l.pred, args}) > 0;
                    if (holds == l.neg) live = false;
                    continue;
                }
                (l.neg ? gr.neg : gr.pos).push_back(id(atom_text(l.pred, args)));
            }
            if (live) {
                gr.head = id(atom_text(r.head.pred, ground(r.head)));
                g.rules.push_back(std::move(gr));
            }
            std::size_t k = 0;
            while (k < val.size() && val[k] == p.domain) val[k++] = 1;
            if (k == val.size()) break;
            ++val[k];
        }
    }
    g.atoms = static_cast<int>(names.size());
    std::vector<TruthValue> wf = well_founded_model(g);
    Model m;
    for (int a = 0; a < g.atoms; ++a)
        if (a != undef && wf[a] != TruthValue::False) m[names[a]] = wf[a];
    return m;
}

Model engine_answers(inctab::Engine& e, const std::string& goal) {
    inctab::ReadTerm rt = inctab::parse_term(goal);
    Model m;
    for (const inctab::QueryAnswer& a : e.query(rt)) {
        inctab::Substitution s;
        for (const auto& [name, value] : a.bindings)
            for (const auto& [n, v] : rt.var_names)
                if (n == name) s.bind(v, value);
        m[inctab::to_string(s.apply(rt.term))] = a.truth;
    }
    return m;
}

Model filter_model(const Model& m, const std::string& goal) {
    inctab::Term g = inctab::parse_term(goal).term;
    Model out;
    for (const auto& [atom, v] : m)
        if (inctab::unify(g, inctab::parse_term(atom).term)) out[atom] = v;
    return out;
}

// ---------------------------------------------------------------------------
// Graphs

std::set<Edge> transitive_closure(const std::vector<Edge>& edges) {
    std::map<std::int64_t, std::vector<std::int64_t>> succ;
    for (auto [a, b] : edges) succ[a].push_back(b);
    std::set<Edge> out;
    for (const auto& [src, first] : succ) {
        std::set<std::int64_t> seen;
        std::vector<std::int64_t> stack(first.begin(), first.end());
        while (!stack.empty()) {
            std::int64_t x = stack.back();
            stack.pop_back();
            if (!seen.insert(x).second) continue;
            out.insert({src, x});
            auto it = succ.find(x);
            if (it != succ.end()) stack.insert(stack.end(), it->second.begin(), it->second.end());
        }
    }
    return out;
}

std::string truth_text(TruthValue v) { return inctab::truth_name(v); }

} // namespace oracle
