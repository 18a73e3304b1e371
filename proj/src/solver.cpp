#include "algcsp/solver.hpp"

#include <algorithm>
#include <set>

namespace algcsp {

namespace {

struct LocalConstraint {
    std::vector<int> scope;      // indices into the variable array
    std::vector<Tuple> tuples;   // live tuples
    int rel_index = 0;
    int scope_index = 0;
};

struct SearchState {
    std::vector<std::vector<Element>> domains; // per variable
    std::vector<LocalConstraint> constraints;
};

// One pass of: filter tuples against current domains (and repeated-variable
// consistency), then shrink every variable domain to the intersection of its
// incident projections. Returns false when a domain or a tuple set empties.
bool gac_fixpoint(SearchState& st) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& c : st.constraints) {
            std::vector<Tuple> kept;
            kept.reserve(c.tuples.size());
            for (const auto& t : c.tuples) {
                bool ok = true;
                for (std::size_t j = 0; j < c.scope.size() && ok; ++j) {
                    const auto& dom = st.domains[c.scope[j]];
                    if (!std::binary_search(dom.begin(), dom.end(), t[j])) ok = false;
                    for (std::size_t j2 = j + 1; j2 < c.scope.size() && ok; ++j2)
                        if (c.scope[j2] == c.scope[j] && t[j2] != t[j]) ok = false;
                }
                if (ok) kept.push_back(t);
            }
            if (kept.size() != c.tuples.size()) {
                c.tuples = std::move(kept);
                changed = true;
            }
            if (c.tuples.empty()) return false;
            for (std::size_t j = 0; j < c.scope.size(); ++j) {
                std::set<Element> seen;
                for (const auto& t : c.tuples) seen.insert(t[j]);
                auto& dom = st.domains[c.scope[j]];
                std::vector<Element> shrunk;
                for (Element e : dom)
                    if (seen.count(e)) shrunk.push_back(e);
                if (shrunk.size() != dom.size()) {
                    dom = std::move(shrunk);
                    changed = true;
                }
                if (dom.empty()) return false;
            }
        }
    }
    return true;
}

struct Problem {
    std::vector<Var> vars;
    std::map<Var, int> var_index;
    std::map<Var, DomainId> delta;
    SearchState root;
};

Problem build_problem(const InstanceStructure& inst_in, const Template& tmpl,
                      const std::map<Var, std::vector<Element>>* extra) {
    if (inst_in.scopes.size() != tmpl.relations.size())
        throw contract_error("instance and template relation counts differ");
    InstanceStructure inst = inst_in;
    inst.normalize();

    Problem p;
    p.vars = inst.variables;
    for (std::size_t i = 0; i < p.vars.size(); ++i)
        p.var_index[p.vars[i]] = static_cast<int>(i);
    p.delta = infer_delta(inst, tmpl);

    p.root.domains.resize(p.vars.size());
    for (std::size_t i = 0; i < p.vars.size(); ++i) {
        std::vector<Element> dom = tmpl.domains.elements(p.delta.at(p.vars[i]));
        if (extra) {
            auto it = extra->find(p.vars[i]);
            if (it != extra->end()) {
                std::vector<Element> cut;
                for (Element e : dom)
                    if (std::find(it->second.begin(), it->second.end(), e) !=
                        it->second.end())
                        cut.push_back(e);
                dom = std::move(cut);
            }
        }
        p.root.domains[i] = std::move(dom);
    }
    for (std::size_t l = 0; l < inst.scopes.size(); ++l) {
        for (std::size_t s = 0; s < inst.scopes[l].size(); ++s) {
            const auto& scope = inst.scopes[l][s];
            if (static_cast<int>(scope.size()) != tmpl.relations[l].arity())
                throw contract_error("scope arity does not match relation " +
                                     std::to_string(l));
            LocalConstraint c;
            for (Var v : scope) c.scope.push_back(p.var_index.at(v));
            c.tuples = tmpl.relations[l].tuples;
            c.rel_index = static_cast<int>(l);
            c.scope_index = static_cast<int>(s);
            p.root.constraints.push_back(std::move(c));
        }
    }
    return p;
}

class Searcher {
public:
    Searcher(const Problem& p, SolveMode mode) : p_(p), mode_(mode) {}

    SolveOutcome run(SearchState st) {
        if (gac_fixpoint(st)) dive(st);
        if (mode_ == SolveMode::All) {
            std::sort(out_.solutions.begin(), out_.solutions.end());
            out_.count = out_.solutions.size();
            out_.sat = !out_.solutions.empty();
        }
        return std::move(out_);
    }

private:
    int pick_variable(const SearchState& st) const {
        int best = -1;
        for (std::size_t i = 0; i < st.domains.size(); ++i) {
            if (st.domains[i].size() <= 1) continue;
            if (best < 0) { best = static_cast<int>(i); continue; }
            if (mode_ == SolveMode::First) continue; // static lowest-id order
            if (st.domains[i].size() < st.domains[best].size())
                best = static_cast<int>(i);
        }
        return best;
    }

    void record(const SearchState& st) {
        Assignment a;
        for (std::size_t i = 0; i < p_.vars.size(); ++i)
            a[p_.vars[i]] = st.domains[i][0];
        out_.sat = true;
        ++out_.count;
        if (mode_ == SolveMode::First) out_.solution = std::move(a);
        else if (mode_ == SolveMode::All) out_.solutions.push_back(std::move(a));
    }

    bool dive(const SearchState& st) {
        const int var = pick_variable(st);
        if (var < 0) {
            record(st);
            return mode_ == SolveMode::First;
        }
        for (Element val : st.domains[var]) {
            SearchState child = st;
            child.domains[var] = {val};
            if (!gac_fixpoint(child)) continue;
            if (dive(child)) return true;
        }
        return false;
    }

    const Problem& p_;
    SolveMode mode_;
    SolveOutcome out_;
};

} // namespace

std::map<Var, DomainId> infer_delta(const InstanceStructure& inst, const Template& tmpl) {
    std::map<Var, DomainId> delta;
    for (std::size_t l = 0; l < inst.scopes.size(); ++l) {
        const auto& sig = tmpl.relations[l].signature;
        for (const auto& scope : inst.scopes[l]) {
            if (scope.size() != sig.size())
                throw contract_error("scope arity does not match relation " +
                                     std::to_string(l));
            for (std::size_t j = 0; j < scope.size(); ++j) {
                auto [it, fresh] = delta.emplace(scope[j], sig[j]);
                if (!fresh && it->second != sig[j])
                    throw contract_error("variable " + std::to_string(scope[j]) +
                                         " used at positions of different sorts");
            }
        }
    }
    if (tmpl.domains.domains.empty())
        throw contract_error("template has no domains");
    const DomainId fallback = tmpl.domains.domains.front().id;
    for (Var v : inst.variables) delta.emplace(v, fallback);
    return delta;
}

SolveOutcome solve(const InstanceStructure& inst, const Template& tmpl,
                   const SolveOptions& opts) {
    Problem p = build_problem(inst, tmpl,
                              opts.extra_unaries.empty() ? nullptr : &opts.extra_unaries);
    if (p.vars.empty()) {
        SolveOutcome out;
        out.sat = true;
        out.count = 1;
        out.solution = Assignment{};
        if (opts.mode == SolveMode::All) out.solutions.push_back({});
        return out;
    }
    for (const auto& dom : p.root.domains)
        if (dom.empty()) return {};
    Searcher searcher(p, opts.mode);
    return searcher.run(p.root);
}

std::vector<Assignment> enumerate_homomorphisms(const InstanceStructure& src,
                                                const Template& dst) {
    SolveOptions opts;
    opts.mode = SolveMode::All;
    return solve(src, dst, opts).solutions;
}

PreprocessResult gac_preprocess(const InstanceStructure& inst_in, const Template& tmpl,
                                Consistency level,
                                const std::map<Var, std::vector<Element>>* extra) {
    (void)level; // only GAC
    PreprocessResult res;
    res.instance = inst_in;
    res.instance.normalize();

    Problem p = build_problem(res.instance, tmpl, extra);
    res.delta = p.delta;
    res.pruned.resize(tmpl.relations.size());
    for (std::size_t l = 0; l < tmpl.relations.size(); ++l)
        res.pruned[l].resize(res.instance.scopes[l].size());

    for (const auto& dom : p.root.domains)
        if (dom.empty()) return res; // defined = false

    if (!gac_fixpoint(p.root)) return res;

    res.defined = true;
    for (std::size_t i = 0; i < p.vars.size(); ++i)
        res.unary_domains[p.vars[i]] = p.root.domains[i];
    for (const auto& c : p.root.constraints)
        res.pruned[c.rel_index][c.scope_index] =
            Relation(tmpl.relations[c.rel_index].signature, c.tuples);
    return res;
}

} // namespace algcsp
