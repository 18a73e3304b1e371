#include "algcsp/relax.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

namespace algcsp {

DomainId MCollection::id_of(const std::vector<Element>& subset) const {
    auto it = subset_ids.find(subset);
    if (it == subset_ids.end())
        throw contract_error("no subset domain for the requested set");
    return it->second;
}

const std::vector<Element>& MCollection::subset_of(DomainId id) const {
    return domains.elements(id);
}

int MCollection::constant_pos(DomainId id, Element a) const {
    const auto& list = coll.at(id);
    for (std::size_t p = 0; p < list.size(); ++p) {
        const auto& vals = list[p].ops[0].values;
        if (std::all_of(vals.begin(), vals.end(), [&](Element v) { return v == a; }))
            return static_cast<int>(p);
    }
    return -1;
}

int MCollection::minority_pos(DomainId id) const {
    const auto& list = coll.at(id);
    for (std::size_t p = 0; p < list.size(); ++p)
        if (check_identity(domains, list[p].ops[0], IdentityKind::Minority) &&
            domains.size(id) == 2)
            return static_cast<int>(p);
    return -1;
}

int MCollection::complement_pos(DomainId id) const {
    const int mu = minority_pos(id);
    if (mu < 0) return -1;
    const auto& list = coll.at(id);
    const auto& mu_vals = list[mu].ops[0].values;
    for (std::size_t p = 0; p < list.size(); ++p) {
        const auto& vals = list[p].ops[0].values;
        bool complement = true;
        for (std::size_t i = 0; i < vals.size(); ++i)
            if (vals[i] == mu_vals[i]) complement = false;
        if (complement) return static_cast<int>(p);
    }
    return -1;
}

MCollection build_m(const std::vector<Element>& base) {
    if (base.empty()) throw contract_error("base set must be non-empty");
    MCollection m;
    m.base = base;
    std::sort(m.base.begin(), m.base.end());
    m.coll.signature = AlgebraSignature{{3}};

    std::vector<std::vector<Element>> subsets;
    for (Element a : m.base) subsets.push_back({a});
    for (std::size_t i = 0; i < m.base.size(); ++i)
        for (std::size_t j = i + 1; j < m.base.size(); ++j)
            subsets.push_back({m.base[i], m.base[j]});

    for (const auto& s : subsets) {
        std::string tag = "subset:{";
        for (std::size_t i = 0; i < s.size(); ++i)
            tag += (i ? "," : "") + std::to_string(s[i]);
        tag += "}";
        m.subset_ids[s] = m.domains.add(s, tag);
    }

    for (const auto& s : subsets) {
        const DomainId id = m.subset_ids.at(s);
        if (s.size() == 1) {
            m.coll.add(m.domains,
                       Algebra{id, {constant_op(m.domains, id, 3, s[0])},
                               "c" + std::to_string(s[0])});
            continue;
        }
        const Element a = s[0], b = s[1];
        OpTable mu = make_op(m.domains, id, 3, [&](const Tuple& t) {
            int parity = 0;
            for (Element x : t) parity ^= (x == b) ? 1 : 0;
            return parity ? b : a;
        });
        OpTable mu_c = mu;
        for (Element& v : mu_c.values) v = (v == a) ? b : a;
        m.coll.add(m.domains, Algebra{id, {mu}, "mu"});
        m.coll.add(m.domains, Algebra{id, {mu_c}, "mu'"});
        m.coll.add(m.domains, Algebra{id, {constant_op(m.domains, id, 3, a)},
                                      "c" + std::to_string(a)});
        m.coll.add(m.domains, Algebra{id, {constant_op(m.domains, id, 3, b)},
                                      "c" + std::to_string(b)});
    }
    return m;
}

MultiSortedOp restrict_base_op(const MCollection& m, const OpTable& op) {
    MultiSortedOp ms;
    ms.arity = op.arity;
    for (const auto& d : m.domains.domains) {
        const auto& sub = d.elements;
        ms.interp[d.id] = make_op(m.domains, d.id, op.arity, [&](const Tuple& args) {
            Element v = op.values.at(tuple_index(m.base, args));
            if (!std::binary_search(sub.begin(), sub.end(), v))
                throw contract_error("operation does not keep subset domain " +
                                     std::to_string(d.id) + " closed");
            return v;
        });
    }
    return ms;
}

Template project_signature_view(const Template& gamma, const MCollection& m) {
    Template out;
    out.domains = m.domains;
    for (std::size_t l = 0; l < gamma.relations.size(); ++l) {
        const Relation& rel = gamma.relations[l];
        if (rel.tuples.empty())
            throw contract_error("cannot infer a projection signature for an empty relation");
        std::vector<DomainId> sig;
        for (int j = 0; j < rel.arity(); ++j) {
            std::set<Element> proj;
            for (const auto& t : rel.tuples) proj.insert(t[j]);
            if (proj.size() > 2)
                throw contract_error("projection of relation " + std::to_string(l) +
                                     " has more than two elements");
            sig.push_back(m.id_of(std::vector<Element>(proj.begin(), proj.end())));
        }
        out.add_relation(Relation(std::move(sig), rel.tuples),
                         gamma.name_of(static_cast<int>(l)));
    }
    return out;
}

TracePpResult check_trace_pp(const std::vector<Element>& base,
                             const std::vector<Element>& subset, bool link_u) {
    std::vector<Element> b = subset;
    std::sort(b.begin(), b.end());
    MCollection m = build_m(base);
    const DomainId subset_id = m.id_of(b);

    // Template over the base set: the subset unary, equality, the full unary.
    Template pp;
    const DomainId dom = pp.domains.add(m.base, "base");
    std::vector<Tuple> subset_tuples;
    for (Element e : b) subset_tuples.push_back({e});
    pp.add_relation(Relation({dom}, std::move(subset_tuples)), "B");
    std::vector<Tuple> eq;
    for (Element e : m.base) eq.push_back({e, e});
    pp.add_relation(Relation({dom, dom}, std::move(eq)), "eq");
    pp.ensure_domain_unaries();

    // Variables: one per triple of B (alpha order), then one u(x) per x in B.
    const long long triples = power_count(b.size(), 3);
    const Var u_base = static_cast<Var>(triples);
    auto m_var = [&](const Tuple& t) {
        return static_cast<Var>(tuple_index(b, t));
    };
    auto u_var = [&](Element y) {
        return u_base + static_cast<Var>(tuple_index(b, {y}));
    };

    InstanceStructure inst;
    inst.scopes.resize(pp.relations.size());
    for (Var v = 0; v < u_base + static_cast<Var>(link_u ? b.size() : 0); ++v) {
        inst.variables.push_back(v);
        inst.scopes[0].push_back({v}); // every variable ranges over B
    }
    for (Element x : b)
        for (Element y : b) {
            const Var xxy = m_var({x, x, y});
            const Var xyx = m_var({x, y, x});
            const Var yxx = m_var({y, x, x});
            if (link_u) {
                inst.scopes[1].push_back({xxy, u_var(y)});
                inst.scopes[1].push_back({xyx, u_var(y)});
                inst.scopes[1].push_back({yxx, u_var(y)});
            } else {
                inst.scopes[1].push_back({xxy, xyx});
                inst.scopes[1].push_back({xyx, yxx});
            }
        }

    std::vector<Tuple> projected;
    for (const auto& h : enumerate_homomorphisms(inst, pp)) {
        Tuple row;
        for (Var v = 0; v < static_cast<Var>(triples); ++v) row.push_back(h.at(v));
        projected.push_back(std::move(row));
    }

    TracePpResult res;
    res.generated = Relation(std::vector<DomainId>(triples, dom), std::move(projected));
    TraceRelation tr = trace(m.domains, m.coll, subset_id);
    res.expected = Relation(std::vector<DomainId>(triples, dom), tr.rel.tuples);
    res.ok = (res.generated == res.expected);
    return res;
}

namespace {

// Member domain of a variable in the M pipeline: its (at most two-element)
// preprocessed domain; unconstrained variables fall back to the singleton of
// their least element.
std::vector<Element> m_subset_for(const std::vector<Element>& unary) {
    if (unary.size() <= 2) return unary;
    return {unary.front()};
}

struct ConstraintRef {
    int rel = 0;
    int idx = 0;
    const std::vector<Var>* scope = nullptr;
    const Relation* pruned = nullptr;
};

std::vector<ConstraintRef> list_constraints(const PreprocessResult& pre) {
    std::vector<ConstraintRef> out;
    for (std::size_t l = 0; l < pre.instance.scopes.size(); ++l)
        for (std::size_t s = 0; s < pre.instance.scopes[l].size(); ++s)
            out.push_back(ConstraintRef{static_cast<int>(l), static_cast<int>(s),
                                        &pre.instance.scopes[l][s], &pre.pruned[l][s]});
    return out;
}

std::set<Var> constrained_variables(const PreprocessResult& pre) {
    std::set<Var> vs;
    for (const auto& rel_scopes : pre.instance.scopes)
        for (const auto& scope : rel_scopes) vs.insert(scope.begin(), scope.end());
    return vs;
}

} // namespace

WitnessResult witness_lifted_hom(const PreprocessResult& pre, const Template& gamma,
                                 const MCollection& m) {
    if (!pre.defined)
        throw contract_error("witness requires a defined preprocessing result");
    const std::set<Var> constrained = constrained_variables(pre);
    for (Var v : constrained)
        if (pre.unary_domains.at(v).size() > 2)
            throw contract_error("projection of variable " + std::to_string(v) +
                                 " has more than two elements");

    std::vector<ProtoConstraint> base_cons;
    std::vector<ProtoConstraint> relaxed_cons;
    for (const auto& c : list_constraints(pre)) {
        base_cons.push_back(ProtoConstraint{c.rel, *c.scope, *c.pruned});
        std::vector<DomainId> sig;
        for (Var v : *c.scope) sig.push_back(m.id_of(pre.unary_domains.at(v)));
        Relation resigned(std::move(sig), c.pruned->tuples);
        relaxed_cons.push_back(
            ProtoConstraint{c.rel, *c.scope, rho_b(m.domains, resigned, m.coll)});
    }

    WitnessResult res;
    res.lifted_base = lifted_language_over(gamma, pre.instance.variables, pre.delta,
                                           base_cons);

    // Relaxed side: vertex domains are the member positions of M over the
    // variable's subset.
    Template relaxed_base;
    relaxed_base.names = gamma.names;
    relaxed_base.relations.resize(gamma.relations.size());
    std::map<Var, DomainId> m_delta;
    for (Var v : pre.instance.variables) {
        const DomainId sid = m.id_of(m_subset_for(pre.unary_domains.at(v)));
        m_delta[v] = sid;
    }
    for (const auto& [sid, list] : m.coll.members) {
        std::vector<Element> positions(list.size());
        for (std::size_t p = 0; p < list.size(); ++p)
            positions[p] = static_cast<Element>(p);
        relaxed_base.domains.add_with_id(sid, std::move(positions),
                                         "members:" + std::to_string(sid));
    }
    res.lifted_relaxed = lifted_language_over(relaxed_base, pre.instance.variables,
                                              m_delta, relaxed_cons);

    for (Var v : pre.instance.variables) {
        const DomainId src = res.lifted_base.domain_of_vertex(v);
        const DomainId dst = res.lifted_relaxed.domain_of_vertex(v);
        const DomainId sid = m_delta.at(v);
        const auto& unary = pre.unary_domains.at(v);
        for (Element a : gamma.domains.elements(pre.delta.at(v))) {
            int pos = 0; // fixed arbitrary image for values outside D_v
            if (unary.size() <= 2 &&
                std::binary_search(unary.begin(), unary.end(), a)) {
                pos = m.constant_pos(sid, a);
                if (pos < 0) throw contract_error("missing constant member");
            }
            res.map[{src, a}] = {dst, pos};
        }
    }
    res.validation =
        check_template_homomorphism(res.map, res.lifted_base.tmpl, res.lifted_relaxed.tmpl);
    return res;
}

namespace {

// Reduced row echelon basis of a set of GF(2) vectors, keyed by leading bit.
std::vector<std::uint64_t> gf2_basis(const std::vector<std::uint64_t>& vectors) {
    std::uint64_t by_bit[64] = {};
    for (std::uint64_t v : vectors) {
        for (int bit = 63; bit >= 0 && v; --bit) {
            if (!((v >> bit) & 1ULL)) continue;
            if (!by_bit[bit]) {
                by_bit[bit] = v;
                v = 0;
            } else {
                v ^= by_bit[bit];
            }
        }
    }
    for (int bit = 0; bit < 64; ++bit) {
        if (!by_bit[bit]) continue;
        for (int other = 0; other < 64; ++other)
            if (other != bit && by_bit[other] && ((by_bit[other] >> bit) & 1ULL))
                by_bit[other] ^= by_bit[bit];
    }
    std::vector<std::uint64_t> basis;
    for (int bit = 63; bit >= 0; --bit)
        if (by_bit[bit]) basis.push_back(by_bit[bit]);
    return basis;
}

struct Gf2System {
    int vars = 0;
    std::uint64_t row[64] = {};
    int rhs[64] = {};
    bool inconsistent = false;

    void add(std::uint64_t mask, int r) {
        for (int bit = 63; bit >= 0 && mask; --bit) {
            if (!((mask >> bit) & 1ULL)) continue;
            if (!row[bit]) {
                row[bit] = mask;
                rhs[bit] = r;
                return;
            }
            mask ^= row[bit];
            r ^= rhs[bit];
        }
        if (r) inconsistent = true;
    }

    // Particular solution with every free variable set to 0.
    bool solve(std::vector<int>& assignment) {
        if (inconsistent) return false;
        for (int bit = 0; bit < 64; ++bit) {
            if (!row[bit]) continue;
            for (int other = 0; other < 64; ++other)
                if (other != bit && row[other] && ((row[other] >> bit) & 1ULL)) {
                    row[other] ^= row[bit];
                    rhs[other] ^= rhs[bit];
                }
        }
        assignment.assign(vars, 0);
        for (int bit = 0; bit < 64; ++bit)
            if (row[bit] && bit < vars) assignment[bit] = rhs[bit];
        return true;
    }
};

} // namespace

LiftedSolveResult solve_lifted_affine(const PreprocessResult& pre,
                                      const std::map<Var, AlgebraId>& chi,
                                      const Template& gamma, const MCollection& m) {
    if (!pre.defined)
        throw contract_error("affine solving requires a defined preprocessing result");

    std::map<Var, Element> fixed;
    std::map<Var, int> gf2_index;
    std::map<Var, std::vector<Element>> gf2_domain;
    for (Var v : pre.instance.variables) {
        auto it = chi.find(v);
        if (it == chi.end())
            throw contract_error("member assignment misses variable " + std::to_string(v));
        const Algebra& a = m.coll.algebra(it->second);
        const auto& vals = a.ops[0].values;
        const bool constant =
            std::all_of(vals.begin(), vals.end(), [&](Element x) { return x == vals[0]; });
        if (constant) {
            fixed[v] = vals[0];
        } else {
            const auto& sub = m.subset_of(it->second.domain);
            if (sub.size() != 2)
                throw contract_error("non-constant member over a singleton domain");
            if (sub != pre.unary_domains.at(v))
                throw contract_error("member domain disagrees with the preprocessed domain "
                                     "of variable " + std::to_string(v));
            const int g = static_cast<int>(gf2_index.size());
            if (g >= 60) throw scale_guard_error("too many GF(2) variables");
            gf2_index[v] = g;
            gf2_domain[v] = sub;
        }
    }

    Gf2System system;
    system.vars = static_cast<int>(gf2_index.size());
    for (const auto& c : list_constraints(pre)) {
        const auto& scope = *c.scope;
        const Relation& rel = *c.pruned;
        std::vector<int> open; // positions carrying GF(2) variables
        for (std::size_t j = 0; j < scope.size(); ++j)
            if (!fixed.count(scope[j])) open.push_back(static_cast<int>(j));

        std::vector<std::uint64_t> encoded;
        for (const auto& t : rel.tuples) {
            bool match = true;
            for (std::size_t j = 0; j < scope.size() && match; ++j) {
                auto it = fixed.find(scope[j]);
                if (it != fixed.end() && t[j] != it->second) match = false;
            }
            if (!match) continue;
            std::uint64_t bits = 0;
            for (std::size_t p = 0; p < open.size(); ++p) {
                const int j = open[p];
                const auto& dom = gf2_domain.at(scope[j]);
                if (t[j] == dom[1]) bits |= 1ULL << p;
                else if (t[j] != dom[0])
                    throw non_coset_error("restricted tuple leaves the two-element domain");
            }
            encoded.push_back(bits);
        }
        if (encoded.empty())
            throw non_coset_error("a constraint is empty after fixing constants");
        if (open.empty()) continue;

        const std::uint64_t t0 = encoded.front(); // tuples arrive sorted
        std::vector<std::uint64_t> diffs;
        for (std::uint64_t e : encoded) diffs.push_back(e ^ t0);
        const std::vector<std::uint64_t> basis = gf2_basis(diffs);
        if (encoded.size() != (1ULL << basis.size()))
            throw non_coset_error("restricted constraint is not a coset");

        // Parity checks from the RREF free columns.
        std::uint64_t pivots = 0;
        for (std::uint64_t b : basis) {
            int bit = 63;
            while (!((b >> bit) & 1ULL)) --bit;
            pivots |= 1ULL << bit;
        }
        for (std::size_t cbit = 0; cbit < open.size(); ++cbit) {
            if ((pivots >> cbit) & 1ULL) continue;
            std::uint64_t h = 1ULL << cbit;
            for (std::uint64_t b : basis) {
                if ((b >> cbit) & 1ULL) {
                    int bit = 63;
                    while (!((b >> bit) & 1ULL)) --bit;
                    h |= 1ULL << bit;
                }
            }
            std::uint64_t gmask = 0;
            for (std::size_t p = 0; p < open.size(); ++p)
                if ((h >> p) & 1ULL)
                    gmask ^= 1ULL << gf2_index.at(scope[open[p]]);
            const int rhs = __builtin_popcountll(h & t0) & 1;
            if (gmask == 0) {
                if (rhs) throw non_coset_error("inconsistent folded parity check");
                continue;
            }
            system.add(gmask, rhs);
        }
    }

    std::vector<int> bits;
    if (!system.solve(bits)) return {};

    LiftedSolveResult res;
    res.sat = true;
    for (Var v : pre.instance.variables) {
        auto it = fixed.find(v);
        if (it != fixed.end()) res.solution[v] = it->second;
        else res.solution[v] = gf2_domain.at(v)[bits[gf2_index.at(v)]];
    }
    HomCheck verify = check_homomorphism(res.solution, pre.instance, gamma);
    if (!verify.ok)
        throw contract_error("affine solution failed verification: " + verify.message);
    return res;
}

RelaxContext make_m_context(const MCollection& m, const Template& gamma) {
    (void)gamma;
    RelaxContext ctx;
    ctx.coll = &m.coll;
    ctx.coll_domains = &m.domains;
    ctx.member_domain = [&m](const std::vector<Element>& unary, DomainId) {
        return m.id_of(m_subset_for(unary));
    };
    return ctx;
}

namespace {

// The relaxed problem: one relation per preprocessed constraint, mapped
// through rho_b, solved over the member-position domains.
struct RelaxedProblem {
    Template tmpl;
    InstanceStructure inst;
    Template member_view; // per-constraint relations over collection domains
};

RelaxedProblem build_relaxed(const PreprocessResult& pre, const RelaxContext& ctx) {
    RelaxedProblem rp;
    std::map<Var, DomainId> member_dom;
    for (Var v : pre.instance.variables)
        member_dom[v] = ctx.member_domain(pre.unary_domains.at(v), pre.delta.at(v));

    for (const auto& [id, list] : ctx.coll->members) {
        std::vector<Element> positions(list.size());
        for (std::size_t p = 0; p < list.size(); ++p)
            positions[p] = static_cast<Element>(p);
        rp.tmpl.domains.add_with_id(id, std::move(positions),
                                    "members:" + std::to_string(id));
    }
    rp.member_view.domains = *ctx.coll_domains;

    rp.inst.variables = pre.instance.variables;
    for (const auto& c : list_constraints(pre)) {
        std::vector<DomainId> sig;
        for (Var v : *c.scope) sig.push_back(member_dom.at(v));
        Relation resigned(sig, c.pruned->tuples);
        rp.member_view.add_relation(resigned);
        rp.tmpl.add_relation(rho_b(*ctx.coll_domains, resigned, *ctx.coll));
        rp.inst.scopes.push_back({*c.scope});
    }
    // Unconstrained variables get a full member-domain unary so that their
    // sort is pinned.
    const std::set<Var> constrained = constrained_variables(pre);
    for (Var v : pre.instance.variables) {
        if (constrained.count(v)) continue;
        const DomainId id = member_dom.at(v);
        std::vector<Tuple> full;
        for (Element e : ctx.coll_domains->elements(id)) full.push_back({e});
        rp.member_view.add_relation(Relation({id}, std::move(full)));
        std::vector<Tuple> positions;
        for (Element e : rp.tmpl.domains.elements(id)) positions.push_back({e});
        rp.tmpl.add_relation(Relation({id}, std::move(positions)));
        rp.inst.scopes.push_back({{v}});
    }
    return rp;
}

} // namespace

RelaxationOutcome weak_relax_pipeline(const InstanceStructure& inst, const Template& gamma,
                                      const RelaxContext& ctx, const LiftedSolverFn& lifted,
                                      const PipelineOptions& opts) {
    RelaxationOutcome out;

    PreprocessResult pre = gac_preprocess(inst, gamma);
    if (!pre.defined) {
        out.stage = 1;
        out.transcript.push_back("preprocessing: a domain or constraint emptied");
        return out;
    }
    out.transcript.push_back("preprocessing: defined");
    if (opts.witness_hook) {
        opts.witness_hook(pre);
        out.transcript.push_back("witness: validated");
    }

    RelaxedProblem rp = build_relaxed(pre, ctx);
    SolveOptions sopts;
    sopts.mode = SolveMode::First;
    SolveOutcome relaxed = solve(rp.inst, rp.tmpl, sopts);

    if (opts.relaxed_via_union) {
        UnionReduction red = reduce_to_union(rp.inst, rp.member_view, *ctx.coll);
        bool union_sat = false;
        if (!red.unsat) {
            SolveOutcome reduced = solve(red.instance, red.union_template, sopts);
            union_sat = reduced.sat;
            if (reduced.sat) red.decode(*reduced.solution); // must round-trip
        }
        if (union_sat != relaxed.sat)
            throw contract_error("union reduction disagrees with the direct relaxed solve");
        out.transcript.push_back("relaxed cross-check: union reduction agrees");
    }

    if (!relaxed.sat) {
        out.stage = 2;
        out.transcript.push_back("relaxed problem: no member assignment");
        return out;
    }
    for (Var v : pre.instance.variables) {
        const DomainId id = rp.tmpl.domains.entry(
            ctx.member_domain(pre.unary_domains.at(v), pre.delta.at(v))).id;
        out.chi[v] = AlgebraId{id, relaxed.solution->at(v)};
    }
    out.transcript.push_back("relaxed problem: member assignment found");

    LiftedSolveResult lres = lifted(pre, out.chi, gamma);
    if (!lres.sat) {
        out.stage = 3;
        out.transcript.push_back("lifted problem: unsatisfiable");
        return out;
    }

    // Recovery after GAC preprocessing is the identity on assignments.
    out.solution = lres.solution;
    for (Var v : pre.instance.variables)
        if (!out.solution.count(v))
            out.solution[v] = pre.unary_domains.at(v).front();
    HomCheck verify = check_homomorphism(out.solution, pre.instance, gamma);
    if (!verify.ok)
        throw contract_error("pipeline solution failed verification: " + verify.message);
    out.status = RelaxationOutcome::Status::Solved;
    out.stage = 3;
    out.transcript.push_back("lifted problem: solved and verified");
    return out;
}

LiftedSolverFn make_generic_lifted_solver() {
    return [](const PreprocessResult& pre, const std::map<Var, AlgebraId>&,
              const Template& gamma) {
        SolveOptions opts;
        opts.mode = SolveMode::First;
        for (const auto& [v, dom] : pre.unary_domains) opts.extra_unaries[v] = dom;
        SolveOutcome res = solve(pre.instance, gamma, opts);
        LiftedSolveResult out;
        out.sat = res.sat;
        if (res.sat) out.solution = *res.solution;
        return out;
    };
}

LiftedSolverFn make_affine_lifted_solver(const MCollection& m) {
    return [&m](const PreprocessResult& pre, const std::map<Var, AlgebraId>& chi,
                const Template& gamma) {
        return solve_lifted_affine(pre, chi, gamma, m);
    };
}

GreenCohenCollection build_green_cohen(const DomainTable& dt, DomainId domain) {
    GreenCohenCollection gc;
    gc.domain = domain;
    gc.coll.signature = AlgebraSignature{{2}};
    const auto& elems = dt.elements(domain);
    const int d = static_cast<int>(elems.size());

    std::vector<int> perm(d);
    for (int i = 0; i < d; ++i) perm[i] = i;
    do {
        std::vector<int> inverse(d);
        for (int i = 0; i < d; ++i) inverse[perm[i]] = i;
        OpTable op = make_op(dt, domain, 2, [&](const Tuple& t) {
            const int rx = perm[static_cast<int>(
                std::lower_bound(elems.begin(), elems.end(), t[0]) - elems.begin())];
            const int ry = perm[static_cast<int>(
                std::lower_bound(elems.begin(), elems.end(), t[1]) - elems.begin())];
            return elems[inverse[std::max(rx, ry)]];
        });
        gc.coll.add(dt, Algebra{domain, {op}, "max_pi"});
    } while (std::next_permutation(perm.begin(), perm.end()));

    // Recover each member's element order from its table: the rank of x is
    // the number of elements it dominates.
    for (const auto& a : gc.coll.at(domain)) {
        std::vector<int> order(d, 0);
        for (int i = 0; i < d; ++i) {
            int dominated = 0;
            for (int j = 0; j < d; ++j)
                if (a.ops[0].apply(dt, {elems[i], elems[j]}) == elems[i]) ++dominated;
            order[i] = dominated - 1;
        }
        gc.rank_order.push_back(std::move(order));
    }
    return gc;
}

RelaxContext make_green_cohen_context(const GreenCohenCollection& gc) {
    RelaxContext ctx;
    ctx.coll = &gc.coll;
    ctx.coll_domains = nullptr; // set by the caller: the template's table
    ctx.member_domain = [&gc](const std::vector<Element>&, DomainId) {
        return gc.domain;
    };
    return ctx;
}

LiftedSolverFn make_max_closed_solver(const GreenCohenCollection& gc) {
    return [&gc](const PreprocessResult& pre, const std::map<Var, AlgebraId>& chi,
                 const Template& gamma) -> LiftedSolveResult {
        const auto& elems = gamma.domains.elements(gc.domain);
        auto rank_of = [&](Element e) {
            return static_cast<int>(std::lower_bound(elems.begin(), elems.end(), e) -
                                    elems.begin());
        };
        auto permute = [&](Var v, Element e) {
            return elems[gc.rank_order.at(chi.at(v).pos)[rank_of(e)]];
        };
        auto unpermute = [&](Var v, Element e) {
            const auto& ord = gc.rank_order.at(chi.at(v).pos);
            const int r = rank_of(e);
            for (int i = 0; i < static_cast<int>(ord.size()); ++i)
                if (ord[i] == r) return elems[i];
            throw contract_error("order recovery failed");
        };

        // Permute every pruned constraint into max-closed position.
        Template permuted;
        permuted.domains = gamma.domains;
        InstanceStructure pinst;
        pinst.variables = pre.instance.variables;
        for (const auto& c : list_constraints(pre)) {
            std::vector<Tuple> tuples;
            for (const auto& t : c.pruned->tuples) {
                Tuple pt(t.size(), 0);
                for (std::size_t j = 0; j < t.size(); ++j)
                    pt[j] = permute((*c.scope)[j], t[j]);
                tuples.push_back(std::move(pt));
            }
            permuted.add_relation(Relation(c.pruned->signature, std::move(tuples)));
            pinst.scopes.push_back({*c.scope});
        }

        PreprocessResult pgac = gac_preprocess(pinst, permuted);
        if (!pgac.defined) return {};

        Assignment maxed;
        for (Var v : pinst.variables) maxed[v] = pgac.unary_domains.at(v).back();
        HomCheck check = check_homomorphism(maxed, pinst, permuted);
        if (!check.ok)
            throw contract_error("maximum assignment violates a permuted constraint; "
                                 "the member assignment is not max-closed");

        LiftedSolveResult res;
        res.sat = true;
        for (Var v : pinst.variables) res.solution[v] = unpermute(v, maxed.at(v));
        return res;
    };
}

} // namespace algcsp
