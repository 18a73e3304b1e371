#include "algcsp/liftred.hpp"

#include <algorithm>
#include <set>

namespace algcsp {

namespace {

std::string scope_name(const std::vector<Var>& scope) {
    std::string s = "(";
    for (std::size_t i = 0; i < scope.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(scope[i]);
    }
    return s + ")";
}

} // namespace

int LiftedTemplate::find_lifted(int base_rel, const std::vector<Var>& proto_scope) const {
    for (std::size_t i = 0; i < origins.size(); ++i)
        if (!origins[i].is_unary && origins[i].base_rel == base_rel &&
            origins[i].proto_scope == proto_scope)
            return static_cast<int>(i);
    return -1;
}

DomainId LiftedTemplate::domain_of_vertex(Var v) const {
    auto it = vertex_domain.find(v);
    if (it == vertex_domain.end())
        throw contract_error("vertex " + std::to_string(v) + " has no lifted domain");
    return it->second;
}

LiftedTemplate lifted_language_over(const Template& gamma,
                                    const std::vector<Var>& vertices,
                                    const std::map<Var, DomainId>& delta,
                                    const std::vector<ProtoConstraint>& constraints) {
    LiftedTemplate out;
    out.vertices = vertices;
    std::sort(out.vertices.begin(), out.vertices.end());
    for (Var v : out.vertices) {
        const DomainId base = delta.at(v);
        const DomainId copy = out.tmpl.domains.add(gamma.domains.elements(base),
                                                   "lift:" + std::to_string(v));
        out.vertex_domain[v] = copy;
        out.vertex_base[v] = base;
    }

    std::vector<const ProtoConstraint*> ordered;
    for (const auto& c : constraints) ordered.push_back(&c);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ProtoConstraint* a, const ProtoConstraint* b) {
                         return a->base_rel < b->base_rel;
                     });

    out.prototype.variables = out.vertices;
    out.prototype.scopes.resize(gamma.relations.size());

    for (const ProtoConstraint* c : ordered) {
        if (c->base_rel < 0 || c->base_rel >= static_cast<int>(gamma.relations.size()))
            throw contract_error("prototype constraint names an unknown relation");
        if (c->rel.arity() != static_cast<int>(c->scope.size()))
            throw contract_error("prototype constraint arity mismatch");
        std::vector<DomainId> sig;
        for (Var v : c->scope) sig.push_back(out.vertex_domain.at(v));
        out.tmpl.add_relation(Relation(std::move(sig), c->rel.tuples),
                              gamma.name_of(c->base_rel) + "@" + scope_name(c->scope));
        LiftedTemplate::Origin origin;
        origin.base_rel = c->base_rel;
        origin.proto_scope = c->scope;
        out.origins.push_back(std::move(origin));
        out.prototype.scopes[c->base_rel].push_back(c->scope);
    }

    for (Var v : out.vertices) {
        const DomainId copy = out.vertex_domain.at(v);
        std::vector<Tuple> tups;
        for (Element e : out.tmpl.domains.elements(copy)) tups.push_back({e});
        out.tmpl.add_relation(Relation({copy}, std::move(tups)),
                              "dom@" + std::to_string(v));
        LiftedTemplate::Origin origin;
        origin.is_unary = true;
        origin.vertex = v;
        out.origins.push_back(std::move(origin));
    }
    return out;
}

LiftedTemplate lifted_language(const Template& gamma, const InstanceStructure& proto_in) {
    InstanceStructure proto = proto_in;
    proto.normalize();
    const std::map<Var, DomainId> delta = infer_delta(proto, gamma);
    std::vector<ProtoConstraint> constraints;
    for (std::size_t l = 0; l < proto.scopes.size(); ++l)
        for (const auto& scope : proto.scopes[l])
            constraints.push_back(
                ProtoConstraint{static_cast<int>(l), scope, gamma.relations[l]});
    LiftedTemplate out =
        lifted_language_over(gamma, proto.variables, delta, constraints);
    return out;
}

Assignment ToPrototypeResult::to_lifted(const Assignment& base) const {
    return base; // (v, a) is encoded by the pair (copy domain of v, a)
}

Assignment ToPrototypeResult::to_base(const Assignment& lifted) const {
    return lifted; // forgetting the sort keeps the element value
}

ToPrototypeResult to_prototype(const LiftedTemplate& lifted,
                               const InstanceStructure& instance_in) {
    if (instance_in.scopes.size() != lifted.tmpl.relations.size())
        throw contract_error("instance does not match the lifted template");
    InstanceStructure instance = instance_in;
    instance.normalize();

    ToPrototypeResult res;

    // Sort inference with the projection-consistency check: every position a
    // variable occupies must name one prototype vertex, and the element
    // projections of all those positions must intersect.
    std::map<Var, Var> sort_of;
    std::map<Var, std::set<Element>> allowed;
    for (std::size_t l = 0; l < instance.scopes.size(); ++l) {
        const auto& origin = lifted.origins[l];
        for (const auto& scope : instance.scopes[l]) {
            for (std::size_t j = 0; j < scope.size(); ++j) {
                const Var vertex = origin.is_unary ? origin.vertex : origin.proto_scope[j];
                auto [it, fresh] = sort_of.emplace(scope[j], vertex);
                if (!fresh && it->second != vertex) {
                    res.unsat = true;
                    res.reason = "variable " + std::to_string(scope[j]) +
                                 " is used with inconsistent sorts";
                    return res;
                }
                std::set<Element> proj;
                for (const auto& t : lifted.tmpl.relations[l].tuples)
                    proj.insert(t[j]);
                auto [pit, pfresh] = allowed.emplace(scope[j], proj);
                if (!pfresh) {
                    std::set<Element> cut;
                    std::set_intersection(pit->second.begin(), pit->second.end(),
                                          proj.begin(), proj.end(),
                                          std::inserter(cut, cut.begin()));
                    pit->second = std::move(cut);
                }
                if (allowed.at(scope[j]).empty()) {
                    res.unsat = true;
                    res.reason = "projections on variable " + std::to_string(scope[j]) +
                                 " have empty intersection";
                    return res;
                }
            }
        }
    }

    res.out.structure.variables = instance.variables;
    res.out.structure.scopes.resize(lifted.prototype.scopes.size());
    for (std::size_t l = 0; l < instance.scopes.size(); ++l) {
        const auto& origin = lifted.origins[l];
        if (origin.is_unary) continue; // carries only sort information
        for (const auto& scope : instance.scopes[l])
            res.out.structure.scopes[origin.base_rel].push_back(scope);
    }
    for (Var w : instance.variables) {
        auto it = sort_of.find(w);
        if (it != sort_of.end()) {
            res.out.chi[w] = it->second;
        } else if (!lifted.vertices.empty()) {
            res.out.chi[w] = lifted.vertices.front();
        }
    }
    return res;
}

InstanceStructure from_prototype(const LiftedTemplate& lifted,
                                 const PrototypedInstance& pi) {
    HomCheck chi_ok =
        check_structure_homomorphism(pi.chi, pi.structure, lifted.prototype);
    if (!chi_ok.ok)
        throw contract_error("chi is not a homomorphism into the prototype: " +
                             chi_ok.message);
    InstanceStructure out;
    out.variables = pi.structure.variables;
    out.scopes.resize(lifted.tmpl.relations.size());
    for (std::size_t l = 0; l < pi.structure.scopes.size(); ++l) {
        for (const auto& scope : pi.structure.scopes[l]) {
            std::vector<Var> image;
            for (Var w : scope) image.push_back(pi.chi.at(w));
            const int idx = lifted.find_lifted(static_cast<int>(l), image);
            if (idx < 0)
                throw contract_error("no lifted relation for a prototype constraint");
            out.scopes[idx].push_back(scope);
        }
    }
    out.normalize();
    return out;
}

namespace {

// Sort inference shared by the two reductions: conflicts mean the relaxed
// instance has no solutions at all.
bool infer_member_sorts(const InstanceStructure& inst, const Template& gamma,
                        std::map<Var, DomainId>& delta, std::string& reason) {
    for (std::size_t l = 0; l < inst.scopes.size(); ++l) {
        const auto& sig = gamma.relations[l].signature;
        for (const auto& scope : inst.scopes[l]) {
            if (scope.size() != sig.size())
                throw contract_error("scope arity does not match relation " +
                                     std::to_string(l));
            for (std::size_t j = 0; j < scope.size(); ++j) {
                auto [it, fresh] = delta.emplace(scope[j], sig[j]);
                if (!fresh && it->second != sig[j]) {
                    reason = "variable " + std::to_string(scope[j]) +
                             " would need members over two domains";
                    return false;
                }
            }
        }
    }
    if (gamma.domains.domains.empty())
        throw contract_error("template has no domains");
    for (Var v : inst.variables)
        delta.emplace(v, gamma.domains.domains.front().id);
    return true;
}

} // namespace

std::map<Var, AlgebraId> UnionReduction::decode(const Assignment& h) const {
    std::map<Var, std::map<int, std::map<long long, Element>>> blocks;
    for (std::size_t id = 0; id < uvars.size(); ++id) {
        const UVar& u = uvars[id];
        blocks[u.v][u.symbol][u.rank] = h.at(static_cast<Var>(id));
    }
    std::map<Var, AlgebraId> out;
    for (const auto& [v, by_symbol] : blocks) {
        Tuple row;
        for (const auto& [sym, by_rank] : by_symbol)
            for (const auto& [rank, value] : by_rank) row.push_back(value);
        const TraceRelation& tr = traces.at(delta.at(v));
        auto it = std::lower_bound(tr.rel.tuples.begin(), tr.rel.tuples.end(), row);
        if (it == tr.rel.tuples.end() || *it != row)
            throw contract_error("decoded block of variable " + std::to_string(v) +
                                 " matches no trace row");
        const int row_idx = static_cast<int>(it - tr.rel.tuples.begin());
        out[v] = AlgebraId{delta.at(v), tr.row_to_position[row_idx]};
    }
    return out;
}

UnionReduction reduce_to_union(const InstanceStructure& inst_in, const Template& gamma,
                               const AlgebraCollection& coll) {
    coll.signature.validate();
    InstanceStructure inst = inst_in;
    inst.normalize();

    UnionReduction red;
    if (!infer_member_sorts(inst, gamma, red.delta, red.reason)) {
        red.unsat = true;
        return red;
    }
    for (Var v : inst.variables) {
        if (coll.at(red.delta.at(v)).empty()) {
            red.unsat = true;
            red.reason = "no member over domain " + std::to_string(red.delta.at(v));
            return red;
        }
    }

    red.union_template.domains = gamma.domains;
    for (std::size_t l = 0; l < gamma.relations.size(); ++l)
        red.union_template.add_relation(gamma.relations[l],
                                        gamma.name_of(static_cast<int>(l)));
    for (const auto& [id, list] : coll.members) {
        if (list.empty()) continue;
        red.trace_rel_index[id] = static_cast<int>(red.union_template.relations.size());
        TraceRelation tr = trace(gamma.domains, coll, id);
        red.union_template.add_relation(tr.rel, "Tr@" + std::to_string(id));
        red.traces.emplace(id, std::move(tr));
    }

    const int k = coll.signature.symbols();
    std::map<std::tuple<Var, int, long long>, Var> uvar_id;
    for (Var v : inst.variables) {
        const std::size_t d = gamma.domains.size(red.delta.at(v));
        for (int j = 0; j < k; ++j) {
            const long long block = power_count(d, coll.signature.arities[j]);
            for (long long r = 0; r < block; ++r) {
                uvar_id[{v, j, r}] = static_cast<Var>(red.uvars.size());
                red.uvars.push_back(UnionReduction::UVar{v, j, r});
            }
        }
    }

    red.instance.scopes.resize(red.union_template.relations.size());
    for (Var v = 0; v < static_cast<Var>(red.uvars.size()); ++v)
        red.instance.variables.push_back(v);

    // One trace constraint per original variable, over its whole block.
    for (Var v : inst.variables) {
        const DomainId i = red.delta.at(v);
        const std::size_t d = gamma.domains.size(i);
        std::vector<Var> scope;
        for (int j = 0; j < k; ++j) {
            const long long block = power_count(d, coll.signature.arities[j]);
            for (long long r = 0; r < block; ++r) scope.push_back(uvar_id.at({v, j, r}));
        }
        red.instance.scopes[red.trace_rel_index.at(i)].push_back(std::move(scope));
    }

    // One base constraint per (relation, symbol, scope, power tuple).
    for (std::size_t l = 0; l < gamma.relations.size(); ++l) {
        for (int j = 0; j < k; ++j) {
            const Relation powered =
                power_relation(gamma.domains, gamma.relations[l], coll.signature.arities[j]);
            for (const auto& scope : inst.scopes[l]) {
                for (const auto& ranks : powered.tuples) {
                    std::vector<Var> uscope;
                    for (std::size_t p = 0; p < scope.size(); ++p)
                        uscope.push_back(uvar_id.at({scope[p], j, ranks[p]}));
                    red.instance.scopes[l].push_back(std::move(uscope));
                }
            }
        }
    }
    return red;
}

std::map<Var, AlgebraId> StrongReduction::decode(const Assignment& h) const {
    std::map<Var, std::map<long long, Element>> blocks;
    for (std::size_t id = 0; id < uvars.size(); ++id)
        blocks[uvars[id].v][uvars[id].rank] = h.at(static_cast<Var>(id));
    std::map<Var, AlgebraId> out;
    for (const auto& [v, by_rank] : blocks) {
        Tuple row;
        for (const auto& [rank, value] : by_rank) row.push_back(value);
        auto it = std::lower_bound(tr.rel.tuples.begin(), tr.rel.tuples.end(), row);
        if (it == tr.rel.tuples.end() || *it != row)
            throw contract_error("decoded block of variable " + std::to_string(v) +
                                 " matches no trace row");
        out[v] = AlgebraId{tr.domain,
                           tr.row_to_position[static_cast<int>(it - tr.rel.tuples.begin())]};
    }
    return out;
}

StrongReduction reduce_strong(const InstanceStructure& inst_in, const Template& gamma,
                              const AlgebraCollection& coll) {
    coll.signature.validate();
    if (gamma.domains.domains.size() != 1)
        throw contract_error("the strong reduction assumes a single domain");
    if (coll.signature.symbols() != 1)
        throw contract_error("the strong reduction assumes a single symbol");
    const DomainId dom = gamma.domains.domains.front().id;
    const int n = coll.signature.arities[0];
    const long long dn = power_count(gamma.domains.size(dom), n);
    if (dn > 4096) throw scale_guard_error("power prototype too large");

    InstanceStructure inst = inst_in;
    inst.normalize();

    StrongReduction red;
    if (coll.at(dom).empty()) {
        red.unsat = true;
        red.reason = "no member over domain " + std::to_string(dom);
        return red;
    }

    const std::size_t s = gamma.relations.size();
    red.union_template.domains = gamma.domains;
    for (std::size_t l = 0; l < s; ++l)
        red.union_template.add_relation(gamma.relations[l],
                                        gamma.name_of(static_cast<int>(l)));
    red.tr = trace(gamma.domains, coll, dom);
    red.union_template.add_relation(red.tr.rel, "Tr@" + std::to_string(dom));

    // R' over the u variables, one per (v, rank).
    std::map<std::pair<Var, long long>, Var> uvar_id;
    for (Var v : inst.variables)
        for (long long r = 0; r < dn; ++r) {
            uvar_id[{v, r}] = static_cast<Var>(red.uvars.size());
            red.uvars.push_back(UnionReduction::UVar{v, 0, r});
        }
    red.rprime.scopes.resize(s + 1);
    for (Var v = 0; v < static_cast<Var>(red.uvars.size()); ++v)
        red.rprime.variables.push_back(v);
    for (std::size_t l = 0; l < s; ++l) {
        const Relation powered = power_relation(gamma.domains, gamma.relations[l], n);
        for (const auto& scope : inst.scopes[l])
            for (const auto& ranks : powered.tuples) {
                std::vector<Var> uscope;
                for (std::size_t p = 0; p < scope.size(); ++p)
                    uscope.push_back(uvar_id.at({scope[p], ranks[p]}));
                red.rprime.scopes[l].push_back(std::move(uscope));
            }
    }
    for (Var v : inst.variables) {
        std::vector<Var> xi;
        for (long long r = 0; r < dn; ++r) xi.push_back(uvar_id.at({v, r}));
        red.rprime.scopes[s].push_back(std::move(xi));
    }

    // The power prototype: vertices are ranks; xi^n pins the alpha order.
    red.prototype.scopes.resize(s + 1);
    for (long long r = 0; r < dn; ++r)
        red.prototype.variables.push_back(static_cast<Var>(r));
    for (std::size_t l = 0; l < s; ++l) {
        const Relation powered = power_relation(gamma.domains, gamma.relations[l], n);
        for (const auto& ranks : powered.tuples)
            red.prototype.scopes[l].push_back(
                std::vector<Var>(ranks.begin(), ranks.end()));
    }
    {
        std::vector<Var> all;
        for (long long r = 0; r < dn; ++r) all.push_back(static_cast<Var>(r));
        red.prototype.scopes[s].push_back(std::move(all));
    }

    for (const auto& [key, id] : uvar_id) red.rank_hom[id] = static_cast<Var>(key.second);
    HomCheck hom =
        check_structure_homomorphism(red.rank_hom, red.rprime, red.prototype);
    if (!hom.ok)
        throw contract_error("rank map is not a homomorphism: " + hom.message);

    red.lifted = lifted_language(red.union_template, red.prototype);
    red.lifted_instance =
        from_prototype(red.lifted, PrototypedInstance{red.rprime, red.rank_hom});
    return red;
}

} // namespace algcsp
