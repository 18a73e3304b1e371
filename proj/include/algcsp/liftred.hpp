#pragma once

#include "algcsp/algebra.hpp"

namespace algcsp {

// One prototype constraint: a scope of prototype vertices together with the
// relation it enforces (the template relation, or a pruned refinement of it).
struct ProtoConstraint {
    int base_rel = 0;
    std::vector<Var> scope;
    Relation rel;
};

// The lifted language of a template with respect to a prototype structure:
// per-vertex copy domains D_v = {(v, a)}, one lifted relation per prototype
// constraint (ordered by (relation index, constraint position)) followed by
// the |V| domain unaries.
struct LiftedTemplate {
    Template tmpl;
    InstanceStructure prototype;           // the structure the lift came from
    std::vector<Var> vertices;
    std::map<Var, DomainId> vertex_domain; // v -> lifted copy-domain id
    std::map<Var, DomainId> vertex_base;   // v -> base domain id

    struct Origin {
        bool is_unary = false;
        int base_rel = -1;
        std::vector<Var> proto_scope;
        Var vertex = -1;
    };
    std::vector<Origin> origins; // parallel to tmpl.relations

    int find_lifted(int base_rel, const std::vector<Var>& proto_scope) const;
    DomainId domain_of_vertex(Var v) const;
};

LiftedTemplate lifted_language(const Template& gamma, const InstanceStructure& proto);

// Generalized form used by the relaxation pipeline: per-constraint relations
// (typically GAC-pruned), explicit vertex list and sorts.
LiftedTemplate lifted_language_over(const Template& gamma,
                                    const std::vector<Var>& vertices,
                                    const std::map<Var, DomainId>& delta,
                                    const std::vector<ProtoConstraint>& constraints);

// Instance of the prototype problem: a structure with the template's
// signature plus a homomorphism chi into the prototype.
struct PrototypedInstance {
    InstanceStructure structure;
    std::map<Var, Var> chi;
};

// Rewrites an instance over the lifted template as a prototype problem: per
// variable sort inference (with the projection-consistency check), then the
// forgetful rewriting of all constraints.
struct ToPrototypeResult {
    bool unsat = false;
    std::string reason;
    PrototypedInstance out;

    // Solution transport between the two formulations.
    Assignment to_lifted(const Assignment& base) const;  // h -> h^delta
    Assignment to_base(const Assignment& lifted) const;  // h -> h^f
};

ToPrototypeResult to_prototype(const LiftedTemplate& lifted,
                               const InstanceStructure& instance);

// The inverse rewriting: each constraint (scope, rho_i) becomes a constraint
// on the lifted relation rho_i(chi(scope)).
InstanceStructure from_prototype(const LiftedTemplate& lifted,
                                 const PrototypedInstance& pi);

// Reduction of an instance over gamma_b to an instance over the disjoint
// union template (base relations plus one trace per member domain). The
// variables u_{v,j,x} track the value of v's operation tables.
struct UnionReduction {
    bool unsat = false;
    std::string reason;

    Template union_template;        // base relations then traces
    InstanceStructure instance;     // over union_template
    std::map<Var, DomainId> delta;  // base variable -> member domain

    struct UVar {
        Var v = 0;
        int symbol = 0;
        long long rank = 0; // 0-based alpha rank
    };
    std::vector<UVar> uvars;                          // index = reduced variable id
    std::map<DomainId, int> trace_rel_index;          // domain -> union relation idx
    std::map<DomainId, TraceRelation> traces;

    // Reads a solution of the reduced instance back as an assignment of
    // members to the original variables.
    std::map<Var, AlgebraId> decode(const Assignment& h) const;
};

UnionReduction reduce_to_union(const InstanceStructure& inst, const Template& gamma,
                               const AlgebraCollection& coll);

// The strengthened reduction for the one-domain, one-symbol case: emits the
// structure R' over (rho'_1..rho'_s, xi), the rank homomorphism into the
// power prototype, and the composed instance over the lifted union language.
struct StrongReduction {
    bool unsat = false;
    std::string reason;

    Template union_template;          // gamma plus the single trace
    InstanceStructure rprime;         // over union_template's signature
    InstanceStructure prototype;      // the power prototype structure
    std::map<Var, Var> rank_hom;      // u_{v,x} -> rank(x)
    LiftedTemplate lifted;            // union template lifted by the prototype
    InstanceStructure lifted_instance;

    std::vector<UnionReduction::UVar> uvars;
    TraceRelation tr;

    std::map<Var, AlgebraId> decode(const Assignment& lifted_solution) const;
};

StrongReduction reduce_strong(const InstanceStructure& inst, const Template& gamma,
                              const AlgebraCollection& coll);

} // namespace algcsp
