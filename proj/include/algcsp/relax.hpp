#pragma once

#include "algcsp/liftred.hpp"

namespace algcsp {

// The restricted relation of a constraint stopped being a coset of a
// GF(2)-linear space: the member assignment was not a homomorphism into the
// relaxed template, or an upstream stage is buggy.
struct non_coset_error : contract_error {
    using contract_error::contract_error;
};

// The collection over all subdomains of size <= 2: per two-element B the
// minority operation, its pointwise complement, and the two constants; per
// singleton the one constant. Signature: one ternary symbol.
struct MCollection {
    std::vector<Element> base;                         // the underlying set D
    DomainTable domains;                               // one domain per subset
    AlgebraCollection coll;
    std::map<std::vector<Element>, DomainId> subset_ids;

    DomainId id_of(const std::vector<Element>& subset) const;
    const std::vector<Element>& subset_of(DomainId id) const;
    int constant_pos(DomainId id, Element a) const;
    int minority_pos(DomainId id) const;   // -1 on singletons
    int complement_pos(DomainId id) const; // -1 on singletons
};

MCollection build_m(const std::vector<Element>& base);

// Restrict an operation table given over the base set to every subset
// domain of the collection (the table must keep each subset closed).
MultiSortedOp restrict_base_op(const MCollection& m, const OpTable& op_over_base);

// View a single-domain template as multi-sorted over the per-coordinate
// projection subsets; every projection must have at most two elements.
Template project_signature_view(const Template& gamma, const MCollection& m);

// Is the trace of M_B definable by the equality-based formula with the
// auxiliary u-variables (one per element of B)? `link_u = false` drops the
// linkage, a negative control that generates a strict superset.
struct TracePpResult {
    bool ok = false;
    Relation generated;
    Relation expected;
};

TracePpResult check_trace_pp(const std::vector<Element>& base,
                             const std::vector<Element>& subset, bool link_u = true);

// The per-instance witness that the preprocessed instance maps into its
// relaxation: h((v, a)) = (v, A^a over D_v) for a in D_v, first member
// otherwise. Requires every constrained variable's domain to have at most
// two elements after preprocessing.
struct WitnessResult {
    TemplateMap map;
    LiftedTemplate lifted_base;    // the lifted language of the instance
    LiftedTemplate lifted_relaxed; // the same lift over the relaxed template
    HomCheck validation;
};

WitnessResult witness_lifted_hom(const PreprocessResult& pre, const Template& gamma,
                                 const MCollection& m);

struct LiftedSolveResult {
    bool sat = false;
    Assignment solution;
};

// Solve the preprocessed instance under a member assignment into the M
// collection: constants pin variables, the remaining two-element variables
// are encoded into GF(2), every restricted constraint is verified to be a
// coset (least tuple + Gaussian rank), and the union system is eliminated.
// Free variables are set to 0.
LiftedSolveResult solve_lifted_affine(const PreprocessResult& pre,
                                      const std::map<Var, AlgebraId>& chi,
                                      const Template& gamma, const MCollection& m);

// What the pipeline needs to know about a collection.
struct RelaxContext {
    const AlgebraCollection* coll = nullptr;
    const DomainTable* coll_domains = nullptr;
    // Member domain to use for a variable, from its preprocessed unary
    // domain and base domain id.
    std::function<DomainId(const std::vector<Element>&, DomainId)> member_domain;
};

RelaxContext make_m_context(const MCollection& m, const Template& gamma);

using LiftedSolverFn = std::function<LiftedSolveResult(
    const PreprocessResult&, const std::map<Var, AlgebraId>&, const Template&)>;

struct PipelineOptions {
    // Cross-validate the relaxed stage through the union reduction.
    bool relaxed_via_union = false;
    // Optional per-instance witness validation, run after preprocessing.
    std::function<void(const PreprocessResult&)> witness_hook;
};

struct RelaxationOutcome {
    enum class Status { Unsat, Solved };
    Status status = Status::Unsat;
    int stage = 0; // 1 = preprocessing, 2 = relaxed problem, 3 = lifted problem
    std::map<Var, AlgebraId> chi;
    Assignment solution;
    std::vector<std::string> transcript;

    bool solved() const { return status == Status::Solved; }
};

// Preprocess, solve the relaxed problem over the collection, then hand the
// member assignment to the lifted solver. Every solved outcome is verified
// against the original instance.
RelaxationOutcome weak_relax_pipeline(const InstanceStructure& inst, const Template& gamma,
                                      const RelaxContext& ctx, const LiftedSolverFn& lifted,
                                      const PipelineOptions& opts = {});

// Generic lifted solver: backtracking over the preprocessed instance,
// ignoring the member assignment. A baseline for cross-checks.
LiftedSolverFn make_generic_lifted_solver();

LiftedSolverFn make_affine_lifted_solver(const MCollection& m);

// Permuted-max collection: one binary member max_pi per permutation of the
// base domain.
struct GreenCohenCollection {
    DomainId domain = 0;
    AlgebraCollection coll;
    std::vector<std::vector<int>> rank_order; // member position -> element rank order
};

GreenCohenCollection build_green_cohen(const DomainTable& dt, DomainId domain);

RelaxContext make_green_cohen_context(const GreenCohenCollection& gc);

// Max-closed lifted solver: permute every constraint by the members chosen
// for its variables, re-run GAC, and read off the maximum assignment.
LiftedSolverFn make_max_closed_solver(const GreenCohenCollection& gc);

} // namespace algcsp
