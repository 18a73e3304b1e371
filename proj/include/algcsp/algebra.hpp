#pragma once

#include "algcsp/clone.hpp"

namespace algcsp {

// Arities (n_1, ..., n_k) of the symbols o_1..o_k.
struct AlgebraSignature {
    std::vector<int> arities;

    int symbols() const { return static_cast<int>(arities.size()); }
    void validate() const;
    bool operator==(const AlgebraSignature&) const = default;
};

// Domain id plus one operation table per symbol. Identity is by table
// content within a domain; the name is presentation only.
struct Algebra {
    DomainId domain = 0;
    std::vector<OpTable> ops;
    std::string name;

    // Concatenation of the tables in symbol order; also the trace row.
    Tuple table_key() const;
    bool same_tables(const Algebra& o) const {
        return domain == o.domain && table_key() == o.table_key();
    }
};

Algebra make_algebra(const DomainTable& dt, const AlgebraSignature& sig, DomainId domain,
                     std::vector<OpTable> ops, std::string name = {});

// (domain id, position within the sorted member list).
struct AlgebraId {
    DomainId domain = 0;
    int pos = 0;

    auto operator<=>(const AlgebraId&) const = default;
};

// Collection B = {B_i}: per domain id a canonically sorted, duplicate-free
// list of algebras over a shared signature.
struct AlgebraCollection {
    AlgebraSignature signature;
    std::map<DomainId, std::vector<Algebra>> members;

    void add(const DomainTable& dt, Algebra a);  // keeps canonical order
    const std::vector<Algebra>& at(DomainId id) const;
    const Algebra& algebra(const AlgebraId& id) const;
    // Position of an algebra with these tables, or -1.
    int position_of(DomainId id, const Algebra& a) const;
};

// Sum over symbols of d_i^{n_s}: the trace arity.
long long trace_arity(const AlgebraSignature& sig, std::size_t domain_size);

// One row per algebra of B_i: its operation tables concatenated in symbol
// order, each in alpha argument order.
struct TraceRelation {
    DomainId domain = 0;
    Relation rel;
    std::vector<int> row_to_position; // relation row -> member position
};

TraceRelation trace(const DomainTable& dt, const AlgebraCollection& coll, DomainId i);

// The relation of member tuples whose operations component-wise preserve
// `rel`. The output signature keeps rel's domain ids; its coordinates are
// member positions, to be read against the gamma_b domain table.
Relation rho_b(const DomainTable& dt, const Relation& rel, const AlgebraCollection& coll);

// Template over the member-position domains {0..|B_i|-1} (ids preserved),
// with every relation mapped through rho_b.
Template gamma_b(const DomainTable& dt, const Template& tmpl, const AlgebraCollection& coll);

// Outer lift: combine argument algebras pointwise by f. All arguments share
// f's domain.
Algebra outer_apply(const DomainTable& dt, const OpTable& f,
                    const std::vector<Algebra>& args);

// Closure report of the outer lift on a collection; where closed, the lifted
// operation is materialized on the member-position domains.
struct OuterLiftReport {
    bool closed = true;
    std::map<DomainId, bool> closed_by_domain;
    MultiSortedOp on_positions; // interpretations only for closed domains
    std::string witness;
};

OuterLiftReport lift_outer(const DomainTable& dt, const MultiSortedOp& f,
                           const AlgebraCollection& coll);
OuterLiftReport lift_outer(const DomainTable& dt, const OpTable& f,
                           const AlgebraCollection& coll);

// f preserves Tr(B_i) iff the outer lift of f is closed on B_i.
PreserveCheck preserves_trace(const DomainTable& dt, const OpTable& f,
                              const AlgebraCollection& coll, DomainId i);

// Endomorphism of the 1st kind: substitute inner terms, one f_{ab} per
// symbol a and argument slot b, with arity(f_{ab}) = n_a.
struct FirstKindSystem {
    std::vector<std::vector<MultiSortedOp>> inner; // [symbol][slot]

    void validate(const AlgebraSignature& sig) const;
};

Algebra endo_first_apply(const DomainTable& dt, const AlgebraSignature& sig,
                         const FirstKindSystem& sys, const Algebra& a);

// Endomorphism of the 2nd kind: rewrite only symbol `alpha` through the
// (n_alpha + 1)-ary operation b applied to (old result, arguments).
Algebra endo_second_apply(const DomainTable& dt, const AlgebraSignature& sig,
                          int alpha, const MultiSortedOp& b, const Algebra& a);

// Closure of a unary algebra map on a collection, with the position map per
// domain where the image stays inside the collection.
struct EndoClosure {
    bool closed = true;
    std::map<DomainId, std::vector<int>> position_map;
    std::string witness;
};

EndoClosure endo_closure(const DomainTable& dt, const AlgebraCollection& coll,
                         const std::function<Algebra(const Algebra&)>& endo);

// Registry of copy domains D^{A^c}: a fresh domain id with the same elements
// as the source, remembering which member it copies.
struct CopyRegistry {
    std::map<DomainId, AlgebraId> copies; // copy domain id -> member
};

DomainId register_copy(DomainTable& dt, CopyRegistry& reg,
                       const AlgebraCollection& coll, const AlgebraId& id);

// Is `rel` (over copy domains) invariant under every symbol's multi-sorted
// copy operation?
bool minv_member(const DomainTable& dt, const Relation& rel, const CopyRegistry& reg,
                 const AlgebraCollection& coll);

// The induced operation on the solution set: combine n_i solutions pointwise
// through the algebras that `chi` assigns to the variables. Verifies that
// chi is a homomorphism into gamma_b and that the arguments and the result
// are homomorphisms into the template.
Assignment solution_algebra_action(const DomainTable& dt, const Template& tmpl,
                                   const AlgebraCollection& coll,
                                   const InstanceStructure& inst,
                                   const std::map<Var, AlgebraId>& chi, int symbol,
                                   const std::vector<Assignment>& args);

} // namespace algcsp
