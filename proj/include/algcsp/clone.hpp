#pragma once

#include "algcsp/relcore.hpp"
#include "algcsp/solver.hpp"

#include <functional>

namespace algcsp {

// Total finitary operation on one domain, stored as a value list in
// lexicographic argument order (the alpha ordering).
struct OpTable {
    DomainId domain = 0;
    int arity = 0;
    std::vector<Element> values; // size |D|^arity

    Element apply(const DomainTable& dt, const Tuple& args) const;
    Element at_index(long long flat_index) const { return values.at(flat_index); }

    bool operator==(const OpTable&) const = default;
    bool operator<(const OpTable& o) const {
        return std::tie(domain, arity, values) < std::tie(o.domain, o.arity, o.values);
    }
};

OpTable make_op(const DomainTable& dt, DomainId domain, int arity,
                const std::function<Element(const Tuple&)>& fn);
OpTable projection_op(const DomainTable& dt, DomainId domain, int arity, int arg);
OpTable constant_op(const DomainTable& dt, DomainId domain, int arity, Element value);

// A family of same-arity interpretations, one per domain.
struct MultiSortedOp {
    int arity = 0;
    std::map<DomainId, OpTable> interp;

    const OpTable& at(DomainId id) const;
    bool operator==(const MultiSortedOp&) const = default;
};

// Wraps a single-domain table.
MultiSortedOp to_multisorted(const OpTable& op);
// Restrict a D-operation to subset domains; every subset must be closed
// under the operation.
MultiSortedOp restrict_to_domains(const DomainTable& dt, const OpTable& op,
                                  const std::vector<DomainId>& targets);

// Polymorphism test by exhaustive iteration over all |rel|^m row matrices.
struct PreserveCheck {
    bool ok = true;
    std::vector<Tuple> violating_rows;
    Tuple image;

    explicit operator bool() const { return ok; }
};

PreserveCheck preserves(const DomainTable& dt, const OpTable& op, const Relation& rel);
PreserveCheck preserves(const DomainTable& dt, const MultiSortedOp& op, const Relation& rel);

// Component-wise variant: coordinate j of every row matrix is combined by
// ops[j]; all entries share one arity.
PreserveCheck preserves_componentwise(const DomainTable& dt,
                                      const std::vector<const OpTable*>& ops,
                                      const Relation& rel);

// All n-ary multi-sorted polymorphisms of the template, via the indicator
// construction: one variable per tuple of D_i^n, constraints from the n-th
// power relations. Interpretations cover the domains occurring in relation
// signatures. Guarded by |D_i|^n <= 64 per domain.
std::vector<MultiSortedOp> enumerate_polymorphisms(const Template& tmpl, int n);

// First polymorphism (in canonical order) whose tables honor the given pins:
// (domain id, flat argument index) -> value. Returns nullopt when none exists.
std::optional<MultiSortedOp> find_polymorphism(
    const Template& tmpl, int n,
    const std::map<std::pair<DomainId, long long>, Element>& pins);

// Term over a symbol environment: leaves are variables x_0..x_{m-1}, inner
// nodes name environment entries.
struct Term {
    int var = -1;    // leaf when >= 0
    int symbol = -1; // environment index when >= 0
    std::vector<Term> args;

    static Term v(int index);
    static Term op(int symbol, std::vector<Term> args);
};

Element eval_term_at(const DomainTable& dt, const Term& t,
                     const std::vector<OpTable>& env, const Tuple& args);
OpTable eval_term(const DomainTable& dt, const Term& t, int arity,
                  const std::vector<OpTable>& env, DomainId domain);
MultiSortedOp eval_term(const DomainTable& dt, const Term& t, int arity,
                        const std::vector<MultiSortedOp>& env);

enum class IdentityKind { Wnu, Minority, Majority, Semilattice };

bool check_identity(const DomainTable& dt, const OpTable& op, IdentityKind kind);
bool check_identity(const DomainTable& dt, const MultiSortedOp& op, IdentityKind kind);

// Custom identity: two terms over one environment, equal under every
// assignment of the shared variables x_0..x_{var_count-1}.
struct CustomIdentity {
    Term lhs;
    Term rhs;
    int var_count = 0;
};

bool check_custom_identity(const DomainTable& dt, const std::vector<OpTable>& env,
                           const CustomIdentity& ident, DomainId domain);

// Membership of `target` in the closure of the template under primitive
// positive definitions, decided with the indicator structure of order
// r = |target|. Guarded by |D_i|^r <= 64 per domain; throws scale_guard_error
// past the guard (undecided at this scale).
struct PpClosureResult {
    bool member = false;
    Relation generated;
};

PpClosureResult pp_closure(const Template& tmpl, const Relation& target);

} // namespace algcsp
