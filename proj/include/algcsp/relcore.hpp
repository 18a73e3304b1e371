#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace algcsp {

using DomainId = int;
using Element = int;
using Var = int;
using Tuple = std::vector<Element>;

// A condition the caller promised to uphold was violated.
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

// An exhaustive construction would exceed its size guard; the answer is
// undecided at this scale rather than wrong.
struct scale_guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered table of finite domains. Elements are small non-negative integers,
// stored strictly ascending. Distinct ids may carry equal element sets when
// one is a tagged copy of the other (copies are made by fresh id, never by
// renaming elements).
struct DomainTable {
    struct Domain {
        DomainId id = 0;
        std::vector<Element> elements;
        std::string tag;
    };

    std::vector<Domain> domains;

    bool has(DomainId id) const;
    const Domain& entry(DomainId id) const;
    const std::vector<Element>& elements(DomainId id) const;
    std::size_t size(DomainId id) const;

    // Rank of an element within its domain (0-based); throws if absent.
    int index_of(DomainId id, Element e) const;

    // Registers a new domain under a fresh id (max existing + 1).
    DomainId add(std::vector<Element> elems, std::string tag = {});
    void add_with_id(DomainId id, std::vector<Element> elems, std::string tag = {});
};

// Multi-sorted relation: a signature of domain ids plus a canonical
// (sorted, duplicate-free) tuple list. Equality is structural.
struct Relation {
    std::vector<DomainId> signature;
    std::vector<Tuple> tuples;

    Relation() = default;
    Relation(std::vector<DomainId> sig, std::vector<Tuple> tups);

    int arity() const { return static_cast<int>(signature.size()); }
    bool empty() const { return tuples.empty(); }
    bool contains(const Tuple& t) const;

    bool operator==(const Relation&) const = default;
};

// Validating constructor: checks every tuple entry against the domain table.
Relation make_relation(const DomainTable& dt, std::vector<DomainId> sig,
                       std::vector<Tuple> tups);

// A template: domain table plus an ordered relation list. Names are optional
// and used by the text formats.
struct Template {
    DomainTable domains;
    std::vector<Relation> relations;
    std::vector<std::string> names;
    bool includes_domain_unaries = false;

    void add_relation(Relation rel, std::string name = {});
    const std::string& name_of(int index) const;
    int index_of_name(const std::string& name) const; // -1 if absent

    // Appends the missing unary relations D_i (one per domain) and sets the
    // flag. Existing relations are never duplicated.
    void ensure_domain_unaries();
};

// Left-hand structure of a homomorphism problem: variables plus, per
// template relation, a list of constraint scopes.
struct InstanceStructure {
    std::vector<Var> variables;                       // sorted, unique
    std::vector<std::vector<std::vector<Var>>> scopes; // [relation][constraint]

    // Adds any scope variable missing from `variables` and sorts.
    void normalize();
    std::size_t constraint_count() const;
};

using Assignment = std::map<Var, Element>;

// --- operations ------------------------------------------------------------

// Coordinate projection. `coords` are 0-based, strictly ascending, non-empty.
Relation project(const Relation& rel, const std::vector<int>& coords);

// 0-based rank of `t` in the lexicographic order of dom^|t|.
long long tuple_index(const std::vector<Element>& dom, const Tuple& t);
// 1-based rank, matching the alpha ordering alpha_n(1), ..., alpha_n(d^n).
long long lex_rank(const std::vector<Element>& dom, const Tuple& t);
// Inverse of lex_rank: the j-th tuple of dom^n, 1 <= j <= |dom|^n.
Tuple alpha(const std::vector<Element>& dom, int n, long long j);

// Number of tuples in dom^n; throws scale_guard_error past 2^62.
long long power_count(std::size_t domain_size, int n);

// The n-th power relation. Each product coordinate D_i^n is encoded by its
// 0-based lexicographic rank; the signature ids are carried over and are to
// be interpreted against a power domain table (see power_template).
Relation power_relation(const DomainTable& dt, const Relation& rel, int n);

// Template over the power domains {0, ..., d_i^n - 1} (same ids, fresh
// table), with every relation raised to its n-th power.
Template power_template(const Template& tmpl, int n);

// Outcome of a homomorphism check; on failure carries the first violated
// constraint.
struct HomCheck {
    bool ok = true;
    int rel_index = -1;
    int item_index = -1;     // scope index or tuple index within the relation
    std::vector<Var> scope;  // offending scope (assignment form)
    Tuple witness;           // offending source tuple (structure-map form)
    Tuple image;
    std::string message;

    explicit operator bool() const { return ok; }
};

// Does `h` map every scope tuple of `inst` into the corresponding relation
// of `dst`? Throws contract_error when `h` is not total on the variables or
// the scope arities do not match `dst`.
HomCheck check_homomorphism(const Assignment& h, const InstanceStructure& inst,
                            const Template& dst);

// Structure map between two templates with a common signature: a map on
// (domain id, element) pairs. The image of a tuple must land in the
// corresponding dst relation and respect dst's sorts.
using ElementKey = std::pair<DomainId, Element>;
using TemplateMap = std::map<ElementKey, ElementKey>;

HomCheck check_template_homomorphism(const TemplateMap& h, const Template& src,
                                     const Template& dst);

// Map between two plain relational structures with a common signature.
HomCheck check_structure_homomorphism(const std::map<Var, Var>& h,
                                      const InstanceStructure& src,
                                      const InstanceStructure& dst);

// Odometer over mixed radices; returns false once all combinations are done.
bool next_radix_tuple(std::vector<int>& idx, const std::vector<int>& radix);

} // namespace algcsp
