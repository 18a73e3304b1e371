#pragma once

#include "algcsp/relcore.hpp"

namespace algcsp {

enum class SolveMode { First, Count, All };

enum class Consistency { Gac }; // only GAC is implemented

struct SolveOptions {
    SolveMode mode = SolveMode::First;
    // Extra unary restrictions, intersected with the inferred domains.
    std::map<Var, std::vector<Element>> extra_unaries;
};

struct SolveOutcome {
    bool sat = false;
    std::optional<Assignment> solution;     // First: lexicographically least
    unsigned long long count = 0;           // Count / All
    std::vector<Assignment> solutions;      // All: canonical lexicographic order
};

// Generic finite-domain solving by backtracking with GAC maintained after
// every assignment. Variables missing from every constraint are assigned the
// minimum of their domain (mode First) or enumerated (Count / All).
SolveOutcome solve(const InstanceStructure& inst, const Template& tmpl,
                   const SolveOptions& opts = {});

// All homomorphisms from `src` into `dst`, in canonical order.
std::vector<Assignment> enumerate_homomorphisms(const InstanceStructure& src,
                                                const Template& dst);

// Result of running generalized arc consistency to fixpoint. When defined,
// every pruned constraint relation is non-empty and its j-th projection
// equals the unary domain of the j-th scope variable.
struct PreprocessResult {
    bool defined = false;
    InstanceStructure instance;                   // normalized copy of the input
    std::vector<std::vector<Relation>> pruned;    // [relation][scope index]
    std::map<Var, std::vector<Element>> unary_domains;
    std::map<Var, DomainId> delta;                // variable -> domain id
};

PreprocessResult gac_preprocess(const InstanceStructure& inst, const Template& tmpl,
                                Consistency level = Consistency::Gac,
                                const std::map<Var, std::vector<Element>>* extra = nullptr);

// Domain assignment inferred from constraint signatures. Throws
// contract_error when a variable is used at positions of different sorts.
// Unconstrained variables fall back to the first domain of the table.
std::map<Var, DomainId> infer_delta(const InstanceStructure& inst, const Template& tmpl);

} // namespace algcsp
