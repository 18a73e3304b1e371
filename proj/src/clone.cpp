#include "algcsp/clone.hpp"

#include <algorithm>
#include <set>

namespace algcsp {

Element OpTable::apply(const DomainTable& dt, const Tuple& args) const {
    if (static_cast<int>(args.size()) != arity)
        throw contract_error("operation arity mismatch");
    return values.at(tuple_index(dt.elements(domain), args));
}

OpTable make_op(const DomainTable& dt, DomainId domain, int arity,
                const std::function<Element(const Tuple&)>& fn) {
    const auto& elems = dt.elements(domain);
    const long long total = power_count(elems.size(), arity);
    OpTable op{domain, arity, {}};
    op.values.reserve(total);
    for (long long j = 1; j <= total; ++j) {
        Element v = fn(alpha(elems, arity, j));
        dt.index_of(domain, v); // value must lie in the domain
        op.values.push_back(v);
    }
    return op;
}

OpTable projection_op(const DomainTable& dt, DomainId domain, int arity, int arg) {
    if (arg < 0 || arg >= arity) throw contract_error("projection argument out of range");
    return make_op(dt, domain, arity, [&](const Tuple& t) { return t[arg]; });
}

OpTable constant_op(const DomainTable& dt, DomainId domain, int arity, Element value) {
    return make_op(dt, domain, arity, [&](const Tuple&) { return value; });
}

const OpTable& MultiSortedOp::at(DomainId id) const {
    auto it = interp.find(id);
    if (it == interp.end())
        throw contract_error("no interpretation for domain " + std::to_string(id));
    return it->second;
}

MultiSortedOp to_multisorted(const OpTable& op) {
    MultiSortedOp ms;
    ms.arity = op.arity;
    ms.interp[op.domain] = op;
    return ms;
}

MultiSortedOp restrict_to_domains(const DomainTable& dt, const OpTable& op,
                                  const std::vector<DomainId>& targets) {
    MultiSortedOp ms;
    ms.arity = op.arity;
    for (DomainId id : targets) {
        const auto& sub = dt.elements(id);
        ms.interp[id] = make_op(dt, id, op.arity, [&](const Tuple& args) {
            Element v = op.apply(dt, args);
            if (!std::binary_search(sub.begin(), sub.end(), v))
                throw contract_error("operation does not preserve domain " +
                                     std::to_string(id));
            return v;
        });
    }
    return ms;
}

namespace {

template <typename ColumnApply>
PreserveCheck preserves_impl(const Relation& rel, int m, ColumnApply&& column_apply) {
    if (rel.tuples.empty()) return {};
    std::vector<int> rows(m, 0);
    std::vector<int> radix(m, static_cast<int>(rel.tuples.size()));
    do {
        Tuple image(rel.arity(), 0);
        for (int j = 0; j < rel.arity(); ++j) {
            Tuple column(m, 0);
            for (int r = 0; r < m; ++r) column[r] = rel.tuples[rows[r]][j];
            image[j] = column_apply(j, column);
        }
        if (!rel.contains(image)) {
            PreserveCheck bad;
            bad.ok = false;
            for (int r = 0; r < m; ++r) bad.violating_rows.push_back(rel.tuples[rows[r]]);
            bad.image = image;
            return bad;
        }
    } while (next_radix_tuple(rows, radix));
    return {};
}

} // namespace

PreserveCheck preserves(const DomainTable& dt, const OpTable& op, const Relation& rel) {
    for (DomainId id : rel.signature)
        if (id != op.domain)
            throw contract_error("single-sorted operation applied to relation over "
                                 "domain " + std::to_string(id));
    return preserves_impl(rel, op.arity, [&](int, const Tuple& col) {
        return op.apply(dt, col);
    });
}

PreserveCheck preserves(const DomainTable& dt, const MultiSortedOp& op, const Relation& rel) {
    std::vector<const OpTable*> per_coord;
    for (DomainId id : rel.signature) per_coord.push_back(&op.at(id));
    return preserves_componentwise(dt, per_coord, rel);
}

PreserveCheck preserves_componentwise(const DomainTable& dt,
                                      const std::vector<const OpTable*>& ops,
                                      const Relation& rel) {
    if (static_cast<int>(ops.size()) != rel.arity())
        throw contract_error("one operation per coordinate required");
    int m = ops.empty() ? 0 : ops.front()->arity;
    for (const OpTable* op : ops)
        if (op->arity != m)
            throw contract_error("component operations must share one arity");
    return preserves_impl(rel, m, [&](int j, const Tuple& col) {
        return ops[j]->apply(dt, col);
    });
}

namespace {

struct IndicatorLayout {
    std::vector<DomainId> active;            // domains occurring in signatures
    std::map<DomainId, Var> base;            // first variable id per domain
    std::map<DomainId, long long> block;     // d^n per domain
    InstanceStructure instance;
};

IndicatorLayout build_indicator(const Template& tmpl, int order) {
    IndicatorLayout lay;
    std::set<DomainId> seen;
    for (const auto& rel : tmpl.relations)
        for (DomainId id : rel.signature) seen.insert(id);
    Var next = 0;
    for (const auto& d : tmpl.domains.domains) {
        if (!seen.count(d.id)) continue;
        const long long count = power_count(d.elements.size(), order);
        if (count > 64)
            throw scale_guard_error("indicator order too large for domain " +
                                    std::to_string(d.id));
        lay.active.push_back(d.id);
        lay.base[d.id] = next;
        lay.block[d.id] = count;
        next += static_cast<Var>(count);
    }
    for (Var v = 0; v < next; ++v) lay.instance.variables.push_back(v);
    lay.instance.scopes.resize(tmpl.relations.size());
    for (std::size_t l = 0; l < tmpl.relations.size(); ++l) {
        const Relation& rel = tmpl.relations[l];
        Relation powered = power_relation(tmpl.domains, rel, order);
        for (const auto& ranks : powered.tuples) {
            std::vector<Var> scope;
            for (int j = 0; j < rel.arity(); ++j)
                scope.push_back(lay.base.at(rel.signature[j]) + ranks[j]);
            lay.instance.scopes[l].push_back(std::move(scope));
        }
    }
    return lay;
}

MultiSortedOp decode_op(const IndicatorLayout& lay, int order, const Assignment& h) {
    MultiSortedOp op;
    op.arity = order;
    for (DomainId id : lay.active) {
        OpTable table{id, order, {}};
        for (long long r = 0; r < lay.block.at(id); ++r)
            table.values.push_back(h.at(lay.base.at(id) + static_cast<Var>(r)));
        op.interp[id] = std::move(table);
    }
    return op;
}

} // namespace

std::vector<MultiSortedOp> enumerate_polymorphisms(const Template& tmpl, int n) {
    IndicatorLayout lay = build_indicator(tmpl, n);
    SolveOptions opts;
    opts.mode = SolveMode::All;
    SolveOutcome out = solve(lay.instance, tmpl, opts);
    std::vector<MultiSortedOp> ops;
    ops.reserve(out.solutions.size());
    for (const auto& h : out.solutions) ops.push_back(decode_op(lay, n, h));
    return ops;
}

std::optional<MultiSortedOp> find_polymorphism(
    const Template& tmpl, int n,
    const std::map<std::pair<DomainId, long long>, Element>& pins) {
    IndicatorLayout lay = build_indicator(tmpl, n);
    SolveOptions opts;
    opts.mode = SolveMode::First;
    for (const auto& [key, value] : pins) {
        auto it = lay.base.find(key.first);
        if (it == lay.base.end())
            throw contract_error("pin names a domain absent from every signature");
        if (key.second < 0 || key.second >= lay.block.at(key.first))
            throw contract_error("pin index out of range");
        opts.extra_unaries[it->second + static_cast<Var>(key.second)] = {value};
    }
    SolveOutcome out = solve(lay.instance, tmpl, opts);
    if (!out.sat) return std::nullopt;
    return decode_op(lay, n, *out.solution);
}

Term Term::v(int index) {
    Term t;
    t.var = index;
    return t;
}

Term Term::op(int symbol, std::vector<Term> args) {
    Term t;
    t.symbol = symbol;
    t.args = std::move(args);
    return t;
}

Element eval_term_at(const DomainTable& dt, const Term& t,
                     const std::vector<OpTable>& env, const Tuple& args) {
    if (t.var >= 0) {
        if (t.var >= static_cast<int>(args.size()))
            throw contract_error("term variable out of range");
        return args[t.var];
    }
    const OpTable& op = env.at(t.symbol);
    if (static_cast<int>(t.args.size()) != op.arity)
        throw contract_error("term arity does not match symbol");
    Tuple inner;
    inner.reserve(t.args.size());
    for (const Term& a : t.args) inner.push_back(eval_term_at(dt, a, env, args));
    return op.apply(dt, inner);
}

OpTable eval_term(const DomainTable& dt, const Term& t, int arity,
                  const std::vector<OpTable>& env, DomainId domain) {
    return make_op(dt, domain, arity, [&](const Tuple& args) {
        return eval_term_at(dt, t, env, args);
    });
}

MultiSortedOp eval_term(const DomainTable& dt, const Term& t, int arity,
                        const std::vector<MultiSortedOp>& env) {
    // Composition is computed domain by domain.
    MultiSortedOp out;
    out.arity = arity;
    if (env.empty()) throw contract_error("empty term environment");
    for (const auto& [id, _] : env.front().interp) {
        std::vector<OpTable> local;
        local.reserve(env.size());
        for (const auto& ms : env) local.push_back(ms.at(id));
        out.interp[id] = eval_term(dt, t, arity, local, id);
    }
    return out;
}

namespace {

bool check_wnu(const DomainTable& dt, const OpTable& op) {
    const auto& elems = dt.elements(op.domain);
    const int n = op.arity;
    if (n < 2) return false;
    for (Element x : elems) {
        if (op.apply(dt, Tuple(n, x)) != x) return false;
        for (Element y : elems) {
            if (y == x) continue;
            Tuple args(n, x);
            args[n - 1] = y;
            const Element ref = op.apply(dt, args);
            for (int pos = n - 2; pos >= 0; --pos) {
                Tuple moved(n, x);
                moved[pos] = y;
                if (op.apply(dt, moved) != ref) return false;
            }
        }
    }
    return true;
}

bool check_near_diag(const DomainTable& dt, const OpTable& op, bool minority) {
    if (op.arity != 3) return false;
    const auto& elems = dt.elements(op.domain);
    for (Element x : elems)
        for (Element y : elems) {
            const Element expect = minority ? y : x;
            if (op.apply(dt, {x, x, y}) != expect) return false;
            if (op.apply(dt, {x, y, x}) != expect) return false;
            if (op.apply(dt, {y, x, x}) != expect) return false;
        }
    return true;
}

bool check_semilattice(const DomainTable& dt, const OpTable& op) {
    if (op.arity != 2) return false;
    const auto& elems = dt.elements(op.domain);
    for (Element x : elems) {
        if (op.apply(dt, {x, x}) != x) return false;
        for (Element y : elems) {
            if (op.apply(dt, {x, y}) != op.apply(dt, {y, x})) return false;
            for (Element z : elems) {
                Element left = op.apply(dt, {op.apply(dt, {x, y}), z});
                Element right = op.apply(dt, {x, op.apply(dt, {y, z})});
                if (left != right) return false;
            }
        }
    }
    return true;
}

} // namespace

bool check_identity(const DomainTable& dt, const OpTable& op, IdentityKind kind) {
    switch (kind) {
        case IdentityKind::Wnu: return check_wnu(dt, op);
        case IdentityKind::Minority: return check_near_diag(dt, op, true);
        case IdentityKind::Majority: return check_near_diag(dt, op, false);
        case IdentityKind::Semilattice: return check_semilattice(dt, op);
    }
    return false;
}

bool check_identity(const DomainTable& dt, const MultiSortedOp& op, IdentityKind kind) {
    for (const auto& [_, table] : op.interp)
        if (!check_identity(dt, table, kind)) return false;
    return true;
}

bool check_custom_identity(const DomainTable& dt, const std::vector<OpTable>& env,
                           const CustomIdentity& ident, DomainId domain) {
    const auto& elems = dt.elements(domain);
    const long long total = power_count(elems.size(), ident.var_count);
    for (long long j = 1; j <= total; ++j) {
        Tuple args = alpha(elems, ident.var_count, j);
        if (eval_term_at(dt, ident.lhs, env, args) !=
            eval_term_at(dt, ident.rhs, env, args))
            return false;
    }
    return true;
}

PpClosureResult pp_closure(const Template& tmpl, const Relation& target) {
    if (target.tuples.empty())
        throw contract_error("pp closure membership is only decided for non-empty targets");
    const int r = static_cast<int>(target.tuples.size());
    IndicatorLayout lay = build_indicator(tmpl, r);

    // Projection columns: coordinate j of the target picks the variable
    // indexed by the column (t_1[j], ..., t_r[j]) of the tuple matrix.
    std::vector<Var> columns;
    for (int j = 0; j < target.arity(); ++j) {
        const DomainId id = target.signature[j];
        if (!lay.base.count(id))
            throw contract_error("target signature domain " + std::to_string(id) +
                                 " does not occur in the template");
        Tuple column;
        for (const auto& t : target.tuples) column.push_back(t[j]);
        columns.push_back(lay.base.at(id) + static_cast<Var>(
            tuple_index(tmpl.domains.elements(id), column)));
    }

    std::vector<Tuple> image;
    for (const auto& h : enumerate_homomorphisms(lay.instance, tmpl)) {
        Tuple row;
        for (Var v : columns) row.push_back(h.at(v));
        image.push_back(std::move(row));
    }
    PpClosureResult res;
    res.generated = Relation(target.signature, std::move(image));
    res.member = (res.generated == target);
    return res;
}

} // namespace algcsp
