#include "algcsp/algebra.hpp"

#include <algorithm>

namespace algcsp {

void AlgebraSignature::validate() const {
    if (arities.empty()) throw contract_error("signature needs at least one symbol");
    for (int n : arities)
        if (n < 1) throw contract_error("symbol arities must be positive");
}

Tuple Algebra::table_key() const {
    Tuple key;
    for (const auto& op : ops)
        key.insert(key.end(), op.values.begin(), op.values.end());
    return key;
}

Algebra make_algebra(const DomainTable& dt, const AlgebraSignature& sig, DomainId domain,
                     std::vector<OpTable> ops, std::string name) {
    sig.validate();
    if (static_cast<int>(ops.size()) != sig.symbols())
        throw contract_error("algebra must define one operation per symbol");
    const std::size_t d = dt.size(domain);
    for (int s = 0; s < sig.symbols(); ++s) {
        const OpTable& op = ops[s];
        if (op.domain != domain)
            throw contract_error("operation domain differs from algebra domain");
        if (op.arity != sig.arities[s])
            throw contract_error("operation arity differs from signature");
        if (static_cast<long long>(op.values.size()) != power_count(d, op.arity))
            throw contract_error("operation table has the wrong length");
        for (Element v : op.values) dt.index_of(domain, v);
    }
    return Algebra{domain, std::move(ops), std::move(name)};
}

void AlgebraCollection::add(const DomainTable& dt, Algebra a) {
    signature.validate();
    Algebra checked = make_algebra(dt, signature, a.domain, a.ops, a.name);
    auto& list = members[checked.domain];
    const Tuple key = checked.table_key();
    auto pos = std::lower_bound(list.begin(), list.end(), key,
                                [](const Algebra& x, const Tuple& k) {
                                    return x.table_key() < k;
                                });
    if (pos != list.end() && pos->table_key() == key) return; // duplicate
    list.insert(pos, std::move(checked));
}

const std::vector<Algebra>& AlgebraCollection::at(DomainId id) const {
    static const std::vector<Algebra> none;
    auto it = members.find(id);
    return it == members.end() ? none : it->second;
}

const Algebra& AlgebraCollection::algebra(const AlgebraId& id) const {
    const auto& list = at(id.domain);
    if (id.pos < 0 || id.pos >= static_cast<int>(list.size()))
        throw contract_error("algebra position out of range");
    return list[id.pos];
}

int AlgebraCollection::position_of(DomainId id, const Algebra& a) const {
    const auto& list = at(id);
    const Tuple key = a.table_key();
    for (std::size_t p = 0; p < list.size(); ++p)
        if (list[p].table_key() == key) return static_cast<int>(p);
    return -1;
}

long long trace_arity(const AlgebraSignature& sig, std::size_t domain_size) {
    long long total = 0;
    for (int n : sig.arities) total += power_count(domain_size, n);
    return total;
}

TraceRelation trace(const DomainTable& dt, const AlgebraCollection& coll, DomainId i) {
    const auto& list = coll.at(i);
    if (list.empty())
        throw contract_error("trace of an empty member list for domain " +
                             std::to_string(i));
    const long long arity = trace_arity(coll.signature, dt.size(i));
    std::vector<Tuple> rows;
    for (const auto& a : list) rows.push_back(a.table_key());
    TraceRelation tr;
    tr.domain = i;
    tr.rel = Relation(std::vector<DomainId>(arity, i), std::move(rows));
    // Members are kept sorted by the very key that forms the row, so the
    // canonical row order and the member order coincide.
    for (std::size_t p = 0; p < list.size(); ++p)
        tr.row_to_position.push_back(static_cast<int>(p));
    return tr;
}

Relation rho_b(const DomainTable& dt, const Relation& rel, const AlgebraCollection& coll) {
    const int m = rel.arity();
    std::vector<const std::vector<Algebra>*> lists;
    std::vector<int> radix;
    for (DomainId id : rel.signature) {
        lists.push_back(&coll.at(id));
        radix.push_back(static_cast<int>(lists.back()->size()));
    }
    std::vector<Tuple> out;
    for (int r : radix)
        if (r == 0) return Relation(rel.signature, {});

    std::vector<int> pick(m, 0);
    do {
        bool good = true;
        for (int s = 0; s < coll.signature.symbols() && good; ++s) {
            std::vector<const OpTable*> ops;
            ops.reserve(m);
            for (int j = 0; j < m; ++j) ops.push_back(&(*lists[j])[pick[j]].ops[s]);
            good = preserves_componentwise(dt, ops, rel).ok;
        }
        if (good) out.push_back(Tuple(pick.begin(), pick.end()));
    } while (next_radix_tuple(pick, radix));
    return Relation(rel.signature, std::move(out));
}

Template gamma_b(const DomainTable& dt, const Template& tmpl, const AlgebraCollection& coll) {
    Template out;
    for (const auto& [id, list] : coll.members) {
        std::vector<Element> positions(list.size());
        for (std::size_t p = 0; p < list.size(); ++p) positions[p] = static_cast<Element>(p);
        out.domains.add_with_id(id, std::move(positions), "members:" + std::to_string(id));
    }
    // Signature domains with no members still need a (then empty) domain.
    for (const auto& rel : tmpl.relations)
        for (DomainId id : rel.signature)
            if (!out.domains.has(id))
                out.domains.add_with_id(id, {}, "members:" + std::to_string(id));
    for (std::size_t l = 0; l < tmpl.relations.size(); ++l)
        out.add_relation(rho_b(dt, tmpl.relations[l], coll),
                         tmpl.name_of(static_cast<int>(l)));
    return out;
}

Algebra outer_apply(const DomainTable& dt, const OpTable& f,
                    const std::vector<Algebra>& args) {
    if (static_cast<int>(args.size()) != f.arity)
        throw contract_error("outer lift arity mismatch");
    for (const auto& a : args)
        if (a.domain != f.domain)
            throw contract_error("outer lift arguments must share the operation domain");
    Algebra out;
    out.domain = f.domain;
    const Algebra& shape = args.front();
    for (std::size_t s = 0; s < shape.ops.size(); ++s) {
        OpTable table{f.domain, shape.ops[s].arity, {}};
        const std::size_t len = shape.ops[s].values.size();
        table.values.resize(len);
        for (std::size_t idx = 0; idx < len; ++idx) {
            Tuple column;
            column.reserve(args.size());
            for (const auto& a : args) column.push_back(a.ops[s].values[idx]);
            table.values[idx] = f.apply(dt, column);
        }
        out.ops.push_back(std::move(table));
    }
    return out;
}

OuterLiftReport lift_outer(const DomainTable& dt, const MultiSortedOp& f,
                           const AlgebraCollection& coll) {
    OuterLiftReport rep;
    rep.on_positions.arity = f.arity;
    for (const auto& [id, list] : coll.members) {
        const OpTable& local = f.at(id);
        bool closed_here = true;
        OpTable table{id, f.arity, {}};
        if (!list.empty()) {
            std::vector<int> pick(f.arity, 0);
            std::vector<int> radix(f.arity, static_cast<int>(list.size()));
            do {
                std::vector<Algebra> args;
                for (int r : pick) args.push_back(list[r]);
                Algebra combined = outer_apply(dt, local, args);
                int pos = coll.position_of(id, combined);
                if (pos < 0) {
                    closed_here = false;
                    if (rep.witness.empty())
                        rep.witness = "lift leaves the member list of domain " +
                                      std::to_string(id);
                    break;
                }
                table.values.push_back(pos);
            } while (next_radix_tuple(pick, radix));
        }
        rep.closed_by_domain[id] = closed_here;
        if (closed_here) rep.on_positions.interp[id] = std::move(table);
        else rep.closed = false;
    }
    return rep;
}

OuterLiftReport lift_outer(const DomainTable& dt, const OpTable& f,
                           const AlgebraCollection& coll) {
    MultiSortedOp ms;
    ms.arity = f.arity;
    ms.interp[f.domain] = f;
    AlgebraCollection restricted;
    restricted.signature = coll.signature;
    auto it = coll.members.find(f.domain);
    if (it != coll.members.end()) restricted.members.insert(*it);
    return lift_outer(dt, ms, restricted);
}

PreserveCheck preserves_trace(const DomainTable& dt, const OpTable& f,
                              const AlgebraCollection& coll, DomainId i) {
    return preserves(dt, f, trace(dt, coll, i).rel);
}

void FirstKindSystem::validate(const AlgebraSignature& sig) const {
    if (static_cast<int>(inner.size()) != sig.symbols())
        throw contract_error("first-kind system must cover every symbol");
    for (int a = 0; a < sig.symbols(); ++a) {
        if (static_cast<int>(inner[a].size()) != sig.arities[a])
            throw contract_error("first-kind system must cover every argument slot");
        for (const auto& f : inner[a])
            if (f.arity != sig.arities[a])
                throw contract_error("inner operation arity must equal the symbol arity");
    }
}

Algebra endo_first_apply(const DomainTable& dt, const AlgebraSignature& sig,
                         const FirstKindSystem& sys, const Algebra& a) {
    sys.validate(sig);
    Algebra out;
    out.domain = a.domain;
    for (int s = 0; s < sig.symbols(); ++s) {
        const int n = sig.arities[s];
        const OpTable& base = a.ops[s];
        out.ops.push_back(make_op(dt, a.domain, n, [&](const Tuple& args) {
            Tuple inner_vals(n, 0);
            for (int b = 0; b < n; ++b)
                inner_vals[b] = sys.inner[s][b].at(a.domain).apply(dt, args);
            return base.apply(dt, inner_vals);
        }));
    }
    return out;
}

Algebra endo_second_apply(const DomainTable& dt, const AlgebraSignature& sig,
                          int alpha, const MultiSortedOp& b, const Algebra& a) {
    sig.validate();
    if (alpha < 0 || alpha >= sig.symbols())
        throw contract_error("symbol index out of range");
    if (b.arity != sig.arities[alpha] + 1)
        throw contract_error("second-kind operation must have arity n_alpha + 1");
    Algebra out = a;
    const int n = sig.arities[alpha];
    const OpTable& base = a.ops[alpha];
    const OpTable& local = b.at(a.domain);
    out.ops[alpha] = make_op(dt, a.domain, n, [&](const Tuple& args) {
        Tuple ext;
        ext.reserve(n + 1);
        ext.push_back(base.apply(dt, args));
        ext.insert(ext.end(), args.begin(), args.end());
        return local.apply(dt, ext);
    });
    return out;
}

EndoClosure endo_closure(const DomainTable& dt, const AlgebraCollection& coll,
                         const std::function<Algebra(const Algebra&)>& endo) {
    (void)dt;
    EndoClosure out;
    for (const auto& [id, list] : coll.members) {
        std::vector<int> map;
        for (const auto& a : list) {
            Algebra image = endo(a);
            int pos = coll.position_of(id, image);
            if (pos < 0) {
                out.closed = false;
                if (out.witness.empty())
                    out.witness = "image of a member of domain " + std::to_string(id) +
                                  " leaves the collection";
            }
            map.push_back(pos);
        }
        out.position_map[id] = std::move(map);
    }
    return out;
}

DomainId register_copy(DomainTable& dt, CopyRegistry& reg,
                       const AlgebraCollection& coll, const AlgebraId& id) {
    const Algebra& a = coll.algebra(id);
    DomainId copy = dt.add(dt.elements(a.domain),
                           "copy:" + std::to_string(id.domain) + "#" +
                               std::to_string(id.pos));
    reg.copies[copy] = id;
    return copy;
}

bool minv_member(const DomainTable& dt, const Relation& rel, const CopyRegistry& reg,
                 const AlgebraCollection& coll) {
    for (DomainId id : rel.signature)
        if (!reg.copies.count(id))
            throw contract_error("relation signature names an unregistered copy domain " +
                                 std::to_string(id));
    for (int s = 0; s < coll.signature.symbols(); ++s) {
        MultiSortedOp op;
        op.arity = coll.signature.arities[s];
        for (DomainId id : rel.signature) {
            if (op.interp.count(id)) continue;
            const Algebra& src = coll.algebra(reg.copies.at(id));
            OpTable table = src.ops[s];
            table.domain = id; // same elements, reinterpreted on the copy
            op.interp[id] = std::move(table);
        }
        if (!preserves(dt, op, rel).ok) return false;
    }
    return true;
}

Assignment solution_algebra_action(const DomainTable& dt, const Template& tmpl,
                                   const AlgebraCollection& coll,
                                   const InstanceStructure& inst,
                                   const std::map<Var, AlgebraId>& chi, int symbol,
                                   const std::vector<Assignment>& args) {
    coll.signature.validate();
    if (symbol < 0 || symbol >= coll.signature.symbols())
        throw contract_error("symbol index out of range");
    const int n = coll.signature.arities[symbol];
    if (static_cast<int>(args.size()) != n)
        throw contract_error("expected one argument solution per operation slot");

    Template relaxed = gamma_b(tmpl.domains, tmpl, coll);
    Assignment chi_pos;
    for (const auto& [v, id] : chi) chi_pos[v] = id.pos;
    InstanceStructure norm = inst;
    norm.normalize();
    if (!check_homomorphism(chi_pos, norm, relaxed).ok)
        throw contract_error("chi is not a homomorphism into the relaxed template");
    for (const auto& h : args)
        if (!check_homomorphism(h, norm, tmpl).ok)
            throw contract_error("argument is not a homomorphism into the template");

    Assignment out;
    for (Var v : norm.variables) {
        const Algebra& a = coll.algebra(chi.at(v));
        Tuple column;
        column.reserve(n);
        for (const auto& h : args) column.push_back(h.at(v));
        out[v] = a.ops[symbol].apply(dt, column);
    }
    HomCheck verify = check_homomorphism(out, norm, tmpl);
    if (!verify.ok)
        throw contract_error("combined assignment failed verification: " + verify.message);
    return out;
}

} // namespace algcsp
